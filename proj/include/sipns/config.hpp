#ifndef SIPNS_CONFIG_HPP
#define SIPNS_CONFIG_HPP

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sipns/analysis.hpp"
#include "sipns/model.hpp"
#include "sipns/optimize.hpp"

namespace sipns {

inline constexpr std::string_view version = "0.1.0";

using json = nlohmann::ordered_json;

/// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

/// FNV-1a, used to fingerprint configs in output manifests.
inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

struct SweepConfig {
    std::string parameter;
    double min = 0;
    double max = 0;
    std::size_t points = 9;
    std::string spacing = "log";  // "log" | "linear"
    bool threshold = false;

    std::vector<double> make_grid() const {
        if (spacing == "log") return log_grid(min, max, points);
        if (spacing != "linear") throw domain_error("sweep.spacing must be \"log\" or \"linear\"");
        if (!(min < max) || points < 2) throw domain_error("sweep grid needs min < max, points >= 2");
        std::vector<double> g(points);
        for (std::size_t i = 0; i < points; ++i)
            g[i] = min + (max - min) * static_cast<double>(i) / (points - 1);
        g.back() = max;
        return g;
    }
};

struct OptimizeConfig {
    std::vector<std::string> controllable;
    std::vector<double> lower;
    std::vector<double> upper;
    std::size_t starts = 8;
    std::uint64_t seed = 0;
    std::uint64_t budget = 2000;
};

struct SimulateConfig {
    std::size_t samples = 500;
};

/// Everything a CLI run needs, parsed and validated up front.
struct RunConfig {
    ModelParams params;
    Scenario scenario;
    SimulateConfig simulate;
    std::optional<SweepConfig> sweep;
    std::optional<OptimizeConfig> optimize;
};

namespace detail {

inline void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed,
                           const std::string& where) {
    if (!j.is_object()) throw domain_error("config: " + where + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (auto a : allowed)
            if (it.key() == a) known = true;
        if (!known) throw domain_error("config: unknown key \"" + it.key() + "\" in " + where);
    }
}

inline void reject_unknown_names(const json& j, const std::vector<std::string>& allowed,
                                 const std::string& where) {
    if (!j.is_object()) throw domain_error("config: " + where + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const auto& a : allowed)
            if (it.key() == a) known = true;
        if (!known) throw domain_error("config: unknown key \"" + it.key() + "\" in " + where);
    }
}

inline double num(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw domain_error("config: missing \"" + key + "\" in " + where);
    if (!j[key].is_number()) throw domain_error("config: \"" + key + "\" in " + where + " must be a number");
    return j[key].get<double>();
}

inline double num_or(const json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw domain_error("config: \"" + key + "\" must be a number");
    return j[key].get<double>();
}

}  // namespace detail

inline ModelParams params_from_json(const json& j) {
    detail::reject_unknown(j, {"mu", "delta_I", "delta_P", "delta_N", "beta_P", "beta_N",
                               "alpha_P", "alpha_N", "gamma_P", "gamma_I"},
                           "params");
    ModelParams p;
    for (auto name : ModelParams::field_names)
        p.set(name, detail::num(j, std::string(name), "params"));
    p.validate();
    return p;
}

inline json params_to_json(const ModelParams& p) {
    json j = json::object();
    for (auto name : ModelParams::field_names) j[std::string(name)] = p.get(name);
    return j;
}

inline Scenario scenario_from_json(const json& j) {
    detail::reject_unknown(j, {"initial", "horizon", "rel_tol", "abs_tol", "max_steps"},
                           "scenario");
    if (!j.contains("initial")) throw domain_error("config: missing scenario.initial");
    const json& ji = j["initial"];
    detail::reject_unknown(ji, {"S", "I", "P", "N"}, "scenario.initial");
    Scenario s;
    s.initial = {detail::num(ji, "S", "scenario.initial"), detail::num(ji, "I", "scenario.initial"),
                 detail::num(ji, "P", "scenario.initial"), detail::num(ji, "N", "scenario.initial")};
    s.horizon = detail::num(j, "horizon", "scenario");
    s.rel_tol = detail::num_or(j, "rel_tol", 1e-8);
    s.abs_tol = detail::num_or(j, "abs_tol", 1e-10);
    if (j.contains("max_steps")) s.max_steps = j["max_steps"].get<std::uint64_t>();
    s.validate();
    return s;
}

inline json scenario_to_json(const Scenario& s) {
    json j = json::object();
    j["initial"] = {{"S", s.initial.S}, {"I", s.initial.I}, {"P", s.initial.P}, {"N", s.initial.N}};
    j["horizon"] = s.horizon;
    j["rel_tol"] = s.rel_tol;
    j["abs_tol"] = s.abs_tol;
    j["max_steps"] = s.max_steps;
    return j;
}

inline RunConfig config_from_json(const json& j) {
    detail::reject_unknown(j, {"params", "scenario", "simulate", "sweep", "optimize"}, "config");
    if (!j.contains("params")) throw domain_error("config: missing \"params\"");
    if (!j.contains("scenario")) throw domain_error("config: missing \"scenario\"");

    RunConfig cfg;
    cfg.params = params_from_json(j["params"]);
    cfg.scenario = scenario_from_json(j["scenario"]);

    if (j.contains("simulate")) {
        detail::reject_unknown(j["simulate"], {"samples"}, "simulate");
        if (j["simulate"].contains("samples")) {
            cfg.simulate.samples = j["simulate"]["samples"].get<std::size_t>();
            if (cfg.simulate.samples < 2) throw domain_error("config: simulate.samples must be >= 2");
        }
    }

    if (j.contains("sweep")) {
        const json& js = j["sweep"];
        detail::reject_unknown(js, {"parameter", "min", "max", "points", "spacing", "threshold"},
                               "sweep");
        SweepConfig sc;
        if (!js.contains("parameter")) throw domain_error("config: missing sweep.parameter");
        sc.parameter = js["parameter"].get<std::string>();
        cfg.params.get(sc.parameter);  // rejects unknown names
        sc.min = detail::num(js, "min", "sweep");
        sc.max = detail::num(js, "max", "sweep");
        if (js.contains("points")) sc.points = js["points"].get<std::size_t>();
        if (js.contains("spacing")) sc.spacing = js["spacing"].get<std::string>();
        if (js.contains("threshold")) sc.threshold = js["threshold"].get<bool>();
        sc.make_grid();  // validates spacing and bounds
        cfg.sweep = sc;
    }

    if (j.contains("optimize")) {
        const json& jo = j["optimize"];
        detail::reject_unknown(jo, {"controllable", "lower", "upper", "starts", "seed", "budget"},
                               "optimize");
        OptimizeConfig oc;
        if (!jo.contains("controllable")) throw domain_error("config: missing optimize.controllable");
        for (const auto& n : jo["controllable"]) oc.controllable.push_back(n.get<std::string>());
        for (const auto& name : oc.controllable) {
            if (!jo.contains("lower") || !jo["lower"].contains(name))
                throw domain_error("config: missing optimize.lower for " + name);
            if (!jo.contains("upper") || !jo["upper"].contains(name))
                throw domain_error("config: missing optimize.upper for " + name);
            oc.lower.push_back(jo["lower"][name].get<double>());
            oc.upper.push_back(jo["upper"][name].get<double>());
        }
        if (jo.contains("lower"))
            detail::reject_unknown_names(jo["lower"], oc.controllable, "optimize.lower");
        if (jo.contains("upper"))
            detail::reject_unknown_names(jo["upper"], oc.controllable, "optimize.upper");
        if (jo.contains("starts")) oc.starts = jo["starts"].get<std::size_t>();
        if (jo.contains("seed")) oc.seed = jo["seed"].get<std::uint64_t>();
        if (jo.contains("budget")) oc.budget = jo["budget"].get<std::uint64_t>();
        ControlSpec probe{cfg.params, oc.controllable, oc.lower, oc.upper};
        probe.validate();
        cfg.optimize = oc;
    }
    return cfg;
}

/// Normalized JSON form; parsing it back yields an identical RunConfig.
inline json config_to_json(const RunConfig& cfg) {
    json j = json::object();
    j["params"] = params_to_json(cfg.params);
    j["scenario"] = scenario_to_json(cfg.scenario);
    j["simulate"] = {{"samples", cfg.simulate.samples}};
    if (cfg.sweep) {
        j["sweep"] = {{"parameter", cfg.sweep->parameter}, {"min", cfg.sweep->min},
                      {"max", cfg.sweep->max},             {"points", cfg.sweep->points},
                      {"spacing", cfg.sweep->spacing},     {"threshold", cfg.sweep->threshold}};
    }
    if (cfg.optimize) {
        json lower = json::object(), upper = json::object();
        for (std::size_t i = 0; i < cfg.optimize->controllable.size(); ++i) {
            lower[cfg.optimize->controllable[i]] = cfg.optimize->lower[i];
            upper[cfg.optimize->controllable[i]] = cfg.optimize->upper[i];
        }
        j["optimize"] = {{"controllable", cfg.optimize->controllable},
                         {"lower", lower},
                         {"upper", upper},
                         {"starts", cfg.optimize->starts},
                         {"seed", cfg.optimize->seed},
                         {"budget", cfg.optimize->budget}};
    }
    return j;
}

}  // namespace sipns

#endif  // SIPNS_CONFIG_HPP

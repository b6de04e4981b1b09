#ifndef SIPNS_ANALYSIS_HPP
#define SIPNS_ANALYSIS_HPP

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sipns/model.hpp"
#include "sipns/solver.hpp"

namespace sipns {

// Relative residual below which a state counts as steady.
inline constexpr double steady_eps = 1e-8;
// Relative deadband below which successive sweep values count as equal.
inline constexpr double flatness_eps = 5e-3;

enum class Direction { increasing, decreasing, constant, non_monotone };

inline std::string_view to_string(Direction d) {
    switch (d) {
        case Direction::increasing: return "increasing";
        case Direction::decreasing: return "decreasing";
        case Direction::constant: return "constant";
        case Direction::non_monotone: return "non-monotone";
    }
    return "?";
}

struct SteadyStateResult {
    MarketState state;
    bool converged = false;
    double time_to_converge = 0;
    double residual = 0;  // sup norm of vector_field at the reported state
};

inline double residual_norm(const ModelParams& p, const MarketState& x) {
    Derivative d = vector_field(p, x);
    return std::max({std::abs(d.dS), std::abs(d.dI), std::abs(d.dP), std::abs(d.dN)});
}

/** Integrates in windows of 50 time units until the vector field at the
 * current state drops below steady_eps (relative to the state magnitude), or
 * until a horizon cap of 1e4 time units. A capped run is reported with
 * converged = false, not thrown. */
inline SteadyStateResult steady_state(const ModelParams& params, const Scenario& scenario) {
    params.validate();
    scenario.validate();
    constexpr double window = 50.0;
    constexpr double horizon_cap = 1e4;

    SteadyStateResult res;
    res.state = scenario.initial;
    double elapsed = 0;

    auto state_scale = [](const MarketState& x) {
        return std::max({1.0, std::abs(x.S), std::abs(x.I), std::abs(x.P), std::abs(x.N)});
    };

    res.residual = residual_norm(params, res.state);
    while (res.residual >= steady_eps * state_scale(res.state)) {
        if (elapsed >= horizon_cap) return res;  // converged stays false
        Scenario win = scenario;
        win.initial = res.state;
        win.horizon = window;
        res.state = integrate(params, win).final_state();
        elapsed += window;
        res.residual = residual_norm(params, res.state);
    }
    res.converged = true;
    res.time_to_converge = elapsed;
    return res;
}

struct ThresholdResult {
    bool found = false;         // interior maximum located
    bool inconclusive = false;  // some grid points failed to reach steady state
    double theta = 0;
    // Coarse-grid triple that brackets the maximum, and the refined
    // golden-section bracket around theta.
    double bracket_lo = 0, bracket_hi = 0;
    double refined_lo = 0, refined_hi = 0;
    std::vector<std::size_t> unconverged_points;
};

/** One-parameter study: steady state and campaign profit at every grid point,
 * plus a monotone-direction verdict per output. */
struct SweepReport {
    std::string parameter;
    std::vector<double> grid;
    std::vector<SteadyStateResult> steady;
    std::vector<double> profits;
    Direction verdict_S = Direction::constant;
    Direction verdict_I = Direction::constant;
    Direction verdict_P = Direction::constant;
    Direction verdict_N = Direction::constant;
    Direction verdict_profit = Direction::constant;
    std::optional<ThresholdResult> threshold;

    bool all_converged() const {
        for (const auto& s : steady)
            if (!s.converged) return false;
        return true;
    }
};

namespace detail {

inline double relative_diff(double a, double b) {
    double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return (b - a) / scale;
}

inline Direction classify(const std::vector<double>& v) {
    bool has_up = false, has_down = false;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        double r = relative_diff(v[i], v[i + 1]);
        if (r > flatness_eps) has_up = true;
        else if (r < -flatness_eps) has_down = true;
    }
    if (has_up && has_down) return Direction::non_monotone;
    if (has_up) return Direction::increasing;
    if (has_down) return Direction::decreasing;
    return Direction::constant;
}

}  // namespace detail

inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    if (!(lo > 0) || !(hi > lo) || n < 2) throw domain_error("log_grid needs 0 < lo < hi, n >= 2");
    std::vector<double> g(n);
    double llo = std::log(lo), lhi = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) / (n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

inline SweepReport sweep(const ModelParams& base, std::string_view parameter,
                         std::span<const double> grid, const Scenario& scenario) {
    scenario.validate();
    SweepReport rep;
    rep.parameter = std::string(parameter);
    rep.grid.assign(grid.begin(), grid.end());

    // Reject the whole request before any integration runs.
    for (std::size_t i = 0; i < rep.grid.size(); ++i) {
        if (i > 0 && !(rep.grid[i] > rep.grid[i - 1]))
            throw domain_error("sweep grid must be strictly increasing");
        base.with(parameter, rep.grid[i]).validate();
    }

    for (double v : rep.grid) {
        ModelParams p = base.with(parameter, v);
        rep.steady.push_back(steady_state(p, scenario));
        rep.profits.push_back(profit(p, scenario));
    }

    std::vector<double> s, i_, pp, n;
    for (const auto& r : rep.steady) {
        s.push_back(r.state.S);
        i_.push_back(r.state.I);
        pp.push_back(r.state.P);
        n.push_back(r.state.N);
    }
    rep.verdict_S = detail::classify(s);
    rep.verdict_I = detail::classify(i_);
    rep.verdict_P = detail::classify(pp);
    rep.verdict_N = detail::classify(n);
    rep.verdict_profit = detail::classify(rep.profits);
    return rep;
}

/// Expected monotone direction per sweep output; absent entries are skipped.
struct ExpectedDirections {
    std::optional<Direction> S, I, P, N, profit;
};

struct CheckOutcome {
    enum class Status { pass, fail, inconclusive };
    std::string output;  // "S", "I", "P", "N", "profit"
    Status status = Status::pass;
    // On failure: earliest adjacent grid pair violating the direction.
    std::size_t violating_lo = 0, violating_hi = 0;
};

inline std::vector<CheckOutcome> monotonicity_check(const SweepReport& rep,
                                                    const ExpectedDirections& expected) {
    std::vector<CheckOutcome> out;
    auto series = [&](const std::string& name) {
        std::vector<double> v;
        for (std::size_t i = 0; i < rep.grid.size(); ++i) {
            if (name == "S") v.push_back(rep.steady[i].state.S);
            else if (name == "I") v.push_back(rep.steady[i].state.I);
            else if (name == "P") v.push_back(rep.steady[i].state.P);
            else if (name == "N") v.push_back(rep.steady[i].state.N);
            else v.push_back(rep.profits[i]);
        }
        return v;
    };
    auto check_one = [&](const std::string& name, Direction want) {
        CheckOutcome c;
        c.output = name;
        if (!rep.all_converged()) {
            c.status = CheckOutcome::Status::inconclusive;
            out.push_back(c);
            return;
        }
        std::vector<double> v = series(name);
        for (std::size_t i = 0; i + 1 < v.size(); ++i) {
            double r = detail::relative_diff(v[i], v[i + 1]);
            bool violated = false;
            switch (want) {
                case Direction::increasing: violated = r < -flatness_eps; break;
                case Direction::decreasing: violated = r > flatness_eps; break;
                case Direction::constant: violated = std::abs(r) > flatness_eps; break;
                case Direction::non_monotone: violated = false; break;
            }
            if (violated) {
                c.status = CheckOutcome::Status::fail;
                c.violating_lo = i;
                c.violating_hi = i + 1;
                break;
            }
        }
        out.push_back(c);
    };
    if (expected.S) check_one("S", *expected.S);
    if (expected.I) check_one("I", *expected.I);
    if (expected.P) check_one("P", *expected.P);
    if (expected.N) check_one("N", *expected.N);
    if (expected.profit) check_one("profit", *expected.profit);
    return out;
}

namespace detail {

// Golden-section refinement of a maximum bracketed by (lo, hi); assumes the
// objective is unimodal on the bracket.
inline void golden_section_max(const std::function<double(double)>& f, double& lo, double& hi,
                               double tol) {
    constexpr double inv_phi = 0.6180339887498949;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = f(c), fd = f(d);
    while (hi - lo > tol) {
        if (fc > fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
}

}  // namespace detail

/** Locates the profit threshold in an objective over [lo, hi]: a coarse
 * log-spaced grid finds an interior maximum if one exists, then
 * golden-section search tightens the bracket to 1e-4 of the bound width.
 * A monotone profile yields found = false, which is a valid answer. */
inline ThresholdResult threshold_search_objective(const std::function<double(double)>& objective,
                                                  double lo, double hi,
                                                  std::size_t coarse_points = 33) {
    if (!(lo > 0) || !(hi > lo)) throw domain_error("threshold bounds must satisfy 0 < lo < hi");
    if (coarse_points < 33) coarse_points = 33;
    std::vector<double> g = log_grid(lo, hi, coarse_points);
    std::vector<double> vals;
    vals.reserve(g.size());
    for (double x : g) vals.push_back(objective(x));

    std::size_t best = 0;
    for (std::size_t i = 1; i < g.size(); ++i)
        if (vals[i] > vals[best]) best = i;

    ThresholdResult res;
    if (best == 0 || best + 1 == g.size()) return res;  // boundary maximum

    res.found = true;
    res.bracket_lo = g[best - 1];
    res.bracket_hi = g[best + 1];
    double a = res.bracket_lo, b = res.bracket_hi;
    detail::golden_section_max(objective, a, b, 1e-4 * (hi - lo));
    res.refined_lo = a;
    res.refined_hi = b;
    res.theta = 0.5 * (a + b);
    return res;
}

/// Threshold in the P-viscosity rate for the given market configuration.
inline ThresholdResult threshold_search(const ModelParams& base, const Scenario& scenario,
                                        double gamma_P_lo, double gamma_P_hi,
                                        std::size_t coarse_points = 33) {
    base.with("gamma_P", gamma_P_lo).validate();
    base.with("gamma_P", gamma_P_hi).validate();
    scenario.validate();

    auto objective = [&](double g) { return profit(base.with("gamma_P", g), scenario); };
    ThresholdResult res =
        threshold_search_objective(objective, gamma_P_lo, gamma_P_hi, coarse_points);

    // Flag coarse-grid points whose dynamics never settle within the cap.
    std::vector<double> g = log_grid(gamma_P_lo, gamma_P_hi, std::max<std::size_t>(coarse_points, 33));
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!steady_state(base.with("gamma_P", g[i]), scenario).converged) {
            res.inconclusive = true;
            res.unconverged_points.push_back(i);
        }
    }
    return res;
}

}  // namespace sipns

#endif  // SIPNS_ANALYSIS_HPP

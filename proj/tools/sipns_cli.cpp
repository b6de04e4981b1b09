// Command-line front end for the SIPNS market simulator: loads a JSON config,
// runs one subcommand, and writes CSV/JSON results under an output directory.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "sipns/analysis.hpp"
#include "sipns/config.hpp"
#include "sipns/model.hpp"
#include "sipns/optimize.hpp"
#include "sipns/solver.hpp"

namespace fs = std::filesystem;
using sipns::json;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::string label;
    std::optional<std::uint64_t> seed;
    bool dump_config = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "Path to the JSON run config")->required();
    cmd->add_option("--out", opts.out_dir, "Output directory root");
    cmd->add_option("--seed", opts.seed, "Override the optimizer seed");
    cmd->add_option("--label", opts.label, "Run label (defaults to a timestamp)");
    cmd->add_flag("--dump-config", opts.dump_config,
                  "Print the normalized config to stdout and exit");
}

std::string timestamp() {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    localtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
    return buf;
}

struct RunContext {
    sipns::RunConfig cfg;
    std::string raw_config;
    fs::path dir;
};

// Loads + validates the config and prepares the run directory with a manifest.
RunContext prepare(const CommonOpts& opts, const std::string& command) {
    std::ifstream in(opts.config_path);
    if (!in) throw sipns::domain_error("cannot open config file: " + opts.config_path);
    std::stringstream buf;
    buf << in.rdbuf();

    RunContext ctx;
    ctx.raw_config = buf.str();
    ctx.cfg = sipns::config_from_json(json::parse(ctx.raw_config));
    if (opts.seed && ctx.cfg.optimize) ctx.cfg.optimize->seed = *opts.seed;

    std::string label = opts.label.empty() ? timestamp() : opts.label;
    ctx.dir = fs::path(opts.out_dir) / (command + "-" + label);
    fs::create_directories(ctx.dir);

    char hash[24];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(sipns::fnv1a(ctx.raw_config)));
    json manifest = {{"command", command},
                     {"label", label},
                     {"config_fnv1a", hash},
                     {"version", std::string(sipns::version)}};
    std::ofstream(ctx.dir / "manifest.json") << manifest.dump(2) << "\n";
    return ctx;
}

json state_json(const sipns::MarketState& x) {
    return {{"S", x.S}, {"I", x.I}, {"P", x.P}, {"N", x.N}};
}

int run_simulate(const CommonOpts& opts) {
    RunContext ctx = prepare(opts, "simulate");
    const auto& cfg = ctx.cfg;

    std::vector<double> grid(cfg.simulate.samples);
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = cfg.scenario.horizon * static_cast<double>(i) / (grid.size() - 1);
    grid.back() = cfg.scenario.horizon;

    sipns::Trajectory traj = sipns::integrate(cfg.params, cfg.scenario, grid);

    std::ofstream csv(ctx.dir / "trajectory.csv");
    csv << "t,S,I,P,N,J\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const auto& x = traj.states[i];
        csv << sipns::format_double(traj.times[i]) << ',' << sipns::format_double(x.S) << ','
            << sipns::format_double(x.I) << ',' << sipns::format_double(x.P) << ','
            << sipns::format_double(x.N) << ',' << sipns::format_double(traj.profit_running[i])
            << '\n';
    }

    const auto& fin = traj.final_state();
    std::cout << "final state: S=" << sipns::format_double(fin.S)
              << " I=" << sipns::format_double(fin.I) << " P=" << sipns::format_double(fin.P)
              << " N=" << sipns::format_double(fin.N) << "\n"
              << "profit: " << sipns::format_double(traj.final_profit()) << "\n";
    return 0;
}

int run_equilibrium(const CommonOpts& opts) {
    RunContext ctx = prepare(opts, "equilibrium");
    sipns::MarketState eq = sipns::equilibrium(ctx.cfg.params);
    double residual = sipns::residual_norm(ctx.cfg.params, eq);
    json out = state_json(eq);
    out["residual"] = residual;
    std::ofstream(ctx.dir / "equilibrium.json") << out.dump(2) << "\n";
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_profit(const CommonOpts& opts) {
    RunContext ctx = prepare(opts, "profit");
    double j = sipns::profit(ctx.cfg.params, ctx.cfg.scenario);
    json out = {{"profit", j}};
    std::ofstream(ctx.dir / "profit.json") << out.dump(2) << "\n";
    std::cout << "profit: " << sipns::format_double(j) << "\n";
    return 0;
}

int run_sweep(const CommonOpts& opts) {
    RunContext ctx = prepare(opts, "sweep");
    const auto& cfg = ctx.cfg;
    if (!cfg.sweep) throw sipns::domain_error("config: sweep command needs a \"sweep\" block");

    std::vector<double> grid = cfg.sweep->make_grid();
    sipns::SweepReport rep = sipns::sweep(cfg.params, cfg.sweep->parameter, grid, cfg.scenario);
    if (cfg.sweep->threshold) {
        auto objective = [&](double v) {
            return sipns::profit(cfg.params.with(cfg.sweep->parameter, v), cfg.scenario);
        };
        rep.threshold = sipns::threshold_search_objective(objective, cfg.sweep->min,
                                                          cfg.sweep->max);
    }

    std::ofstream csv(ctx.dir / "sweep.csv");
    csv << "value,S,I,P,N,J,converged\n";
    for (std::size_t i = 0; i < rep.grid.size(); ++i) {
        const auto& st = rep.steady[i];
        csv << sipns::format_double(rep.grid[i]) << ',' << sipns::format_double(st.state.S) << ','
            << sipns::format_double(st.state.I) << ',' << sipns::format_double(st.state.P) << ','
            << sipns::format_double(st.state.N) << ',' << sipns::format_double(rep.profits[i])
            << ',' << (st.converged ? 1 : 0) << '\n';
    }

    json verdicts = {{"parameter", rep.parameter},
                     {"S", std::string(sipns::to_string(rep.verdict_S))},
                     {"I", std::string(sipns::to_string(rep.verdict_I))},
                     {"P", std::string(sipns::to_string(rep.verdict_P))},
                     {"N", std::string(sipns::to_string(rep.verdict_N))},
                     {"profit", std::string(sipns::to_string(rep.verdict_profit))}};
    if (rep.threshold) {
        const auto& th = *rep.threshold;
        if (th.found)
            verdicts["threshold"] = {{"theta", th.theta},
                                     {"bracket", {th.bracket_lo, th.bracket_hi}},
                                     {"refined_bracket", {th.refined_lo, th.refined_hi}}};
        else
            verdicts["threshold"] = "no interior threshold in bounds";
    }
    std::ofstream(ctx.dir / "verdicts.json") << verdicts.dump(2) << "\n";
    std::cout << verdicts.dump(2) << "\n";
    return 0;
}

int run_sensitivity(const CommonOpts& opts) {
    RunContext ctx = prepare(opts, "sensitivity");
    auto grad = sipns::sensitivity(ctx.cfg.params, ctx.cfg.scenario);
    json out = json::object();
    for (const auto& e : grad)
        out[e.parameter] = {{"value", e.value}, {"one_sided", e.one_sided}};
    std::ofstream(ctx.dir / "gradient.json") << out.dump(2) << "\n";
    std::cout << out.dump(2) << "\n";
    return 0;
}

json optim_result_json(const sipns::OptimResult& res) {
    json traces = json::array();
    for (const auto& t : res.traces)
        traces.push_back({{"start_point", t.start_point},
                          {"best_point", t.best_point},
                          {"best_profit", t.best_profit},
                          {"evaluations", t.evaluations},
                          {"converged", t.converged}});
    return {{"best_params", sipns::params_to_json(res.best_params)},
            {"best_point", res.best_point},
            {"best_profit", res.best_profit},
            {"evaluations", res.evaluations},
            {"converged", res.converged},
            {"traces", traces}};
}

int run_optimize(const CommonOpts& opts) {
    RunContext ctx = prepare(opts, "optimize");
    const auto& cfg = ctx.cfg;
    if (!cfg.optimize) throw sipns::domain_error("config: optimize command needs an \"optimize\" block");

    sipns::ControlSpec spec{cfg.params, cfg.optimize->controllable, cfg.optimize->lower,
                            cfg.optimize->upper};
    sipns::OptimResult res = sipns::maximize_profit(spec, cfg.scenario, cfg.optimize->starts,
                                                    cfg.optimize->seed, cfg.optimize->budget);
    json out = optim_result_json(res);
    std::ofstream(ctx.dir / "result.json") << out.dump(2) << "\n";
    std::cout << "best profit: " << sipns::format_double(res.best_profit) << "\n";
    return 0;
}

int dump_config(const CommonOpts& opts) {
    std::ifstream in(opts.config_path);
    if (!in) throw sipns::domain_error("cannot open config file: " + opts.config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    sipns::RunConfig cfg = sipns::config_from_json(json::parse(buf.str()));
    if (opts.seed && cfg.optimize) cfg.optimize->seed = *opts.seed;
    std::cout << sipns::config_to_json(cfg).dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SIPNS word-of-mouth market simulator"};
    app.require_subcommand(1);

    const std::vector<std::string> commands = {"simulate", "equilibrium", "sweep",
                                               "profit",   "optimize",    "sensitivity"};
    std::map<std::string, CommonOpts> opts;
    for (const auto& name : commands) {
        auto* cmd = app.add_subcommand(name);
        add_common(cmd, opts[name]);
    }

    CLI11_PARSE(app, argc, argv);

    const std::string name = app.get_subcommands().front()->get_name();
    const CommonOpts& o = opts[name];
    try {
        if (o.dump_config) return dump_config(o);
        if (name == "simulate") return run_simulate(o);
        if (name == "equilibrium") return run_equilibrium(o);
        if (name == "profit") return run_profit(o);
        if (name == "sweep") return run_sweep(o);
        if (name == "sensitivity") return run_sensitivity(o);
        if (name == "optimize") return run_optimize(o);
    } catch (const sipns::non_convergence_error& e) {
        std::cerr << "error: integration failed: " << e.what() << "\n";
        return 2;
    } catch (const sipns::negativity_error& e) {
        std::cerr << "error: integration failed: " << e.what() << "\n";
        return 2;
    } catch (const sipns::evaluation_error& e) {
        std::cerr << "error: evaluation failed: " << e.what() << "\n";
        return 2;
    } catch (const sipns::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "error: config parse: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

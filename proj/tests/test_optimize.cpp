#include <catch2/catch_amalgamated.hpp>

#include "sipns/analysis.hpp"
#include "sipns/optimize.hpp"
#include "test_util.hpp"

using namespace sipns;
using test_util::example_params;

TEST_CASE("profit gradient signs at the example configuration") {
    auto grad = sensitivity(example_params(), test_util::default_scenario());
    REQUIRE(grad.size() == 10);
    auto entry = [&](std::string_view name) {
        for (const auto& e : grad)
            if (e.parameter == name) return e;
        FAIL("missing gradient entry");
        return grad[0];
    };
    CHECK(entry("mu").value > 0.0);
    CHECK(entry("beta_N").value < 0.0);
    CHECK(entry("beta_P").value > 0.0);
    CHECK(entry("alpha_N").value < 0.0);
    for (const auto& e : grad) CHECK(!e.one_sided);
}

TEST_CASE("gradient matches a five-point slope fit") {
    ModelParams p = example_params();
    Scenario sc = test_util::default_scenario();
    Scenario tight = sc;
    tight.rel_tol /= 100.0;
    tight.abs_tol /= 100.0;
    auto grad = sensitivity(p, sc);

    for (std::string_view name : {"mu", "beta_N"}) {
        double v = p.get(name);
        double h = 1e-5 * v;
        // Least-squares slope through 5 profit samples along this axis.
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int k = -2; k <= 2; ++k) {
            double x = k * h;
            double y = profit(p.with(name, v + x), tight);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        double slope = (5 * sxy - sx * sy) / (5 * sxx - sx * sx);
        double got = 0;
        for (const auto& e : grad)
            if (e.parameter == name) got = e.value;
        CHECK(test_util::rel_err(got, slope) < 1e-3);
    }
}

TEST_CASE("parameter at the domain boundary gets a flagged one-sided difference") {
    ModelParams p = example_params();
    p.mu = 0.0;
    auto grad = sensitivity(p, test_util::default_scenario());
    for (const auto& e : grad)
        if (e.parameter == "mu") CHECK(e.one_sided);
}

namespace {

ControlSpec one_dim_spec(std::string_view name, double lo, double hi) {
    ControlSpec spec;
    spec.fixed = example_params();
    spec.controllable = {std::string(name)};
    spec.lower = {lo};
    spec.upper = {hi};
    return spec;
}

}  // namespace

TEST_CASE("monotone 1-D profit lands on the upper bound") {
    ControlSpec spec = one_dim_spec("beta_P", 0.005, 0.05);
    OptimResult res = maximize_profit(spec, test_util::default_scenario(), 4, 1);
    REQUIRE(res.best_point.size() == 1);
    CHECK(std::abs(res.best_point[0] - 0.05) <= 1e-6 * (0.05 - 0.005));
}

TEST_CASE("optimizer is never worse than a 9-point grid scan") {
    Scenario sc = test_util::default_scenario();
    for (auto [name, lo, hi] :
         {std::tuple{"gamma_P", 1e-3, 1.0}, std::tuple{"delta_P", 0.01, 0.5}}) {
        ControlSpec spec = one_dim_spec(name, lo, hi);
        OptimResult res = maximize_profit(spec, sc, 4, 7);
        double grid_best = -1e300;
        for (int i = 0; i < 9; ++i) {
            double v = lo + (hi - lo) * i / 8.0;
            grid_best = std::max(grid_best, profit(spec.fixed.with(name, v), sc));
        }
        CHECK(res.best_profit >= grid_best - 1e-9 * std::abs(grid_best));
    }
}

TEST_CASE("threshold configuration is recovered by the optimizer") {
    Scenario sc = test_util::default_scenario();
    ControlSpec spec = one_dim_spec("gamma_P", 1e-3, 1.0);
    OptimResult res = maximize_profit(spec, sc, 4, 3);
    ThresholdResult th = threshold_search(example_params(), sc, 1e-3, 1.0);
    REQUIRE(th.found);
    CHECK(res.best_point[0] >= th.bracket_lo);
    CHECK(res.best_point[0] <= th.bracket_hi);
}

TEST_CASE("jointly monotone 2-D profit lands on the upper-right corner") {
    ControlSpec spec;
    spec.fixed = example_params();
    spec.controllable = {"mu", "beta_P"};
    spec.lower = {0.5, 0.005};
    spec.upper = {2.0, 0.02};
    Scenario sc = test_util::default_scenario();
    OptimResult res = maximize_profit(spec, sc, 4, 5);

    CHECK(std::abs(res.best_point[0] - 2.0) <= 1e-5 * 1.5);
    CHECK(std::abs(res.best_point[1] - 0.02) <= 1e-5 * 0.015);

    // Corner oracle: nothing on a 17x17 grid beats the reported optimum.
    double grid_best = -1e300;
    for (int i = 0; i < 17; ++i)
        for (int j = 0; j < 17; ++j) {
            ModelParams p = spec.fixed;
            p.mu = 0.5 + 1.5 * i / 16.0;
            p.beta_P = 0.005 + 0.015 * j / 16.0;
            grid_best = std::max(grid_best, profit(p, sc));
        }
    CHECK(res.best_profit >= grid_best - 1e-9 * grid_best);
}

TEST_CASE("every evaluated optimum is feasible") {
    ControlSpec spec = one_dim_spec("gamma_P", 1e-3, 1.0);
    OptimResult res = maximize_profit(spec, test_util::default_scenario(), 4, 11);
    for (const auto& t : res.traces) {
        CHECK(t.best_point[0] >= 1e-3);
        CHECK(t.best_point[0] <= 1.0);
        CHECK(t.best_profit <= res.best_profit);
        CHECK(t.evaluations > 0);
    }
    CHECK(res.best_profit >= res.traces.front().best_profit);
}

TEST_CASE("identical seeds give identical results") {
    ControlSpec spec = one_dim_spec("beta_P", 0.005, 0.05);
    Scenario sc = test_util::default_scenario();
    OptimResult a = maximize_profit(spec, sc, 4, 42);
    OptimResult b = maximize_profit(spec, sc, 4, 42);
    CHECK(a.best_profit == b.best_profit);
    CHECK(a.best_point == b.best_point);
    CHECK(a.evaluations == b.evaluations);
    REQUIRE(a.traces.size() == b.traces.size());
    for (std::size_t i = 0; i < a.traces.size(); ++i) {
        CHECK(a.traces[i].start_point == b.traces[i].start_point);
        CHECK(a.traces[i].best_profit == b.traces[i].best_profit);
    }
}

TEST_CASE("degenerate control spec is rejected") {
    ControlSpec spec;
    spec.fixed = example_params();
    CHECK_THROWS_AS(maximize_profit(spec, test_util::default_scenario()), domain_error);

    spec.controllable = {"beta_P"};
    spec.lower = {0.05};
    spec.upper = {0.01};  // inverted
    CHECK_THROWS_AS(spec.validate(), domain_error);
}

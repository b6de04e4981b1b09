#include <catch2/catch_amalgamated.hpp>

#include "sipns/analysis.hpp"
#include "test_util.hpp"

using namespace sipns;
using test_util::example_params;

TEST_CASE("steady_state at the equilibrium converges immediately") {
    ModelParams p = example_params();
    Scenario sc = test_util::default_scenario();
    sc.initial = equilibrium(p);
    SteadyStateResult r = steady_state(p, sc);
    CHECK(r.converged);
    CHECK(r.time_to_converge == 0.0);
    CHECK(r.residual < 1e-10);
}

TEST_CASE("steady_state finds the closed-form equilibrium") {
    ModelParams p = example_params();
    SteadyStateResult r = steady_state(p, test_util::default_scenario());
    MarketState eq = equilibrium(p);
    REQUIRE(r.converged);
    CHECK(test_util::rel_err(r.state.S, eq.S) < 1e-3);
    CHECK(test_util::rel_err(r.state.I, eq.I) < 1e-3);
    CHECK(test_util::rel_err(r.state.P, eq.P) < 1e-3);
    CHECK(test_util::rel_err(r.state.N, eq.N) < 1e-3);
}

TEST_CASE("closed market with no inflow is already steady") {
    ModelParams p = example_params();
    p.mu = 0.0;
    Scenario sc;
    sc.initial = {10.0, 0.0, 0.0, 0.0};
    sc.horizon = 100.0;
    SteadyStateResult r = steady_state(p, sc);
    CHECK(r.converged);
    CHECK(r.state.S == 10.0);
    CHECK(r.state.I == 0.0);
    CHECK(r.state.P == 0.0);
    CHECK(r.state.N == 0.0);
}

TEST_CASE("entrance-rate sweep: steady S constant, downstream pools grow") {
    ModelParams base = example_params();
    auto grid = log_grid(base.mu / std::sqrt(10.0), base.mu * std::sqrt(10.0), 9);
    SweepReport rep = sweep(base, "mu", grid, test_util::default_scenario());
    REQUIRE(rep.all_converged());
    CHECK(rep.verdict_S == Direction::constant);
    CHECK(rep.verdict_I == Direction::increasing);
    CHECK(rep.verdict_P == Direction::increasing);
    CHECK(rep.verdict_N == Direction::increasing);
    CHECK(rep.verdict_profit == Direction::increasing);
}

TEST_CASE("I-exit-rate sweep: steady S rises, downstream pools shrink") {
    ModelParams base = example_params();
    auto grid = log_grid(base.delta_I / std::sqrt(10.0), base.delta_I * std::sqrt(10.0), 9);
    SweepReport rep = sweep(base, "delta_I", grid, test_util::default_scenario());
    REQUIRE(rep.all_converged());
    CHECK(rep.verdict_S == Direction::increasing);
    CHECK(rep.verdict_I == Direction::decreasing);
    CHECK(rep.verdict_P == Direction::decreasing);
    CHECK(rep.verdict_N == Direction::decreasing);
}

TEST_CASE("P-comment-rate sweep: profit rises") {
    ModelParams base = example_params();
    auto grid = log_grid(base.alpha_P / 10.0, base.alpha_P, 9);
    SweepReport rep = sweep(base, "alpha_P", grid, test_util::default_scenario());
    REQUIRE(rep.all_converged());
    CHECK(rep.verdict_profit == Direction::increasing);
}

TEST_CASE("sweep steady states satisfy the closed-form oracle") {
    ModelParams base = example_params();
    auto grid = log_grid(base.beta_P / std::sqrt(10.0), base.beta_P * std::sqrt(10.0), 9);
    SweepReport rep = sweep(base, "beta_P", grid, test_util::default_scenario());
    for (std::size_t i = 0; i < rep.grid.size(); ++i) {
        REQUIRE(rep.steady[i].converged);
        MarketState eq = equilibrium(base.with("beta_P", rep.grid[i]));
        CHECK(test_util::rel_err(rep.steady[i].state.S, eq.S) < 5e-3);
        CHECK(test_util::rel_err(rep.steady[i].state.I, eq.I) < 5e-3);
        CHECK(test_util::rel_err(rep.steady[i].state.P, eq.P) < 5e-3);
        CHECK(test_util::rel_err(rep.steady[i].state.N, eq.N) < 5e-3);
    }
}

TEST_CASE("invalid grid points are rejected before any computation") {
    ModelParams base = example_params();
    std::vector<double> grid{-0.1, 0.1};
    CHECK_THROWS_AS(sweep(base, "beta_P", grid, test_util::default_scenario()), domain_error);
    std::vector<double> unsorted{0.2, 0.1};
    CHECK_THROWS_AS(sweep(base, "beta_P", unsorted, test_util::default_scenario()), domain_error);
}

TEST_CASE("monotonicity_check passes the documented directions") {
    ModelParams base = example_params();
    Scenario sc = test_util::default_scenario();

    SECTION("steady S does not depend on the N-exit rate") {
        auto grid = log_grid(base.delta_N / std::sqrt(10.0), base.delta_N * std::sqrt(10.0), 9);
        SweepReport rep = sweep(base, "delta_N", grid, sc);
        ExpectedDirections want;
        want.S = Direction::constant;
        auto out = monotonicity_check(rep, want);
        REQUIRE(out.size() == 1);
        CHECK(out[0].status == CheckOutcome::Status::pass);
    }
    SECTION("profit falls with the N-infection force") {
        auto grid = log_grid(base.beta_N / std::sqrt(10.0), base.beta_N * std::sqrt(10.0), 9);
        SweepReport rep = sweep(base, "beta_N", grid, sc);
        ExpectedDirections want;
        want.profit = Direction::decreasing;
        auto out = monotonicity_check(rep, want);
        REQUIRE(out.size() == 1);
        CHECK(out[0].status == CheckOutcome::Status::pass);
    }
}

TEST_CASE("monotonicity_check pinpoints the first violating interval") {
    SweepReport rep;
    rep.parameter = "mu";
    rep.grid = {1.0, 2.0, 3.0};
    rep.profits = {1.0, 2.0, 1.5};
    for (int i = 0; i < 3; ++i) {
        SteadyStateResult s;
        s.converged = true;
        rep.steady.push_back(s);
    }
    ExpectedDirections want;
    want.profit = Direction::increasing;
    auto out = monotonicity_check(rep, want);
    REQUIRE(out.size() == 1);
    CHECK(out[0].status == CheckOutcome::Status::fail);
    CHECK(out[0].violating_lo == 1);
    CHECK(out[0].violating_hi == 2);
}

TEST_CASE("monotonicity_check is inconclusive without convergence") {
    SweepReport rep;
    rep.parameter = "mu";
    rep.grid = {1.0, 2.0};
    rep.profits = {1.0, 2.0};
    rep.steady.resize(2);  // converged defaults to false
    ExpectedDirections want;
    want.profit = Direction::increasing;
    auto out = monotonicity_check(rep, want);
    CHECK(out[0].status == CheckOutcome::Status::inconclusive);
}

TEST_CASE("threshold search on a symmetric synthetic objective") {
    auto f = [](double x) { return -(x - 0.5) * (x - 0.5); };
    ThresholdResult r = threshold_search_objective(f, 0.1, 0.9);
    REQUIRE(r.found);
    double tol = (r.refined_hi - r.refined_lo) + 1e-12;
    CHECK(std::abs(r.theta - 0.5) <= tol);
    CHECK(r.refined_hi - r.refined_lo < 1e-4 * 0.8 + 1e-12);
    CHECK(r.bracket_lo <= 0.5);
    CHECK(r.bracket_hi >= 0.5);
}

TEST_CASE("monotone objective reports no interior threshold") {
    auto f = [](double x) { return -x; };  // maximum at the lower bound
    ThresholdResult r = threshold_search_objective(f, 0.1, 0.9);
    CHECK(!r.found);
}

TEST_CASE("threshold value beats both bracket endpoints on a unimodal objective") {
    auto f = [](double x) { return -(std::log(x) + 2.0) * (std::log(x) + 2.0); };  // peak at e^-2
    ThresholdResult r = threshold_search_objective(f, 1e-3, 1.0);
    REQUIRE(r.found);
    CHECK(f(r.theta) >= f(r.bracket_lo));
    CHECK(f(r.theta) >= f(r.bracket_hi));
}

TEST_CASE("grid refinement does not flip a passing verdict") {
    ModelParams base = example_params();
    Scenario sc = test_util::default_scenario();
    ExpectedDirections want;
    want.S = Direction::increasing;
    want.I = Direction::decreasing;
    want.P = Direction::decreasing;
    want.N = Direction::decreasing;
    for (std::size_t n : {9u, 17u}) {
        auto grid = log_grid(base.gamma_I / std::sqrt(10.0), base.gamma_I * std::sqrt(10.0), n);
        SweepReport rep = sweep(base, "gamma_I", grid, sc);
        for (const auto& c : monotonicity_check(rep, want))
            CHECK(c.status == CheckOutcome::Status::pass);
    }
}

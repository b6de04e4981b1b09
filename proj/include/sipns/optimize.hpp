#ifndef SIPNS_OPTIMIZE_HPP
#define SIPNS_OPTIMIZE_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <random>
#include <string>
#include <vector>

#include "sipns/model.hpp"
#include "sipns/solver.hpp"

namespace sipns {

/** Which parameters a marketer may tune, and within what box. The remaining
 * parameters stay at their values in `fixed`. */
struct ControlSpec {
    ModelParams fixed;
    std::vector<std::string> controllable;
    std::vector<double> lower;
    std::vector<double> upper;

    void validate() const {
        fixed.validate();
        if (controllable.empty()) throw domain_error("ControlSpec has no controllable parameters");
        if (lower.size() != controllable.size() || upper.size() != controllable.size())
            throw domain_error("ControlSpec bounds must match controllable names");
        for (std::size_t i = 0; i < controllable.size(); ++i) {
            if (!(lower[i] < upper[i]))
                throw domain_error("ControlSpec requires lower < upper for " + controllable[i]);
            // Both box corners must be admissible parameter vectors.
            fixed.with(controllable[i], lower[i]).validate();
            fixed.with(controllable[i], upper[i]).validate();
        }
    }

    ModelParams materialize(std::span<const double> point) const {
        ModelParams p = fixed;
        for (std::size_t i = 0; i < controllable.size(); ++i)
            p.set(controllable[i], point[i]);
        return p;
    }
};

struct StartTrace {
    std::vector<double> start_point;
    std::vector<double> best_point;
    double best_profit = 0;
    std::uint64_t evaluations = 0;
    bool converged = false;  // poll step shrank below tolerance before the budget ran out
};

struct OptimResult {
    ModelParams best_params;
    std::vector<double> best_point;
    double best_profit = 0;
    std::uint64_t evaluations = 0;
    bool converged = false;
    std::vector<StartTrace> traces;
};

struct SensitivityEntry {
    std::string parameter;
    double value = 0;
    bool one_sided = false;  // parameter pinned at the domain boundary
};

/** Central finite-difference gradient of the campaign profit with respect to
 * all ten rates, relative step 1e-5. Integrator tolerances are tightened 100x
 * for the difference runs. A parameter sitting on its domain boundary (e.g.
 * mu = 0) gets a one-sided difference and is flagged. */
inline std::vector<SensitivityEntry> sensitivity(const ModelParams& params,
                                                 const Scenario& scenario) {
    params.validate();
    scenario.validate();
    Scenario tight = scenario;
    tight.rel_tol /= 100.0;
    tight.abs_tol /= 100.0;

    std::vector<SensitivityEntry> grad;
    for (std::string_view name : ModelParams::field_names) {
        SensitivityEntry e;
        e.parameter = std::string(name);
        double v = params.get(name);
        double h = 1e-5 * std::max(std::abs(v), 1e-8);
        if (params.with(name, v - h).is_valid()) {
            double jp = profit(params.with(name, v + h), tight);
            double jm = profit(params.with(name, v - h), tight);
            e.value = (jp - jm) / (2 * h);
        } else {
            double j0 = profit(params, tight);
            double jp = profit(params.with(name, v + h), tight);
            e.value = (jp - j0) / h;
            e.one_sided = true;
        }
        grad.push_back(e);
    }
    return grad;
}

namespace detail {

// Seeded Latin-hypercube start points in the unit cube: each dimension is
// stratified into `n` bands with one sample per band, band order permuted.
inline std::vector<std::vector<double>> latin_hypercube(std::size_t n, std::size_t dim,
                                                        std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
    std::vector<std::size_t> perm(n);
    for (std::size_t d = 0; d < dim; ++d) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t i = 0; i < n; ++i)
            pts[i][d] = (static_cast<double>(perm[i]) + unif(rng)) / static_cast<double>(n);
    }
    return pts;
}

}  // namespace detail

/** Maximizes campaign profit over the ControlSpec box with a multistart
 * compass (coordinate-poll) search: per start, poll +/- step along every
 * coordinate, move to the best improving neighbor, halve the step otherwise.
 * A start terminates when the step falls below 1e-6 of the box width or its
 * evaluation budget is exhausted. Fully deterministic for a fixed seed; ties
 * across starts break toward the lowest start index. */
inline OptimResult maximize_profit(const ControlSpec& spec, const Scenario& scenario,
                                   std::size_t starts = 8, std::uint64_t seed = 0,
                                   std::uint64_t budget_per_start = 2000) {
    spec.validate();
    scenario.validate();
    const std::size_t dim = spec.controllable.size();

    // Search in box-normalized coordinates; widths can differ by decades.
    auto to_param = [&](const std::vector<double>& u) {
        std::vector<double> x(dim);
        for (std::size_t d = 0; d < dim; ++d)
            x[d] = spec.lower[d] + u[d] * (spec.upper[d] - spec.lower[d]);
        return x;
    };
    auto evaluate = [&](const std::vector<double>& u, std::uint64_t& evals) {
        ++evals;
        return profit(spec.materialize(to_param(u)), scenario);
    };

    constexpr double step_tol = 1e-6;
    OptimResult result;
    result.best_profit = -std::numeric_limits<double>::infinity();

    auto start_points = detail::latin_hypercube(starts, dim, seed);
    for (std::size_t s = 0; s < starts; ++s) {
        StartTrace trace;
        trace.start_point = to_param(start_points[s]);
        std::vector<double> u = start_points[s];
        std::uint64_t evals = 0;
        double fu = evaluate(u, evals);
        double step = 0.25;

        while (step >= step_tol && evals < budget_per_start) {
            bool improved = false;
            std::vector<double> best_u = u;
            double best_f = fu;
            for (std::size_t d = 0; d < dim && evals < budget_per_start; ++d) {
                for (double sgn : {+1.0, -1.0}) {
                    std::vector<double> cand = u;
                    cand[d] = std::clamp(cand[d] + sgn * step, 0.0, 1.0);
                    if (cand[d] == u[d]) continue;
                    double f = evaluate(cand, evals);
                    if (f > best_f) {
                        best_f = f;
                        best_u = cand;
                        improved = true;
                    }
                    if (evals >= budget_per_start) break;
                }
            }
            if (improved) {
                u = best_u;
                fu = best_f;
            } else {
                step *= 0.5;
            }
        }

        trace.best_point = to_param(u);
        trace.best_profit = fu;
        trace.evaluations = evals;
        trace.converged = step < step_tol;
        result.evaluations += evals;
        if (fu > result.best_profit) {
            result.best_profit = fu;
            result.best_point = trace.best_point;
            result.best_params = spec.materialize(trace.best_point);
            result.converged = trace.converged;
        }
        result.traces.push_back(std::move(trace));
    }
    return result;
}

}  // namespace sipns

#endif  // SIPNS_OPTIMIZE_HPP

#ifndef SIPNS_SOLVER_HPP
#define SIPNS_SOLVER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "sipns/model.hpp"

namespace sipns {

/** Time-ordered samples of a market trajectory.
 *
 * profit_running[k] is the accumulated campaign profit J(times[k]); it is
 * integrated as a fifth state component alongside (S, I, P, N), so its error
 * is controlled by the same tolerances as the states. */
struct Trajectory {
    std::vector<double> times;
    std::vector<MarketState> states;
    std::vector<double> profit_running;
    std::uint64_t step_count = 0;
    std::uint64_t rejected_steps = 0;

    const MarketState& final_state() const { return states.back(); }
    double final_profit() const { return profit_running.back(); }
};

/// Step budget exhausted before reaching the horizon; carries what was done.
class non_convergence_error : public std::runtime_error {
public:
    non_convergence_error(const std::string& what, Trajectory partial)
        : std::runtime_error(what), partial_trajectory(std::move(partial)) {}
    Trajectory partial_trajectory;
};

/// A state component dipped below the round-off tolerance; the integrator
/// tolerances are misconfigured for this problem.
class negativity_error : public std::runtime_error {
public:
    explicit negativity_error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

// Dormand-Prince 5(4) coefficients (Hairer, Norsett & Wanner, DOPRI5).
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// 5th-order minus embedded 4th-order weights.
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense-output weights for the 4th-order continuous extension.
inline constexpr double d1 = -12715105075.0 / 11282082432.0;
inline constexpr double d3 = 87487479700.0 / 32700410799.0;
inline constexpr double d4 = -10690763975.0 / 1880347072.0;
inline constexpr double d5 = 701980252875.0 / 199316789632.0;
inline constexpr double d6 = -1453857185.0 / 822651844.0;
inline constexpr double d7 = 69997945.0 / 29380423.0;

using Vec5 = std::array<double, 5>;

inline Vec5 rhs(const ModelParams& p, const Vec5& y) {
    MarketState x{y[0], y[1], y[2], y[3]};
    Derivative d = vector_field(p, x);
    return {d.dS, d.dI, d.dP, d.dN, p.beta_P * x.P * x.S};
}

// Per-step polynomial for evaluating the solution inside an accepted step.
struct DenseSegment {
    double t, h;
    Vec5 r1, r2, r3, r4, r5;

    Vec5 eval(double tq) const {
        const double th = (tq - t) / h;
        const double th1 = 1.0 - th;
        Vec5 out;
        for (int i = 0; i < 5; ++i)
            out[i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
        return out;
    }
};

inline double error_norm(const Vec5& err, const Vec5& y, const Vec5& ynew, double atol,
                         double rtol) {
    double sum = 0;
    for (int i = 0; i < 5; ++i) {
        double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        double q = err[i] / sc;
        sum += q * q;
    }
    return std::sqrt(sum / 5.0);
}

// Starting step size estimate from the magnitudes of y, f(y), and a trial
// Euler step (Hairer's hinit).
inline double initial_step(const ModelParams& p, const Vec5& y0, const Vec5& f0, double t_end,
                           double atol, double rtol) {
    double dny = 0, dnf = 0;
    for (int i = 0; i < 5; ++i) {
        double sc = atol + rtol * std::abs(y0[i]);
        dny += (y0[i] / sc) * (y0[i] / sc);
        dnf += (f0[i] / sc) * (f0[i] / sc);
    }
    dny = std::sqrt(dny / 5.0);
    dnf = std::sqrt(dnf / 5.0);
    double h0 = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
    h0 = std::min(h0, t_end);

    Vec5 y1;
    for (int i = 0; i < 5; ++i) y1[i] = y0[i] + h0 * f0[i];
    Vec5 f1 = rhs(p, y1);
    double d2 = 0;
    for (int i = 0; i < 5; ++i) {
        double sc = atol + rtol * std::abs(y0[i]);
        double q = (f1[i] - f0[i]) / sc;
        d2 += q * q;
    }
    d2 = std::sqrt(d2 / 5.0) / h0;

    double dmax = std::max(dnf, d2);
    double h1 = (dmax <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                : std::pow(0.01 / dmax, 0.2);
    return std::min({100 * h0, h1, t_end});
}

}  // namespace detail

/** Integrates the market dynamics over [0, horizon] with an adaptive
 * Dormand-Prince 5(4) pair and PI step-size control.
 *
 * The profit integrand beta_P*P*S rides along as an augmented fifth
 * component. If sample_grid is non-empty its points (plus t=0 and t=T when
 * missing) are reported via the 4th-order dense output; otherwise every
 * accepted step is reported. */
inline Trajectory integrate(const ModelParams& params, const Scenario& scenario,
                            std::span<const double> sample_grid = {}) {
    using detail::Vec5;
    params.validate();
    scenario.validate();

    const double T = scenario.horizon;
    const double atol = scenario.abs_tol;
    const double rtol = scenario.rel_tol;

    std::vector<double> grid;
    if (!sample_grid.empty()) {
        for (std::size_t i = 0; i < sample_grid.size(); ++i) {
            double t = sample_grid[i];
            if (i > 0 && !(t > sample_grid[i - 1]))
                throw domain_error("sample_grid must be strictly increasing");
            if (t < 0 || t > T) throw domain_error("sample_grid point outside [0, horizon]");
            grid.push_back(t);
        }
        if (grid.front() != 0.0) grid.insert(grid.begin(), 0.0);
        if (grid.back() != T) grid.push_back(T);
    }

    Trajectory traj;
    auto report = [&](double t, const Vec5& y) {
        MarketState x{y[0], y[1], y[2], y[3]};
        for (int i = 0; i < 4; ++i) {
            if (y[i] < -1e-9)
                throw negativity_error("state component went below -1e-9 at t=" +
                                       std::to_string(t));
        }
        traj.times.push_back(t);
        traj.states.push_back(x.clamped());
        traj.profit_running.push_back(y[4]);
    };

    Vec5 y{scenario.initial.S, scenario.initial.I, scenario.initial.P, scenario.initial.N, 0.0};
    double t = 0.0;
    Vec5 k1 = detail::rhs(params, y);
    double h = detail::initial_step(params, y, k1, T, atol, rtol);

    std::size_t next_grid = 0;
    if (grid.empty()) {
        report(t, y);
    } else {
        report(grid[0], y);  // grid[0] == 0
        next_grid = 1;
    }

    // PI controller constants (Hairer's defaults for DOPRI5).
    constexpr double beta = 0.04;
    constexpr double expo1 = 0.2 - beta * 0.75;
    constexpr double safe = 0.9, facmin = 0.2, facmax = 10.0;
    double facold = 1e-4;

    while (t < T) {
        if (traj.step_count + traj.rejected_steps >= scenario.max_steps)
            throw non_convergence_error("max_steps exceeded at t=" + std::to_string(t),
                                        std::move(traj));
        bool last = false;
        if (t + h >= T) {
            h = T - t;
            last = true;
        }

        using namespace detail;
        Vec5 k2, k3, k4, k5, k6, k7, ytmp, ynew, err;
        for (int i = 0; i < 5; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
        k2 = rhs(params, ytmp);
        for (int i = 0; i < 5; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        k3 = rhs(params, ytmp);
        for (int i = 0; i < 5; ++i) ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = rhs(params, ytmp);
        for (int i = 0; i < 5; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = rhs(params, ytmp);
        for (int i = 0; i < 5; ++i)
            ytmp[i] =
                y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        k6 = rhs(params, ytmp);
        for (int i = 0; i < 5; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        k7 = rhs(params, ynew);
        for (int i = 0; i < 5; ++i)
            err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                          e7 * k7[i]);

        double errn = error_norm(err, y, ynew, atol, rtol);
        double fac11 = std::pow(errn, expo1);
        if (errn <= 1.0) {
            for (int i = 0; i < 4; ++i)
                if (ynew[i] < -1e-9)
                    throw negativity_error("state component went below -1e-9 at t=" +
                                           std::to_string(t + h));
            // Accepted; emit any dense-output points inside (t, t_new].
            const double t_new = last ? T : t + h;
            if (!grid.empty() && next_grid < grid.size() && grid[next_grid] <= t_new) {
                DenseSegment seg;
                seg.t = t;
                seg.h = h;
                for (int i = 0; i < 5; ++i) {
                    double dy = ynew[i] - y[i];
                    seg.r1[i] = y[i];
                    seg.r2[i] = dy;
                    seg.r3[i] = h * k1[i] - dy;
                    seg.r4[i] = dy - h * k7[i] - seg.r3[i];
                    seg.r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                     d6 * k6[i] + d7 * k7[i]);
                }
                while (next_grid < grid.size() && grid[next_grid] <= t_new) {
                    if (grid[next_grid] == t_new)
                        report(grid[next_grid], ynew);
                    else
                        report(grid[next_grid], seg.eval(grid[next_grid]));
                    ++next_grid;
                }
            }
            t = t_new;
            y = ynew;
            k1 = k7;  // FSAL
            ++traj.step_count;
            if (grid.empty()) report(t, y);

            facold = std::max(errn, 1e-4);
            double fac = fac11 / std::pow(facold, beta);
            fac = std::clamp(fac / safe, 1.0 / facmax, 1.0 / facmin);
            h = h / fac;
        } else {
            ++traj.rejected_steps;
            double fac = std::min(fac11 / safe, 1.0 / facmin);
            h = h / fac;
        }
    }
    return traj;
}

/// Expected overall campaign profit J(horizon) from the augmented integration.
inline double profit(const ModelParams& params, const Scenario& scenario) {
    const double endpoints[] = {0.0, scenario.horizon};
    return integrate(params, scenario, endpoints).final_profit();
}

}  // namespace sipns

#endif  // SIPNS_SOLVER_HPP

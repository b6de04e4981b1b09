#ifndef SIPNS_MODEL_HPP
#define SIPNS_MODEL_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sipns {

/// Invalid parameter or state domain (violated positivity, non-finite input).
class domain_error : public std::runtime_error {
public:
    explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

/// A computation produced a non-finite value.
class evaluation_error : public std::runtime_error {
public:
    explicit evaluation_error(const std::string& what) : std::runtime_error(what) {}
};

/** The ten rate constants of the word-of-mouth market model.
 *
 * mu is the market entrance rate; delta_* are spontaneous exit rates of the
 * infected, positive, and negative compartments; beta_P and beta_N are the
 * per-contact forces with which positive comments trigger purchases and
 * negative comments drive susceptibles out of the market; alpha_P and alpha_N
 * are the rates at which recent buyers post positive/negative comments;
 * gamma_P and gamma_I are the rates at which positive/infected individuals
 * return to the susceptible pool. */
struct ModelParams {
    double mu = 0;
    double delta_I = 0;
    double delta_P = 0;
    double delta_N = 0;
    double beta_P = 0;
    double beta_N = 0;
    double alpha_P = 0;
    double alpha_N = 0;
    double gamma_P = 0;
    double gamma_I = 0;

    static constexpr std::array<std::string_view, 10> field_names = {
        "mu", "delta_I", "delta_P", "delta_N", "beta_P",
        "beta_N", "alpha_P", "alpha_N", "gamma_P", "gamma_I"};

    double get(std::string_view name) const {
        if (name == "mu") return mu;
        if (name == "delta_I") return delta_I;
        if (name == "delta_P") return delta_P;
        if (name == "delta_N") return delta_N;
        if (name == "beta_P") return beta_P;
        if (name == "beta_N") return beta_N;
        if (name == "alpha_P") return alpha_P;
        if (name == "alpha_N") return alpha_N;
        if (name == "gamma_P") return gamma_P;
        if (name == "gamma_I") return gamma_I;
        throw domain_error("unknown parameter name: " + std::string(name));
    }

    void set(std::string_view name, double value) {
        if (name == "mu") mu = value;
        else if (name == "delta_I") delta_I = value;
        else if (name == "delta_P") delta_P = value;
        else if (name == "delta_N") delta_N = value;
        else if (name == "beta_P") beta_P = value;
        else if (name == "beta_N") beta_N = value;
        else if (name == "alpha_P") alpha_P = value;
        else if (name == "alpha_N") alpha_N = value;
        else if (name == "gamma_P") gamma_P = value;
        else if (name == "gamma_I") gamma_I = value;
        else throw domain_error("unknown parameter name: " + std::string(name));
    }

    ModelParams with(std::string_view name, double value) const {
        ModelParams p = *this;
        p.set(name, value);
        return p;
    }

    // mu, delta_I, delta_P may be zero; everything else must be strictly
    // positive (the equilibrium divides by delta_N, beta_P, alpha_P, ...).
    void validate() const {
        auto nonneg = [](double v, const char* n) {
            if (!std::isfinite(v) || v < 0)
                throw domain_error(std::string(n) + " must be finite and >= 0");
        };
        auto pos = [](double v, const char* n) {
            if (!std::isfinite(v) || v <= 0)
                throw domain_error(std::string(n) + " must be finite and > 0");
        };
        nonneg(mu, "mu");
        nonneg(delta_I, "delta_I");
        nonneg(delta_P, "delta_P");
        pos(delta_N, "delta_N");
        pos(beta_P, "beta_P");
        pos(beta_N, "beta_N");
        pos(alpha_P, "alpha_P");
        pos(alpha_N, "alpha_N");
        pos(gamma_P, "gamma_P");
        pos(gamma_I, "gamma_I");
    }

    bool is_valid() const noexcept {
        try {
            validate();
            return true;
        } catch (const domain_error&) {
            return false;
        }
    }
};

/// Expected compartment counts (S, I, P, N) at one instant.
struct MarketState {
    double S = 0;
    double I = 0;
    double P = 0;
    double N = 0;

    double total() const { return S + I + P + N; }

    double component(int i) const {
        switch (i) {
            case 0: return S;
            case 1: return I;
            case 2: return P;
            case 3: return N;
        }
        throw domain_error("MarketState component index out of range");
    }

    // Small negative round-off is tolerated on construction from an
    // integrator; clamp() zeroes it for output.
    void validate(double tol = 0.0) const {
        const char* names[] = {"S", "I", "P", "N"};
        for (int i = 0; i < 4; ++i) {
            double v = component(i);
            if (!std::isfinite(v))
                throw domain_error(std::string("MarketState.") + names[i] + " is not finite");
            if (v < -tol)
                throw domain_error(std::string("MarketState.") + names[i] + " is negative");
        }
    }

    MarketState clamped() const {
        return {std::max(S, 0.0), std::max(I, 0.0), std::max(P, 0.0), std::max(N, 0.0)};
    }
};

/// Time derivative of a MarketState, individuals per unit time.
struct Derivative {
    double dS = 0;
    double dI = 0;
    double dP = 0;
    double dN = 0;
};

/// One integration problem: where to start, how long to run, how accurately.
struct Scenario {
    MarketState initial;
    double horizon = 100.0;
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    std::uint64_t max_steps = 1'000'000;

    void validate() const {
        initial.validate();
        if (!std::isfinite(horizon) || horizon <= 0)
            throw domain_error("Scenario.horizon must be finite and > 0");
        if (!(rel_tol > 0) || !(rel_tol < 1))
            throw domain_error("Scenario.rel_tol must lie in (0, 1)");
        if (!(abs_tol > 0) || !std::isfinite(abs_tol))
            throw domain_error("Scenario.abs_tol must be finite and > 0");
        if (max_steps == 0)
            throw domain_error("Scenario.max_steps must be positive");
    }
};

/// Right-hand side of the market dynamics at one state.
inline Derivative vector_field(const ModelParams& p, const MarketState& x) {
    Derivative d;
    d.dS = p.mu - p.beta_P * x.P * x.S - p.beta_N * x.N * x.S + p.gamma_P * x.P + p.gamma_I * x.I;
    d.dI = p.beta_P * x.P * x.S - (p.alpha_P + p.alpha_N + p.gamma_I + p.delta_I) * x.I;
    d.dP = p.alpha_P * x.I - (p.gamma_P + p.delta_P) * x.P;
    d.dN = p.alpha_N * x.I - p.delta_N * x.N;
    const char* names[] = {"dS", "dI", "dP", "dN"};
    const double vals[] = {d.dS, d.dI, d.dP, d.dN};
    for (int i = 0; i < 4; ++i)
        if (!std::isfinite(vals[i]))
            throw evaluation_error(std::string("vector_field produced non-finite ") + names[i]);
    return d;
}

/** Closed-form interior equilibrium of the dynamics.
 *
 * Obtained by zeroing the four rate equations and solving; it is unique for
 * valid parameters. Note that the equilibrium S does not involve mu, delta_N,
 * or beta_N. With mu = 0 the infected, positive, and negative components all
 * vanish, which is returned as-is. */
inline MarketState equilibrium(const ModelParams& p) {
    p.validate();
    const double outflow_I = p.alpha_P + p.alpha_N + p.gamma_I + p.delta_I;
    const double outflow_P = p.gamma_P + p.delta_P;
    const double S = outflow_I * outflow_P / (p.beta_P * p.alpha_P);
    const double denom = p.delta_I + p.alpha_P * p.delta_P / outflow_P + p.alpha_N +
                         p.beta_N * p.alpha_N * S / p.delta_N;
    const double I = p.mu / denom;
    const double P = p.alpha_P * I / outflow_P;
    const double N = p.alpha_N * I / p.delta_N;
    MarketState eq{S, I, P, N};
    eq.validate();
    return eq;
}

using Matrix4 = std::array<std::array<double, 4>, 4>;

/// Analytic Jacobian of vector_field; rows and columns ordered (S, I, P, N).
inline Matrix4 jacobian(const ModelParams& p, const MarketState& x) {
    Matrix4 j{};
    j[0] = {-p.beta_P * x.P - p.beta_N * x.N, p.gamma_I, -p.beta_P * x.S + p.gamma_P,
            -p.beta_N * x.S};
    j[1] = {p.beta_P * x.P, -(p.alpha_P + p.alpha_N + p.gamma_I + p.delta_I), p.beta_P * x.S, 0.0};
    j[2] = {0.0, p.alpha_P, -(p.gamma_P + p.delta_P), 0.0};
    j[3] = {0.0, p.alpha_N, 0.0, -p.delta_N};
    return j;
}

}  // namespace sipns

#endif  // SIPNS_MODEL_HPP

#pragma once
/// @file control.hpp
/// @brief Convex optimal control with affine dynamics: explicit Euler on the
/// state equation, a backward sweep for the adjoint on the same lattice, and
/// the resulting first-order oracle over piecewise-constant controls.

#include <cmath>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hd/hilbert.hpp"
#include "hd/oracle.hpp"
#include "hd/run_log.hpp"

namespace hd {

/// dx/dt = a(t) x + b(t) u + c(t); a is state_dim x state_dim, b is
/// state_dim x control_dim, both row-major.
struct AffineDynamics {
    std::vector<double> a, b, c;
};

using Vec = std::vector<double>;

struct ControlProblem {
    double T = 1.0;
    std::size_t state_dim = 1;
    std::size_t control_dim = 1;
    std::function<AffineDynamics(double t)> dynamics;
    std::function<double(double t, const Vec& x, const Vec& u)> running_cost;
    /// Fills (dL/dx, dL/du) of the running cost.
    std::function<void(double t, const Vec& x, const Vec& u, Vec& gx, Vec& gu)> running_cost_grad;
    std::function<double(const Vec& x)> terminal_cost;
    std::function<void(const Vec& x, Vec& g)> terminal_grad;
    Vec x0;

    void validate() const {
        if (!(T > 0.0)) throw ContractError("ControlProblem: T must be positive");
        if (state_dim == 0 || control_dim == 0) throw ContractError("ControlProblem: dimensions must be positive");
        if (!dynamics || !running_cost || !running_cost_grad || !terminal_cost || !terminal_grad)
            throw ContractError("ControlProblem: all callbacks are required");
        if (x0.size() != state_dim) throw ContractError("ControlProblem: x0 has the wrong length");
    }
};

struct ControlGrid {
    std::size_t steps = 0;
    double tau = 0.0;

    ControlGrid(const ControlProblem& p, std::size_t steps_) : steps(steps_), tau(p.T / static_cast<double>(steps_)) {
        if (steps == 0) throw ContractError("ControlGrid: steps must be positive");
    }
    double t(std::size_t k) const { return static_cast<double>(k) * tau; }
};

/// Raised when a trajectory leaves the finite range.
class BlowUpError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// x[k] for k = 0..steps.
using Trajectory = std::vector<Vec>;

namespace detail {

inline Vec control_at(const HVector& u, std::size_t k, std::size_t m) {
    Vec uk(m);
    for (std::size_t i = 0; i < m; ++i) uk[i] = u[k * m + i];
    return uk;
}

inline void require_control(const ControlProblem& p, const HVector& u, const ControlGrid& g) {
    if (u.size() != g.steps * p.control_dim)
        throw ContractError("control length " + std::to_string(u.size()) + " != steps * control_dim = " +
                            std::to_string(g.steps * p.control_dim));
}

/// a x + b u + c
inline Vec affine_rhs(const AffineDynamics& d, const Vec& x, const Vec& u) {
    const std::size_t n = x.size(), m = u.size();
    Vec r(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = d.c.empty() ? 0.0 : d.c[i];
        for (std::size_t j = 0; j < n; ++j) s += d.a[i * n + j] * x[j];
        for (std::size_t j = 0; j < m; ++j) s += d.b[i * m + j] * u[j];
        r[i] = s;
    }
    return r;
}

}  // namespace detail

/// Explicit Euler: x^{k+1} = x^k + tau f(t^k, x^k, u^k).
inline Trajectory simulate_forward(const ControlProblem& p, const HVector& u, const ControlGrid& g) {
    p.validate();
    detail::require_control(p, u, g);
    Trajectory x(g.steps + 1);
    x[0] = p.x0;
    for (std::size_t k = 0; k < g.steps; ++k) {
        const Vec uk = detail::control_at(u, k, p.control_dim);
        const Vec f = detail::affine_rhs(p.dynamics(g.t(k)), x[k], uk);
        x[k + 1] = x[k];
        for (std::size_t i = 0; i < p.state_dim; ++i) {
            x[k + 1][i] += g.tau * f[i];
            if (!std::isfinite(x[k + 1][i]))
                throw BlowUpError("state blew up at t = " + std::to_string(g.t(k + 1)));
        }
    }
    return x;
}

enum class AdjointForm {
    /// psi^k = psi^{k+1} + tau H_x(t^k, x^k, u^k, psi^{k+1}): the exact
    /// adjoint of the Euler scheme, hence consistent with the discrete objective.
    discrete,
    /// psi^k = psi^{k+1} + tau H_x(t^{k+1}, x^{k+1}, u^{k+1}, psi^{k+1}) with
    /// the gradient read as H_u(t^k, x^k, u^k, psi^k); first-order accurate
    /// but not the exact gradient of the discrete objective.
    continuum_euler,
};

/// Backward sweep from psi^N = grad Phi(x^N), with H = f0 + <psi, f>.
inline Trajectory simulate_adjoint(const ControlProblem& p, const HVector& u, const Trajectory& x,
                                   const ControlGrid& g, AdjointForm form = AdjointForm::discrete) {
    p.validate();
    detail::require_control(p, u, g);
    if (x.size() != g.steps + 1) throw ContractError("simulate_adjoint: trajectory length != steps + 1");
    const std::size_t n = p.state_dim, m = p.control_dim;
    Trajectory psi(g.steps + 1, Vec(n, 0.0));
    p.terminal_grad(x[g.steps], psi[g.steps]);
    for (std::size_t k = g.steps; k-- > 0;) {
        // Evaluation node for H_x; u has no sample at t^N, the last one is reused.
        const std::size_t e = form == AdjointForm::discrete ? k : k + 1;
        const std::size_t ue = std::min(e, g.steps - 1);
        const Vec ue_vec = detail::control_at(u, ue, m);
        const AffineDynamics d = p.dynamics(g.t(e));
        Vec gx(n, 0.0), gu(m, 0.0);
        p.running_cost_grad(g.t(e), x[e], ue_vec, gx, gu);
        const Vec& next = psi[k + 1];
        for (std::size_t i = 0; i < n; ++i) {
            double hx = gx[i];
            for (std::size_t j = 0; j < n; ++j) hx += d.a[j * n + i] * next[j];
            psi[k][i] = next[i] + g.tau * hx;
            if (!std::isfinite(psi[k][i])) throw BlowUpError("adjoint blew up at t = " + std::to_string(g.t(k)));
        }
    }
    return psi;
}

/// tau sum_k f0(t^k, x^k, u^k) + Phi(x^N).
inline double control_objective(const ControlProblem& p, const HVector& u, const Trajectory& x, const ControlGrid& g) {
    double s = 0.0;
    for (std::size_t k = 0; k < g.steps; ++k) s += p.running_cost(g.t(k), x[k], detail::control_at(u, k, p.control_dim));
    return g.tau * s + p.terminal_cost(x[g.steps]);
}

/// Gradient in the tau-weighted control space: H_u at t^k.
inline HVector control_gradient(const ControlProblem& p, const HVector& u, const Trajectory& x, const Trajectory& psi,
                                const ControlGrid& g, AdjointForm form = AdjointForm::discrete) {
    const std::size_t n = p.state_dim, m = p.control_dim;
    std::vector<double> grad(g.steps * m);
    for (std::size_t k = 0; k < g.steps; ++k) {
        const Vec uk = detail::control_at(u, k, m);
        const AffineDynamics d = p.dynamics(g.t(k));
        Vec gx(n, 0.0), gu(m, 0.0);
        p.running_cost_grad(g.t(k), x[k], uk, gx, gu);
        const Vec& ps = form == AdjointForm::discrete ? psi[k + 1] : psi[k];
        for (std::size_t j = 0; j < m; ++j) {
            double hu = gu[j];
            for (std::size_t i = 0; i < n; ++i) hu += d.b[i * m + j] * ps[i];
            grad[k * m + j] = hu;
        }
    }
    return HVector::computed(std::move(grad), g.tau);
}

struct ControlOracleOptions {
    AdjointForm form = AdjointForm::discrete;
    std::optional<double> L_hint;
    std::optional<double> mu_hint;
    std::optional<double> J_star_known;
    /// Declared oracle inexactness; the discrete-adjoint gradient is exact for
    /// the discrete objective, so this stays 0 unless the caller wants the
    /// continuum model error to enter the adaptive tests.
    double delta = 0.0;
};

/// Oracle over controls sampled on the lattice (length steps * control_dim,
/// weight tau). Blow-up produces non-finite responses, which solvers report.
inline Oracle control_oracle(const ControlProblem& p, const ControlGrid& g, const ControlOracleOptions& o = {}) {
    p.validate();
    OracleSpec spec;
    spec.dimension = g.steps * p.control_dim;
    spec.weight = g.tau;
    spec.L_hint = o.L_hint;
    spec.mu_hint = o.mu_hint;
    spec.J_star_known = o.J_star_known;
    spec.delta = o.delta;
    return Oracle(spec, [p, g, form = o.form](const HVector& u, Request what, double& v, HVector& grad) {
        try {
            const Trajectory x = simulate_forward(p, u, g);
            if (what != Request::gradient) v = control_objective(p, u, x, g);
            if (what != Request::value) grad = control_gradient(p, u, x, simulate_adjoint(p, u, x, g, form), g, form);
        } catch (const BlowUpError&) {
            v = std::numeric_limits<double>::infinity();
            grad = HVector::computed(std::vector<double>(u.size(), std::numeric_limits<double>::quiet_NaN()), u.weight());
        }
    });
}

/// Scalar benchmark dx/dt = a x + u, x(0) = 0, J = int_0^1 u^2/2 dt + (x(1) - 1)^2 / 2.
inline ControlProblem scalar_lq_problem(double a) {
    ControlProblem p;
    p.T = 1.0;
    p.dynamics = [a](double) { return AffineDynamics{{a}, {1.0}, {0.0}}; };
    p.running_cost = [](double, const Vec&, const Vec& u) { return 0.5 * u[0] * u[0]; };
    p.running_cost_grad = [](double, const Vec&, const Vec& u, Vec& gx, Vec& gu) {
        gx[0] = 0.0;
        gu[0] = u[0];
    };
    p.terminal_cost = [](const Vec& x) { return 0.5 * (x[0] - 1.0) * (x[0] - 1.0); };
    p.terminal_grad = [](const Vec& x, Vec& g) { g[0] = x[0] - 1.0; };
    p.x0 = {0.0};
    return p;
}

/// a = 0: optimal control u = 1/2, optimal value 1/4, both exactly
/// reproduced by the Euler discretization.
inline ControlProblem lq_benchmark() { return scalar_lq_problem(0.0); }

/// Continuum optimal value of scalar_lq_problem(a): 1 / (2 (1 + G)),
/// G = int_0^1 e^{2a(1-t)} dt.
inline double scalar_lq_optimal_value(double a) {
    const double G = a == 0.0 ? 1.0 : (std::exp(2.0 * a) - 1.0) / (2.0 * a);
    return 1.0 / (2.0 * (1.0 + G));
}

/// Oracle for the a = 0 benchmark with its exact constants (L = 2, mu = 1, J* = 1/4).
inline Oracle lq_oracle(std::size_t steps, AdjointForm form = AdjointForm::discrete) {
    const ControlProblem p = lq_benchmark();
    ControlOracleOptions o;
    o.form = form;
    o.L_hint = 2.0;
    o.mu_hint = 1.0;
    o.J_star_known = 0.25;
    return control_oracle(p, ControlGrid(p, steps), o);
}

/// `t,u` rows (`t,u1,...,um` for vector controls) at the lattice nodes t^k.
inline void write_control_csv(std::ostream& os, const HVector& u, std::size_t control_dim) {
    if (control_dim == 0 || u.size() % control_dim != 0) throw ContractError("write_control_csv: bad control_dim");
    os << 't';
    if (control_dim == 1) os << ",u";
    else
        for (std::size_t j = 1; j <= control_dim; ++j) os << ",u" << j;
    os << '\n';
    const std::size_t steps = u.size() / control_dim;
    for (std::size_t k = 0; k < steps; ++k) {
        os << format_double(static_cast<double>(k) * u.weight());
        for (std::size_t j = 0; j < control_dim; ++j) os << ',' << format_double(u[k * control_dim + j]);
        os << '\n';
    }
}

}  // namespace hd

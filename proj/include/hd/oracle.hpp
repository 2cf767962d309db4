#pragma once
/// @file oracle.hpp
/// @brief First-order oracles: exact least squares, Tikhonov-regularized,
/// and deterministic (delta, L)-inexact wrappers.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <utility>

#include "hd/hilbert.hpp"
#include "hd/random.hpp"

namespace hd {

struct OracleSpec {
    std::size_t dimension = 0;
    double weight = 1.0;
    std::optional<double> L_hint;
    std::optional<double> mu_hint;
    double delta = 0.0;
    std::optional<double> J_star_known;
    /// Bound on ||grad J^delta - grad J|| when the oracle is inexact.
    std::optional<double> grad_error_bound;
};

enum class Request { value, gradient, both };

struct OracleResponse {
    double value = std::numeric_limits<double>::quiet_NaN();
    HVector gradient;
    long func_evals = 0;
    long grad_evals = 0;
};

/// Type-erased, stateless first-order oracle. Copies share the underlying
/// evaluator; evaluation counters live in the caller's EvalCounter.
class Oracle {
public:
    /// Evaluator contract: fill `value` when a value is requested and
    /// `gradient` when a gradient is requested.
    using Evaluator = std::function<void(const HVector& q, Request what, double& value, HVector& gradient)>;

    Oracle(OracleSpec spec, Evaluator eval) : spec_(std::move(spec)), eval_(std::make_shared<Evaluator>(std::move(eval))) {
        if (spec_.dimension == 0) throw ContractError("Oracle dimension must be positive");
        if (spec_.delta < 0.0) throw ContractError("Oracle delta must be nonnegative");
        if (spec_.L_hint && spec_.mu_hint && *spec_.mu_hint > *spec_.L_hint * (1.0 + 1e-12))
            throw ContractError("Oracle mu_hint exceeds L_hint");
    }

    const OracleSpec& spec() const { return spec_; }

    OracleResponse query(const HVector& q, Request what) const {
        if (q.size() != spec_.dimension)
            throw ContractError("oracle query: dimension " + std::to_string(q.size()) + " != " +
                                std::to_string(spec_.dimension));
        OracleResponse r;
        (*eval_)(q, what, r.value, r.gradient);
        r.func_evals = what == Request::gradient ? 0 : 1;
        r.grad_evals = what == Request::value ? 0 : 1;
        return r;
    }

    double value(const HVector& q) const { return query(q, Request::value).value; }
    HVector gradient(const HVector& q) const { return query(q, Request::gradient).gradient; }
    OracleResponse evaluate(const HVector& q) const { return query(q, Request::both); }

    Oracle with_spec(OracleSpec s) const {
        Oracle o = *this;
        o.spec_ = std::move(s);
        return o;
    }

private:
    OracleSpec spec_;
    std::shared_ptr<const Evaluator> eval_;
};

/// Builds an oracle from separate value and gradient callables.
template <class V, class G>
Oracle make_oracle(OracleSpec spec, V value_fn, G grad_fn) {
    return Oracle(std::move(spec), [value_fn, grad_fn](const HVector& q, Request what, double& v, HVector& g) {
        if (what != Request::gradient) v = value_fn(q);
        if (what != Request::value) g = grad_fn(q);
    });
}

/// Per-run evaluation counters.
class EvalCounter {
public:
    explicit EvalCounter(const Oracle& oracle) : oracle_(&oracle) {}

    OracleResponse query(const HVector& q, Request what) {
        OracleResponse r = oracle_->query(q, what);
        func_evals_ += r.func_evals;
        grad_evals_ += r.grad_evals;
        return r;
    }
    double value(const HVector& q) { return query(q, Request::value).value; }
    HVector gradient(const HVector& q) { return query(q, Request::gradient).gradient; }
    OracleResponse evaluate(const HVector& q) { return query(q, Request::both); }

    const Oracle& oracle() const { return *oracle_; }
    long func_evals() const { return func_evals_; }
    long grad_evals() const { return grad_evals_; }
    void add(long func, long grad) {
        func_evals_ += func;
        grad_evals_ += grad;
    }

private:
    const Oracle* oracle_;
    long func_evals_ = 0;
    long grad_evals_ = 0;
};

struct LeastSquaresOptions {
    /// Lipschitz constant of the gradient; estimated by the power method when absent.
    std::optional<double> L_hint;
    std::optional<double> mu_hint;
    /// Caller asserts Aq = f is solvable, so the optimal value is 0.
    bool compatible = false;
};

/// J(q) = 1/2 ||Aq - f||^2 with gradient A*(Aq - f).
inline Oracle least_squares_oracle(const LinOp& A, const HVector& f, LeastSquaresOptions opts = {}) {
    if (f.size() != A.dim_out() || f.weight() != A.weight_out())
        throw ContractError("least_squares_oracle: f does not match the operator's range");
    OracleSpec spec;
    spec.dimension = A.dim_in();
    spec.weight = A.weight_in();
    spec.L_hint = opts.L_hint ? *opts.L_hint : operator_norm_sq(A).value;
    spec.mu_hint = opts.mu_hint;
    if (opts.compatible) spec.J_star_known = 0.0;
    return Oracle(spec, [A, f](const HVector& q, Request what, double& v, HVector& g) {
        HVector r = A.apply(q);
        r -= f;
        if (what != Request::gradient) v = 0.5 * inner(r, r);
        if (what != Request::value) g = A.apply_adjoint(r);
    });
}

/// J(q) + (mu/2)||q||^2.
inline Oracle regularize(const Oracle& base, double mu) {
    if (!(mu > 0.0)) throw ContractError("regularize: mu must be positive");
    OracleSpec spec = base.spec();
    if (spec.L_hint) spec.L_hint = *spec.L_hint + mu;
    spec.mu_hint = spec.mu_hint.value_or(0.0) + mu;
    spec.J_star_known.reset();
    return Oracle(spec, [base, mu](const HVector& q, Request what, double& v, HVector& g) {
        OracleResponse r = base.query(q, what);
        if (what != Request::gradient) v = r.value + 0.5 * mu * inner(q, q);
        if (what != Request::value) {
            g = std::move(r.gradient);
            g.axpy(mu, q);
        }
    });
}

/// Deterministic (delta, L)-oracle around an exact oracle.
///
/// The gradient error e(q) has norm zeta(q) * delta / (2 diameter) along a
/// hashed direction, and the value is lowered by
/// b(q) = ||e|| D + rho(q) (delta/2 - ||e|| D), so that for any q1, q2 with
/// ||q2 - q1|| <= diameter
///   0 <= J(q2) - J^d(q1) - <g^d(q1), q2 - q1> <= (L/2)||q2 - q1||^2 + delta.
/// zeta, rho and the direction are functions of (quantized q, seed) only.
inline Oracle perturb(const Oracle& base, double delta, double diameter, std::uint64_t seed) {
    if (base.spec().delta != 0.0) throw ContractError("perturb: base oracle must be exact");
    if (!(delta > 0.0) || !(diameter > 0.0)) throw ContractError("perturb: delta and diameter must be positive");
    OracleSpec spec = base.spec();
    spec.delta = delta;
    const double max_err = delta / (2.0 * diameter);
    spec.grad_error_bound = max_err;
    return Oracle(spec, [base, delta, diameter, max_err, seed](const HVector& q, Request what, double& v, HVector& g) {
        OracleResponse r = base.query(q, what);
        SplitMix64 rng(hash_point(q.values(), seed));
        const double zeta = rng.uniform();
        const double rho = rng.uniform();
        const double err_norm = zeta * max_err;
        if (what != Request::gradient) {
            const double floor = err_norm * diameter;
            v = r.value - (floor + rho * (0.5 * delta - floor));
        }
        if (what != Request::value) {
            std::vector<double> dir(q.size());
            for (double& d : dir) d = rng.gaussian();
            HVector e = HVector::computed(std::move(dir), q.weight());
            const double n = norm(e);
            g = std::move(r.gradient);
            if (n > 0.0) g.axpy(err_norm / n, e);
        }
    });
}

/// max_i |central difference along e_i - <grad, e_i>| / (1 + |J(q)|).
inline double finite_diff_defect(const Oracle& oracle, const HVector& q, double h) {
    if (!(h > 0.0)) throw ContractError("finite_diff_defect: h must be positive");
    const OracleResponse at = oracle.evaluate(q);
    double worst = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        HVector plus = q, minus = q;
        plus[i] += h;
        minus[i] -= h;
        const double fd = (oracle.value(plus) - oracle.value(minus)) / (2.0 * h);
        const double analytic = q.weight() * at.gradient[i];
        worst = std::max(worst, std::fabs(fd - analytic));
    }
    return worst / (1.0 + std::fabs(at.value));
}

}  // namespace hd

#pragma once
/// @file dual.hpp
/// @brief Dual approach for g(q) -> min subject to Aq = f: the dual objective
/// phi(lambda) = max_q { <lambda, Aq - f> - g(q) }, primal recovery by
/// weighted averaging of the responder outputs, and a Tikhonov-regularized
/// dual with a restart on the regularization parameter.

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hd/hilbert.hpp"
#include "hd/oracle.hpp"
#include "hd/run_log.hpp"
#include "hd/solvers.hpp"

namespace hd {

/// With this sign convention phi is minimized and grad phi(lambda) = A q(lambda) - f.
struct DualProblem {
    LinOp A;
    HVector f;
    /// lambda -> q(lambda) = argmax_q { <lambda, Aq - f> - g(q) }.
    std::function<HVector(const HVector&)> conjugate_responder;
    std::function<double(const HVector&)> g_value;
    double strong_convexity = 1.0;
    /// Overrides the power-method estimate of ||A||^2 when set.
    std::optional<double> norm_sq;
};

/// g(q) = 1/2 ||q||^2, so q(lambda) = A* lambda.
inline DualProblem min_norm_dual(const LinOp& A, const HVector& f, std::optional<double> norm_sq = std::nullopt) {
    if (f.size() != A.dim_out() || f.weight() != A.weight_out())
        throw ContractError("min_norm_dual: f does not match the operator's range");
    return DualProblem{A, f, [A](const HVector& l) { return A.apply_adjoint(l); },
                       [](const HVector& q) { return 0.5 * inner(q, q); }, 1.0, norm_sq};
}

inline Oracle dual_oracle(const DualProblem& P) {
    if (!(P.strong_convexity > 0.0)) throw ContractError("dual_oracle: strong_convexity must be positive");
    if (!P.conjugate_responder || !P.g_value) throw ContractError("dual_oracle: responder and g are required");
    OracleSpec spec;
    spec.dimension = P.A.dim_out();
    spec.weight = P.A.weight_out();
    spec.L_hint = P.norm_sq.value_or(operator_norm_sq(P.A).value) / P.strong_convexity;
    return Oracle(spec, [P](const HVector& l, Request, double& v, HVector& g) {
        const HVector q = P.conjugate_responder(l);
        if (q.size() != P.A.dim_in()) throw ContractError("dual responder returned a vector of the wrong length");
        HVector r = P.A.apply(q);
        r -= P.f;
        v = inner(l, r) - P.g_value(q);
        g = std::move(r);
    });
}

enum class DualMethod { stm, astm, gd_averaged };

struct DualResult {
    HVector q;
    HVector lambda;
    RunLog log;
    /// Restarts of the regularized solver (R_tilde doublings).
    int restarts = 0;
    /// Regularized solver only: ||lambda^k|| ||A q(lambda^k) - f|| per record,
    /// an upper bound on g(q(lambda^k)) - g(q*).
    std::vector<double> primal_bound;
    /// Duality gap phi(lambda^N) + g(q^N) at the last record.
    double gap = 0.0;
};

/// Running average sum_k alpha_k q(y^k) / A_N over the solver's query points.
class PrimalRecovery {
public:
    void add(const HVector& q, double alpha) {
        if (weight_ == 0.0) sum_ = alpha * q;
        else sum_.axpy(alpha, q);
        weight_ += alpha;
    }
    double total_weight() const { return weight_; }
    HVector mean() const { return (1.0 / weight_) * sum_; }

private:
    HVector sum_;
    double weight_ = 0.0;
};

/// Runs the chosen primal-dual method on phi from lambda^0 = 0 and stops once
/// phi(lambda^N) + g(q^N) <= eps and ||A q^N - f|| <= eps_tilde.
inline DualResult solve_dual(const DualProblem& P, DualMethod method, double eps, double eps_tilde, long max_iter,
                             const RunOptions& options = {}) {
    if (!(eps > 0.0) || !(eps_tilde > 0.0)) throw ContractError("solve_dual: eps and eps_tilde must be positive");
    if (max_iter < 0) throw ContractError("solve_dual: max_iter must be nonnegative");
    const Oracle oracle = dual_oracle(P);
    const HVector l0 = P.A.zero_out();

    auto recovery = std::make_shared<PrimalRecovery>();
    auto last = std::make_shared<std::pair<HVector, double>>();  // (q^N, gap)
    IterationHooks hooks;
    hooks.on_query = [&P, recovery](const HVector& y, double alpha) { recovery->add(P.conjugate_responder(y), alpha); };
    hooks.monitor = [&P, recovery, last, eps, eps_tilde](const SolverState&, double phi) {
        HVector q = recovery->mean();
        HVector r = P.A.apply(q);
        r -= P.f;
        const double feas = norm(r);
        const double gap = phi + P.g_value(q);
        MonitorResult m;
        m.feasibility = feas;
        m.stop = gap <= eps && feas <= eps_tilde;
        *last = {std::move(q), gap};
        return m;
    };
    const StopRule stop = StopRule::gap_feasibility(eps, eps_tilde) | StopRule::iterations(max_iter);

    SolveResult run;
    if (method == DualMethod::gd_averaged) {
        GdSettings g;
        g.L = *oracle.spec().L_hint;
        g.variant = GdVariant::averaged;
        g.stop = stop;
        g.options = options;
        g.hooks = hooks;
        // The averaged method's first record sits at lambda^0 before any step,
        // so primal recovery starts empty there; seed it with q(lambda^0).
        g.hooks.monitor = [&P, recovery, last, eps, eps_tilde, mon = hooks.monitor](const SolverState& s, double phi) {
            if (recovery->total_weight() == 0.0) {
                HVector q = P.conjugate_responder(s.y);
                HVector r = P.A.apply(q);
                r -= P.f;
                MonitorResult m;
                m.feasibility = norm(r);
                const double gap = phi + P.g_value(q);
                m.stop = gap <= eps && *m.feasibility <= eps_tilde;
                *last = {std::move(q), gap};
                return m;
            }
            return mon(s, phi);
        };
        run = gd(oracle, l0, g);
    } else {
        StmSettings cfg;
        cfg.adaptive = method == DualMethod::astm;
        cfg.L = cfg.adaptive ? 1.0 : *oracle.spec().L_hint;
        cfg.stop = stop;
        cfg.options = options;
        cfg.hooks = hooks;
        run = similar_triangles(oracle, l0, cfg);
    }
    DualResult out;
    out.q = last->first.size() ? last->first : P.A.zero_in();
    out.gap = last->second;
    out.lambda = std::move(run.q);
    out.log = std::move(run.log);
    return out;
}

struct RegularizedDualSettings {
    /// Iteration cap per value of R_tilde; 0 selects
    /// ceil(4 sqrt(L/mu) ln(2 + L R_tilde^2 / eps)) + 10.
    long max_iter_per_attempt = 0;
    int max_doublings = 60;
    RunOptions options;
};

/// Strongly convex STM on phi(lambda) + (mu/2)||lambda||^2 with
/// mu = eps / (2 R_tilde^2). Stops when ||lambda|| ||A q(lambda) - f|| <= eps
/// and ||A q(lambda) - f|| <= eps_tilde at lambda = lambda^N. An attempt fails
/// when its iteration cap is reached or the iterate has converged to the
/// regularized minimizer without meeting the rule; R_tilde then doubles.
inline DualResult solve_dual_regularized(const DualProblem& P, double eps, double eps_tilde, double R_tilde_guess,
                                         const RegularizedDualSettings& settings = {}) {
    if (!(eps > 0.0) || !(eps_tilde > 0.0)) throw ContractError("solve_dual_regularized: eps and eps_tilde must be positive");
    if (!(R_tilde_guess > 0.0)) throw ContractError("solve_dual_regularized: R_tilde_guess must be positive");
    const Oracle base = dual_oracle(P);
    const double L_phi = *base.spec().L_hint;
    const HVector l0 = P.A.zero_out();

    DualResult out;
    long func = 0, grad = 0;
    double R = R_tilde_guess;
    for (int attempt = 0;; ++attempt) {
        if (attempt > settings.max_doublings) {
            out.log.status = Status::budget_exhausted;
            out.log.message = "R_tilde doubled more than " + std::to_string(settings.max_doublings) + " times";
            return out;
        }
        const double mu = eps / (2.0 * R * R);
        const Oracle reg = regularize(base, mu);
        const long cap = settings.max_iter_per_attempt > 0
                             ? settings.max_iter_per_attempt
                             : static_cast<long>(std::ceil(4.0 * std::sqrt(L_phi / mu) *
                                                           std::log(2.0 + L_phi * R * R / eps))) + 10;
        auto q_last = std::make_shared<HVector>();
        auto bounds = std::make_shared<std::vector<double>>();
        auto stalled = std::make_shared<bool>(false);
        StmSettings cfg;
        cfg.L = L_phi + mu;
        cfg.mu = mu;
        cfg.stop = StopRule::iterations(cap);
        cfg.options = settings.options;
        cfg.hooks.monitor = [&P, mu, eps, eps_tilde, q_last, bounds, stalled](const SolverState& s, double) {
            HVector q = P.conjugate_responder(s.q);
            HVector r = P.A.apply(q);
            r -= P.f;
            const double feas = norm(r);
            const double lnorm = norm(s.q);
            bounds->push_back(lnorm * feas);
            MonitorResult m;
            m.feasibility = feas;
            m.stop = lnorm * feas <= eps && feas <= eps_tilde;
            if (!m.stop) {
                // Near the regularized minimizer the residual equals -mu lambda,
                // so further iterations cannot reduce it.
                HVector g_reg = r;
                g_reg.axpy(mu, s.q);
                if (norm(g_reg) <= 1e-3 * mu * lnorm) {
                    *stalled = true;
                    m.stop = true;
                }
            }
            *q_last = std::move(q);
            return m;
        };
        SolveResult run = similar_triangles(reg, l0, cfg);
        detail::append_segment(out.log, run.log, func, grad);
        func += run.log.last().func_evals;
        grad += run.log.last().grad_evals;
        out.primal_bound.insert(out.primal_bound.end(), bounds->begin(), bounds->end());
        out.q = *q_last;
        out.lambda = std::move(run.q);
        out.restarts = attempt;
        if (run.log.status == Status::converged && !*stalled) {
            out.log.status = Status::converged;
            return out;
        }
        if (run.log.status != Status::converged && run.log.status != Status::budget_exhausted) {
            out.log.status = run.log.status;
            out.log.message = run.log.message;
            return out;
        }
        R *= 2.0;
    }
}

}  // namespace hd

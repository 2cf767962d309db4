#pragma once
/// @file solvers.hpp
/// @brief Accelerated and non-accelerated first-order methods for smooth
/// convex problems: similar-triangles STM/ASTM (optionally strongly convex),
/// gradient descent variants, restart schemes and step/accuracy heuristics.

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hd/hilbert.hpp"
#include "hd/oracle.hpp"
#include "hd/run_log.hpp"

namespace hd {

struct SolverState {
    HVector y, u, q;
    double A_k = 0.0;
    double alpha_k = 0.0;
    double L_current = 1.0;
    long k = 0;
    long line_search_evals = 0;
};

struct SolveResult {
    HVector q;
    RunLog log;
    SolverState state;
};

/// Returned by a per-iteration monitor: an optional feasibility value to log
/// and a request to stop (counted as convergence).
struct MonitorResult {
    std::optional<double> feasibility;
    bool stop = false;
};

struct IterationHooks {
    /// Every accepted query point y^k with its weight alpha_k, including y^0.
    std::function<void(const HVector& y, double alpha)> on_query;
    /// Called after each iteration with the state and J(q^k).
    std::function<MonitorResult(const SolverState&, double J_q)> monitor;
};
using StmHooks = IterationHooks;

struct StmSettings {
    /// Fixed Lipschitz constant, or the initial estimate when adaptive.
    double L = 1.0;
    bool adaptive = false;
    double mu = 0.0;
    StopRule stop;
    RunOptions options;
    StmHooks hooks;
};

inline constexpr int kMaxDoublings = 60;
inline constexpr double kMinL = 1e-30;

namespace detail {

/// Positive root of L a^2 = (a + A)(1 + A mu).
inline double stm_alpha(double L, double A, double mu) {
    const double s = 1.0 + A * mu;
    return s / (2.0 * L) + std::sqrt(s * s / (4.0 * L * L) + A * s / L);
}

/// Descent test of the adaptive methods:
/// J(x1) <= J(x0) + <g0, x1 - x0> + L/2 ||x1 - x0||^2 + 2 delta.
/// A relative round-off allowance keeps converged runs from doubling L forever.
inline bool descent_ok(double J0, const HVector& g0, const HVector& x0, double J1, const HVector& x1, double L,
                       double delta) {
    const HVector d = x1 - x0;
    const double model = J0 + inner(g0, d) + 0.5 * L * inner(d, d) + 2.0 * delta;
    const double slack = 1e-13 * (std::fabs(J0) + std::fabs(J1));
    return J1 <= model + slack;
}

inline bool finite(double v) { return std::isfinite(v); }

/// Shared stop-rule evaluation and logging for one run.
class Recorder {
public:
    Recorder(const Oracle& oracle, const StopRule& stop, const RunOptions& options)
        : counter(oracle), stop_(stop), options_(options), clock_(options.record_timing),
          J_star_(oracle.spec().J_star_known.value_or(0.0)),
          grad_slack_(oracle.spec().delta > 0.0 ? oracle.spec().grad_error_bound.value_or(0.0) : 0.0) {
        stop_.validate();
    }

    EvalCounter counter;
    RunLog log;

    bool wants_grad_at_iterate() const { return stop_.grad_norm_below.has_value(); }
    bool has_gap_rule() const { return stop_.gap_and_feasibility.has_value(); }

    void record(long k, double J, double grad_norm, double A, double L, const HVector& iterate,
                std::optional<double> feasibility = std::nullopt) {
        LogRecord r;
        r.k = k;
        r.J = J;
        r.grad_norm = grad_norm;
        r.A_k = A;
        r.L_used = L;
        r.func_evals = counter.func_evals() + extra_func_;
        r.grad_evals = counter.grad_evals() + extra_grad_;
        r.feasibility = feasibility;
        r.elapsed_ms = clock_.elapsed_ms();
        log.records.push_back(r);
        if (options_.observer) options_.observer(k, iterate);
    }

    /// Evaluations made outside this recorder's counter (sub-runs).
    void add_external(long func, long grad) {
        extra_func_ += func;
        extra_grad_ += grad;
    }
    long total_func() const { return counter.func_evals() + extra_func_; }
    long total_grad() const { return counter.grad_evals() + extra_grad_; }

    /// Decides whether to stop after iteration k. grad_norm is the norm of
    /// the gradient at the iterate when one was computed there.
    std::optional<Status> check(long k, double J, std::optional<double> grad_norm, bool monitor_stop) const {
        if (monitor_stop) return Status::converged;
        if (stop_.objective_below && J - J_star_ <= *stop_.objective_below) return Status::converged;
        if (stop_.grad_norm_below && grad_norm && *grad_norm + grad_slack_ <= *stop_.grad_norm_below)
            return Status::converged;
        if (stop_.max_iter && k >= *stop_.max_iter) return Status::budget_exhausted;
        return std::nullopt;
    }

    SolveResult finish(Status s, std::string message, HVector q, SolverState state) {
        log.status = s;
        log.message = std::move(message);
        return SolveResult{std::move(q), std::move(log), std::move(state)};
    }

private:
    StopRule stop_;
    RunOptions options_;
    RunClock clock_;
    double J_star_;
    double grad_slack_;
    long extra_func_ = 0;
    long extra_grad_ = 0;
};

inline void require_start(const Oracle& oracle, const HVector& y0) {
    if (y0.size() != oracle.spec().dimension)
        throw ContractError("start point dimension " + std::to_string(y0.size()) + " != oracle dimension " +
                            std::to_string(oracle.spec().dimension));
    if (!y0.all_finite()) throw ContractError("start point must be finite");
}

}  // namespace detail

/// Similar-triangles method with fixed or adaptive L and optional strong
/// convexity mu. The building block for stm, astm, rstm and the dual solvers.
inline SolveResult similar_triangles(const Oracle& oracle, const HVector& y0, const StmSettings& cfg) {
    detail::require_start(oracle, y0);
    if (!(cfg.L > 0.0) || !std::isfinite(cfg.L)) throw ContractError("STM: L must be positive and finite");
    if (!(cfg.mu >= 0.0)) throw ContractError("STM: mu must be nonnegative");
    detail::Recorder rec(oracle, cfg.stop, cfg.options);
    if (rec.has_gap_rule() && !cfg.hooks.monitor)
        throw ContractError("STM: a gap_and_feasibility rule needs a monitor that evaluates it");
    const double delta = oracle.spec().delta;
    const bool adaptive = cfg.adaptive;
    const double mu = cfg.mu;

    SolverState st;
    st.y = y0;
    st.L_current = cfg.L;

    auto fail_nonfinite = [&](const char* where) {
        return rec.finish(Status::oracle_failure, std::string("non-finite oracle response at ") + where, st.q, st);
    };

    // Value and (optionally) gradient at the new iterate q.
    double J_q = 0.0;
    std::optional<double> grad_at_q;
    double last_grad_norm = 0.0;
    auto evaluate_iterate = [&](bool value_known) -> bool {
        grad_at_q.reset();
        if (rec.wants_grad_at_iterate()) {
            OracleResponse r = rec.counter.query(st.q, value_known ? Request::gradient : Request::both);
            if (!value_known) J_q = r.value;
            if (!r.gradient.all_finite()) return false;
            grad_at_q = norm(r.gradient);
            last_grad_norm = *grad_at_q;
        } else if (!value_known) {
            J_q = rec.counter.value(st.q);
        }
        return detail::finite(J_q);
    };

    auto after_iteration = [&]() -> std::optional<Status> {
        MonitorResult m;
        if (cfg.hooks.monitor) m = cfg.hooks.monitor(st, J_q);
        rec.record(st.k, J_q, last_grad_norm, st.A_k, st.L_current, st.q, m.feasibility);
        return rec.check(st.k, J_q, grad_at_q, m.stop);
    };

    // Initialization: one gradient step of length 1/L from y^0.
    OracleResponse r0 = rec.counter.query(y0, adaptive ? Request::both : Request::gradient);
    if (!r0.gradient.all_finite() || (adaptive && !detail::finite(r0.value))) return fail_nonfinite("y^0");
    last_grad_norm = norm(r0.gradient);
    double L = cfg.L;
    for (int j = 0;; ++j) {
        st.A_k = st.alpha_k = 1.0 / L;
        st.u = combine(1.0, y0, -st.alpha_k, r0.gradient);
        st.q = st.u;
        if (!adaptive) break;
        J_q = rec.counter.value(st.q);
        ++st.line_search_evals;
        if (detail::finite(J_q) && detail::descent_ok(r0.value, r0.gradient, y0, J_q, st.q, L, delta)) break;
        if (j + 1 > kMaxDoublings)
            return rec.finish(Status::line_search_failed, "more than 60 doublings of L at k = 0", st.q, st);
        L *= 2.0;
    }
    st.L_current = L;
    if (!evaluate_iterate(adaptive)) return fail_nonfinite("q^0");
    if (cfg.hooks.on_query) cfg.hooks.on_query(y0, st.alpha_k);
    if (auto s = after_iteration()) return rec.finish(*s, "", st.q, st);

    for (;;) {
        double Lk = adaptive ? std::max(st.L_current / 2.0, kMinL) : st.L_current;
        const double A = st.A_k;
        const double s = 1.0 + A * mu;
        double alpha = 0.0, A_next = 0.0;
        HVector y, u, q;
        OracleResponse ry;
        for (int j = 0;; ++j) {
            alpha = detail::stm_alpha(Lk, A, mu);
            A_next = A + alpha;
            y = combine(alpha / A_next, st.u, A / A_next, st.q);
            ry = rec.counter.query(y, adaptive ? Request::both : Request::gradient);
            if (!ry.gradient.all_finite() || (adaptive && !detail::finite(ry.value))) {
                st.y = y;
                return fail_nonfinite("y^k");
            }
            if (mu > 0.0) {
                u = combine(s, st.u, alpha * mu, y);
                u.axpy(-alpha, ry.gradient);
                u *= 1.0 / (1.0 + A_next * mu);
            } else {
                u = combine(1.0, st.u, -alpha, ry.gradient);
            }
            q = combine(alpha / A_next, u, A / A_next, st.q);
            if (!adaptive) break;
            J_q = rec.counter.value(q);
            ++st.line_search_evals;
            if (detail::finite(J_q) && detail::descent_ok(ry.value, ry.gradient, y, J_q, q, Lk, delta)) break;
            if (j + 1 > kMaxDoublings) {
                st.y = y;
                return rec.finish(Status::line_search_failed,
                                  "more than 60 doublings of L at k = " + std::to_string(st.k + 1), st.q, st);
            }
            Lk *= 2.0;
        }
        st.y = std::move(y);
        st.u = std::move(u);
        st.q = std::move(q);
        st.alpha_k = alpha;
        st.A_k = A_next;
        st.L_current = Lk;
        ++st.k;
        last_grad_norm = norm(ry.gradient);
        if (!evaluate_iterate(adaptive)) return fail_nonfinite("q^k");
        if (cfg.hooks.on_query) cfg.hooks.on_query(st.y, alpha);
        if (auto status = after_iteration()) return rec.finish(*status, "", st.q, st);
    }
}

/// STM with a known Lipschitz constant L (strongly convex variant when mu > 0).
inline SolveResult stm(const Oracle& oracle, const HVector& y0, double L, double mu, const StopRule& stop,
                       const RunOptions& options = {}) {
    StmSettings cfg;
    cfg.L = L;
    cfg.mu = mu;
    cfg.stop = stop;
    cfg.options = options;
    return similar_triangles(oracle, y0, cfg);
}

/// Adaptive STM: L is found by halving/doubling from L = 1.
inline SolveResult astm(const Oracle& oracle, const HVector& y0, double mu, const StopRule& stop,
                        const RunOptions& options = {}) {
    StmSettings cfg;
    cfg.L = 1.0;
    cfg.adaptive = true;
    cfg.mu = mu;
    cfg.stop = stop;
    cfg.options = options;
    return similar_triangles(oracle, y0, cfg);
}

enum class GdVariant { plain, averaged, line_search };

struct GdSettings {
    /// Fixed 1/L step, or the starting estimate when adaptive. For
    /// line_search it only sets the first trial step.
    double L = 1.0;
    bool adaptive = false;
    GdVariant variant = GdVariant::plain;
    StopRule stop;
    RunOptions options;
    /// on_query sees each point whose gradient drives a step, with the step length.
    IterationHooks hooks;
};

namespace detail {

/// Minimizes phi(a) = J(x - a g) over a >= 0 by doubling to a bracket and
/// golden-section search to relative tolerance 1e-8. Returns the best step
/// and value found, or nullopt if no bracket was found.
inline std::optional<std::pair<double, double>> exact_step(EvalCounter& cnt, const HVector& x, const HVector& g,
                                                           double J0, double first_step, long& evals) {
    auto phi = [&](double a) {
        ++evals;
        return cnt.value(combine(1.0, x, -a, g));
    };
    double best_a = 0.0, best_J = J0;
    auto note = [&](double a, double v) {
        if (std::isfinite(v) && v < best_J) {
            best_a = a;
            best_J = v;
        }
    };
    double lo = 0.0, hi = first_step;
    double f_hi = phi(hi);
    note(hi, f_hi);
    if (std::isfinite(f_hi) && f_hi < J0) {
        double mid = hi, f_mid = f_hi;
        hi = 2.0 * mid;
        f_hi = phi(hi);
        note(hi, f_hi);
        int doublings = 0;
        while (std::isfinite(f_hi) && f_hi < f_mid) {
            if (++doublings > kMaxDoublings) return std::nullopt;
            lo = mid;
            mid = hi;
            f_mid = f_hi;
            hi = 2.0 * mid;
            f_hi = phi(hi);
            note(hi, f_hi);
        }
    }
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = phi(c), fd = phi(d);
    note(c, fc);
    note(d, fd);
    while (b - a > 1e-8 * std::max(b, DBL_MIN)) {
        if (!(fd < fc)) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = phi(c);
            note(c, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = phi(d);
            note(d, fd);
        }
    }
    return std::make_pair(best_a, best_J);
}

}  // namespace detail

/// Gradient descent: plain (last iterate), averaged (running mean of the
/// gradient-step sequence, returned as the iterate) or exact line search.
inline SolveResult gd(const Oracle& oracle, const HVector& y0, const GdSettings& cfg) {
    detail::require_start(oracle, y0);
    if (!(cfg.L > 0.0) || !std::isfinite(cfg.L)) throw ContractError("GD: L must be positive and finite");
    if (cfg.adaptive && cfg.variant == GdVariant::line_search)
        throw ContractError("GD: line_search already chooses its step; adaptive L does not apply");
    detail::Recorder rec(oracle, cfg.stop, cfg.options);
    if (rec.has_gap_rule() && !cfg.hooks.monitor)
        throw ContractError("GD: a gap_and_feasibility rule needs a monitor that evaluates it");
    const double delta = oracle.spec().delta;
    const bool averaged = cfg.variant == GdVariant::averaged;

    SolverState st;
    st.y = y0;
    st.L_current = cfg.L;

    OracleResponse ry = rec.counter.evaluate(y0);
    if (!detail::finite(ry.value) || !ry.gradient.all_finite())
        return rec.finish(Status::oracle_failure, "non-finite oracle response at y^0", y0, st);
    st.q = y0;
    double J_q = ry.value;
    double gnorm_y = norm(ry.gradient);
    MonitorResult m0;
    if (cfg.hooks.monitor) m0 = cfg.hooks.monitor(st, J_q);
    rec.record(0, J_q, gnorm_y, 0.0, st.L_current, st.q, m0.feasibility);
    if (auto s = rec.check(0, J_q, gnorm_y, m0.stop)) return rec.finish(*s, "", st.q, st);

    HVector sum;  // running sum of the y^k for the averaged variant
    double L = cfg.L;
    for (;;) {
        const long k = st.k;
        HVector y_next;
        double J_next = 0.0;
        double step = 0.0;
        if (cfg.variant == GdVariant::line_search) {
            long evals = 0;
            auto best = detail::exact_step(rec.counter, st.y, ry.gradient, ry.value, 1.0 / L, evals);
            st.line_search_evals += evals;
            if (!best) return rec.finish(Status::line_search_failed, "objective unbounded along the gradient", st.q, st);
            step = best->first;
            J_next = best->second;
            y_next = combine(1.0, st.y, -step, ry.gradient);
        } else {
            // The first adaptive iteration starts from L itself; later ones halve first.
            double Lk = cfg.adaptive && k > 0 ? std::max(L / 2.0, kMinL) : L;
            for (int j = 0;; ++j) {
                y_next = combine(1.0, st.y, -1.0 / Lk, ry.gradient);
                if (!cfg.adaptive) break;
                J_next = rec.counter.value(y_next);
                ++st.line_search_evals;
                if (detail::finite(J_next) &&
                    detail::descent_ok(ry.value, ry.gradient, st.y, J_next, y_next, Lk, delta))
                    break;
                if (j + 1 > kMaxDoublings)
                    return rec.finish(Status::line_search_failed,
                                      "more than 60 doublings of L at k = " + std::to_string(k + 1), st.q, st);
                Lk *= 2.0;
            }
            L = Lk;
            step = 1.0 / Lk;
        }
        st.L_current = L;
        st.alpha_k = step;
        st.A_k += step;
        if (cfg.hooks.on_query) cfg.hooks.on_query(st.y, step);

        const bool value_known = cfg.adaptive || cfg.variant == GdVariant::line_search;
        OracleResponse rn = rec.counter.query(y_next, value_known ? Request::gradient : Request::both);
        if (!value_known) J_next = rn.value;
        st.y = std::move(y_next);
        ++st.k;
        if (!detail::finite(J_next) || !rn.gradient.all_finite())
            return rec.finish(Status::oracle_failure, "non-finite oracle response at y^k", st.q, st);
        ry.value = J_next;
        ry.gradient = std::move(rn.gradient);
        gnorm_y = norm(ry.gradient);

        std::optional<double> grad_at_q;
        double logged_grad = gnorm_y;
        if (averaged) {
            if (k == 0) sum = st.y;
            else sum += st.y;
            st.q = (1.0 / static_cast<double>(st.k)) * sum;
            if (rec.wants_grad_at_iterate()) {
                OracleResponse rq = rec.counter.evaluate(st.q);
                J_q = rq.value;
                if (!rq.gradient.all_finite())
                    return rec.finish(Status::oracle_failure, "non-finite gradient at the average", st.q, st);
                grad_at_q = logged_grad = norm(rq.gradient);
            } else {
                J_q = rec.counter.value(st.q);
            }
            if (!detail::finite(J_q))
                return rec.finish(Status::oracle_failure, "non-finite objective at the average", st.q, st);
        } else {
            st.q = st.y;
            J_q = J_next;
            grad_at_q = gnorm_y;
        }
        st.u = st.q;
        MonitorResult m;
        if (cfg.hooks.monitor) m = cfg.hooks.monitor(st, J_q);
        rec.record(st.k, J_q, logged_grad, st.A_k, st.L_current, st.q, m.feasibility);
        if (auto s = rec.check(st.k, J_q, grad_at_q, m.stop)) return rec.finish(*s, "", st.q, st);
    }
}

enum class MethodKind { stm, astm, gd, agd, gd_averaged, agd_averaged, gd_line_search };

/// Method selector used by the restart scheme and the experiment harness.
struct Method {
    MethodKind kind = MethodKind::stm;
    /// Fixed L for the non-adaptive methods; initial estimate otherwise.
    double L = 1.0;
    double mu = 0.0;
};

inline SolveResult solve(const Oracle& oracle, const HVector& y0, const Method& m, const StopRule& stop,
                         const RunOptions& options = {}) {
    switch (m.kind) {
        case MethodKind::stm: return stm(oracle, y0, m.L, m.mu, stop, options);
        case MethodKind::astm: {
            StmSettings cfg;
            cfg.L = m.L;
            cfg.adaptive = true;
            cfg.mu = m.mu;
            cfg.stop = stop;
            cfg.options = options;
            return similar_triangles(oracle, y0, cfg);
        }
        default: break;
    }
    GdSettings g;
    g.L = m.L;
    g.stop = stop;
    g.options = options;
    switch (m.kind) {
        case MethodKind::gd: g.variant = GdVariant::plain; break;
        case MethodKind::agd: g.variant = GdVariant::plain; g.adaptive = true; break;
        case MethodKind::gd_averaged: g.variant = GdVariant::averaged; break;
        case MethodKind::agd_averaged: g.variant = GdVariant::averaged; g.adaptive = true; break;
        case MethodKind::gd_line_search: g.variant = GdVariant::line_search; break;
        default: break;
    }
    return gd(oracle, y0, g);
}

namespace detail {

/// Appends a sub-run's records to `into`, continuing its k and counters.
inline void append_segment(RunLog& into, const RunLog& seg, long func_offset, long grad_offset) {
    const long k0 = into.records.empty() ? 0 : into.records.back().k + 1;
    for (LogRecord r : seg.records) {
        r.k += k0;
        r.func_evals += func_offset;
        r.grad_evals += grad_offset;
        into.records.push_back(r);
    }
}

}  // namespace detail

struct RestartBudget {
    int max_restarts = 200;
    long max_segment_iter = 100000;
};

struct RestartResult {
    SolveResult result;
    int restarts = 0;
};

/// Runs `method` and restarts it from the current iterate each time J falls
/// below half of its value at the last restart; stops once J <= eps.
/// Requires a known optimal value of 0.
inline RestartResult restart_half(const Method& method, const Oracle& oracle, const HVector& y0, double eps,
                                  const RestartBudget& budget = {}, const RunOptions& options = {}) {
    detail::require_start(oracle, y0);
    if (!(eps > 0.0)) throw ContractError("restart_half: eps must be positive");
    if (!oracle.spec().J_star_known || *oracle.spec().J_star_known != 0.0)
        throw ContractError("restart_half: requires an oracle with J_star_known = 0");

    RestartResult out;
    RunLog& log = out.result.log;
    RunClock clock(options.record_timing);
    const double J0 = oracle.value(y0);
    long func = 1, grad = 0;
    LogRecord r0;
    r0.J = J0;
    r0.grad_norm = std::numeric_limits<double>::quiet_NaN();
    r0.L_used = method.L;
    r0.func_evals = 1;
    log.records.push_back(r0);
    if (options.observer) options.observer(0, y0);
    out.result.q = y0;
    out.result.state.q = out.result.state.y = out.result.state.u = y0;
    if (!std::isfinite(J0)) {
        log.status = Status::oracle_failure;
        log.message = "non-finite objective at y^0";
        return out;
    }
    if (J0 <= eps) {
        log.status = Status::converged;
        return out;
    }

    HVector start = y0;
    double J_start = J0;
    for (;;) {
        const double target = std::max(0.5 * J_start, eps);
        RunOptions seg_opts = options;
        if (options.observer) {
            const long k0 = log.records.back().k + 1;
            seg_opts.observer = [&options, k0](long k, const HVector& x) { options.observer(k0 + k, x); };
        }
        SolveResult seg = solve(oracle, start, method, StopRule::objective(target) |
                                                            StopRule::iterations(budget.max_segment_iter),
                                seg_opts);
        detail::append_segment(log, seg.log, func, grad);
        func += seg.log.last().func_evals;
        grad += seg.log.last().grad_evals;
        out.result.q = seg.q;
        out.result.state = seg.state;
        if (seg.log.status != Status::converged) {
            log.status = seg.log.status;
            log.message = seg.log.status == Status::budget_exhausted ? "no halving within the segment budget"
                                                                       : seg.log.message;
            return out;
        }
        const double J = seg.log.last().J;
        if (J <= eps) {
            log.status = Status::converged;
            return out;
        }
        if (++out.restarts > budget.max_restarts) {
            log.status = Status::budget_exhausted;
            log.message = "restart budget exhausted";
            return out;
        }
        start = seg.q;
        J_start = J;
    }
}

/// Segment length ceil(2 sqrt(L / mu0)) of the non-adaptive restarted STM.
inline long rstm_segment_length(double L, double mu0) {
    return std::max<long>(1, static_cast<long>(std::ceil(2.0 * std::sqrt(L / mu0))));
}

struct RstmSettings {
    /// Known L; absent selects the adaptive variant.
    std::optional<double> L;
    double mu0 = 1.0;
    double eps = 1e-6;
    /// Lower bound on the strong-convexity modulus used by the stopping
    /// certificate; falls back to the oracle's mu_hint.
    std::optional<double> mu_lower;
    int max_restarts = 10000;
    RunOptions options;
};

struct RstmResult {
    SolveResult result;
    int restarts = 0;
};

/// Restarted STM. Each segment runs STM from the current point, for
/// ceil(2 sqrt(L/mu0)) iterations (known L) or until A_N >= 4/mu0
/// (adaptive), and restarts from (q + u)/2. Stops on the certificate
/// ||grad J||^2 / (2 mu) <= eps, or J - J* <= eps when only J* is known.
inline RstmResult rstm(const Oracle& oracle, const HVector& y0, const RstmSettings& cfg) {
    detail::require_start(oracle, y0);
    if (!(cfg.mu0 > 0.0)) throw ContractError("rstm: mu0 must be positive");
    if (!(cfg.eps > 0.0)) throw ContractError("rstm: eps must be positive");
    if (cfg.L && !(*cfg.L > 0.0)) throw ContractError("rstm: L must be positive");
    const std::optional<double> mu = cfg.mu_lower ? cfg.mu_lower : oracle.spec().mu_hint;
    const std::optional<double> J_star = oracle.spec().J_star_known;
    if (!(mu && *mu > 0.0) && !J_star)
        throw ContractError("rstm: a positive mu lower bound or a known optimal value is required to stop");
    const double grad_slack = oracle.spec().delta > 0.0 ? oracle.spec().grad_error_bound.value_or(0.0) : 0.0;

    RstmResult out;
    RunLog& log = out.result.log;
    long func = 0, grad = 0;
    auto certified = [&](double J, double gnorm) {
        if (mu && *mu > 0.0) return (gnorm + grad_slack) * (gnorm + grad_slack) / (2.0 * *mu) <= cfg.eps;
        return J - *J_star <= cfg.eps;
    };
    auto record_point = [&](const HVector& x, double A, double L) -> std::optional<std::pair<double, double>> {
        OracleResponse r = oracle.evaluate(x);
        ++func;
        ++grad;
        if (!std::isfinite(r.value) || !r.gradient.all_finite()) return std::nullopt;
        LogRecord rec;
        rec.k = log.records.empty() ? 0 : log.records.back().k + 1;
        rec.J = r.value;
        rec.grad_norm = norm(r.gradient);
        rec.A_k = A;
        rec.L_used = L;
        rec.func_evals = func;
        rec.grad_evals = grad;
        log.records.push_back(rec);
        if (cfg.options.observer) cfg.options.observer(rec.k, x);
        return std::make_pair(rec.J, rec.grad_norm);
    };

    HVector start = y0;
    out.result.q = y0;
    out.result.state.q = out.result.state.y = out.result.state.u = y0;
    double L_cur = cfg.L.value_or(1.0);
    auto p0 = record_point(y0, 0.0, L_cur);
    if (!p0) {
        log.status = Status::oracle_failure;
        log.message = "non-finite oracle response at y^0";
        return out;
    }
    if (certified(p0->first, p0->second)) {
        log.status = Status::converged;
        return out;
    }

    const long fixed_len = cfg.L ? rstm_segment_length(*cfg.L, cfg.mu0) : 0;
    const double A_target = 4.0 / cfg.mu0;
    for (;;) {
        StmSettings seg_cfg;
        seg_cfg.L = L_cur;
        seg_cfg.adaptive = !cfg.L;
        seg_cfg.options = cfg.options;
        if (cfg.options.observer) {
            const long k0 = log.records.back().k + 1;
            seg_cfg.options.observer = [&cfg, k0](long k, const HVector& x) { cfg.options.observer(k0 + k, x); };
        }
        if (cfg.L) {
            seg_cfg.stop = StopRule::iterations(fixed_len);
        } else {
            seg_cfg.stop = StopRule::iterations(10000000);
            seg_cfg.hooks.monitor = [A_target](const SolverState& s, double) {
                MonitorResult m;
                m.stop = s.A_k >= A_target;
                return m;
            };
        }
        SolveResult seg = similar_triangles(oracle, start, seg_cfg);
        detail::append_segment(log, seg.log, func, grad);
        func += seg.log.last().func_evals;
        grad += seg.log.last().grad_evals;
        out.result.state = seg.state;
        const bool seg_ok = cfg.L ? seg.log.status == Status::budget_exhausted : seg.log.status == Status::converged;
        if (!seg_ok) {
            log.status = seg.log.status == Status::budget_exhausted ? Status::budget_exhausted : seg.log.status;
            log.message = seg.log.message.empty() ? "segment did not complete" : seg.log.message;
            out.result.q = seg.q;
            return out;
        }
        if (!cfg.L) L_cur = seg.state.L_current;
        HVector bar = combine(0.5, seg.state.q, 0.5, seg.state.u);
        auto pb = record_point(bar, seg.state.A_k, seg.state.L_current);
        out.result.q = bar;
        if (!pb) {
            log.status = Status::oracle_failure;
            log.message = "non-finite oracle response at a restart point";
            return out;
        }
        if (certified(pb->first, pb->second)) {
            log.status = Status::converged;
            return out;
        }
        if (++out.restarts > cfg.max_restarts) {
            log.status = Status::budget_exhausted;
            log.message = "restart budget exhausted";
            return out;
        }
        start = std::move(bar);
    }
}

struct LDoublingResult {
    /// The final run; its counters include the work of all earlier runs.
    SolveResult result;
    double L_final = 0.0;
    int runs = 0;
};

/// Runs non-adaptive STM with L = L_start, 2 L_start, ... from y0 until two
/// consecutive runs stabilize: both meet a convergence rule of `stop`, or
/// their final objective values agree within `stabilization_tol` relative.
/// Runs whose final value is non-finite or above J(y0) never count as stable.
inline LDoublingResult l_doubling(const Oracle& oracle, const HVector& y0, const StopRule& stop,
                                  double stabilization_tol, double L_start = 1.0, const RunOptions& options = {}) {
    detail::require_start(oracle, y0);
    if (!(stabilization_tol > 0.0)) throw ContractError("l_doubling: stabilization_tol must be positive");
    if (!stop.max_iter) throw ContractError("l_doubling: the stop rule must bound the inner runs (max_iter)");
    if (!(L_start > 0.0)) throw ContractError("l_doubling: L_start must be positive");
    const double J0 = oracle.value(y0);
    long func = 1, grad = 0;

    LDoublingResult out;
    std::optional<SolveResult> prev;
    bool prev_sane = false;
    for (double L = L_start;; L *= 2.0) {
        if (L > std::ldexp(1.0, 60)) {
            out.result = prev ? std::move(*prev) : SolveResult{y0, {}, {}};
            out.result.log.status = Status::budget_exhausted;
            out.result.log.message = "L exceeded 2^60 without stabilization";
            return out;
        }
        SolveResult run = stm(oracle, y0, L, 0.0, stop, options);
        for (LogRecord& r : run.log.records) {
            r.func_evals += func;
            r.grad_evals += grad;
        }
        func = run.log.last().func_evals;
        grad = run.log.last().grad_evals;
        ++out.runs;
        const double J = run.log.last().J;
        const bool sane = run.log.status != Status::oracle_failure && std::isfinite(J) && J <= J0;
        bool stable = false;
        if (prev && sane && prev_sane) {
            const double Jp = prev->log.last().J;
            const bool both_converged = run.log.status == Status::converged && prev->log.status == Status::converged;
            stable = both_converged || std::fabs(J - Jp) <= stabilization_tol * std::max(std::fabs(J), std::fabs(Jp));
        }
        if (stable) {
            out.result = std::move(run);
            out.L_final = L;
            out.result.log.status = Status::converged;
            return out;
        }
        prev = std::move(run);
        prev_sane = sane;
    }
}

enum class MethodFamily { gd_family, stm_family };

struct BudgetAttempt {
    double C = 0.0;
    double tau = 0.0;
    long N = 0;
    double J = 0.0;
    bool success = false;
};

struct BudgetSettings {
    MethodFamily family = MethodFamily::stm_family;
    double eps = 1e-2;
    int p = 1;
    int r = 1;
    double R_hat = 1.0;
    double mu_hat = 0.0;
    RunOptions options;
};

struct BudgetResult {
    SolveResult result;
    std::vector<BudgetAttempt> attempts;
    /// Sum over attempts of N * tau^(-r), the arithmetic-work model.
    double total_work = 0.0;
};

/// Discretization step for accuracy eps with constant C.
inline double budget_tau(MethodFamily family, double C, double eps, int p, double R_hat, double mu_hat) {
    const double target = family == MethodFamily::gd_family
                              ? eps
                              : eps * std::sqrt(std::max(mu_hat * R_hat * R_hat, eps));
    return C * std::pow(target, 1.0 / static_cast<double>(p));
}

/// Iteration budget 4 min{LR^2/eps, (L/mu) ln(LR^2/eps)} for the gradient
/// family and 4 min{sqrt(LR^2/eps), sqrt(L/mu) ln(LR^2/eps)} for STM.
inline long budget_iterations(MethodFamily family, double L, double R, double mu, double eps) {
    const double ratio = L * R * R / eps;
    const double log_term = std::log(std::max(ratio, 1.0));
    double n = 0.0;
    if (family == MethodFamily::gd_family) {
        n = ratio;
        if (mu > 0.0) n = std::min(n, (L / mu) * log_term);
    } else {
        n = std::sqrt(ratio);
        if (mu > 0.0) n = std::min(n, std::sqrt(L / mu) * log_term);
    }
    return std::max<long>(1, static_cast<long>(std::ceil(4.0 * n)));
}

/// Chooses the discretization step tau from eps, runs the method for the
/// iteration budget on the oracle for that tau, and accepts once
/// J^delta(q^N) - J* <= eps; otherwise C := C/3 and retries.
/// The gradient family runs averaged GD, the STM family STM; both use the
/// oracle's L_hint when present and the adaptive variant otherwise.
inline BudgetResult accuracy_budget(const std::function<Oracle(double)>& oracle_family, const BudgetSettings& cfg) {
    if (!(cfg.eps > 0.0) || cfg.p < 1 || cfg.r < 1 || !(cfg.R_hat > 0.0) || !(cfg.mu_hat >= 0.0))
        throw ContractError("accuracy_budget: requires eps > 0, p, r >= 1, R_hat > 0, mu_hat >= 0");
    BudgetResult out;
    for (double C = 1.0;; C /= 3.0) {
        if (C < 1e-9) {
            out.result.log.status = Status::budget_exhausted;
            out.result.log.message = "constant C fell below 1e-9; check p and r";
            return out;
        }
        const double tau = budget_tau(cfg.family, C, cfg.eps, cfg.p, cfg.R_hat, cfg.mu_hat);
        const Oracle oracle = oracle_family(tau);
        const OracleSpec& spec = oracle.spec();
        const double L = spec.L_hint.value_or(1.0);
        const long N = budget_iterations(cfg.family, L, cfg.R_hat, cfg.mu_hat, cfg.eps);
        const HVector y0 = HVector::zeros(spec.dimension, spec.weight);
        Method m;
        m.L = L;
        if (cfg.family == MethodFamily::gd_family) m.kind = spec.L_hint ? MethodKind::gd_averaged : MethodKind::agd_averaged;
        else m.kind = spec.L_hint ? MethodKind::stm : MethodKind::astm;
        SolveResult run = solve(oracle, y0, m, StopRule::iterations(N), cfg.options);
        BudgetAttempt a;
        a.C = C;
        a.tau = tau;
        a.N = N;
        a.J = run.log.last().J;
        a.success = std::isfinite(a.J) && a.J - spec.J_star_known.value_or(0.0) <= cfg.eps;
        out.attempts.push_back(a);
        out.total_work += static_cast<double>(N) * std::pow(tau, -static_cast<double>(cfg.r));
        out.result = std::move(run);
        if (a.success) {
            out.result.log.status = Status::converged;
            return out;
        }
    }
}

}  // namespace hd

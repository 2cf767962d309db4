#pragma once
/// @file pde_laplace.hpp
/// @brief Continuation problem for the Laplace equation on the unit square.
///
/// Forward problem (P): u_xx + u_yy = 0, u_x(0,y) = 0, u(1,y) = q(y),
/// u(x,0) = u(x,1) = 0, observed trace Aq = u(0,.). Discretized with the
/// 5-point Laplacian on an (n+2) x (n+2) node grid, a ghost node for the
/// Neumann side, and solved exactly by a sine transform in y followed by one
/// tridiagonal solve in x per mode. The adjoint (D) system is the exact
/// transpose of the discrete (P) system.

#include <cmath>
#include <istream>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hd/dual.hpp"
#include "hd/hilbert.hpp"
#include "hd/oracle.hpp"
#include "hd/run_log.hpp"
#include "hd/solvers.hpp"

namespace hd {

struct Grid {
    std::size_t n = 0;
    double h = 0.0;

    explicit Grid(std::size_t n_) : n(n_), h(1.0 / static_cast<double>(n_ + 1)) {
        if (n < 3) throw ContractError("Grid: n must be at least 3");
    }

    /// Interior y-nodes j/(n+1), j = 1..n.
    double y(std::size_t j) const { return static_cast<double>(j) * h; }
};

namespace detail {

/// Thomas algorithm for sub/main/super diagonals; rhs is overwritten with the solution.
inline void thomas(const std::vector<double>& sub, const std::vector<double>& diag, const std::vector<double>& sup,
                   std::vector<double>& rhs) {
    const std::size_t m = diag.size();
    std::vector<double> c(m), d(m);
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for (std::size_t i = 1; i < m; ++i) {
        const double den = diag[i] - sub[i] * c[i - 1];
        c[i] = i + 1 < m ? sup[i] / den : 0.0;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / den;
    }
    rhs[m - 1] = d[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) rhs[i] = d[i] - c[i] * rhs[i + 1];
}

/// Mode-k x-system over nodes i = 0..n (i = 0 carries the ghost-node
/// Neumann row): u_{i+1} - (2 + s) u_i + u_{i-1} = 0 with s = 4 sin^2(k pi h/2).
struct ModeSystem {
    std::vector<double> sub, diag, sup;

    ModeSystem(std::size_t n, double s) : sub(n + 1, 1.0), diag(n + 1, -(2.0 + s)), sup(n + 1, 1.0) {
        sub[0] = 0.0;
        sup[0] = 2.0;
        sup[n] = 0.0;
    }

    ModeSystem transposed() const {
        ModeSystem t = *this;
        const std::size_t m = diag.size();
        for (std::size_t i = 0; i < m; ++i) {
            t.sub[i] = i > 0 ? sup[i - 1] : 0.0;
            t.sup[i] = i + 1 < m ? sub[i + 1] : 0.0;
        }
        return t;
    }
};

inline double mode_shift(std::size_t k, double h) {
    const double s = std::sin(static_cast<double>(k) * std::numbers::pi * h / 2.0);
    return 4.0 * s * s;
}

/// Sine table S[j][k] = sin(pi j k / (n+1)), j, k = 1..n, stored 0-based.
inline std::vector<double> sine_table(std::size_t n) {
    std::vector<double> S(n * n);
    const double w = std::numbers::pi / static_cast<double>(n + 1);
    for (std::size_t j = 1; j <= n; ++j)
        for (std::size_t k = 1; k <= n; ++k) S[(j - 1) * n + (k - 1)] = std::sin(w * static_cast<double>((j * k) % (2 * (n + 1))));
    return S;
}

/// out_k = sum_j S[j][k] in_j, fixed summation order.
inline std::vector<double> sine_transform(const std::vector<double>& S, std::size_t n, std::span<const double> in,
                                          double scale) {
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += S[j * n + k] * in[j];
        out[k] = scale * s;
    }
    return out;
}

inline void require_boundary(const HVector& v, const Grid& g, const char* what) {
    if (v.size() != g.n) throw ContractError(std::string(what) + ": expected " + std::to_string(g.n) + " samples");
}

}  // namespace detail

/// Trace u(0,.) of the discrete problem (P) with Dirichlet data q at x = 1.
inline HVector solve_P(const HVector& q, const Grid& grid) {
    detail::require_boundary(q, grid, "solve_P");
    const std::size_t n = grid.n;
    const auto S = detail::sine_table(n);
    const auto qhat = detail::sine_transform(S, n, q.values(), 1.0);
    std::vector<double> trace_hat(n);
    for (std::size_t k = 1; k <= n; ++k) {
        detail::ModeSystem M(n, detail::mode_shift(k, grid.h));
        std::vector<double> rhs(n + 1, 0.0);
        rhs[n] = -qhat[k - 1];
        detail::thomas(M.sub, M.diag, M.sup, rhs);
        trace_hat[k - 1] = rhs[0];
    }
    return HVector::computed(detail::sine_transform(S, n, trace_hat, 2.0 / static_cast<double>(n + 1)), grid.h);
}

/// Adjoint map lambda -> psi_x(1,.) from the transposed discrete system:
/// the Neumann data lambda enters at x = 0 and the flux is read next to x = 1.
inline HVector solve_D(const HVector& lambda, const Grid& grid) {
    detail::require_boundary(lambda, grid, "solve_D");
    const std::size_t n = grid.n;
    const auto S = detail::sine_table(n);
    const auto lhat = detail::sine_transform(S, n, lambda.values(), 1.0);
    std::vector<double> flux_hat(n);
    for (std::size_t k = 1; k <= n; ++k) {
        const detail::ModeSystem Mt = detail::ModeSystem(n, detail::mode_shift(k, grid.h)).transposed();
        std::vector<double> rhs(n + 1, 0.0);
        rhs[0] = -lhat[k - 1];
        detail::thomas(Mt.sub, Mt.diag, Mt.sup, rhs);
        flux_hat[k - 1] = rhs[n];
    }
    return HVector::computed(detail::sine_transform(S, n, flux_hat, 2.0 / static_cast<double>(n + 1)), grid.h);
}

/// Cached modal form of the discrete operator: A = S diag(g) S * 2/(n+1),
/// where g_k is the mode-k transfer factor from one tridiagonal solve.
class LaplaceTraceOperator {
public:
    explicit LaplaceTraceOperator(const Grid& grid) : grid_(grid), S_(detail::sine_table(grid.n)), g_(grid.n) {
        const std::size_t n = grid.n;
        for (std::size_t k = 1; k <= n; ++k) {
            detail::ModeSystem M(n, detail::mode_shift(k, grid.h));
            std::vector<double> rhs(n + 1, 0.0);
            rhs[n] = -1.0;
            detail::thomas(M.sub, M.diag, M.sup, rhs);
            g_[k - 1] = rhs[0];
        }
    }

    const Grid& grid() const { return grid_; }
    /// g_k for k = 1..n (0-based storage); the discrete analogue of sech(k pi).
    const std::vector<double>& mode_factors() const { return g_; }

    HVector forward(const HVector& q) const { return apply_modal(q); }
    /// Equal to forward: the discrete (D) system is the transpose of (P) and
    /// the modal factors coincide.
    HVector adjoint(const HVector& l) const { return apply_modal(l); }

private:
    HVector apply_modal(const HVector& v) const {
        const std::size_t n = grid_.n;
        auto vh = detail::sine_transform(S_, n, v.values(), 1.0);
        for (std::size_t k = 0; k < n; ++k) vh[k] *= g_[k];
        return HVector::computed(detail::sine_transform(S_, n, vh, 2.0 / static_cast<double>(n + 1)), grid_.h);
    }

    Grid grid_;
    std::vector<double> S_;
    std::vector<double> g_;
};

inline LinOp make_operator(const Grid& grid) {
    auto op = std::make_shared<const LaplaceTraceOperator>(grid);
    return LinOp(grid.n, grid.n, grid.h, grid.h, [op](const HVector& q) { return op->forward(q); },
                 [op](const HVector& l) { return op->adjoint(l); });
}

enum class InverseApproach { primal_least_squares, dual_min_norm };

struct InverseSettings {
    InverseApproach approach = InverseApproach::dual_min_norm;
    /// Primal runs use any Method; dual runs use stm, astm or gd_averaged.
    Method primal_method{MethodKind::stm, 1.0, 0.0};
    DualMethod dual_method = DualMethod::astm;
    double eps = 1e-8;
    /// Dual feasibility bound; defaults to eps.
    std::optional<double> eps_tilde;
    long max_iter = 1000000;
    /// Use the power-method estimate of ||A||^2 instead of the conservative L = 1.
    bool sharp_L = false;
    RunOptions options;
};

struct InverseResult {
    HVector q;
    RunLog log;
};

/// Recovers q from the observed trace f. The primal route minimizes
/// 1/2 ||Aq - f||^2 (stopping at J <= eps); the dual route solves the
/// minimum-norm problem through its dual.
inline InverseResult inverse_solve(const HVector& f, const Grid& grid, const InverseSettings& s) {
    detail::require_boundary(f, grid, "inverse_solve");
    if (!(s.eps > 0.0)) throw ContractError("inverse_solve: eps must be positive");
    const LinOp A = make_operator(grid);
    const double L = s.sharp_L ? operator_norm_sq(A).value : 1.0;
    InverseResult out;
    if (s.approach == InverseApproach::primal_least_squares) {
        LeastSquaresOptions lo;
        lo.L_hint = L;
        lo.compatible = true;
        const Oracle J = least_squares_oracle(A, f, lo);
        Method m = s.primal_method;
        if (m.kind == MethodKind::stm || m.kind == MethodKind::gd || m.kind == MethodKind::gd_averaged) m.L = L;
        SolveResult r = solve(J, A.zero_in(), m, StopRule::objective(s.eps) | StopRule::iterations(s.max_iter), s.options);
        out.q = std::move(r.q);
        out.log = std::move(r.log);
    } else {
        const DualProblem P = min_norm_dual(A, f, L);
        DualResult r = solve_dual(P, s.dual_method, s.eps, s.eps_tilde.value_or(s.eps), s.max_iter, s.options);
        out.q = std::move(r.q);
        out.log = std::move(r.log);
    }
    return out;
}

/// `y,value` rows over the interior nodes.
inline void write_boundary_csv(std::ostream& os, const HVector& v) {
    os << "y,value\n";
    const double h = v.weight();
    for (std::size_t j = 0; j < v.size(); ++j)
        os << format_double(static_cast<double>(j + 1) * h) << ',' << format_double(v[j]) << '\n';
}

inline HVector read_boundary_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "y,value") throw std::runtime_error("boundary CSV: bad header");
    std::vector<double> values;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto c = split_csv_line(line);
        if (c.size() != 2) throw std::runtime_error("boundary CSV: expected 2 columns");
        values.push_back(parse_double(c[1]));
    }
    if (values.empty()) throw std::runtime_error("boundary CSV: no rows");
    return HVector(std::move(values), 1.0 / static_cast<double>(values.size() + 1));
}

}  // namespace hd

#pragma once
/// @file hilbert.hpp
/// @brief Weighted vectors and linear operators approximating L2[0,1].
///
/// An HVector stores samples on a uniform grid together with a quadrature
/// weight, so that inner(u, v) = weight * sum(u_i v_i) approximates the L2
/// inner product. A LinOp bundles a forward map with its adjoint with respect
/// to these weighted inner products.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hd/random.hpp"

namespace hd {

/// Raised when a caller breaks an operation's precondition (dimension
/// mismatch, non-positive weight, missing configuration, ...).
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class HVector {
public:
    HVector() = default;

    /// @throws ContractError if weight <= 0 or any entry is non-finite.
    HVector(std::vector<double> values, double weight) : values_(std::move(values)), weight_(weight) {
        if (!(weight_ > 0.0) || !std::isfinite(weight_))
            throw ContractError("HVector weight must be positive and finite");
        for (double v : values_)
            if (!std::isfinite(v)) throw ContractError("HVector entries must be finite");
    }

    static HVector zeros(std::size_t n, double weight) { return HVector(std::vector<double>(n, 0.0), weight); }

    /// Wraps computed values without the finiteness scan; solvers detect
    /// blow-up themselves through all_finite().
    static HVector computed(std::vector<double> values, double weight) {
        HVector v;
        v.values_ = std::move(values);
        v.weight_ = weight;
        return v;
    }

    std::size_t size() const { return values_.size(); }
    double weight() const { return weight_; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    const std::vector<double>& data() const { return values_; }

    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    bool all_finite() const {
        for (double v : values_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool compatible(const HVector& other) const { return size() == other.size() && weight_ == other.weight_; }

    HVector& operator+=(const HVector& o) {
        require_compatible(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    HVector& operator-=(const HVector& o) {
        require_compatible(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    HVector& operator*=(double s) {
        for (double& v : values_) v *= s;
        return *this;
    }

    /// this += s * x
    HVector& axpy(double s, const HVector& x) {
        require_compatible(x);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * x.values_[i];
        return *this;
    }

    friend HVector operator+(HVector a, const HVector& b) { return a += b; }
    friend HVector operator-(HVector a, const HVector& b) { return a -= b; }
    friend HVector operator*(double s, HVector a) { return a *= s; }
    friend HVector operator*(HVector a, double s) { return a *= s; }

    friend bool operator==(const HVector& a, const HVector& b) {
        return a.weight_ == b.weight_ && a.values_ == b.values_;
    }

    void require_compatible(const HVector& o) const {
        if (!compatible(o))
            throw ContractError("HVector mismatch: sizes " + std::to_string(size()) + " vs " +
                                std::to_string(o.size()) + " or differing weights");
    }

private:
    std::vector<double> values_;
    double weight_ = 1.0;
};

/// (a*x + b*y), both vectors compatible.
inline HVector combine(double a, const HVector& x, double b, const HVector& y) {
    x.require_compatible(y);
    HVector r = x;
    auto rv = r.values();
    for (std::size_t i = 0; i < rv.size(); ++i) rv[i] = a * x[i] + b * y[i];
    return r;
}

inline double inner(const HVector& u, const HVector& v) {
    u.require_compatible(v);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return u.weight() * s;
}

inline double norm(const HVector& u) { return std::sqrt(inner(u, u)); }

/// Samples g(y_i) at y_i = i/(n+1), i = 1..n, weight 1/(n+1).
template <class F>
HVector sample_interior(std::size_t n, F&& g) {
    std::vector<double> v(n);
    const double h = 1.0 / static_cast<double>(n + 1);
    for (std::size_t i = 0; i < n; ++i) v[i] = g(static_cast<double>(i + 1) * h);
    return HVector(std::move(v), h);
}

/// Linear operator between two weighted spaces with its adjoint.
class LinOp {
public:
    using Map = std::function<HVector(const HVector&)>;

    LinOp(std::size_t dim_in, std::size_t dim_out, double weight_in, double weight_out, Map forward, Map adjoint)
        : dim_in_(dim_in), dim_out_(dim_out), weight_in_(weight_in), weight_out_(weight_out),
          forward_(std::move(forward)), adjoint_(std::move(adjoint)) {
        if (dim_in_ == 0 || dim_out_ == 0) throw ContractError("LinOp dimensions must be positive");
    }

    std::size_t dim_in() const { return dim_in_; }
    std::size_t dim_out() const { return dim_out_; }
    double weight_in() const { return weight_in_; }
    double weight_out() const { return weight_out_; }

    HVector apply(const HVector& q) const {
        check(q, dim_in_, weight_in_, "forward");
        return forward_(q);
    }
    HVector apply_adjoint(const HVector& lambda) const {
        check(lambda, dim_out_, weight_out_, "adjoint");
        return adjoint_(lambda);
    }

    HVector zero_in() const { return HVector::zeros(dim_in_, weight_in_); }
    HVector zero_out() const { return HVector::zeros(dim_out_, weight_out_); }

private:
    static void check(const HVector& v, std::size_t n, double w, const char* what) {
        if (v.size() != n || v.weight() != w)
            throw ContractError(std::string("LinOp ") + what + ": expected length " + std::to_string(n) +
                                ", got " + std::to_string(v.size()));
    }

    std::size_t dim_in_, dim_out_;
    double weight_in_, weight_out_;
    Map forward_, adjoint_;
};

/// Dense row-major matrix operator. The adjoint is (w_out / w_in) M^T so that
/// <Mq, l>_out = <q, M* l>_in holds for the weighted inner products.
inline LinOp matrix_operator(std::size_t rows, std::size_t cols, std::vector<double> row_major,
                             double weight_in = 1.0, double weight_out = 1.0) {
    if (row_major.size() != rows * cols) throw ContractError("matrix_operator: data size != rows*cols");
    auto m = std::make_shared<const std::vector<double>>(std::move(row_major));
    auto fwd = [m, rows, cols, weight_out](const HVector& q) {
        std::vector<double> r(rows, 0.0);
        for (std::size_t i = 0; i < rows; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols; ++j) s += (*m)[i * cols + j] * q[j];
            r[i] = s;
        }
        return HVector::computed(std::move(r), weight_out);
    };
    const double scale = weight_out / weight_in;
    auto adj = [m, rows, cols, weight_in, scale](const HVector& l) {
        std::vector<double> r(cols, 0.0);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) r[j] += (*m)[i * cols + j] * l[i];
        for (double& v : r) v *= scale;
        return HVector::computed(std::move(r), weight_in);
    };
    return LinOp(cols, rows, weight_in, weight_out, fwd, adj);
}

inline LinOp diagonal_operator(std::vector<double> diag, double weight = 1.0) {
    const std::size_t n = diag.size();
    auto d = std::make_shared<const std::vector<double>>(std::move(diag));
    auto map = [d](const HVector& q) {
        HVector r = q;
        for (std::size_t i = 0; i < r.size(); ++i) r[i] *= (*d)[i];
        return r;
    };
    return LinOp(n, n, weight, weight, map, map);
}

inline LinOp identity_operator(std::size_t n, double weight = 1.0) {
    auto id = [](const HVector& q) { return q; };
    return LinOp(n, n, weight, weight, id, id);
}

struct NormEstimate {
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Power method on A*A from a seeded pseudo-random start. The Rayleigh
/// quotient is a lower bound on ||A||^2; iteration stops once its relative
/// change drops below tol. Hitting max_iter is reported, not fatal.
inline NormEstimate operator_norm_sq(const LinOp& A, double tol = 1e-6, int max_iter = 10000,
                                     std::uint64_t seed = 0x5eed) {
    if (!(tol > 0.0)) throw ContractError("operator_norm_sq: tol must be positive");
    SplitMix64 rng(seed);
    std::vector<double> start(A.dim_in());
    for (double& v : start) v = rng.gaussian();
    HVector v(std::move(start), A.weight_in());
    v *= 1.0 / norm(v);

    NormEstimate est;
    double prev = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        HVector w = A.apply_adjoint(A.apply(v));
        const double rq = inner(v, w);
        est.value = rq;
        est.iterations = it;
        const double wn = norm(w);
        if (wn == 0.0) {
            est.converged = true;
            break;
        }
        if (it > 1 && std::fabs(rq - prev) <= tol * std::fabs(rq)) {
            est.converged = true;
            break;
        }
        prev = rq;
        v = (1.0 / wn) * std::move(w);
    }
    return est;
}

/// Largest normalized violation of <Aq, l> = <q, A*l> over random pairs,
/// scaled by ||q|| ||l|| sqrt(L) with L the power-method estimate.
inline double adjoint_defect(const LinOp& A, int trials, std::uint64_t seed) {
    if (trials < 1) throw ContractError("adjoint_defect: trials must be >= 1");
    double L = std::fabs(operator_norm_sq(A).value);
    if (L == 0.0) L = 1.0;
    SplitMix64 rng(seed);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        std::vector<double> qv(A.dim_in()), lv(A.dim_out());
        for (double& x : qv) x = rng.gaussian();
        for (double& x : lv) x = rng.gaussian();
        HVector q(std::move(qv), A.weight_in());
        HVector l(std::move(lv), A.weight_out());
        const double lhs = inner(A.apply(q), l);
        const double rhs = inner(q, A.apply_adjoint(l));
        worst = std::max(worst, std::fabs(lhs - rhs) / (norm(q) * norm(l) * std::sqrt(L)));
    }
    return worst;
}

}  // namespace hd

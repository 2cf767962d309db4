#pragma once

#include <Eigen/Dense>

#include "hd/hd.hpp"

namespace hd::test {

/// Dense matrix of A in coordinates, built column by column from unit vectors.
inline Eigen::MatrixXd assemble(const LinOp& A) {
    Eigen::MatrixXd M(A.dim_out(), A.dim_in());
    for (std::size_t j = 0; j < A.dim_in(); ++j) {
        HVector e = A.zero_in();
        e[j] = 1.0;
        const HVector c = A.apply(e);
        for (std::size_t i = 0; i < A.dim_out(); ++i) M(i, j) = c[i];
    }
    return M;
}

inline Eigen::MatrixXd assemble_adjoint(const LinOp& A) {
    Eigen::MatrixXd M(A.dim_in(), A.dim_out());
    for (std::size_t j = 0; j < A.dim_out(); ++j) {
        HVector e = A.zero_out();
        e[j] = 1.0;
        const HVector c = A.apply_adjoint(e);
        for (std::size_t i = 0; i < A.dim_in(); ++i) M(i, j) = c[i];
    }
    return M;
}

inline Eigen::VectorXd to_eigen(const HVector& v) {
    Eigen::VectorXd r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r(i) = v[i];
    return r;
}

inline HVector from_eigen(const Eigen::VectorXd& v, double weight = 1.0) {
    return HVector(std::vector<double>(v.data(), v.data() + v.size()), weight);
}

inline HVector random_vector(SplitMix64& rng, std::size_t n, double weight = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.gaussian();
    return HVector(std::move(v), weight);
}

/// Convex least-squares instance 1/2||Mq - f||^2 with an Eigen reference solution.
struct Quadratic {
    Eigen::MatrixXd M;
    Eigen::VectorXd f;
    LinOp A;
    HVector f_h;
    double L = 0.0;       // largest eigenvalue of M^T M
    double mu = 0.0;      // smallest eigenvalue of M^T M
    Eigen::VectorXd q_star;  // minimum-norm minimizer
    double J_star = 0.0;
};

inline Quadratic make_quadratic(const Eigen::MatrixXd& M, const Eigen::VectorXd& f) {
    std::vector<double> flat;
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j) flat.push_back(M(i, j));
    Quadratic Q{M, f, matrix_operator(M.rows(), M.cols(), flat),
                HVector(std::vector<double>(f.data(), f.data() + f.size()), 1.0), 0.0, 0.0, {}, 0.0};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M.transpose() * M);
    Q.L = es.eigenvalues().maxCoeff();
    Q.mu = std::max(0.0, es.eigenvalues().minCoeff());
    Q.q_star = M.completeOrthogonalDecomposition().solve(f);
    Q.J_star = 0.5 * (M * Q.q_star - f).squaredNorm();
    return Q;
}

/// Random instance with eigenvalues of M^T M in [mu, L] (mu may be 0 for a singular M).
inline Quadratic random_quadratic(std::uint64_t seed, int dim, double L, double mu) {
    SplitMix64 rng(seed);
    Eigen::MatrixXd G(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) G(i, j) = rng.gaussian();
    const Eigen::MatrixXd U = Eigen::HouseholderQR<Eigen::MatrixXd>(G).householderQ();
    Eigen::VectorXd s(dim);
    for (int i = 0; i < dim; ++i) {
        const double t = dim == 1 ? 1.0 : static_cast<double>(i) / (dim - 1);
        s(i) = std::sqrt(mu + (L - mu) * t);
    }
    s(dim - 1) = std::sqrt(L);
    const Eigen::MatrixXd M = U * s.asDiagonal() * U.transpose();
    Eigen::VectorXd f(dim);
    for (int i = 0; i < dim; ++i) f(i) = rng.gaussian();
    return make_quadratic(M, f);
}

}  // namespace hd::test

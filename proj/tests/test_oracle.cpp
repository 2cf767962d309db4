#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace hd;

namespace {

void expect_vec(const HVector& v, std::vector<double> want, double tol = 0.0) {
    ASSERT_EQ(v.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(v[i], want[i], tol) << "component " << i;
}

}  // namespace

TEST(LeastSquares, IdentityAtOrigin) {
    const Oracle J = least_squares_oracle(identity_operator(2), HVector({1, 2}, 1.0));
    const OracleResponse r = J.evaluate(HVector({0, 0}, 1.0));
    EXPECT_EQ(r.value, 2.5);
    expect_vec(r.gradient, {-1, -2});
}

TEST(LeastSquares, ZeroResidual) {
    const HVector f({1, 2}, 1.0);
    const OracleResponse r = least_squares_oracle(identity_operator(2), f).evaluate(f);
    EXPECT_EQ(r.value, 0.0);
    expect_vec(r.gradient, {0, 0});
}

TEST(LeastSquares, Diagonal) {
    const OracleResponse r =
        least_squares_oracle(diagonal_operator({1, 2}), HVector({1, 2}, 1.0)).evaluate(HVector({0, 0}, 1.0));
    EXPECT_EQ(r.value, 2.5);
    expect_vec(r.gradient, {-1, -4});
}

TEST(LeastSquares, GradientMatchesFiniteDifferences) {
    SplitMix64 rng(5);
    for (int t = 0; t < 20; ++t) {
        const int n = 1 + static_cast<int>(rng.next() % 64);
        const test::Quadratic Q = test::random_quadratic(rng.next(), n, 4.0, 0.0);
        const Oracle J = least_squares_oracle(Q.A, Q.f_h);
        const HVector q = test::random_vector(rng, n);
        // Relative to the gradient scale.
        const double scale = 1.0 + norm(J.gradient(q));
        EXPECT_LE(finite_diff_defect(J, q, 1e-5) * (1.0 + J.value(q)) / scale, 1e-6);
    }
}

TEST(LeastSquares, ConvexityInequality) {
    SplitMix64 rng(9);
    const test::Quadratic Q = test::random_quadratic(17, 12, 3.0, 0.0);
    const Oracle J = least_squares_oracle(Q.A, Q.f_h);
    const double L = *J.spec().L_hint * (1.0 + 1e-8);
    for (int t = 0; t < 200; ++t) {
        const HVector q1 = test::random_vector(rng, 12), q2 = test::random_vector(rng, 12);
        const HVector d = q2 - q1;
        const double gap = J.value(q2) - J.value(q1) - inner(J.gradient(q1), d);
        EXPECT_GE(gap, -1e-12 * (1.0 + J.value(q2)));
        EXPECT_LE(gap, 0.5 * L * inner(d, d) + 1e-12 * (1.0 + J.value(q2)));
    }
}

TEST(Regularize, OriginFixedPoint) {
    const Oracle J = regularize(least_squares_oracle(identity_operator(2), HVector({0, 0}, 1.0)), 3.0);
    const OracleResponse r = J.evaluate(HVector({0, 0}, 1.0));
    EXPECT_EQ(r.value, 0.0);
    expect_vec(r.gradient, {0, 0});
}

TEST(Regularize, AddsQuadratic) {
    LeastSquaresOptions o;
    o.mu_hint = 0.5;
    const Oracle base = least_squares_oracle(identity_operator(2), HVector({0, 0}, 1.0), o);
    const Oracle J = regularize(base, 1.0);
    const OracleResponse r = J.evaluate(HVector({2, 0}, 1.0));
    EXPECT_EQ(r.value, 4.0);
    expect_vec(r.gradient, {4, 0});
    EXPECT_EQ(*J.spec().mu_hint, 1.5);
    EXPECT_EQ(*J.spec().L_hint, *base.spec().L_hint + 1.0);
    EXPECT_THROW(regularize(base, 0.0), ContractError);
}

TEST(Perturb, VanishingDelta) {
    const test::Quadratic Q = test::random_quadratic(3, 6, 2.0, 0.1);
    const Oracle base = least_squares_oracle(Q.A, Q.f_h);
    const Oracle P = perturb(base, 1e-14, 1.0, 1);
    SplitMix64 rng(2);
    for (int t = 0; t < 20; ++t) {
        const HVector q = test::random_vector(rng, 6);
        EXPECT_NEAR(P.value(q), base.value(q), 1e-12);
        EXPECT_LE(norm(P.gradient(q) - base.gradient(q)), 1e-12);
    }
}

TEST(Perturb, GradientErrorBounded) {
    const test::Quadratic Q = test::random_quadratic(4, 8, 2.0, 0.0);
    const Oracle base = least_squares_oracle(Q.A, Q.f_h);
    const double delta = 1e-2, D = 3.0;
    const Oracle P = perturb(base, delta, D, 77);
    EXPECT_EQ(*P.spec().grad_error_bound, delta / (2 * D));
    SplitMix64 rng(8);
    for (int t = 0; t < 100; ++t) {
        const HVector q = test::random_vector(rng, 8);
        EXPECT_LE(norm(P.gradient(q) - base.gradient(q)), delta / (2 * D) * (1 + 1e-12));
    }
}

TEST(Perturb, Deterministic) {
    const Oracle P = perturb(least_squares_oracle(diagonal_operator({1, 2}), HVector({1, 1}, 1.0)), 0.1, 1.0, 5);
    const HVector q({0.3, -0.7}, 1.0);
    const OracleResponse a = P.evaluate(q), b = P.evaluate(q);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.gradient, b.gradient);
    EXPECT_EQ(P.value(q), a.value);
    EXPECT_EQ(P.gradient(q), a.gradient);
}

TEST(Perturb, DeltaOracleInequality) {
    const test::Quadratic Q = test::random_quadratic(12, 10, 2.0, 0.0);
    const Oracle base = least_squares_oracle(Q.A, Q.f_h);
    const double delta = 1e-3, D = 2.0;
    const Oracle P = perturb(base, delta, D, 3);
    const double L = Q.L * (1.0 + 1e-8);
    SplitMix64 rng(4);
    for (int t = 0; t < 300; ++t) {
        const HVector q1 = test::random_vector(rng, 10);
        HVector d = test::random_vector(rng, 10);
        d *= D * rng.uniform() / norm(d);
        const HVector q2 = q1 + d;
        const OracleResponse r1 = P.evaluate(q1);
        const double gap = base.value(q2) - r1.value - inner(r1.gradient, d);
        EXPECT_GE(gap, -1e-10);
        EXPECT_LE(gap, 0.5 * L * inner(d, d) + delta + 1e-10);
    }
}

TEST(FiniteDiff, ExactQuadratic) {
    const Oracle J = least_squares_oracle(diagonal_operator({1, 2, 3}), HVector({1, -1, 2}, 1.0));
    EXPECT_LE(finite_diff_defect(J, HVector({0.5, 0.1, -2}, 1.0), 1e-5), 1e-8);
}

TEST(FiniteDiff, ScaledGradientDetected) {
    OracleSpec s;
    s.dimension = 1;
    const Oracle J = make_oracle(
        s, [](const HVector& q) { return 0.5 * q[0] * q[0]; },
        [](const HVector& q) { return 2.0 * q; });
    EXPECT_GE(finite_diff_defect(J, HVector({1.3}, 1.0), 1e-5), 0.1);
}

TEST(FiniteDiff, ControlOracleAtZero) {
    const Oracle J = lq_oracle(20);
    EXPECT_LE(finite_diff_defect(J, HVector::zeros(20, 1.0 / 20), 1e-4), 1e-3);
}

TEST(EvalCounter, CountsEachRequest) {
    const Oracle J = least_squares_oracle(identity_operator(2), HVector({1, 2}, 1.0));
    EvalCounter c(J);
    const HVector q({0, 0}, 1.0);
    c.value(q);
    EXPECT_EQ(c.func_evals(), 1);
    EXPECT_EQ(c.grad_evals(), 0);
    c.gradient(q);
    EXPECT_EQ(c.grad_evals(), 1);
    c.evaluate(q);
    EXPECT_EQ(c.func_evals(), 2);
    EXPECT_EQ(c.grad_evals(), 2);
}

TEST(Oracle, RejectsWrongDimension) {
    const Oracle J = least_squares_oracle(identity_operator(2), HVector({1, 2}, 1.0));
    EXPECT_THROW(J.value(HVector({1, 2, 3}, 1.0)), ContractError);
}

#include <gtest/gtest.h>

#include <limits>
#include <sstream>

#include "hd/hd.hpp"

using namespace hd;

TEST(FormatDouble, RoundTrips) {
    SplitMix64 rng(1);
    for (int i = 0; i < 2000; ++i) {
        const double v = std::ldexp(rng.gaussian(), static_cast<int>(rng.next() % 200) - 100);
        EXPECT_EQ(parse_double(format_double(v)), v);
    }
    EXPECT_EQ(parse_double(format_double(0.1)), 0.1);
    EXPECT_EQ(format_double(0.25), "0.25");
    EXPECT_TRUE(std::isinf(parse_double(format_double(std::numeric_limits<double>::infinity()))));
    EXPECT_TRUE(std::isnan(parse_double(format_double(std::numeric_limits<double>::quiet_NaN()))));
}

TEST(RunLog, CsvRoundTripFromSolver) {
    const Oracle J = least_squares_oracle(diagonal_operator({1, 2}), HVector({1, 2}, 1.0));
    const SolveResult r = astm(J, HVector({0, 0}, 1.0), 0.0, StopRule::iterations(40));
    const std::string csv = r.log.to_csv();
    const RunLog back = RunLog::parse_csv(csv);
    ASSERT_EQ(back.records.size(), r.log.records.size());
    for (std::size_t i = 0; i < back.records.size(); ++i) EXPECT_EQ(back.records[i], r.log.records[i]);
    EXPECT_EQ(back.to_csv(), csv);
}

TEST(RunLog, CsvRoundTripWithFeasibilityAndNaN) {
    RunLog log;
    LogRecord a;
    a.k = 0;
    a.J = -1.5e-300;
    a.grad_norm = std::numeric_limits<double>::quiet_NaN();
    a.feasibility = 3.25;
    LogRecord b = a;
    b.k = 1;
    b.feasibility.reset();
    b.elapsed_ms = 12.5;
    log.records = {a, b};
    const RunLog back = RunLog::parse_csv(log.to_csv());
    EXPECT_EQ(back.records[0], a);
    EXPECT_EQ(back.records[1], b);
}

TEST(RunLog, HeaderIsFixed) {
    RunLog log;
    EXPECT_EQ(log.to_csv(), std::string(kRunLogHeader) + "\n");
    EXPECT_THROW(RunLog::parse_csv(std::string("k,J\n0,1\n")), std::runtime_error);
}

TEST(StopRule, CompositeTakesLooserBounds) {
    const StopRule s = StopRule::objective(1e-6) | StopRule::objective(1e-3) | StopRule::iterations(10) |
                       StopRule::iterations(5);
    EXPECT_EQ(*s.objective_below, 1e-3);
    EXPECT_EQ(*s.max_iter, 5);
    EXPECT_THROW(StopRule{}.validate(), ContractError);
    EXPECT_THROW(StopRule::grad_norm(0.0).validate(), ContractError);
}

TEST(Fit, LogLogSlope) {
    std::vector<long> k;
    std::vector<double> v;
    for (long i = 1; i <= 100; ++i) {
        k.push_back(i);
        v.push_back(3.0 / static_cast<double>(i * i));
    }
    EXPECT_NEAR(*tail_exponent(k, v), -2.0, 1e-12);
    EXPECT_FALSE(tail_exponent(std::span<const long>(k).first(5), std::span<const double>(v).first(5)));
}

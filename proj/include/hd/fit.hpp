#pragma once
/// @file fit.hpp
/// @brief Log-log slope fits for convergence-rate measurements.

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "hd/hilbert.hpp"
#include "hd/run_log.hpp"

namespace hd {

/// Least-squares slope of log(y) against log(x). Pairs with a non-positive
/// or non-finite coordinate are skipped; nullopt if fewer than two remain.
inline std::optional<double> loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ContractError("loglog_slope: length mismatch");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) return std::nullopt;
    const double den = static_cast<double>(n) * sxx - sx * sx;
    if (den == 0.0) return std::nullopt;
    return (static_cast<double>(n) * sxy - sx * sy) / den;
}

/// Slope of log(value) vs log(k) over the final half of the iterations
/// (k >= 1), requiring at least `min_points` points.
inline std::optional<double> tail_exponent(std::span<const long> k, std::span<const double> value,
                                           std::size_t min_points = 10) {
    std::vector<double> xs, ys;
    long k_max = 0;
    for (long kk : k) k_max = std::max(k_max, kk);
    for (std::size_t i = 0; i < k.size(); ++i) {
        if (k[i] < 1 || 2 * k[i] < k_max) continue;
        xs.push_back(static_cast<double>(k[i]));
        ys.push_back(value[i]);
    }
    if (xs.size() < min_points) return std::nullopt;
    return loglog_slope(xs, ys);
}

enum class LogColumn { J, feasibility, grad_norm };

/// tail_exponent of one RunLog column; J is taken relative to J_star.
inline std::optional<double> tail_exponent(const RunLog& log, LogColumn col, double J_star = 0.0,
                                           std::size_t min_points = 10) {
    std::vector<long> ks;
    std::vector<double> vs;
    for (const LogRecord& r : log.records) {
        double v = 0.0;
        switch (col) {
            case LogColumn::J: v = r.J - J_star; break;
            case LogColumn::grad_norm: v = r.grad_norm; break;
            case LogColumn::feasibility:
                if (!r.feasibility) continue;
                v = *r.feasibility;
                break;
        }
        ks.push_back(r.k);
        vs.push_back(v);
    }
    return tail_exponent(ks, vs, min_points);
}

}  // namespace hd

#pragma once
/// @file run_log.hpp
/// @brief Stopping rules, per-iteration convergence records and their CSV form.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "hd/hilbert.hpp"

namespace hd {

/// Disjunction of stopping conditions; any member that fires stops the run.
struct StopRule {
    std::optional<double> objective_below;
    std::optional<double> grad_norm_below;
    std::optional<long> max_iter;
    /// (eps, eps_tilde): duality gap <= eps and feasibility <= eps_tilde.
    std::optional<std::pair<double, double>> gap_and_feasibility;

    static StopRule objective(double eps) {
        StopRule s;
        s.objective_below = eps;
        return s;
    }
    static StopRule grad_norm(double eps) {
        StopRule s;
        s.grad_norm_below = eps;
        return s;
    }
    static StopRule iterations(long n) {
        StopRule s;
        s.max_iter = n;
        return s;
    }
    static StopRule gap_feasibility(double eps, double eps_tilde) {
        StopRule s;
        s.gap_and_feasibility = std::make_pair(eps, eps_tilde);
        return s;
    }

    /// Composite rule. Where both sides bound the same quantity the looser
    /// bound wins, since either member firing is enough.
    friend StopRule operator|(const StopRule& a, const StopRule& b) {
        auto loose = [](auto x, auto y, auto pick) -> decltype(x) {
            if (!x) return y;
            if (!y) return x;
            return pick(*x, *y);
        };
        StopRule r;
        r.objective_below = loose(a.objective_below, b.objective_below, [](double x, double y) { return std::max(x, y); });
        r.grad_norm_below = loose(a.grad_norm_below, b.grad_norm_below, [](double x, double y) { return std::max(x, y); });
        r.max_iter = loose(a.max_iter, b.max_iter, [](long x, long y) { return std::min(x, y); });
        r.gap_and_feasibility = loose(a.gap_and_feasibility, b.gap_and_feasibility, [](auto x, auto y) {
            return std::make_pair(std::max(x.first, y.first), std::max(x.second, y.second));
        });
        return r;
    }

    bool bounded() const {
        return objective_below || grad_norm_below || max_iter || gap_and_feasibility;
    }

    void validate() const {
        if (!bounded()) throw ContractError("StopRule: at least one bound is required");
        if (objective_below && std::isnan(*objective_below)) throw ContractError("StopRule: objective bound is NaN");
        if (grad_norm_below && !(*grad_norm_below > 0.0)) throw ContractError("StopRule: grad norm bound must be positive");
        if (max_iter && *max_iter < 0) throw ContractError("StopRule: max_iter must be nonnegative");
        if (gap_and_feasibility && !(gap_and_feasibility->first > 0.0 && gap_and_feasibility->second > 0.0))
            throw ContractError("StopRule: gap and feasibility bounds must be positive");
    }
};

enum class Status { converged, budget_exhausted, line_search_failed, oracle_failure };

inline const char* to_string(Status s) {
    switch (s) {
        case Status::converged: return "converged";
        case Status::budget_exhausted: return "budget_exhausted";
        case Status::line_search_failed: return "line_search_failed";
        case Status::oracle_failure: return "oracle_failure";
    }
    return "unknown";
}

struct LogRecord {
    long k = 0;
    double J = 0.0;
    double grad_norm = 0.0;
    double A_k = 0.0;
    double L_used = 0.0;
    long func_evals = 0;
    long grad_evals = 0;
    std::optional<double> feasibility;
    double elapsed_ms = 0.0;

    friend bool operator==(const LogRecord& a, const LogRecord& b) {
        auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
        return a.k == b.k && same(a.J, b.J) && same(a.grad_norm, b.grad_norm) && same(a.A_k, b.A_k) &&
               same(a.L_used, b.L_used) && a.func_evals == b.func_evals && a.grad_evals == b.grad_evals &&
               a.feasibility.has_value() == b.feasibility.has_value() &&
               (!a.feasibility || same(*a.feasibility, *b.feasibility)) && same(a.elapsed_ms, b.elapsed_ms);
    }
};

inline constexpr const char* kRunLogHeader = "k,J,grad_norm,A_k,L_used,func_evals,grad_evals,feasibility,elapsed_ms";

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error("bad number in CSV: '" + std::string(s) + "'");
    return v;
}

inline long parse_long(std::string_view s) {
    long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error("bad integer in CSV: '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

struct RunLog {
    std::vector<LogRecord> records;
    Status status = Status::budget_exhausted;
    std::string message;

    bool converged() const { return status == Status::converged; }
    long iterations() const { return records.empty() ? 0 : static_cast<long>(records.size()) - 1; }
    const LogRecord& last() const {
        if (records.empty()) throw std::logic_error("RunLog is empty");
        return records.back();
    }

    void write_csv(std::ostream& os) const {
        os << kRunLogHeader << '\n';
        for (const LogRecord& r : records) {
            os << r.k << ',' << format_double(r.J) << ',' << format_double(r.grad_norm) << ','
               << format_double(r.A_k) << ',' << format_double(r.L_used) << ',' << r.func_evals << ','
               << r.grad_evals << ',';
            if (r.feasibility) os << format_double(*r.feasibility);
            os << ',' << format_double(r.elapsed_ms) << '\n';
        }
    }

    std::string to_csv() const {
        std::ostringstream os;
        write_csv(os);
        return os.str();
    }

    /// Reads records written by write_csv. Status is not part of the CSV.
    static RunLog parse_csv(std::istream& is) {
        RunLog log;
        std::string line;
        if (!std::getline(is, line) || line != kRunLogHeader) throw std::runtime_error("RunLog CSV: bad header");
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            auto c = split_csv_line(line);
            if (c.size() != 9) throw std::runtime_error("RunLog CSV: expected 9 columns");
            LogRecord r;
            r.k = parse_long(c[0]);
            r.J = parse_double(c[1]);
            r.grad_norm = parse_double(c[2]);
            r.A_k = parse_double(c[3]);
            r.L_used = parse_double(c[4]);
            r.func_evals = parse_long(c[5]);
            r.grad_evals = parse_long(c[6]);
            if (!c[7].empty()) r.feasibility = parse_double(c[7]);
            r.elapsed_ms = parse_double(c[8]);
            log.records.push_back(r);
        }
        return log;
    }
    static RunLog parse_csv(const std::string& text) {
        std::istringstream is(text);
        return parse_csv(is);
    }
};

/// Options shared by every solver run.
struct RunOptions {
    /// Wall-clock timestamps make logs irreproducible, so they are opt-in.
    bool record_timing = false;
    /// Called with (k, iterate) for every logged record.
    std::function<void(long, const HVector&)> observer;
};

/// Milliseconds since construction, or 0 when timing is off.
class RunClock {
public:
    explicit RunClock(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
    double elapsed_ms() const {
        if (!enabled_) return 0.0;
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    bool enabled_;
    std::chrono::steady_clock::time_point start_;
};

}  // namespace hd

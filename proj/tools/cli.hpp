#pragma once
/// @file cli.hpp
/// @brief Experiment harness behind the `hd` command: JSON run configurations,
/// problem/solver construction, CSV and summary output.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hd/hd.hpp"

namespace hd::cli {

/// Invalid or incomplete configuration; `field` names the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error("config error in '" + field + "': " + what), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// Command-line values that take precedence over the config file.
struct Overrides {
    std::optional<std::string> output;
    std::optional<std::uint64_t> seed;
    std::optional<long> steps;
    std::optional<double> eps;
    bool timing = false;
};

struct MethodConfig {
    std::string name;
    std::optional<double> L;
    double mu = 0.0;
    std::optional<double> mu0;
    std::optional<double> mu_lower;
    double eps = 0.0;
    std::optional<double> eps_tilde;
    long max_iter = 100000;
    std::string stop = "objective";
    std::string inner = "stm";
    double stabilization_tol = 1e-3;
    std::optional<double> R_tilde;
};

struct RunConfig {
    std::string problem;
    std::string label;
    MethodConfig method;
    std::uint64_t seed = 0;
    std::optional<std::string> output;
    bool record_timing = false;

    // quadratic and dual_min_norm
    std::vector<std::vector<double>> matrix;
    std::vector<double> f;
    bool compatible = true;
    std::optional<double> mu_hint;
    std::optional<std::size_t> random_dim;
    double random_L = 4.0;
    double random_mu = 0.0;

    // pde_inverse
    std::size_t grid_n = 63;
    std::vector<std::pair<int, double>> modes{{1, 1.0}};
    std::string data = "continuum";
    std::optional<std::string> f_csv;
    double noise = 0.0;
    std::string approach = "dual_min_norm";
    bool sharp_L = false;
    std::optional<std::string> q_output;

    // control_lq
    std::size_t steps = 100;
    double a = 0.0;
    std::optional<std::string> u_output;

    // inexact oracle
    std::optional<double> delta;
    std::optional<double> diameter;
};

RunConfig parse_config(const nlohmann::json& j, const Overrides& o = {}, const std::string& default_label = "run");
RunConfig load_config(const std::string& path, const Overrides& o = {});

struct RunOutcome {
    RunLog log;
    HVector q;
    double J_star = 0.0;
    /// Least-squares objectives, whose residual norm is sqrt(2 J).
    bool least_squares = false;
    bool dual = false;
};

/// Builds the problem, runs the method and writes any configured side files
/// (recovered boundary data, controls). Throws ConfigError on bad input.
RunOutcome execute(const RunConfig& cfg);

/// Summary record printed by `run`.
nlohmann::json summary(const RunConfig& cfg, const RunOutcome& out, double wall_ms);

/// Wide comparison table over several runs with a footer of fitted exponents.
void write_comparison(std::ostream& os, const std::vector<RunConfig>& cfgs,
                      const std::vector<std::optional<RunOutcome>>& outs);

/// Entry point; returns the process exit code.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace hd::cli

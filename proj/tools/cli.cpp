#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

namespace hd::cli {

using nlohmann::json;

namespace {

enum class LogLevel { quiet, info, debug };

LogLevel log_level() {
    const char* v = std::getenv("HD_LOG_LEVEL");
    if (!v) return LogLevel::info;
    const std::string s(v);
    if (s == "quiet") return LogLevel::quiet;
    if (s == "debug") return LogLevel::debug;
    return LogLevel::info;
}

// ---- config reading -------------------------------------------------------

template <class T>
std::optional<T> get_opt(const json& j, const char* key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(path + key, "has the wrong type");
    }
}

template <class T>
T get_req(const json& j, const char* key, const std::string& path) {
    auto v = get_opt<T>(j, key, path);
    if (!v) throw ConfigError(path + key, "missing required field '" + std::string(key) + "'");
    return *v;
}

void require_positive(double v, const std::string& field) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(field, "must be positive and finite");
}

const std::vector<std::string> kProblems{"quadratic", "pde_inverse", "control_lq", "dual_min_norm"};

MethodConfig parse_method(const json& j) {
    if (!j.contains("method")) throw ConfigError("method", "missing required field 'method'");
    const json& m = j.at("method");
    if (!m.is_object()) throw ConfigError("method", "must be an object");
    const std::string p = "method.";
    MethodConfig mc;
    mc.name = get_req<std::string>(m, "name", p);
    mc.L = get_opt<double>(m, "L", p);
    mc.mu = get_opt<double>(m, "mu", p).value_or(0.0);
    mc.mu0 = get_opt<double>(m, "mu0", p);
    mc.mu_lower = get_opt<double>(m, "mu_lower", p);
    if (auto e = get_opt<double>(m, "eps", p)) mc.eps = *e;
    else throw ConfigError("method.eps", "missing required field 'eps'");
    mc.eps_tilde = get_opt<double>(m, "eps_tilde", p);
    mc.max_iter = get_opt<long>(m, "max_iter", p).value_or(100000);
    mc.stop = get_opt<std::string>(m, "stop", p).value_or("objective");
    mc.inner = get_opt<std::string>(m, "inner", p).value_or("stm");
    mc.stabilization_tol = get_opt<double>(m, "stabilization_tol", p).value_or(1e-3);
    mc.R_tilde = get_opt<double>(m, "R_tilde", p);
    if (mc.L) require_positive(*mc.L, "method.L");
    if (!(mc.mu >= 0.0)) throw ConfigError("method.mu", "must be nonnegative");
    if (mc.max_iter < 0) throw ConfigError("method.max_iter", "must be nonnegative");
    if (mc.stop != "objective" && mc.stop != "grad_norm")
        throw ConfigError("method.stop", "unknown stop rule '" + mc.stop + "' (objective, grad_norm)");
    return mc;
}

void apply_eps_override(MethodConfig& m, const Overrides& o) {
    if (o.eps) m.eps = *o.eps;
    require_positive(m.eps, "method.eps");
    if (m.eps_tilde) require_positive(*m.eps_tilde, "method.eps_tilde");
}

}  // namespace

RunConfig parse_config(const json& j, const Overrides& o, const std::string& default_label) {
    if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
    const auto version = get_opt<int>(j, "version", "");
    if (!version) throw ConfigError("version", "missing required field 'version'");
    if (*version != 1) throw ConfigError("version", "unsupported version " + std::to_string(*version));

    RunConfig c;
    c.problem = get_req<std::string>(j, "problem", "");
    if (std::find(kProblems.begin(), kProblems.end(), c.problem) == kProblems.end())
        throw ConfigError("problem", "unknown problem '" + c.problem + "'");
    c.label = get_opt<std::string>(j, "label", "").value_or(default_label);
    c.method = parse_method(j);
    apply_eps_override(c.method, o);
    c.seed = o.seed ? *o.seed : get_opt<std::uint64_t>(j, "seed", "").value_or(0);
    c.output = o.output ? o.output : get_opt<std::string>(j, "output", "");
    c.record_timing = o.timing || get_opt<bool>(j, "record_timing", "").value_or(false);

    if (auto m = get_opt<std::vector<std::vector<double>>>(j, "matrix", "")) c.matrix = *m;
    if (auto d = get_opt<std::vector<double>>(j, "diag", "")) {
        c.matrix.assign(d->size(), std::vector<double>(d->size(), 0.0));
        for (std::size_t i = 0; i < d->size(); ++i) c.matrix[i][i] = (*d)[i];
    }
    if (auto f = get_opt<std::vector<double>>(j, "f", "")) c.f = *f;
    c.compatible = get_opt<bool>(j, "compatible", "").value_or(true);
    c.mu_hint = get_opt<double>(j, "mu_hint", "");
    if (j.contains("random")) {
        const json& r = j.at("random");
        c.random_dim = get_req<std::size_t>(r, "dim", "random.");
        c.random_L = get_opt<double>(r, "L", "random.").value_or(4.0);
        c.random_mu = get_opt<double>(r, "mu", "random.").value_or(0.0);
        if (*c.random_dim == 0) throw ConfigError("random.dim", "must be positive");
        require_positive(c.random_L, "random.L");
        if (!(c.random_mu >= 0.0 && c.random_mu <= c.random_L)) throw ConfigError("random.mu", "must lie in [0, L]");
    }

    c.grid_n = get_opt<std::size_t>(j, "grid_n", "").value_or(63);
    if (auto modes = get_opt<std::vector<std::pair<int, double>>>(j, "modes", "")) c.modes = *modes;
    c.data = get_opt<std::string>(j, "data", "").value_or("continuum");
    c.f_csv = get_opt<std::string>(j, "f_csv", "");
    c.noise = get_opt<double>(j, "noise", "").value_or(0.0);
    c.approach = get_opt<std::string>(j, "approach", "").value_or("dual_min_norm");
    c.sharp_L = get_opt<bool>(j, "sharp_L", "").value_or(false);
    c.q_output = get_opt<std::string>(j, "q_output", "");

    if (o.steps) c.steps = static_cast<std::size_t>(*o.steps);
    else c.steps = get_opt<std::size_t>(j, "steps", "").value_or(100);
    if (o.steps && *o.steps <= 0) throw ConfigError("steps", "must be positive");
    c.a = get_opt<double>(j, "a", "").value_or(0.0);
    c.u_output = get_opt<std::string>(j, "u_output", "");

    c.delta = get_opt<double>(j, "delta", "");
    c.diameter = get_opt<double>(j, "diameter", "");

    // Problem-specific validation.
    if (c.problem == "quadratic" || c.problem == "dual_min_norm") {
        if (c.random_dim) {
            if (c.problem == "dual_min_norm") throw ConfigError("random", "only available for the quadratic problem");
        } else {
            if (c.matrix.empty()) throw ConfigError("matrix", "missing required field 'matrix' (or 'diag')");
            const std::size_t cols = c.matrix.front().size();
            if (cols == 0) throw ConfigError("matrix", "rows must be non-empty");
            for (const auto& row : c.matrix)
                if (row.size() != cols) throw ConfigError("matrix", "rows have different lengths");
            if (c.f.empty()) throw ConfigError("f", "missing required field 'f'");
            if (c.f.size() != c.matrix.size())
                throw ConfigError("f", "length " + std::to_string(c.f.size()) + " != matrix rows " +
                                           std::to_string(c.matrix.size()));
        }
    }
    if (c.problem == "pde_inverse") {
        if (c.grid_n < 3) throw ConfigError("grid_n", "must be at least 3");
        if (c.approach != "dual_min_norm" && c.approach != "primal_least_squares")
            throw ConfigError("approach", "unknown approach '" + c.approach + "'");
        if (c.data != "continuum" && c.data != "discrete") throw ConfigError("data", "must be continuum or discrete");
        for (const auto& [k, amp] : c.modes)
            if (k < 1 || static_cast<std::size_t>(k) > c.grid_n) throw ConfigError("modes", "mode index out of range");
        if (!(c.noise >= 0.0)) throw ConfigError("noise", "must be nonnegative");
    }
    if (c.problem == "control_lq" && c.steps == 0) throw ConfigError("steps", "must be positive");
    if (c.delta || c.diameter) {
        if (!c.delta || !c.diameter) throw ConfigError(c.delta ? "diameter" : "delta", "delta and diameter go together");
        require_positive(*c.delta, "delta");
        require_positive(*c.diameter, "diameter");
        if (c.problem == "dual_min_norm" || (c.problem == "pde_inverse" && c.approach == "dual_min_norm"))
            throw ConfigError("delta", "perturbation applies to primal problems only");
    }
    return c;
}

RunConfig load_config(const std::string& path, const Overrides& o) {
    std::ifstream in(path);
    if (!in) throw ConfigError("<file>", "cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("<file>", std::string("invalid JSON in ") + path + ": " + e.what());
    }
    return parse_config(j, o, std::filesystem::path(path).stem().string());
}

namespace {

// ---- problem construction --------------------------------------------------

LinOp matrix_from(const std::vector<std::vector<double>>& m) {
    const std::size_t rows = m.size(), cols = m.front().size();
    std::vector<double> flat;
    flat.reserve(rows * cols);
    for (const auto& r : m) flat.insert(flat.end(), r.begin(), r.end());
    return matrix_operator(rows, cols, std::move(flat));
}

StopRule primal_stop(const MethodConfig& m) {
    const StopRule base = m.stop == "grad_norm" ? StopRule::grad_norm(m.eps) : StopRule::objective(m.eps);
    return base | StopRule::iterations(m.max_iter);
}

double need_L(const MethodConfig& m, const Oracle& o) {
    if (m.L) return *m.L;
    if (o.spec().L_hint) return *o.spec().L_hint;
    throw ConfigError("method.L", "method '" + m.name + "' needs L and the problem provides no estimate");
}

std::optional<Method> simple_method(const std::string& name, const MethodConfig& m, const Oracle& o) {
    Method r;
    r.mu = m.mu;
    if (name == "stm") r.kind = MethodKind::stm;
    else if (name == "astm") r.kind = MethodKind::astm;
    else if (name == "gd") r.kind = MethodKind::gd;
    else if (name == "agd") r.kind = MethodKind::agd;
    else if (name == "gd_averaged") r.kind = MethodKind::gd_averaged;
    else if (name == "agd_averaged") r.kind = MethodKind::agd_averaged;
    else if (name == "gd_line_search") r.kind = MethodKind::gd_line_search;
    else return std::nullopt;
    const bool adaptive = r.kind == MethodKind::astm || r.kind == MethodKind::agd || r.kind == MethodKind::agd_averaged;
    if (adaptive) r.L = m.L.value_or(1.0);
    else if (r.kind == MethodKind::gd_line_search) r.L = m.L.value_or(o.spec().L_hint.value_or(1.0));
    else r.L = need_L(m, o);
    return r;
}

SolveResult run_primal(const Oracle& oracle, const HVector& y0, const MethodConfig& m, const RunOptions& opts) {
    if (auto method = simple_method(m.name, m, oracle)) return solve(oracle, y0, *method, primal_stop(m), opts);
    if (m.name == "restart_half") {
        auto inner = simple_method(m.inner, m, oracle);
        if (!inner) throw ConfigError("method.inner", "unknown inner method '" + m.inner + "'");
        RestartBudget b;
        b.max_segment_iter = m.max_iter;
        return restart_half(*inner, oracle, y0, m.eps, b, opts).result;
    }
    if (m.name == "rstm") {
        if (!m.mu0) throw ConfigError("method.mu0", "missing required field 'mu0'");
        require_positive(*m.mu0, "method.mu0");
        RstmSettings s;
        s.L = m.L;
        s.mu0 = *m.mu0;
        s.eps = m.eps;
        s.mu_lower = m.mu_lower;
        s.options = opts;
        return rstm(oracle, y0, s).result;
    }
    if (m.name == "l_doubling") {
        require_positive(m.stabilization_tol, "method.stabilization_tol");
        return l_doubling(oracle, y0, primal_stop(m), m.stabilization_tol, m.L.value_or(1.0), opts).result;
    }
    throw ConfigError("method.name", "unknown method '" + m.name + "'");
}

DualResult run_dual(const DualProblem& P, const MethodConfig& m, const RunOptions& opts) {
    const double eps_tilde = m.eps_tilde.value_or(m.eps);
    if (m.name == "regularized") {
        if (!m.R_tilde) throw ConfigError("method.R_tilde", "missing required field 'R_tilde'");
        require_positive(*m.R_tilde, "method.R_tilde");
        RegularizedDualSettings s;
        s.options = opts;
        return solve_dual_regularized(P, m.eps, eps_tilde, *m.R_tilde, s);
    }
    DualMethod dm;
    if (m.name == "stm") dm = DualMethod::stm;
    else if (m.name == "astm") dm = DualMethod::astm;
    else if (m.name == "gd_averaged") dm = DualMethod::gd_averaged;
    else throw ConfigError("method.name", "dual problems support stm, astm, gd_averaged, regularized; got '" + m.name + "'");
    return solve_dual(P, dm, m.eps, eps_tilde, m.max_iter, opts);
}

Oracle maybe_perturb(const Oracle& o, const RunConfig& c) {
    if (!c.delta) return o;
    return perturb(o, *c.delta, *c.diameter, c.seed);
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    body(os);
}

HVector pde_data(const RunConfig& c, const Grid& grid, const LinOp& A) {
    HVector f;
    if (c.f_csv) {
        std::ifstream in(*c.f_csv);
        if (!in) throw ConfigError("f_csv", "cannot open " + *c.f_csv);
        f = read_boundary_csv(in);
        if (f.size() != grid.n) throw ConfigError("f_csv", "sample count does not match grid_n");
    } else if (c.data == "discrete") {
        HVector q = HVector::zeros(grid.n, grid.h);
        for (const auto& [k, amp] : c.modes)
            q += sample_interior(grid.n, [k = k, amp = amp](double y) { return amp * std::sin(k * std::numbers::pi * y); });
        f = A.apply(q);
    } else {
        f = HVector::zeros(grid.n, grid.h);
        for (const auto& [k, amp] : c.modes)
            f += sample_interior(grid.n, [k = k, amp = amp](double y) {
                return amp * std::sin(k * std::numbers::pi * y) / std::cosh(k * std::numbers::pi);
            });
    }
    if (c.noise > 0.0) {
        SplitMix64 rng(c.seed ^ 0x6e6f697365ULL);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] += c.noise * rng.gaussian();
    }
    return f;
}

}  // namespace

RunOutcome execute(const RunConfig& c) {
    RunOptions opts;
    opts.record_timing = c.record_timing;
    const MethodConfig& m = c.method;
    RunOutcome out;
    try {
        if (c.problem == "quadratic") {
            LinOp A = c.random_dim ? LinOp(identity_operator(1)) : matrix_from(c.matrix);
            HVector f;
            LeastSquaresOptions lo;
            lo.compatible = c.compatible;
            lo.mu_hint = c.mu_hint;
            if (c.random_dim) {
                // Diagonal operator whose squared entries spread from mu to L.
                const std::size_t n = *c.random_dim;
                SplitMix64 rng(c.seed);
                std::vector<double> d(n), fv(n);
                for (std::size_t i = 0; i < n; ++i) {
                    const double t = n == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(n - 1);
                    const double lo_eig = c.random_mu > 0.0 ? c.random_mu : c.random_L * 1e-3;
                    d[i] = std::sqrt(i == n - 1 ? c.random_L : lo_eig + (c.random_L - lo_eig) * t * t);
                    fv[i] = rng.gaussian();
                }
                A = diagonal_operator(d);
                f = HVector(fv, 1.0);
                lo.L_hint = c.random_L;
                if (c.random_mu > 0.0 && !lo.mu_hint) lo.mu_hint = c.random_mu;
            } else {
                f = HVector(c.f, 1.0);
            }
            const Oracle J = maybe_perturb(least_squares_oracle(A, f, lo), c);
            SolveResult r = run_primal(J, A.zero_in(), m, opts);
            out.log = std::move(r.log);
            out.q = std::move(r.q);
            out.least_squares = true;
            out.J_star = J.spec().J_star_known.value_or(0.0);
        } else if (c.problem == "dual_min_norm") {
            const LinOp A = matrix_from(c.matrix);
            const DualProblem P = min_norm_dual(A, HVector(c.f, 1.0));
            DualResult r = run_dual(P, m, opts);
            out.log = std::move(r.log);
            out.q = std::move(r.q);
            out.dual = true;
        } else if (c.problem == "pde_inverse") {
            const Grid grid(c.grid_n);
            const LinOp A = make_operator(grid);
            const HVector f = pde_data(c, grid, A);
            const double L = c.sharp_L ? operator_norm_sq(A).value : 1.0;
            if (c.approach == "primal_least_squares") {
                LeastSquaresOptions lo;
                lo.L_hint = L;
                lo.compatible = c.compatible && c.noise == 0.0;
                const Oracle J = maybe_perturb(least_squares_oracle(A, f, lo), c);
                SolveResult r = run_primal(J, A.zero_in(), m, opts);
                out.log = std::move(r.log);
                out.q = std::move(r.q);
                out.least_squares = true;
            } else {
                const DualProblem P = min_norm_dual(A, f, L);
                DualResult r = run_dual(P, m, opts);
                out.log = std::move(r.log);
                out.q = std::move(r.q);
                out.dual = true;
            }
            if (c.q_output) write_file(*c.q_output, [&](std::ostream& os) { write_boundary_csv(os, out.q); });
        } else if (c.problem == "control_lq") {
            const ControlProblem p = scalar_lq_problem(c.a);
            const ControlGrid g(p, c.steps);
            ControlOracleOptions co;
            co.mu_hint = 1.0;
            if (c.a == 0.0) {
                co.L_hint = 2.0;
                co.J_star_known = 0.25;
            }
            if (c.mu_hint) co.mu_hint = c.mu_hint;
            const Oracle J = maybe_perturb(control_oracle(p, g, co), c);
            if (c.a != 0.0 && m.stop == "objective" && !J.spec().J_star_known)
                throw ConfigError("method.stop", "control_lq with a != 0 has no known optimal value; use grad_norm");
            SolveResult r = run_primal(J, HVector::zeros(g.steps, g.tau), m, opts);
            out.log = std::move(r.log);
            out.q = std::move(r.q);
            out.J_star = J.spec().J_star_known.value_or(0.0);
            if (c.u_output) write_file(*c.u_output, [&](std::ostream& os) { write_control_csv(os, out.q, 1); });
        }
    } catch (const ContractError& e) {
        throw ConfigError("problem", e.what());
    }
    return out;
}

json summary(const RunConfig& cfg, const RunOutcome& out, double wall_ms) {
    json s;
    s["problem"] = cfg.problem;
    s["method"] = cfg.method.name;
    s["status"] = to_string(out.log.status);
    s["iterations"] = out.log.iterations();
    if (!out.log.records.empty()) {
        const LogRecord& r = out.log.last();
        s["J"] = r.J;
        s["grad_norm"] = r.grad_norm;
        s["func_evals"] = r.func_evals;
        s["grad_evals"] = r.grad_evals;
        s["feasibility"] = r.feasibility ? json(*r.feasibility) : json(nullptr);
    }
    s["wall_ms"] = cfg.record_timing ? json(wall_ms) : json(nullptr);
    if (!out.log.message.empty()) s["message"] = out.log.message;
    return s;
}

namespace {

std::vector<double> feasibility_column(const RunOutcome& o) {
    std::vector<double> v;
    for (const LogRecord& r : o.log.records) {
        if (o.dual && r.feasibility) v.push_back(*r.feasibility);
        else if (o.least_squares) v.push_back(std::sqrt(2.0 * std::max(r.J, 0.0)));
        else v.push_back(std::numeric_limits<double>::quiet_NaN());
    }
    return v;
}

std::string cell(std::optional<double> v) { return v && !std::isnan(*v) ? format_double(*v) : std::string(); }

}  // namespace

void write_comparison(std::ostream& os, const std::vector<RunConfig>& cfgs,
                      const std::vector<std::optional<RunOutcome>>& outs) {
    std::vector<std::string> labels;
    std::map<std::string, int> seen;
    for (const RunConfig& c : cfgs) {
        const int n = ++seen[c.label];
        labels.push_back(n == 1 ? c.label : c.label + "#" + std::to_string(n));
    }
    os << 'k';
    for (const std::string& l : labels) os << ',' << l << "_J," << l << "_feasibility";
    os << '\n';

    long k_max = -1;
    std::vector<std::map<long, std::pair<double, double>>> cols(outs.size());
    for (std::size_t i = 0; i < outs.size(); ++i) {
        if (!outs[i]) continue;
        const auto feas = feasibility_column(*outs[i]);
        const auto& recs = outs[i]->log.records;
        for (std::size_t r = 0; r < recs.size(); ++r) {
            cols[i][recs[r].k] = {recs[r].J, feas[r]};
            k_max = std::max(k_max, recs[r].k);
        }
    }
    for (long k = 0; k <= k_max; ++k) {
        os << k;
        for (const auto& col : cols) {
            auto it = col.find(k);
            if (it == col.end()) os << ",,";
            else os << ',' << cell(it->second.first) << ',' << cell(it->second.second);
        }
        os << '\n';
    }
    os << "exponent";
    for (std::size_t i = 0; i < outs.size(); ++i) {
        if (!outs[i]) {
            os << ",,";
            continue;
        }
        const auto feas = feasibility_column(*outs[i]);
        std::vector<long> ks;
        for (const LogRecord& r : outs[i]->log.records) ks.push_back(r.k);
        os << ',' << cell(tail_exponent(outs[i]->log, LogColumn::J, outs[i]->J_star)) << ','
           << cell(tail_exponent(ks, feas));
    }
    os << '\n';
}

namespace {

int exit_code(Status s) {
    switch (s) {
        case Status::converged: return 0;
        case Status::budget_exhausted: return 2;
        default: return 3;
    }
}

}  // namespace

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
    const LogLevel level = log_level();
    CLI::App app{"First-order methods for discretized Hilbert-space problems"};
    app.require_subcommand(1);

    Overrides ov;
    std::string run_config;
    std::vector<std::string> compare_configs;
    std::optional<std::string> output;
    std::optional<std::uint64_t> seed;
    std::optional<long> steps;
    std::optional<double> eps;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--output", output, "output CSV path (overrides the config)");
        sub->add_option("--seed", seed, "seed (overrides the config)");
        sub->add_option("--steps", steps, "control lattice steps (control_lq)");
        sub->add_option("--eps", eps, "target accuracy (overrides method.eps)");
        sub->add_flag("--timing", ov.timing, "record wall-clock time in logs and summaries");
    };
    CLI::App* run = app.add_subcommand("run", "run one configuration");
    run->add_option("config", run_config, "JSON run configuration")->required();
    add_common(run);
    CLI::App* cmp = app.add_subcommand("compare", "run several configurations and tabulate them");
    cmp->add_option("configs", compare_configs, "JSON run configurations")->required()->expected(2, -1);
    add_common(cmp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 1;
    }
    ov.output = output;
    ov.seed = seed;
    ov.steps = steps;
    ov.eps = eps;

    if (run->parsed()) {
        RunConfig cfg;
        try {
            cfg = load_config(run_config, ov);
        } catch (const ConfigError& e) {
            err << e.what() << '\n';
            return 1;
        }
        const auto t0 = std::chrono::steady_clock::now();
        RunOutcome res;
        try {
            res = execute(cfg);
        } catch (const ConfigError& e) {
            err << e.what() << '\n';
            return 1;
        } catch (const std::exception& e) {
            err << "run failed: " << e.what() << '\n';
            return 1;
        }
        const double wall = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        if (cfg.output) {
            std::ofstream os(*cfg.output);
            if (!os) {
                err << "cannot write " << *cfg.output << '\n';
                return 1;
            }
            res.log.write_csv(os);
        }
        if (level != LogLevel::quiet)
            err << "[hd] " << cfg.label << ": " << to_string(res.log.status) << " after " << res.log.iterations()
                << " iterations\n";
        if (level == LogLevel::debug && !res.log.message.empty()) err << "[hd] " << res.log.message << '\n';
        out << summary(cfg, res, wall).dump() << '\n';
        return exit_code(res.log.status);
    }

    // compare
    if (!ov.output) {
        err << "compare: --output is required\n";
        return 1;
    }
    std::vector<RunConfig> cfgs;
    Overrides per_run = ov;
    per_run.output.reset();
    try {
        for (const std::string& p : compare_configs) cfgs.push_back(load_config(p, per_run));
    } catch (const ConfigError& e) {
        err << e.what() << '\n';
        return 1;
    }
    for (const RunConfig& c : cfgs)
        if (c.problem != cfgs.front().problem) {
            err << "config error in 'problem': compare needs runs on the same problem\n";
            return 1;
        }
    std::vector<std::optional<RunOutcome>> outs;
    json summaries = json::array();
    for (RunConfig& c : cfgs) {
        c.output.reset();
        try {
            outs.emplace_back(execute(c));
            summaries.push_back(summary(c, *outs.back(), 0.0));
            if (level != LogLevel::quiet)
                err << "[hd] " << c.label << ": " << to_string(outs.back()->log.status) << '\n';
        } catch (const std::exception& e) {
            if (level != LogLevel::quiet) err << "[hd] " << c.label << " failed: " << e.what() << '\n';
            outs.emplace_back(std::nullopt);
            summaries.push_back(json{{"label", c.label}, {"status", "error"}, {"message", e.what()}});
        }
    }
    std::ofstream os(*ov.output);
    if (!os) {
        err << "cannot write " << *ov.output << '\n';
        return 1;
    }
    write_comparison(os, cfgs, outs);
    out << summaries.dump() << '\n';
    return 0;
}

}  // namespace hd::cli

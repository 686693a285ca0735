#include "dhint/cli.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

#include "dhint/diagnostics.hpp"

namespace dhint {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double parse_double(std::string_view key, std::string_view value, std::size_t line) {
    double out = 0.0;
    const std::string text(value);
    try {
        std::size_t used = 0;
        out = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
        throw ConfigError("'" + std::string(key) + "' expects a number, got '" + text + "'", line);
    }
    if (!std::isfinite(out)) throw ConfigError("'" + std::string(key) + "' must be finite", line);
    return out;
}

long long parse_integer(std::string_view key, std::string_view value, std::size_t line) {
    long long out = 0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError("'" + std::string(key) + "' expects an integer, got '" + std::string(value) + "'",
                          line);
    }
    return out;
}

template <typename F>
auto rethrow_as_config(F&& f, std::size_t line) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what(), line);
    }
}

}  // namespace

std::string format_number(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void RunConfig::validate() const {
    auto need = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    for (double v : {gamma, alpha, rho, nu, half_length, dt, final_time, newton_tol}) {
        need(std::isfinite(v), "all numeric parameters must be finite");
    }
    need(gamma >= 0.0, "gamma must be non-negative");
    need(half_length > 0.0, "L must be positive");
    need(nodes >= 4 && nodes % 2 == 0, "M must be even and at least 4");
    need(dt > 0.0, "dt must be positive");
    need(final_time >= 0.0, "T must be non-negative");
    need(newton_tol > 0.0, "newton_tol must be positive");
    need(newton_max_iter >= 1, "newton_max_iter must be at least 1");
    need(record_every >= 1, "record_every must be at least 1");
    for (const auto& t : {theta_rho, theta_nu, theta}) {
        need(!t || (*t >= 0.0 && *t <= 1.0), "theta values must lie in [0, 1]");
    }
    if (model == ModelKind::nls) need(alpha > 0.0, "NLS alpha must be positive");
    if (model == ModelKind::nls) {
        need(scheme != SchemeKind::ek1 && scheme != SchemeKind::ek2 && scheme != SchemeKind::kahan_plain &&
                 scheme != SchemeKind::kahan2_plain,
             "Kahan schemes need a quadratic field; the NLS field is cubic");
    }
    need(variant == SchemeVariant::canonical || scheme == SchemeKind::cimp,
         "scheme_variant printed applies to cimp only");
}

std::vector<std::string> preset_names() { return {"burgers-paper", "kdv-paper", "nls-paper"}; }

RunConfig preset(std::string_view name) {
    RunConfig c;
    if (name == "burgers-paper") {
        c.model = ModelKind::burgers;
        c.scheme = SchemeKind::ek2;
        c.gamma = 0.25;
        c.half_length = 3.14159265358979323846;
        c.nodes = 80;
        c.dt = 0.009;
        c.final_time = 50.0;
        return c;
    }
    if (name == "kdv-paper") {
        c.model = ModelKind::kdv;
        c.scheme = SchemeKind::ek2;
        c.nu = -1e-5;
        c.gamma = 1e-2;
        c.alpha = -3.0 / 8.0;
        c.rho = -10.0;
        c.half_length = 10.0;
        c.nodes = 248;
        c.dt = 0.009;
        c.final_time = 50.0;
        return c;
    }
    if (name == "nls-paper") {
        c.model = ModelKind::nls;
        c.scheme = SchemeKind::lie;
        c.alpha = 2.0;
        c.gamma = 5e-4;
        c.half_length = 25.0;
        c.nodes = 1024;
        c.dt = 0.001;
        c.final_time = 10.0;
        return c;
    }
    throw ConfigError("unknown preset '" + std::string(name) + "'");
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view value, std::size_t line) {
    key = trim(key);
    value = trim(value);
    if (value.empty()) throw ConfigError("'" + std::string(key) + "' has an empty value", line);
    auto num = [&] { return parse_double(key, value, line); };
    auto positive_count = [&]() -> std::size_t {
        const long long v = parse_integer(key, value, line);
        if (v < 0) throw ConfigError("'" + std::string(key) + "' must be non-negative", line);
        return static_cast<std::size_t>(v);
    };

    if (key == "model") {
        c.model = rethrow_as_config([&] { return parse_model_kind(value); }, line);
    } else if (key == "scheme") {
        c.scheme = rethrow_as_config([&] { return parse_scheme_kind(value); }, line);
    } else if (key == "scheme_variant") {
        c.variant = rethrow_as_config([&] { return parse_scheme_variant(value); }, line);
    } else if (key == "gamma") {
        c.gamma = num();
    } else if (key == "alpha") {
        c.alpha = num();
    } else if (key == "rho") {
        c.rho = num();
    } else if (key == "nu") {
        c.nu = num();
    } else if (key == "L") {
        c.half_length = num();
    } else if (key == "M") {
        c.nodes = positive_count();
    } else if (key == "dt") {
        c.dt = num();
    } else if (key == "T") {
        c.final_time = num();
    } else if (key == "theta_rho") {
        c.theta_rho = num();
    } else if (key == "theta_nu") {
        c.theta_nu = num();
    } else if (key == "theta") {
        c.theta = num();
    } else if (key == "newton_tol") {
        c.newton_tol = num();
    } else if (key == "newton_max_iter") {
        c.newton_max_iter = static_cast<int>(parse_integer(key, value, line));
    } else if (key == "nonlinear_method") {
        if (value == "newton") c.nonlinear_method = NonlinearMethod::newton;
        else if (value == "fixed_point") c.nonlinear_method = NonlinearMethod::fixed_point;
        else throw ConfigError("nonlinear_method must be newton or fixed_point", line);
    } else if (key == "jacobian") {
        if (value == "analytic") c.jacobian = JacobianKind::analytic;
        else if (value == "finite_difference") c.jacobian = JacobianKind::finite_difference;
        else throw ConfigError("jacobian must be analytic or finite_difference", line);
    } else if (key == "record_every") {
        c.record_every = positive_count();
    } else if (key == "polarization") {
        if (value == "symmetric") c.polarization = NlsPolarizedForm::symmetric;
        else if (value == "printed") c.polarization = NlsPolarizedForm::printed;
        else throw ConfigError("polarization must be symmetric or printed", line);
    } else if (key == "output") {
        c.output = std::string(value);
    } else if (key == "preset") {
        c = preset(value);
    } else {
        throw ConfigError("unknown key '" + std::string(key) + "'", line);
    }
}

RunConfig parse_config(std::string_view text, RunConfig base) {
    struct Entry {
        std::string key, value;
        std::size_t line;
    };
    std::vector<Entry> entries;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("malformed section header", line_no);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("expected key = value", line_no);
        const std::string key(trim(line.substr(0, eq)));
        if (key.empty()) throw ConfigError("missing key before '='", line_no);
        entries.push_back({key, std::string(trim(line.substr(eq + 1))), line_no});
        if (end == text.size()) break;
    }

    std::set<std::string> seen;
    for (const auto& e : entries) {
        if (!seen.insert(e.key).second) throw ConfigError("duplicate key '" + e.key + "'", e.line);
    }
    for (const auto& e : entries) {
        if (e.key == "preset") apply_setting(base, e.key, e.value, e.line);
    }
    for (const auto& e : entries) {
        if (e.key != "preset") apply_setting(base, e.key, e.value, e.line);
    }
    base.validate();
    return base;
}

ConformalModel build_model(const RunConfig& c) {
    return rethrow_as_config(
        [&] {
            const Grid grid = build_grid(c.half_length, c.nodes);
            switch (c.model) {
                case ModelKind::burgers: return burgers_model({c.gamma, grid});
                case ModelKind::kdv: {
                    KdvParams p;
                    p.alpha = c.alpha;
                    p.rho = c.rho;
                    p.nu = c.nu;
                    p.gamma = c.gamma;
                    p.grid = grid;
                    if (c.theta_rho) p.theta_rho = *c.theta_rho;
                    if (c.theta_nu) p.theta_nu = *c.theta_nu;
                    return kdv_model(p);
                }
                case ModelKind::nls: {
                    NlsParams p;
                    p.alpha = c.alpha;
                    p.gamma = c.gamma;
                    p.grid = grid;
                    if (c.theta) p.theta = *c.theta;
                    p.polarized_form = c.polarization;
                    return nls_model(p);
                }
            }
            throw InvalidArgument("unknown model");
        },
        0);
}

Vector build_initial_state(const RunConfig& c) {
    return initial_condition(c.model, build_grid(c.half_length, c.nodes));
}

SchemeSpec build_scheme(const RunConfig& c) {
    SchemeSpec s;
    s.kind = c.scheme;
    s.dt = c.dt;
    s.solver.tolerance = c.newton_tol;
    s.solver.max_iterations = c.newton_max_iter;
    s.solver.method = c.nonlinear_method;
    s.solver.jacobian = c.jacobian;
    s.variant = c.variant;
    return s;
}

int exit_code_for(RunStatus status) {
    switch (status) {
        case RunStatus::ok: return exit_ok;
        case RunStatus::non_convergence: return exit_non_convergence;
        case RunStatus::blow_up: return exit_blow_up;
    }
    return exit_blow_up;
}

void write_run_csv(const RunRecord& rec, std::size_t record_every, std::ostream& out) {
    if (record_every == 0) throw InvalidArgument("record_every must be positive");
    const std::size_t levels = rec.levels();
    std::vector<std::vector<std::optional<double>>> residuals;
    for (const auto& inv : rec.invariants) residuals.push_back(residual_series(inv.values, inv.rate, rec.dt));
    const auto r_reported = residual_series(rec.hamiltonian.values, rec.printed_gamma, rec.dt);
    std::optional<std::vector<std::optional<double>>> r_derived;
    if (rec.hamiltonian.rate) r_derived = residual_series(rec.hamiltonian.values, rec.hamiltonian.rate, rec.dt);

    out << "step,t";
    for (const auto& inv : rec.invariants) out << ',' << inv.name << ",R_" << inv.name;
    out << ",H_paper,R_H_paper_gamma";
    if (r_derived) out << ",R_H_derived";
    if (rec.generator) out << ",H_gen";
    if (rec.polarized_transformed) out << ",H_polarized_transformed";
    out << ",newton_iters,linear_solves\n";

    auto cell = [&](const std::optional<double>& v) {
        out << ',';
        if (v) out << format_number(*v);
    };
    auto residual_at = [](const std::vector<std::optional<double>>& r, std::size_t n) -> std::optional<double> {
        if (n == 0 || n > r.size()) return std::nullopt;
        return r[n - 1];
    };

    for (std::size_t n = 0; n < levels; ++n) {
        if (n % record_every != 0 && n + 1 != levels) continue;
        out << n << ',' << format_number(rec.times[n]);
        for (std::size_t k = 0; k < rec.invariants.size(); ++k) {
            cell(rec.invariants[k].values[n]);
            cell(residual_at(residuals[k], n));
        }
        cell(rec.hamiltonian.values[n]);
        cell(residual_at(r_reported, n));
        if (r_derived) cell(residual_at(*r_derived, n));
        if (rec.generator) cell(rec.generator->values[n]);
        if (rec.polarized_transformed) {
            const auto& z = *rec.polarized_transformed;
            cell(n < z.size() ? std::optional<double>(z[n]) : std::nullopt);
        }
        out << ',' << (n < rec.newton_iterations.size() ? rec.newton_iterations[n] : 0) << ','
            << (n < rec.linear_solves.size() ? rec.linear_solves[n] : 0) << '\n';
    }
}

RunOutcome run(const RunConfig& config, std::ostream* csv, std::ostream& log) {
    config.validate();
    const ConformalModel model = build_model(config);
    const SchemeSpec spec = build_scheme(config);
    IntegrateOptions options;
    options.record_every = config.record_every;
    options.allow_inexact_final_time = true;
    const std::size_t steps = step_count(config.final_time, config.dt, true);
    const double realized = static_cast<double>(steps) * config.dt;
    if (std::abs(realized - config.final_time) > 1e-9 * config.final_time) {
        log << "note: T/dt is not an integer; running N = " << steps << " steps to t = " << format_number(realized)
            << '\n';
    }

    RunOutcome outcome;
    outcome.record = integrate(model, spec, build_initial_state(config), config.final_time, options);
    outcome.exit_code = exit_code_for(outcome.record.status);
    if (csv) write_run_csv(outcome.record, config.record_every, *csv);
    if (outcome.record.status != RunStatus::ok) {
        log << "error: " << outcome.record.message << " (after " << outcome.record.levels() - 1 << " steps)\n";
    }
    log << "wall-clock seconds: " << format_number(outcome.record.wall_seconds) << '\n';
    return outcome;
}

std::vector<CompareRow> compare(const RunConfig& config, std::span<const SchemeKind> schemes) {
    if (schemes.empty()) throw ConfigError("compare needs at least one scheme");
    std::vector<CompareRow> rows;
    for (SchemeKind kind : schemes) {
        RunConfig c = config;
        c.scheme = kind;
        CompareRow row;
        row.scheme = std::string(to_string(kind));
        try {
            c.validate();
            const ConformalModel model = build_model(c);
            IntegrateOptions options;
            options.record_every = c.record_every;
            options.allow_inexact_final_time = true;
            const RunRecord rec = integrate(model, build_scheme(c), build_initial_state(c), c.final_time, options);
            row.status = rec.status;
            row.message = rec.message;
            for (const auto& inv : rec.invariants) {
                row.max_residuals.emplace_back(inv.name, max_abs(residual_series(inv.values, inv.rate, rec.dt)));
            }
            row.max_residuals.emplace_back(
                "H_paper_gamma", max_abs(residual_series(rec.hamiltonian.values, rec.printed_gamma, rec.dt)));
            row.final_hamiltonian = rec.hamiltonian.values.empty() ? 0.0 : rec.hamiltonian.values.back();
            row.wall_seconds = rec.wall_seconds;
            for (int v : rec.linear_solves) row.linear_solves += v;
            for (int v : rec.newton_iterations) row.newton_iterations += v;
            row.bootstrap_linear_solves = rec.bootstrap_linear_solves;
            row.bootstrap_newton_iterations = rec.bootstrap_newton_iterations;
        } catch (const Error& e) {
            row.status = RunStatus::blow_up;
            row.message = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_compare_csv(std::span<const CompareRow> rows, std::ostream& out) {
    std::vector<std::string> names;
    for (const auto& row : rows) {
        for (const auto& [name, value] : row.max_residuals) {
            if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
        }
    }
    out << "scheme,status";
    for (const auto& n : names) out << ",max_abs_R_" << n;
    out << ",final_H,wall_seconds,linear_solves,newton_iters,bootstrap_linear_solves,bootstrap_newton_iters\n";
    for (const auto& row : rows) {
        const char* status = row.status == RunStatus::ok ? "ok"
                             : row.status == RunStatus::non_convergence ? "non_convergence"
                                                                        : "failed";
        out << row.scheme << ',' << status;
        for (const auto& n : names) {
            out << ',';
            for (const auto& [name, value] : row.max_residuals) {
                if (name == n) out << format_number(value);
            }
        }
        out << ',' << format_number(row.final_hamiltonian) << ',' << format_number(row.wall_seconds) << ','
            << row.linear_solves << ',' << row.newton_iterations << ',' << row.bootstrap_linear_solves << ','
            << row.bootstrap_newton_iterations << '\n';
    }
}

}  // namespace dhint

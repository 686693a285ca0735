#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dhint/errors.hpp"
#include "dhint/integrators.hpp"
#include "dhint/models.hpp"
#include "dhint/record.hpp"

namespace dhint {

/// Invalid configuration; `line` is 1-based and 0 when not tied to a file line.
class ConfigError : public InvalidArgument {
public:
    ConfigError(const std::string& what, std::size_t line = 0)
        : InvalidArgument(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct RunConfig {
    ModelKind model = ModelKind::burgers;
    SchemeKind scheme = SchemeKind::ek2;
    double gamma = 0.25;
    double alpha = 0.0;
    double rho = 0.0;
    double nu = 0.0;
    double half_length = 3.14159265358979323846;
    std::size_t nodes = 80;
    double dt = 0.009;
    double final_time = 50.0;
    std::optional<double> theta_rho;
    std::optional<double> theta_nu;
    std::optional<double> theta;
    double newton_tol = 1e-12;
    int newton_max_iter = 50;
    NonlinearMethod nonlinear_method = NonlinearMethod::newton;
    JacobianKind jacobian = JacobianKind::analytic;
    std::size_t record_every = 10;
    SchemeVariant variant = SchemeVariant::canonical;
    NlsPolarizedForm polarization = NlsPolarizedForm::symmetric;
    std::string output;

    /// Throws ConfigError on non-finite or out-of-range values.
    void validate() const;
};

std::vector<std::string> preset_names();
RunConfig preset(std::string_view name);

/// Applies one `key = value` setting. Throws ConfigError for unknown keys
/// or unparsable values.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value, std::size_t line = 0);

/// Flat key = value text; '#' starts a comment, [section] headers are
/// accepted and ignored. A `preset` key, wherever it appears, is applied
/// before the other keys. Returns a validated config.
RunConfig parse_config(std::string_view text, RunConfig base = {});

ConformalModel build_model(const RunConfig& config);
Vector build_initial_state(const RunConfig& config);
SchemeSpec build_scheme(const RunConfig& config);

/// Writes the CSV of a run: one row per recorded level.
void write_run_csv(const RunRecord& record, std::size_t record_every, std::ostream& out);

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_non_convergence = 3, exit_blow_up = 4 };

int exit_code_for(RunStatus status);

struct RunOutcome {
    int exit_code = exit_ok;
    RunRecord record;
};

/// Integrates the configured experiment and writes the CSV to `csv` when given.
/// Diagnostics go to `log`; its last line reports the wall-clock seconds.
RunOutcome run(const RunConfig& config, std::ostream* csv, std::ostream& log);

struct CompareRow {
    std::string scheme;
    RunStatus status = RunStatus::ok;
    std::string message;
    std::vector<std::pair<std::string, double>> max_residuals;
    double final_hamiltonian = 0.0;
    double wall_seconds = 0.0;
    long long linear_solves = 0;
    long long newton_iterations = 0;
    int bootstrap_linear_solves = 0;
    int bootstrap_newton_iterations = 0;
};

/// Runs each scheme on the same configuration and summarizes it.
std::vector<CompareRow> compare(const RunConfig& config, std::span<const SchemeKind> schemes);
void write_compare_csv(std::span<const CompareRow> rows, std::ostream& out);

/// %.17g formatting; re-parses to the same double.
std::string format_number(double value);

}  // namespace dhint

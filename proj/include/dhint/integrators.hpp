#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dhint/linalg.hpp"
#include "dhint/record.hpp"
#include "dhint/system.hpp"

namespace dhint {

/// Exponential kinds integrate the damping exactly through e^{X} prefactors.
/// The *_plain kinds apply the same base method to the full damped field.
enum class SchemeKind {
    cimp,
    eavf,
    ek1,
    ek2,
    lie,
    imidpoint_plain,
    avf_plain,
    kahan_plain,
    kahan2_plain,
    pdg2_plain,
};

enum class SchemeVariant { canonical, printed };

std::string_view to_string(SchemeKind kind);
SchemeKind parse_scheme_kind(std::string_view name);
std::string_view to_string(SchemeVariant variant);
SchemeVariant parse_scheme_variant(std::string_view name);

bool is_two_step(SchemeKind kind);
bool is_exponential(SchemeKind kind);
bool is_linearly_implicit(SchemeKind kind);
/// The non-exponential method an exponential kind reduces to at zero damping.
SchemeKind plain_counterpart(SchemeKind kind);
std::vector<SchemeKind> all_scheme_kinds();

struct Exponents {
    double x0 = 0.0;
    double x1 = 0.0;
    std::optional<double> x2;
};

/// One-step kinds: (-rate dt / 2, rate dt / 2). Two-step kinds: (-rate dt, 0, rate dt).
/// Plain kinds get zero exponents.
Exponents exponents(SchemeKind kind, double rate, double dt);

struct SchemeSpec {
    SchemeKind kind = SchemeKind::ek2;
    /// Negative steps are accepted by the step functions (adjoint maps);
    /// integrate() requires dt > 0.
    double dt = 1e-3;
    NonlinearSolveSettings solver{};
    SchemeVariant variant = SchemeVariant::canonical;
    /// Replaces the exponents derived from the model's damping rate.
    std::optional<Exponents> exponents_override;

    void validate() const;
};

struct StepResult {
    Vector state;
    int newton_iterations = 0;
    int linear_solves = 0;
};

Exponents scheme_exponents(const ConformalModel& model, const SchemeSpec& spec);

StepResult cimp_step(const ConformalModel& model, std::span<const double> u, const SchemeSpec& spec);
StepResult eavf_step(const ConformalModel& model, std::span<const double> u, const SchemeSpec& spec);
StepResult ek1_step(const ConformalModel& model, std::span<const double> u, const SchemeSpec& spec);
StepResult ek2_step(const ConformalModel& model, std::span<const double> u0,
                    std::span<const double> u1, const SchemeSpec& spec);
StepResult lie_step(const ConformalModel& model, std::span<const double> u0,
                    std::span<const double> u1, const SchemeSpec& spec);

/// Dispatches a one-step kind.
StepResult one_step(const ConformalModel& model, std::span<const double> u, const SchemeSpec& spec);
/// Dispatches a two-step kind: returns u^{n+2} from (u^n, u^{n+1}).
StepResult two_step(const ConformalModel& model, std::span<const double> u0,
                    std::span<const double> u1, const SchemeSpec& spec);

/// Starting value u^1 for a two-step kind.
StepResult bootstrap(const ConformalModel& model, std::span<const double> u0, const SchemeSpec& spec);

/// Called with (step index, time, state).
using Observer = std::function<void(std::size_t, double, std::span<const double>)>;

struct IntegrateOptions {
    std::size_t record_every = 10;
    Observer observer;
    /// Accept T / dt off an integer; the run then ends at round(T / dt) * dt.
    bool allow_inexact_final_time = false;
};

/// Number of steps round(T / dt); unless allow_inexact, throws InvalidArgument
/// when |N dt - T| > 1e-9 T.
std::size_t step_count(double final_time, double dt, bool allow_inexact = false);

/// Fixed-step driver. Solver failures and blow-ups end the run early; the
/// partial record carries the status and message.
RunRecord integrate(const ConformalModel& model, const SchemeSpec& spec, Vector u0,
                    double final_time, const IntegrateOptions& options = {});

}  // namespace dhint

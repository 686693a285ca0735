#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dhint/integrators.hpp"
#include "dhint/record.hpp"
#include "dhint/system.hpp"

namespace dhint {

/// R_n = ln(Q_{n+1} / Q_n) + rate * dt (rate 0 when absent). Entries are
/// missing where the ratio is not positive or either value is below 1e-300
/// in magnitude.
std::vector<std::optional<double>> residual_series(std::span<const double> values,
                                                   std::optional<double> rate, double dt);

double max_abs(std::span<const std::optional<double>> series);

/// Tracks the polarized energy of a two-step run in damping-free form:
/// Z_0 = H~(e^{X0} u^0, e^{X1} u^1) and
/// Z_n = Z_{n-1} * H~(e^{X1} u^n, e^{X2} u^{n+1}) / H~(e^{X0} u^{n-1}, e^{X1} u^n).
/// Z is constant exactly when every step balances H~(B, C) = H~(A, B).
class TransformedPolarizedTracker {
public:
    TransformedPolarizedTracker(const ConformalModel& model, Exponents exponents);

    double start(std::span<const double> u0, std::span<const double> u1);
    /// Takes the newest pair (u^n, u^{n+1}) and returns Z_n.
    double advance(std::span<const double> un, std::span<const double> un1);

private:
    double pair_value(std::span<const double> a, double xa, std::span<const double> b, double xb) const;

    const ConformalModel* model_;
    Exponents x_;
    double z_ = 0.0;
    double last_ = 0.0;
};

/// Series Z_n over consecutive pairs of a two-step trajectory.
std::vector<double> transformed_polarized_series(const ConformalModel& model,
                                                 std::span<const Vector> trajectory,
                                                 const Exponents& exponents);

/// max_n |Z_n - Z_0| / |Z_0|.
double relative_drift(std::span<const double> series);

/// Classical fourth-order Runge-Kutta on the full damped field with a step
/// no larger than dt_ref.
Vector reference_solve(const ConformalModel& model, std::span<const double> u0, double final_time,
                       double dt_ref);

/// sqrt(dx * sum (a - b)^2) over all components.
double l2_distance(const ConformalModel& model, std::span<const double> a, std::span<const double> b);

struct OrderFit {
    std::vector<double> step_sizes;
    std::vector<double> errors;
    /// Absent when every error sits at the roundoff floor.
    std::optional<double> slope;
    bool floor_reached = false;
};

/// Least-squares slope of log(error) against log(dt) for runs to T from u0,
/// measured against reference_solve with dt_ref = min(dt) / 50.
OrderFit observed_order(const ConformalModel& model, SchemeKind kind, std::span<const double> step_sizes,
                        double final_time, std::span<const double> u0,
                        const NonlinearSolveSettings& solver = {});

struct LinearTrend {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_std = 0.0;
};

/// Least-squares line through (x_i, y_i).
LinearTrend fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace dhint

#include "dhint/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "dhint/errors.hpp"

namespace dhint {

std::vector<std::optional<double>> residual_series(std::span<const double> values,
                                                   std::optional<double> rate, double dt) {
    std::vector<std::optional<double>> out;
    if (values.size() < 2) return out;
    out.reserve(values.size() - 1);
    const double shift = rate.value_or(0.0) * dt;
    for (std::size_t n = 0; n + 1 < values.size(); ++n) {
        const double a = values[n];
        const double b = values[n + 1];
        if (std::abs(a) < 1e-300 || std::abs(b) < 1e-300 || !(b / a > 0.0) || !std::isfinite(b / a)) {
            out.emplace_back(std::nullopt);
        } else {
            out.emplace_back(std::log(b / a) + shift);
        }
    }
    return out;
}

double max_abs(std::span<const std::optional<double>> series) {
    double best = 0.0;
    for (const auto& r : series) {
        if (r) best = std::max(best, std::abs(*r));
    }
    return best;
}

TransformedPolarizedTracker::TransformedPolarizedTracker(const ConformalModel& model, Exponents exponents)
    : model_(&model), x_(exponents) {
    if (!x_.x2) throw InvalidArgument("polarized tracking needs two-step exponents");
}

double TransformedPolarizedTracker::pair_value(std::span<const double> a, double xa,
                                               std::span<const double> b, double xb) const {
    Vector sa(a.begin(), a.end());
    Vector sb(b.begin(), b.end());
    const double fa = std::exp(xa);
    const double fb = std::exp(xb);
    for (double& v : sa) v *= fa;
    for (double& v : sb) v *= fb;
    return model_->reported_polarized_energy(sa, sb);
}

double TransformedPolarizedTracker::start(std::span<const double> u0, std::span<const double> u1) {
    last_ = pair_value(u0, x_.x0, u1, x_.x1);
    z_ = last_;
    return z_;
}

double TransformedPolarizedTracker::advance(std::span<const double> un, std::span<const double> un1) {
    const double shifted = pair_value(un, x_.x1, un1, *x_.x2);
    z_ = last_ == 0.0 ? shifted : z_ * (shifted / last_);
    last_ = pair_value(un, x_.x0, un1, x_.x1);
    return z_;
}

std::vector<double> transformed_polarized_series(const ConformalModel& model,
                                                 std::span<const Vector> trajectory,
                                                 const Exponents& exponents) {
    std::vector<double> out;
    if (trajectory.size() < 2) return out;
    TransformedPolarizedTracker tracker(model, exponents);
    out.push_back(tracker.start(trajectory[0], trajectory[1]));
    for (std::size_t n = 1; n + 1 < trajectory.size(); ++n) {
        out.push_back(tracker.advance(trajectory[n], trajectory[n + 1]));
    }
    return out;
}

double relative_drift(std::span<const double> series) {
    if (series.empty()) return 0.0;
    const double z0 = series.front();
    double best = 0.0;
    for (double z : series) best = std::max(best, std::abs(z - z0));
    return z0 == 0.0 ? best : best / std::abs(z0);
}

Vector reference_solve(const ConformalModel& model, std::span<const double> u0, double final_time,
                       double dt_ref) {
    if (!(dt_ref > 0.0)) throw InvalidArgument("reference step must be positive");
    if (!(final_time >= 0.0)) throw InvalidArgument("final time must be non-negative");
    const std::size_t steps = static_cast<std::size_t>(std::ceil(final_time / dt_ref - 1e-9));
    Vector u(u0.begin(), u0.end());
    if (steps == 0) return u;
    const double h = final_time / static_cast<double>(steps);
    const std::size_t n = u.size();
    Vector tmp(n);
    for (std::size_t s = 0; s < steps; ++s) {
        const Vector k1 = model.vector_field(u);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * h * k1[i];
        const Vector k2 = model.vector_field(tmp);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * h * k2[i];
        const Vector k3 = model.vector_field(tmp);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + h * k3[i];
        const Vector k4 = model.vector_field(tmp);
        for (std::size_t i = 0; i < n; ++i) u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    if (!std::isfinite(inf_norm(u))) throw BlowUpError("reference solution is not finite");
    return u;
}

double l2_distance(const ConformalModel& model, std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidArgument("l2_distance: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(model.grid().spacing() * s);
}

LinearTrend fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("fit_line needs two or more points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LinearTrend t;
    t.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    t.intercept = my - t.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (t.intercept + t.slope * x[i]);
        ss += e * e;
    }
    t.residual_std = std::sqrt(ss / n);
    return t;
}

OrderFit observed_order(const ConformalModel& model, SchemeKind kind, std::span<const double> step_sizes,
                        double final_time, std::span<const double> u0, const NonlinearSolveSettings& solver) {
    if (step_sizes.size() < 3) throw InvalidArgument("observed_order needs at least three step sizes");
    const double smallest = *std::min_element(step_sizes.begin(), step_sizes.end());
    const Vector reference = reference_solve(model, u0, final_time, smallest / 50.0);

    OrderFit fit;
    for (double dt : step_sizes) {
        SchemeSpec spec;
        spec.kind = kind;
        spec.dt = dt;
        spec.solver = solver;
        const RunRecord rec = integrate(model, spec, Vector(u0.begin(), u0.end()), final_time);
        if (rec.status != RunStatus::ok) {
            if (rec.status == RunStatus::non_convergence) {
                throw NonConvergenceError("observed_order: " + rec.message, 0, 0.0);
            }
            throw BlowUpError("observed_order: " + rec.message);
        }
        fit.step_sizes.push_back(dt);
        fit.errors.push_back(l2_distance(model, rec.final_state, reference));
    }

    // Errors near the reference's own accuracy carry no order information.
    double scale = std::max(1.0, l2_distance(model, reference, Vector(reference.size(), 0.0)));
    const double floor = 1e-12 * scale;
    if (std::all_of(fit.errors.begin(), fit.errors.end(), [&](double e) { return e <= floor; })) {
        fit.floor_reached = true;
        return fit;
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < fit.errors.size(); ++i) {
        lx.push_back(std::log(fit.step_sizes[i]));
        ly.push_back(std::log(std::max(fit.errors[i], 1e-300)));
    }
    fit.slope = fit_line(lx, ly).slope;
    return fit;
}

}  // namespace dhint

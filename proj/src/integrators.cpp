#include "dhint/integrators.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "dhint/diagnostics.hpp"
#include "dhint/errors.hpp"

namespace dhint {

namespace {

struct KindInfo {
    SchemeKind kind;
    const char* name;
    bool two_step;
    bool exponential;
    bool linearly_implicit;
    SchemeKind plain;
};

constexpr KindInfo kKinds[] = {
    {SchemeKind::cimp, "cimp", false, true, false, SchemeKind::imidpoint_plain},
    {SchemeKind::eavf, "eavf", false, true, false, SchemeKind::avf_plain},
    {SchemeKind::ek1, "ek1", false, true, true, SchemeKind::kahan_plain},
    {SchemeKind::ek2, "ek2", true, true, true, SchemeKind::kahan2_plain},
    {SchemeKind::lie, "lie", true, true, true, SchemeKind::pdg2_plain},
    {SchemeKind::imidpoint_plain, "imidpoint_plain", false, false, false, SchemeKind::imidpoint_plain},
    {SchemeKind::avf_plain, "avf_plain", false, false, false, SchemeKind::avf_plain},
    {SchemeKind::kahan_plain, "kahan_plain", false, false, true, SchemeKind::kahan_plain},
    {SchemeKind::kahan2_plain, "kahan2_plain", true, false, true, SchemeKind::kahan2_plain},
    {SchemeKind::pdg2_plain, "pdg2_plain", true, false, true, SchemeKind::pdg2_plain},
};

const KindInfo& info(SchemeKind kind) {
    for (const auto& k : kKinds) {
        if (k.kind == kind) return k;
    }
    throw InvalidArgument("unknown scheme kind");
}

/// Conservative field f, or the full field f - shift * u for the plain kinds.
struct Field {
    const ConformalModel& model;
    double shift;

    Vector eval(std::span<const double> u) const {
        Vector f = model.conservative_field(u);
        if (shift != 0.0) {
            for (std::size_t i = 0; i < f.size(); ++i) f[i] -= shift * u[i];
        }
        return f;
    }

    /// I - c * J(u), interleaved.
    PeriodicBandedMatrix<double> shifted_identity(std::span<const double> u, double c) const {
        PeriodicBandedMatrix<double> m = model.field_jacobian(u);
        m.scale(-c);
        for (std::size_t i = 0; i < m.size(); ++i) m.at(i, 0) += 1.0 + c * shift;
        return m;
    }

    Vector bilinear(std::span<const double> a, std::span<const double> b) const {
        Vector f = model.kahan_bilinear(a, b);
        if (shift != 0.0) {
            for (std::size_t i = 0; i < f.size(); ++i) f[i] -= 0.5 * shift * (a[i] + b[i]);
        }
        return f;
    }
};

Field field_for(const ConformalModel& model, const SchemeSpec& spec) {
    return Field{model, is_exponential(spec.kind) ? 0.0 : model.damping_rate()};
}

Vector scaled(std::span<const double> u, double factor) {
    Vector out(u.begin(), u.end());
    for (double& x : out) x *= factor;
    return out;
}

void require_state(const ConformalModel& model, std::span<const double> u) {
    if (u.size() != model.dim()) {
        throw InvalidArgument("state length " + std::to_string(u.size()) + " does not match model dimension " +
                              std::to_string(model.dim()));
    }
}

StepResult finish(Vector transformed, double exponent, int newton, int solves) {
    const double back = std::exp(-exponent);
    for (double& x : transformed) x *= back;
    if (!std::isfinite(inf_norm(transformed))) throw BlowUpError("step produced a non-finite state");
    return StepResult{std::move(transformed), newton, solves};
}

/// Solves b - a - dt * avg(a, b) = 0 for b, where avg is the midpoint field,
/// the Gauss-2 line average, or the trapezoidal average of the printed variant.
enum class Average { midpoint, line, trapezoid };

NonlinearSolveResult solve_one_step(const Field& field, std::span<const double> a, double dt,
                                    Average average, const NonlinearSolveSettings& settings) {
    const std::size_t n = a.size();
    const Vector start(a.begin(), a.end());
    const QuadratureRule gauss = gauss_legendre_2();

    NonlinearProblem problem;
    problem.blocks = field.model.blocks();
    problem.bandwidth = field.model.field_jacobian_bandwidth();
    problem.residual = [&, n](std::span<const double> b, std::span<double> r) {
        Vector avg(n, 0.0);
        switch (average) {
            case Average::midpoint: {
                Vector mid(n);
                for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (start[i] + b[i]);
                avg = field.eval(mid);
                break;
            }
            case Average::line: {
                Vector x(n);
                for (std::size_t q = 0; q < 2; ++q) {
                    const double xi = gauss.nodes[q];
                    for (std::size_t i = 0; i < n; ++i) x[i] = (1.0 - xi) * start[i] + xi * b[i];
                    const Vector f = field.eval(x);
                    for (std::size_t i = 0; i < n; ++i) avg[i] += gauss.weights[q] * f[i];
                }
                break;
            }
            case Average::trapezoid: {
                const Vector fa = field.eval(start);
                const Vector fb = field.eval(b);
                for (std::size_t i = 0; i < n; ++i) avg[i] = 0.5 * (fa[i] + fb[i]);
                break;
            }
        }
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - start[i] - dt * avg[i];
    };
    problem.jacobian = [&, n](std::span<const double> b) {
        switch (average) {
            case Average::midpoint: {
                Vector mid(n);
                for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (start[i] + b[i]);
                return field.shifted_identity(mid, 0.5 * dt);
            }
            case Average::line: {
                // d/db of sum_q w_q f(x_q) is sum_q w_q xi_q J(x_q).
                PeriodicBandedMatrix<double> total(n, problem.bandwidth);
                Vector x(n);
                for (std::size_t q = 0; q < 2; ++q) {
                    const double xi = gauss.nodes[q];
                    for (std::size_t i = 0; i < n; ++i) x[i] = (1.0 - xi) * start[i] + xi * b[i];
                    const PeriodicBandedMatrix<double> j = field.model.field_jacobian(x);
                    const double c = dt * gauss.weights[q] * xi;
                    const int jb = static_cast<int>(j.bandwidth());
                    for (std::size_t i = 0; i < n; ++i) {
                        for (int d = -jb; d <= jb; ++d) {
                            total.at(i, d) -= c * j.at(i, d);
                        }
                    }
                }
                for (std::size_t i = 0; i < n; ++i) total.at(i, 0) += 1.0 + 0.5 * dt * field.shift;
                return total;
            }
            case Average::trapezoid:
                return field.shifted_identity(b, 0.5 * dt);
        }
        throw InvalidArgument("unknown average");
    };

    // Explicit Euler predictor.
    Vector guess = field.eval(start);
    for (std::size_t i = 0; i < n; ++i) guess[i] = start[i] + dt * guess[i];
    return newton_solve(problem, std::move(guess), settings);
}

StepResult implicit_one_step(const ConformalModel& model, std::span<const double> u,
                             const SchemeSpec& spec, Average average) {
    spec.validate();
    require_state(model, u);
    const Exponents x = scheme_exponents(model, spec);
    const Vector a = scaled(u, std::exp(x.x0));
    NonlinearSolveResult sol = solve_one_step(field_for(model, spec), a, spec.dt, average, spec.solver);
    return finish(std::move(sol.solution), x.x1, sol.iterations, sol.iterations);
}

StepResult kahan_one_step(const ConformalModel& model, std::span<const double> u, const SchemeSpec& spec) {
    spec.validate();
    require_state(model, u);
    const Exponents x = scheme_exponents(model, spec);
    const Field field = field_for(model, spec);
    const Vector a = scaled(u, std::exp(x.x0));
    const Vector zero(a.size(), 0.0);
    // (I - dt/2 J(a)) b = a + dt fbar(a, 0) is fbar(a, b) = (b - a) / dt written out.
    Vector rhs = field.bilinear(a, zero);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = a[i] + spec.dt * rhs[i];
    RealLinearSystem sys{field.shifted_identity(a, 0.5 * spec.dt), std::move(rhs), model.blocks()};
    return finish(solve_linear_step(sys), x.x1, 0, 1);
}

StepResult kahan_two_step(const ConformalModel& model, std::span<const double> u0,
                          std::span<const double> u1, const SchemeSpec& spec) {
    spec.validate();
    require_state(model, u0);
    require_state(model, u1);
    const Exponents x = scheme_exponents(model, spec);
    const Field field = field_for(model, spec);
    const Vector a = scaled(u0, std::exp(x.x0));
    const Vector b = scaled(u1, std::exp(x.x1));
    const Vector zero(a.size(), 0.0);
    // (c - a) / (2 dt) = (fbar(b, a) + fbar(b, c)) / 2, linear in c.
    const Vector fa = field.bilinear(b, a);
    const Vector f0 = field.bilinear(b, zero);
    Vector rhs(a.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = a[i] + spec.dt * (fa[i] + f0[i]);
    RealLinearSystem sys{field.shifted_identity(b, 0.5 * spec.dt), std::move(rhs), model.blocks()};
    return finish(solve_linear_step(sys), x.x2.value_or(0.0), 0, 1);
}

StepResult polarized_two_step(const ConformalModel& model, std::span<const double> u0,
                              std::span<const double> u1, const SchemeSpec& spec) {
    spec.validate();
    require_state(model, u0);
    require_state(model, u1);
    const Exponents x = scheme_exponents(model, spec);
    const double shift = is_exponential(spec.kind) ? 0.0 : model.damping_rate();
    const Vector a = scaled(u0, std::exp(x.x0));
    const Vector b = scaled(u1, std::exp(x.x1));
    const double tau = 2.0 * spec.dt;
    LinearStepSystem sys = model.lie_system(a, b, tau);
    if (shift != 0.0) {
        // Damping averaged over the outer levels: -shift (a + c) / 2.
        const double s = 0.5 * tau * shift;
        if (auto* real = std::get_if<RealLinearSystem>(&sys)) {
            for (std::size_t i = 0; i < real->matrix.size(); ++i) real->matrix.at(i, 0) += s;
            for (std::size_t i = 0; i < a.size(); ++i) real->rhs[i] -= s * a[i];
        } else {
            auto& cplx = std::get<ComplexLinearSystem>(sys);
            const std::size_t m = cplx.rhs.size();
            for (std::size_t i = 0; i < m; ++i) {
                cplx.matrix.at(i, 0) += s;
                cplx.rhs[i] -= s * Complex(a[i], a[m + i]);
            }
        }
    }
    return finish(solve_linear_step(sys), x.x2.value_or(0.0), 0, 1);
}

}  // namespace

std::string_view to_string(SchemeKind kind) { return info(kind).name; }

SchemeKind parse_scheme_kind(std::string_view name) {
    for (const auto& k : kKinds) {
        if (name == k.name) return k.kind;
    }
    throw InvalidArgument("unknown scheme '" + std::string(name) + "'");
}

std::string_view to_string(SchemeVariant variant) {
    return variant == SchemeVariant::printed ? "printed" : "canonical";
}

SchemeVariant parse_scheme_variant(std::string_view name) {
    if (name == "canonical") return SchemeVariant::canonical;
    if (name == "printed") return SchemeVariant::printed;
    throw InvalidArgument("unknown scheme variant '" + std::string(name) + "'");
}

bool is_two_step(SchemeKind kind) { return info(kind).two_step; }
bool is_exponential(SchemeKind kind) { return info(kind).exponential; }
bool is_linearly_implicit(SchemeKind kind) { return info(kind).linearly_implicit; }
SchemeKind plain_counterpart(SchemeKind kind) { return info(kind).plain; }

std::vector<SchemeKind> all_scheme_kinds() {
    std::vector<SchemeKind> out;
    for (const auto& k : kKinds) out.push_back(k.kind);
    return out;
}

Exponents exponents(SchemeKind kind, double rate, double dt) {
    if (!(rate >= 0.0) || !std::isfinite(rate)) throw InvalidArgument("damping rate must be finite and >= 0");
    if (!is_exponential(kind)) {
        return is_two_step(kind) ? Exponents{0.0, 0.0, 0.0} : Exponents{0.0, 0.0, std::nullopt};
    }
    if (is_two_step(kind)) return Exponents{-rate * dt, 0.0, rate * dt};
    return Exponents{-0.5 * rate * dt, 0.5 * rate * dt, std::nullopt};
}

void SchemeSpec::validate() const {
    if (!std::isfinite(dt) || dt == 0.0) throw InvalidArgument("time step must be finite and nonzero");
    solver.validate();
    if (exponents_override && is_two_step(kind) && !exponents_override->x2) {
        throw InvalidArgument("two-step exponent override needs X2");
    }
}

Exponents scheme_exponents(const ConformalModel& model, const SchemeSpec& spec) {
    if (spec.exponents_override) return *spec.exponents_override;
    return exponents(spec.kind, model.damping_rate(), spec.dt);
}

StepResult cimp_step(const ConformalModel& model, std::span<const double> u, const SchemeSpec& spec) {
    const Average avg = spec.variant == SchemeVariant::printed ? Average::trapezoid : Average::midpoint;
    return implicit_one_step(model, u, spec, avg);
}

StepResult eavf_step(const ConformalModel& model, std::span<const double> u, const SchemeSpec& spec) {
    return implicit_one_step(model, u, spec, Average::line);
}

StepResult ek1_step(const ConformalModel& model, std::span<const double> u, const SchemeSpec& spec) {
    return kahan_one_step(model, u, spec);
}

StepResult ek2_step(const ConformalModel& model, std::span<const double> u0,
                    std::span<const double> u1, const SchemeSpec& spec) {
    return kahan_two_step(model, u0, u1, spec);
}

StepResult lie_step(const ConformalModel& model, std::span<const double> u0,
                    std::span<const double> u1, const SchemeSpec& spec) {
    return polarized_two_step(model, u0, u1, spec);
}

StepResult one_step(const ConformalModel& model, std::span<const double> u, const SchemeSpec& spec) {
    switch (spec.kind) {
        case SchemeKind::cimp:
        case SchemeKind::imidpoint_plain: return cimp_step(model, u, spec);
        case SchemeKind::eavf:
        case SchemeKind::avf_plain: return eavf_step(model, u, spec);
        case SchemeKind::ek1:
        case SchemeKind::kahan_plain: return kahan_one_step(model, u, spec);
        default: break;
    }
    throw InvalidArgument(std::string("scheme '") + std::string(to_string(spec.kind)) + "' is not one-step");
}

StepResult two_step(const ConformalModel& model, std::span<const double> u0,
                    std::span<const double> u1, const SchemeSpec& spec) {
    switch (spec.kind) {
        case SchemeKind::ek2:
        case SchemeKind::kahan2_plain: return kahan_two_step(model, u0, u1, spec);
        case SchemeKind::lie:
        case SchemeKind::pdg2_plain: return polarized_two_step(model, u0, u1, spec);
        default: break;
    }
    throw InvalidArgument(std::string("scheme '") + std::string(to_string(spec.kind)) + "' is not two-step");
}

StepResult bootstrap(const ConformalModel& model, std::span<const double> u0, const SchemeSpec& spec) {
    SchemeSpec start = spec;
    start.exponents_override.reset();
    if (spec.exponents_override) {
        // Keep the overridden rate consistent: one-step exponents are half the two-step ones.
        const double x0 = spec.exponents_override->x0 / 2.0;
        const double x1 = spec.exponents_override->x2.value_or(0.0) / 2.0;
        start.exponents_override = Exponents{x0, x1, std::nullopt};
    }
    switch (spec.kind) {
        case SchemeKind::ek2: start.kind = SchemeKind::ek1; break;
        case SchemeKind::kahan2_plain: start.kind = SchemeKind::kahan_plain; break;
        case SchemeKind::lie:
            start.kind = SchemeKind::cimp;
            start.solver.tolerance = 1e-13;
            start.variant = SchemeVariant::canonical;
            break;
        case SchemeKind::pdg2_plain:
            start.kind = SchemeKind::imidpoint_plain;
            start.solver.tolerance = 1e-13;
            start.variant = SchemeVariant::canonical;
            break;
        default:
            throw InvalidArgument(std::string("scheme '") + std::string(to_string(spec.kind)) +
                                  "' needs no bootstrap");
    }
    return one_step(model, u0, start);
}

std::size_t step_count(double final_time, double dt, bool allow_inexact) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("time step must be positive");
    if (!(final_time >= 0.0) || !std::isfinite(final_time)) {
        throw InvalidArgument("final time must be finite and non-negative");
    }
    const double n = std::round(final_time / dt);
    if (!allow_inexact && std::abs(n * dt - final_time) > 1e-9 * final_time) {
        throw InvalidArgument("final time " + std::to_string(final_time) +
                              " is not an integer multiple of the step " + std::to_string(dt));
    }
    return static_cast<std::size_t>(n);
}

const NamedSeries* RunRecord::find_invariant(const std::string& name) const {
    for (const auto& s : invariants) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

RunRecord integrate(const ConformalModel& model, const SchemeSpec& spec, Vector u0,
                    double final_time, const IntegrateOptions& options) {
    spec.validate();
    if (!(spec.dt > 0.0)) throw InvalidArgument("integrate requires a positive time step");
    if (options.record_every == 0) throw InvalidArgument("record_every must be positive");
    require_state(model, u0);
    const std::size_t steps = step_count(final_time, spec.dt, options.allow_inexact_final_time);
    const bool two = is_two_step(spec.kind);
    const Exponents x = scheme_exponents(model, spec);

    RunRecord rec;
    rec.model = model.name();
    rec.scheme = std::string(to_string(spec.kind));
    rec.dt = spec.dt;
    rec.steps = steps;
    rec.printed_gamma = model.printed_gamma();
    for (const auto& inv : model.invariants()) rec.invariants.push_back({inv.name, {}, inv.exact_rate});
    rec.hamiltonian.rate = model.hamiltonian_rate();
    if (model.reports_generator_separately()) rec.generator = NamedSeries{"H_gen", {}, std::nullopt};
    if (two) rec.polarized_transformed.emplace();
    if (!two && is_exponential(spec.kind)) rec.transformed_energy_jump.emplace();

    auto record_level = [&](std::size_t n, std::span<const double> u) {
        rec.times.push_back(static_cast<double>(n) * spec.dt);
        for (std::size_t k = 0; k < model.invariants().size(); ++k) {
            rec.invariants[k].values.push_back(model.invariants()[k].evaluate(u));
        }
        rec.hamiltonian.values.push_back(model.reported_hamiltonian(u));
        if (rec.generator) rec.generator->values.push_back(model.hamiltonian(u));
        const bool last = n == steps;
        if (options.observer && (n % options.record_every == 0 || last)) {
            options.observer(n, rec.times.back(), u);
        }
    };

    Vector prev;
    Vector current = std::move(u0);
    std::optional<TransformedPolarizedTracker> tracker;
    if (two) tracker.emplace(model, x);

    const auto begin = std::chrono::steady_clock::now();
    auto stop_clock = [&] {
        rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
    };

    try {
        if (!std::isfinite(inf_norm(current))) throw BlowUpError("initial state is not finite");
        record_level(0, current);
        rec.newton_iterations.push_back(0);
        rec.linear_solves.push_back(0);
        for (std::size_t n = 0; n < steps; ++n) {
            StepResult r;
            if (!two) {
                r = one_step(model, current, spec);
                if (rec.transformed_energy_jump) {
                    const double h_new = model.hamiltonian(scaled(r.state, std::exp(x.x1)));
                    const double h_old = model.hamiltonian(scaled(current, std::exp(x.x0)));
                    rec.transformed_energy_jump->push_back(std::abs(h_new - h_old));
                }
                prev = std::move(current);
            } else if (n == 0) {
                r = bootstrap(model, current, spec);
                rec.bootstrap_newton_iterations = r.newton_iterations;
                rec.bootstrap_linear_solves = r.linear_solves;
                rec.polarized_transformed->push_back(tracker->start(current, r.state));
                prev = std::move(current);
                current = std::move(r.state);
                record_level(1, current);
                rec.newton_iterations.push_back(0);
                rec.linear_solves.push_back(0);
                continue;
            } else {
                r = two_step(model, prev, current, spec);
                rec.polarized_transformed->push_back(tracker->advance(current, r.state));
                prev = std::move(current);
            }
            current = std::move(r.state);
            record_level(n + 1, current);
            rec.newton_iterations.push_back(r.newton_iterations);
            rec.linear_solves.push_back(r.linear_solves);
        }
    } catch (const NonConvergenceError& e) {
        rec.status = RunStatus::non_convergence;
        rec.message = e.what();
    } catch (const BlowUpError& e) {
        rec.status = RunStatus::blow_up;
        rec.message = e.what();
    } catch (const SingularMatrixError& e) {
        rec.status = RunStatus::blow_up;
        rec.message = e.what();
    }
    stop_clock();
    rec.final_state = std::move(current);
    return rec;
}

}  // namespace dhint

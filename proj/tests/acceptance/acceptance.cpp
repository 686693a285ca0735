// Acceptance driver: evaluates each criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit status is 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dhint/cli.hpp"
#include "dhint/diagnostics.hpp"
#include "dhint/integrators.hpp"
#include "dhint/models.hpp"

using namespace dhint;

namespace {

struct Verdict {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, const std::string& what) {
        if (!ok) pass = false;
        notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    }
};

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double max_norm(std::span<const double> a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Vector random_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    Vector v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

SchemeSpec spec_for(SchemeKind kind, double dt) {
    SchemeSpec s;
    s.kind = kind;
    s.dt = dt;
    return s;
}

ConformalModel preset_model(const std::string& name, std::optional<double> gamma = std::nullopt) {
    RunConfig c = preset(name);
    if (gamma) c.gamma = *gamma;
    return build_model(c);
}

Vector preset_state(const std::string& name) { return build_initial_state(preset(name)); }

/// Full preset run of one scheme, computed at most once.
const RunRecord& preset_run(const std::string& name, SchemeKind kind) {
    static std::map<std::pair<std::string, SchemeKind>, RunRecord> cache;
    const auto key = std::make_pair(name, kind);
    auto it = cache.find(key);
    if (it == cache.end()) {
        RunConfig c = preset(name);
        c.scheme = kind;
        IntegrateOptions options;
        options.record_every = 100;
        options.allow_inexact_final_time = true;
        it = cache.emplace(key, integrate(build_model(c), build_scheme(c), build_initial_state(c), c.final_time,
                                          options))
                 .first;
    }
    return it->second;
}

std::vector<double> series_of(const RunRecord& rec, const std::string& invariant) {
    const NamedSeries* s = rec.find_invariant(invariant);
    return s ? s->values : std::vector<double>{};
}

double max_residual(const RunRecord& rec, const std::string& invariant, std::optional<double> rate) {
    return dhint::max_abs(residual_series(series_of(rec, invariant), rate, rec.dt));
}

std::string tag(const RunRecord& rec) { return rec.model + "/" + rec.scheme; }

bool run_ok(Verdict& v, const RunRecord& rec) {
    v.check(rec.status == RunStatus::ok, tag(rec) + " completed" + (rec.message.empty() ? "" : ": " + rec.message));
    return rec.status == RunStatus::ok;
}

// 1. Zero-field exactness.
Verdict zero_field() {
    Verdict v;
    std::mt19937_64 rng(1);
    const double dt = 0.009;
    const Grid grid = build_grid(1.0, 16);
    const Vector u0 = random_vector(rng, 16);
    for (double rate : {0.0, 1e-3, 0.5}) {
        const ConformalModel m = zero_field_model(grid, rate);
        const double f = std::exp(-rate * dt);
        for (SchemeKind k : all_scheme_kinds()) {
            const SchemeSpec s = spec_for(k, dt);
            std::vector<Vector> levels{u0};
            if (is_two_step(k)) {
                levels.push_back(bootstrap(m, u0, s).state);
                for (int n = 0; n < 3; ++n) levels.push_back(two_step(m, levels[n], levels[n + 1], s).state);
            } else {
                for (int n = 0; n < 4; ++n) levels.push_back(one_step(m, levels.back(), s).state);
            }
            double worst = 0.0;
            for (std::size_t n = 1; n < levels.size(); ++n) {
                for (std::size_t i = 0; i < u0.size(); ++i) {
                    const double factor = levels[n][i] / levels[n - 1][i];
                    worst = std::max(worst, std::abs(factor - f) / f);
                }
            }
            const std::string what = std::string(to_string(k)) + " rate " + sci(rate) + ": factor error " + sci(worst);
            if (is_exponential(k) || rate == 0.0) {
                v.check(worst <= 1e-14, what);
            } else {
                v.notes.push_back("info " + what + " (plain kind, rational approximation of the decay)");
            }
        }
    }
    return v;
}

// 2. Burgers mass dissipation.
Verdict burgers_mass() {
    Verdict v;
    for (SchemeKind k : {SchemeKind::ek2, SchemeKind::cimp}) {
        const auto t0 = std::chrono::steady_clock::now();
        const RunRecord& rec = preset_run("burgers-paper", k);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!run_ok(v, rec)) continue;
        const double r = max_residual(rec, "mass", 2 * 0.25);
        v.check(r <= 1e-10, tag(rec) + " max|R_mass| = " + sci(r) + " (<= 1e-10)");
        v.check(secs < 10.0, tag(rec) + " runtime " + sci(secs) + " s (< 10 s)");
    }
    return v;
}

// 3. KdV linear invariant and diminishing quadratic residual.
Verdict kdv_invariants() {
    Verdict v;
    const RunRecord& rec = preset_run("kdv-paper", SchemeKind::ek2);
    if (!run_ok(v, rec)) return v;
    const double gamma = 1e-2;
    const double r1 = max_residual(rec, "I1", 2 * gamma);
    v.check(r1 <= 1e-10, "max|R_I1| = " + sci(r1) + " (<= 1e-10)");
    const NamedSeries* i2 = rec.find_invariant("I2");
    if (!i2) {
        v.check(false, "I2 series recorded");
        return v;
    }
    const auto r2 = residual_series(i2->values, i2->rate, rec.dt);
    std::vector<double> x, y;
    for (std::size_t n = 0; n < r2.size(); ++n) {
        if (!r2[n]) continue;
        x.push_back(static_cast<double>(n));
        y.push_back(std::abs(*r2[n]));
    }
    const LinearTrend trend = fit_line(x, y);
    v.check(!x.empty() && trend.slope <= 0.0, "trend of |R_I2| per step = " + sci(trend.slope) + " (<= 0), rate " +
                                                  sci(i2->rate.value_or(0.0)) + ", max " + sci(dhint::max_abs(r2)));
    v.check(rec.wall_seconds < 60.0, "stepping time " + sci(rec.wall_seconds) + " s (< 60 s)");
    return v;
}

// 4. NLS two-step mass relation.
Verdict nls_mass_relation() {
    Verdict v;
    const RunRecord& rec = preset_run("nls-paper", SchemeKind::lie);
    if (!run_ok(v, rec)) return v;
    const auto mass = series_of(rec, "mass");
    const double factor = std::exp(-2 * 5e-4 * rec.dt);
    double worst = 0.0;
    for (std::size_t n = 0; n + 2 < mass.size(); ++n) {
        worst = std::max(worst, std::abs(mass[n + 2] - factor * mass[n]) / std::abs(factor * mass[n]));
    }
    v.check(mass.size() == rec.steps + 1, "mass recorded at all " + std::to_string(mass.size()) + " levels");
    v.check(worst <= 1e-11, "max relative defect of the double-step relation = " + sci(worst) + " (<= 1e-11)");
    v.check(rec.wall_seconds < 300.0, "stepping time " + sci(rec.wall_seconds) + " s (< 300 s)");
    return v;
}

// 5. Transformed energy conservation.
Verdict transformed_energy() {
    Verdict v;
    const double tol = NonlinearSolveSettings{}.tolerance;
    for (const char* name : {"burgers-paper", "nls-paper"}) {
        const RunRecord& rec = preset_run(name, SchemeKind::eavf);
        if (!run_ok(v, rec)) continue;
        const double jump = rec.transformed_energy_jump ? max_norm(*rec.transformed_energy_jump) : INFINITY;
        v.check(jump <= 10 * tol, tag(rec) + " max transformed energy jump = " + sci(jump) + " (<= " +
                                      sci(10 * tol) + ")");
    }
    const std::pair<const char*, SchemeKind> two_step_runs[] = {
        {"burgers-paper", SchemeKind::ek2}, {"burgers-paper", SchemeKind::lie}, {"nls-paper", SchemeKind::lie}};
    for (const auto& [name, kind] : two_step_runs) {
        const RunRecord& rec = preset_run(name, kind);
        if (!run_ok(v, rec)) continue;
        const double drift = rec.polarized_transformed ? relative_drift(*rec.polarized_transformed) : INFINITY;
        v.check(drift <= 1e-9, tag(rec) + " relative drift of the transformed polarized energy = " + sci(drift) +
                                   " (<= 1e-9)");
    }
    return v;
}

// 6. Second order against the fourth-order reference.
Verdict second_order() {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<double> dts{4e-3, 2e-3, 1e-3};
    const std::pair<const char*, std::vector<SchemeKind>> cases[] = {
        {"burgers-paper", {SchemeKind::cimp, SchemeKind::eavf, SchemeKind::ek1, SchemeKind::ek2, SchemeKind::lie}},
        {"nls-paper", {SchemeKind::lie, SchemeKind::cimp, SchemeKind::eavf}},
    };
    for (const auto& [name, kinds] : cases) {
        const ConformalModel m = preset_model(name);
        const Vector u0 = preset_state(name);
        for (SchemeKind k : kinds) {
            const OrderFit fit = observed_order(m, k, dts, 0.5, u0);
            const std::string what = std::string(name) + "/" + std::string(to_string(k));
            if (!fit.slope) {
                v.check(false, what + ": errors at the roundoff floor, no slope");
                continue;
            }
            v.check(*fit.slope >= 1.8 && *fit.slope <= 2.2,
                    what + " observed order " + sci(*fit.slope) + " (in [1.8, 2.2]), errors " + sci(fit.errors[0]) +
                        " .. " + sci(fit.errors.back()));
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    v.check(secs < 120.0, "runtime " + sci(secs) + " s (< 120 s)");
    return v;
}

// 7. Conservative reduction at zero damping.
Verdict conservative_reduction() {
    Verdict v;
    const std::pair<const char*, std::vector<SchemeKind>> cases[] = {
        {"burgers-paper", {SchemeKind::cimp, SchemeKind::eavf, SchemeKind::ek1, SchemeKind::ek2, SchemeKind::lie}},
        {"kdv-paper", {SchemeKind::cimp, SchemeKind::eavf, SchemeKind::ek1, SchemeKind::ek2, SchemeKind::lie}},
        {"nls-paper", {SchemeKind::cimp, SchemeKind::eavf, SchemeKind::lie}},
    };
    for (const auto& [name, kinds] : cases) {
        const ConformalModel m = preset_model(name, 0.0);
        const Vector u0 = preset_state(name);
        const double dt = preset(name).dt;
        for (SchemeKind k : kinds) {
            const SchemeKind plain = plain_counterpart(k);
            const SchemeSpec s = spec_for(k, dt), p = spec_for(plain, dt);
            Vector a = u0, b, c = u0, d;
            if (is_two_step(k)) {
                b = bootstrap(m, u0, s).state;
                d = bootstrap(m, u0, p).state;
            }
            for (int n = 0; n < 100; ++n) {
                if (is_two_step(k)) {
                    a = std::exchange(b, two_step(m, a, b, s).state);
                    c = std::exchange(d, two_step(m, c, d, p).state);
                } else {
                    a = one_step(m, a, s).state;
                    c = one_step(m, c, p).state;
                }
            }
            const Vector& x = is_two_step(k) ? b : a;
            const Vector& y = is_two_step(k) ? d : c;
            const double diff = max_abs_diff(x, y) / max_norm(y);
            v.check(diff <= 1e-11, std::string(name) + "/" + std::string(to_string(k)) + " vs " +
                                       std::string(to_string(plain)) + ": relative difference " + sci(diff) +
                                       " (<= 1e-11)");
        }
    }
    return v;
}

// 8. Cost ordering of the linearly implicit scheme.
Verdict cost_claim() {
    Verdict v;
    const RunRecord& lie = preset_run("nls-paper", SchemeKind::lie);
    const RunRecord& eavf = preset_run("nls-paper", SchemeKind::eavf);
    if (!run_ok(v, lie) || !run_ok(v, eavf)) return v;
    v.check(lie.wall_seconds < eavf.wall_seconds,
            "wall clock lie " + sci(lie.wall_seconds) + " s < eavf " + sci(eavf.wall_seconds) + " s");
    bool zero_newton = true, one_solve = true;
    for (std::size_t n = 2; n < lie.levels(); ++n) {
        zero_newton = zero_newton && lie.newton_iterations[n] == 0;
        one_solve = one_solve && lie.linear_solves[n] == 1;
    }
    v.check(zero_newton, "lie uses no Newton iterations after the bootstrap");
    v.check(one_solve, "lie uses exactly one linear solve per step");
    return v;
}

// 9. Plain Kahan loses the mass relation.
Verdict negative_control() {
    Verdict v;
    const RunRecord& ek2 = preset_run("burgers-paper", SchemeKind::ek2);
    const RunRecord& kahan = preset_run("burgers-paper", SchemeKind::kahan2_plain);
    if (!run_ok(v, ek2) || !run_ok(v, kahan)) return v;
    const double a = max_residual(ek2, "mass", 0.5), b = max_residual(kahan, "mass", 0.5);
    v.check(b >= 1e3 * a, "max|R_mass| kahan2_plain " + sci(b) + " >= 1e3 x ek2 " + sci(a));
    return v;
}

// 10. Discrete-gradient identity suite.
Verdict identity_suite() {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(10);
    for (const char* name : {"burgers-paper", "kdv-paper", "nls-paper"}) {
        const ConformalModel m = preset_model(name);
        const PolynomialEnergy& e = m.energy();
        const std::size_t n = m.dim();
        double diag = 0.0, sym = 0.0, defining = 0.0, grad = 0.0, kahan = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const Vector a = random_vector(rng, n), b = random_vector(rng, n), c = random_vector(rng, n);
            const double h = e.value(a);
            diag = std::max(diag, std::abs(e.polarized(a, a) - h) / std::abs(h));
            const double bc = e.polarized(b, c), ab = e.polarized(a, b);
            sym = std::max(sym, std::abs(bc - e.polarized(c, b)) / std::abs(bc));
            Vector g(n), diff(n);
            e.pdg(a, b, c, g);
            for (std::size_t i = 0; i < n; ++i) diff[i] = c[i] - a[i];
            defining = std::max(defining, std::abs(bc - ab - 0.5 * dot(diff, g)) / (std::abs(bc) + std::abs(ab)));
            Vector d(n), full(n);
            e.pdg(a, a, a, d);
            e.gradient(a, full);
            grad = std::max(grad, max_abs_diff(d, full) / max_norm(full));
            if (m.has_kahan_bilinear()) {
                const Vector fa = m.conservative_field(a), fb = m.conservative_field(b);
                Vector mid(n);
                for (std::size_t i = 0; i < n; ++i) mid[i] = 0.5 * (a[i] + b[i]);
                const Vector fm = m.conservative_field(mid);
                const Vector kab = m.kahan_bilinear(a, b);
                Vector expected(n);
                for (std::size_t i = 0; i < n; ++i) expected[i] = -0.5 * fa[i] + 2 * fm[i] - 0.5 * fb[i];
                const double scale = std::max(max_norm(fa), max_norm(fb));
                kahan = std::max({kahan, max_abs_diff(m.kahan_bilinear(a, a), fa) / scale,
                                  max_abs_diff(kab, m.kahan_bilinear(b, a)) / scale,
                                  max_abs_diff(kab, expected) / scale});
            }
        }
        const std::string model = m.name();
        v.check(diag <= 1e-12, model + " H~(u,u) = H(u): " + sci(diag) + " (<= 1e-12)");
        v.check(sym <= 1e-14, model + " symmetry: " + sci(sym) + " (<= 1e-14)");
        v.check(defining <= 1e-11, model + " defining identity: " + sci(defining) + " (<= 1e-11)");
        v.check(grad <= 1e-12, model + " diagonal gradient: " + sci(grad) + " (<= 1e-12)");
        if (m.has_kahan_bilinear()) v.check(kahan <= 1e-12, model + " Kahan bilinear identities: " + sci(kahan));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    v.check(secs < 1.0, "runtime " + sci(secs) + " s (< 1 s)");
    return v;
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Verdict()>> criteria[] = {
        {"1 zero-field exactness", zero_field},
        {"2 burgers mass dissipation", burgers_mass},
        {"3 kdv linear invariant and I2 trend", kdv_invariants},
        {"4 nls two-step mass relation", nls_mass_relation},
        {"5 transformed energy conservation", transformed_energy},
        {"6 second order", second_order},
        {"7 conservative reduction", conservative_reduction},
        {"8 cost ordering on nls", cost_claim},
        {"9 plain kahan negative control", negative_control},
        {"10 discrete-gradient identities", identity_suite},
    };
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v.check(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (const auto& note : v.notes) std::printf("    %s\n", note.c_str());
        std::printf("%s criterion %s (%.2f s)\n", v.pass ? "PASS" : "FAIL", name, secs);
        std::fflush(stdout);
        failures += v.pass ? 0 : 1;
    }
    std::printf("%d of 10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}

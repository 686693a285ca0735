#include "dhint/linalg.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace dhint {

void NonlinearSolveSettings::validate() const {
    if (!(tolerance > 0.0)) throw InvalidArgument("nonlinear tolerance must be positive");
    if (max_iterations < 1) throw InvalidArgument("max_iterations must be at least 1");
}

double inf_norm(std::span<const double> v) {
    double best = 0.0;
    for (double x : v) {
        if (!std::isfinite(x)) return std::numeric_limits<double>::infinity();
        best = std::max(best, std::abs(x));
    }
    return best;
}

Vector to_interleaved(std::span<const double> stacked, std::size_t blocks) {
    if (blocks == 1) return Vector(stacked.begin(), stacked.end());
    const std::size_t m = stacked.size() / blocks;
    Vector out(stacked.size());
    for (std::size_t c = 0; c < blocks; ++c) {
        for (std::size_t i = 0; i < m; ++i) out[i * blocks + c] = stacked[c * m + i];
    }
    return out;
}

Vector from_interleaved(std::span<const double> interleaved, std::size_t blocks) {
    if (blocks == 1) return Vector(interleaved.begin(), interleaved.end());
    const std::size_t m = interleaved.size() / blocks;
    Vector out(interleaved.size());
    for (std::size_t c = 0; c < blocks; ++c) {
        for (std::size_t i = 0; i < m; ++i) out[c * m + i] = interleaved[i * blocks + c];
    }
    return out;
}

PeriodicBandedMatrix<double> finite_difference_jacobian(const NonlinearProblem& problem,
                                                        std::span<const double> x) {
    const std::size_t n = x.size();
    const std::size_t k = problem.blocks;
    const std::size_t b = problem.bandwidth;
    PeriodicBandedMatrix<double> jac(n, b);

    Vector base(n);
    problem.residual(x, base);
    const Vector base_il = to_interleaved(base, k);
    Vector x_il = to_interleaved(x, k);

    // Columns sharing a color are more than 2b apart cyclically, so their
    // stencils do not overlap. The trailing n mod p columns get their own colors.
    std::size_t colors = 2 * b + 1;
    if (n < 2 * colors) colors = n;
    const std::size_t regular = n - n % colors;
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t c = 0; c < colors; ++c) {
        std::vector<std::size_t> g;
        for (std::size_t j = c; j < regular; j += colors) g.push_back(j);
        groups.push_back(std::move(g));
    }
    for (std::size_t j = regular; j < n; ++j) groups.push_back({j});

    const double root_eps = std::sqrt(std::numeric_limits<double>::epsilon());
    Vector perturbed_stacked(n);
    Vector r(n);
    for (const auto& group : groups) {
        if (group.empty()) continue;
        Vector xp = x_il;
        std::vector<double> steps(group.size());
        for (std::size_t q = 0; q < group.size(); ++q) {
            const std::size_t j = group[q];
            steps[q] = root_eps * std::max(1.0, std::abs(x_il[j]));
            xp[j] += steps[q];
        }
        perturbed_stacked = from_interleaved(xp, k);
        problem.residual(perturbed_stacked, r);
        const Vector r_il = to_interleaved(r, k);
        const int bi = static_cast<int>(b);
        const int ni = static_cast<int>(n);
        for (std::size_t q = 0; q < group.size(); ++q) {
            const int j = static_cast<int>(group[q]);
            for (int d = -bi; d <= bi; ++d) {
                const int row = ((j - d) % ni + ni) % ni;  // row whose offset d hits column j
                jac.at(static_cast<std::size_t>(row), d) = (r_il[row] - base_il[row]) / steps[q];
            }
        }
    }
    return jac;
}

NonlinearSolveResult newton_solve(const NonlinearProblem& problem, Vector guess,
                                  const NonlinearSolveSettings& settings) {
    settings.validate();
    const std::size_t n = guess.size();
    NonlinearSolveResult result;
    result.solution = std::move(guess);
    Vector& x = result.solution;
    Vector r(n);

    auto converged = [&](double rnorm) { return rnorm <= settings.tolerance * inf_norm(x); };

    problem.residual(x, r);
    double rnorm = inf_norm(r);
    for (int it = 0;; ++it) {
        if (!std::isfinite(rnorm)) {
            throw BlowUpError("nonlinear solve: residual is not finite");
        }
        if (converged(rnorm)) {
            result.iterations = it;
            result.residual_norm = rnorm;
            return result;
        }
        if (it == settings.max_iterations) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "nonlinear solve did not converge in %d iterations (residual %.3e)", it,
                          rnorm);
            throw NonConvergenceError(buf, it, rnorm);
        }
        if (settings.method == NonlinearMethod::fixed_point) {
            for (std::size_t i = 0; i < n; ++i) x[i] -= r[i];
        } else {
            const bool analytic = settings.jacobian == JacobianKind::analytic &&
                                  static_cast<bool>(problem.jacobian);
            const PeriodicBandedMatrix<double> jac =
                analytic ? problem.jacobian(x) : finite_difference_jacobian(problem, x);
            const Vector r_il = to_interleaved(r, problem.blocks);
            const Vector delta_il = solve_periodic_banded<double>(jac, r_il);
            const Vector delta = from_interleaved(delta_il, problem.blocks);
            for (std::size_t i = 0; i < n; ++i) x[i] -= delta[i];
        }
        problem.residual(x, r);
        rnorm = inf_norm(r);
    }
}

QuadratureRule gauss_legendre_2() {
    const double offset = std::sqrt(3.0) / 6.0;
    return QuadratureRule{{0.5 - offset, 0.5 + offset}, {0.5, 0.5}};
}

}  // namespace dhint

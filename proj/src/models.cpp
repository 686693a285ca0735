#include "dhint/models.hpp"

#include <cmath>
#include <numbers>

#include "dhint/errors.hpp"

namespace dhint {

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::burgers: return "burgers";
        case ModelKind::kdv: return "kdv";
        case ModelKind::nls: return "nls";
    }
    return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
    if (name == "burgers") return ModelKind::burgers;
    if (name == "kdv") return ModelKind::kdv;
    if (name == "nls") return ModelKind::nls;
    throw InvalidArgument("unknown model '" + std::string(name) + "'");
}

namespace {

void require_finite(double value, const char* what) {
    if (!std::isfinite(value)) throw InvalidArgument(std::string(what) + " must be finite");
}

PeriodicBandedMatrix<double> scaled_stencil_matrix(const PeriodicStencilOperator& op, double scale) {
    PeriodicBandedMatrix<double> m(op.size(), op.bandwidth());
    m.add_stencil(op, scale);
    return m;
}

}  // namespace

ConformalModel burgers_model(const BurgersParams& p) {
    require_finite(p.gamma, "gamma");
    if (p.gamma < 0.0) throw InvalidArgument("Burgers damping gamma must be non-negative");
    const Grid grid = p.grid;
    const double dx = grid.spacing();
    const std::size_t m = grid.size();
    const double rate = 2.0 * p.gamma;

    PolynomialEnergy energy(m, 1, dx);
    energy.add_cubic(1.0 / 6.0);

    auto mass = Invariant{"mass",
                          [grid](std::span<const double> u) { return quadrature(grid, u); },
                          rate, 1};
    ConformalModel model("burgers", grid, 1, rate, p.gamma, std::move(energy),
                         scaled_stencil_matrix(derivative_operator(grid, 1), -1.0 / dx),
                         {std::move(mass)});
    model.set_reported_hamiltonian([grid](std::span<const double> u) {
        double s = 0.0;
        for (double x : u) s += x * x * x;
        return grid.spacing() * s / 3.0;
    });
    model.set_hamiltonian_rate(3.0 * rate);
    return model;
}

ConformalModel kdv_model(const KdvParams& p) {
    require_finite(p.alpha, "alpha");
    require_finite(p.rho, "rho");
    require_finite(p.nu, "nu");
    require_finite(p.gamma, "gamma");
    if (p.gamma < 0.0) throw InvalidArgument("KdV damping gamma must be non-negative");
    const Grid grid = p.grid;
    const double dx = grid.spacing();
    const std::size_t m = grid.size();
    const double rate = 2.0 * p.gamma;

    PolynomialEnergy energy(m, 1, dx);
    energy.add_cubic(p.alpha / 3.0);
    energy.add_quadratic(p.rho, std::nullopt, p.theta_rho);
    energy.add_quadratic(p.nu, derivative_operator(grid, 2), p.theta_nu);

    std::vector<Invariant> invariants;
    invariants.push_back({"I1", [grid](std::span<const double> u) { return quadrature(grid, u); },
                          rate, 1});
    // The central difference of u^2 does not conserve sum u^2 exactly, so I2
    // decays at 2 * rate only up to spatial truncation error.
    invariants.push_back({"I2",
                          [grid](std::span<const double> u) {
                              double s = 0.0;
                              for (double x : u) s += x * x;
                              return grid.spacing() * s;
                          },
                          2.0 * rate, 2, false});
    return ConformalModel("kdv", grid, 1, rate, p.gamma, std::move(energy),
                          scaled_stencil_matrix(derivative_operator(grid, 1), 1.0 / dx),
                          std::move(invariants));
}

ConformalModel nls_model(const NlsParams& p) {
    require_finite(p.alpha, "alpha");
    require_finite(p.gamma, "gamma");
    if (!(p.alpha > 0.0)) throw InvalidArgument("NLS nonlinearity alpha must be positive");
    if (p.gamma < 0.0) throw InvalidArgument("NLS damping gamma must be non-negative");
    const Grid grid = p.grid;
    const double dx = grid.spacing();
    const std::size_t m = grid.size();
    const double rate = p.gamma / 2.0;
    const PeriodicStencilOperator d1 = derivative_operator(grid, 1);
    const PeriodicStencilOperator d2 = derivative_operator(grid, 2);

    PolynomialEnergy energy(m, 2, dx);
    energy.add_quartic_modulus(p.alpha / 4.0);
    energy.add_quadratic(1.0, d2, p.theta, 0);
    energy.add_quadratic(1.0, d2, p.theta, 1);

    // S = [[0, -I], [I, 0]] / dx in node-interleaved ordering.
    PeriodicBandedMatrix<double> skew(2 * m, 1);
    for (std::size_t i = 0; i < m; ++i) {
        skew.at(2 * i, 1) = -1.0 / dx;
        skew.at(2 * i + 1, -1) = 1.0 / dx;
    }

    std::vector<Invariant> invariants;
    invariants.push_back({"mass",
                          [grid](std::span<const double> w) {
                              double s = 0.0;
                              for (double x : w) s += x * x;
                              return grid.spacing() * s;
                          },
                          2.0 * rate, 2});
    invariants.push_back({"momentum",
                          [grid, d1, m](std::span<const double> w) {
                              const auto u = w.subspan(0, m);
                              const auto v = w.subspan(m, m);
                              const Vector du = d1.apply(u);
                              const Vector dv = d1.apply(v);
                              double s = 0.0;
                              for (std::size_t i = 0; i < m; ++i) s += dv[i] * u[i] - du[i] * v[i];
                              return grid.spacing() * s;
                          },
                          2.0 * rate, 2, false});

    ConformalModel model("nls", grid, 2, rate, p.gamma, std::move(energy), std::move(skew),
                         std::move(invariants));

    const double alpha = p.alpha;
    const double theta = p.theta;
    model.set_complex_step_operator([d2, alpha, theta, m](std::span<const double> middle, double tau) {
        // I - i tau K with K = theta/2 D2 + alpha/2 |middle|^2.
        PeriodicBandedMatrix<Complex> op(m, 1);
        const Complex itau(0.0, tau);
        for (std::size_t i = 0; i < m; ++i) {
            const double rho = middle[i] * middle[i] + middle[m + i] * middle[m + i];
            for (int d = -1; d <= 1; ++d) op.at(i, d) = -itau * (0.5 * theta * d2.coefficient(d));
            op.at(i, 0) += 1.0 - itau * (0.5 * alpha * rho);
        }
        return op;
    });

    if (p.polarized_form == NlsPolarizedForm::printed) {
        model.set_reported_polarized_energy(
            [d1, alpha, m, dx](std::span<const double> a, std::span<const double> b) {
                const auto au = a.subspan(0, m), av = a.subspan(m, m);
                const auto bu = b.subspan(0, m), bv = b.subspan(m, m);
                const Vector dau = d1.apply(au), dav = d1.apply(av);
                const Vector dbu = d1.apply(bu), dbv = d1.apply(bv);
                double s = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    s += alpha / 4.0 *
                             (au[i] * au[i] * bu[i] * bu[i] + av[i] * av[i] * bu[i] * bu[i] +
                              au[i] * av[i] + bu[i] * bv[i]) -
                         0.5 * (dau[i] * dau[i] + dbu[i] * dbu[i]) -
                         0.5 * (dav[i] * dav[i] + dbv[i] * dbv[i]);
                }
                return dx * s;
            });
    }
    return model;
}

Vector initial_condition(ModelKind kind, const Grid& grid) {
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    switch (kind) {
        case ModelKind::burgers:
            return grid.sample([&](double x) { return std::exp(-x * x / 2.0) * inv_sqrt_2pi; });
        case ModelKind::kdv:
            return grid.sample([&](double x) { return 2.0 * std::exp(-2.0 * x * x) * inv_sqrt_2pi; });
        case ModelKind::nls: {
            const std::size_t m = grid.size();
            Vector w(2 * m);
            for (std::size_t k = 0; k < m; ++k) {
                const double x = grid.node(k);
                const double sech = 1.0 / std::cosh(x);
                w[k] = sech * std::cos(2.0 * x);
                w[m + k] = sech * std::sin(2.0 * x);
            }
            return w;
        }
    }
    throw InvalidArgument("unknown model kind");
}

}  // namespace dhint

#include <gtest/gtest.h>

#include <cmath>

#include "dhint/diagnostics.hpp"
#include "dhint/errors.hpp"
#include "dhint/models.hpp"
#include "support.hpp"

using namespace dhint;
using namespace dhint::testing;

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * M_PI);

NlsParams nls_preset() { return NlsParams{}; }

std::vector<ConformalModel> preset_models() {
    return {burgers_model({}), kdv_model(kdv_preset()), nls_model(nls_preset())};
}

std::vector<ConformalModel> conservative_models() {
    BurgersParams b;
    b.gamma = 0.0;
    KdvParams k = kdv_preset();
    k.gamma = 0.0;
    NlsParams n = nls_preset();
    n.gamma = 0.0;
    return {burgers_model(b), kdv_model(k), nls_model(n)};
}

Vector preset_initial(const ConformalModel& m) {
    return initial_condition(parse_model_kind(m.name()), m.grid());
}

}  // namespace

TEST(BurgersModel, FieldOfSimpleStates) {
    const ConformalModel m = burgers_model({});
    EXPECT_DOUBLE_EQ(m.damping_rate(), 0.5);
    EXPECT_EQ(max_abs(m.vector_field(Vector(80, 0.0))), 0.0);
    const Vector f = m.vector_field(Vector(80, 1.7));
    for (double x : f) EXPECT_NEAR(x, -0.5 * 1.7, 1e-13);
}

TEST(BurgersModel, FieldMatchesDenseOracle) {
    const ConformalModel m = burgers_model({});
    const Grid g = m.grid();
    const Vector u = g.sample([](double x) { return std::sin(x); });
    Eigen::VectorXd sq = to_eigen(u).cwiseProduct(to_eigen(u));
    const Eigen::VectorXd oracle = -0.5 * (dense_d1(g) * sq) - 0.5 * to_eigen(u);
    EXPECT_LE(max_abs_diff(m.vector_field(u), from_eigen(oracle)), 1e-13);
}

TEST(BurgersModel, HamiltoniansOfInitialProfile) {
    const ConformalModel m = burgers_model({});
    const Vector u0 = preset_initial(m);
    auto phi3 = [](double x) { return std::pow(std::exp(-x * x / 2.0) * kInvSqrt2Pi, 3) / 3.0; };
    const double oracle = dense_riemann(M_PI, 1'000'000, phi3);
    EXPECT_NEAR(m.reported_hamiltonian(u0), oracle, 1e-10);
    EXPECT_NEAR(m.reported_hamiltonian(u0), 1.0 / (6.0 * M_PI * std::sqrt(3.0)), 1e-8);
    EXPECT_NEAR(m.hamiltonian(u0), 0.5 * m.reported_hamiltonian(u0), 1e-17);
    EXPECT_TRUE(m.reports_generator_separately());
    ASSERT_TRUE(m.hamiltonian_rate());
    EXPECT_DOUBLE_EQ(*m.hamiltonian_rate(), 6 * 0.25);
}

TEST(BurgersModel, MassOfInitialProfileAndLinearDecay) {
    const ConformalModel m = burgers_model({});
    const Vector u0 = preset_initial(m);
    const auto inv = m.evaluate_invariants(u0);
    ASSERT_EQ(inv.size(), 1u);
    EXPECT_EQ(inv[0].first, "mass");
    EXPECT_NEAR(inv[0].second, std::erf(M_PI / std::sqrt(2.0)), 2e-5);
    EXPECT_NEAR(inv[0].second, 0.99832, 1e-5);
    EXPECT_DOUBLE_EQ(*m.invariants()[0].exact_rate, 0.5);
    Vector decayed = u0;
    const double f = std::exp(-0.5 * 0.3);
    for (double& x : decayed) x *= f;
    EXPECT_NEAR(m.invariants()[0].evaluate(decayed), f * inv[0].second, 1e-15);
}

TEST(KdvModel, PureDampingWhenCoefficientsVanish) {
    KdvParams p = kdv_preset();
    p.alpha = p.rho = p.nu = 0.0;
    const ConformalModel m = kdv_model(p);
    std::mt19937_64 rng(31);
    const Vector u = random_vector(rng, m.dim());
    const Vector f = m.vector_field(u);
    for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(f[i], -0.02 * u[i], 1e-16);
}

TEST(KdvModel, PresetParameters) {
    const KdvParams p = kdv_preset();
    EXPECT_EQ(p.nu, -1e-5);
    EXPECT_EQ(p.gamma, 1e-2);
    EXPECT_EQ(p.alpha, -3.0 / 8.0);
    EXPECT_EQ(p.rho, -10.0);
    EXPECT_EQ(p.grid.size(), 248u);
    EXPECT_NEAR(p.grid.spacing(), 0.0806, 1e-3);
    EXPECT_DOUBLE_EQ(kdv_model(p).damping_rate(), 0.02);
}

TEST(KdvModel, FieldMatchesDenseOracle) {
    const ConformalModel m = kdv_model(kdv_preset());
    const Grid g = m.grid();
    const Vector u = g.sample([](double x) { return std::exp(-x * x) + 0.2 * std::sin(M_PI * x / 10.0); });
    const Eigen::VectorXd eu = to_eigen(u);
    const Eigen::MatrixXd d1 = dense_d1(g), d3 = dense_d1(g) * dense_d2(g);
    const Eigen::VectorXd oracle =
        -3.0 / 8.0 * (d1 * eu.cwiseProduct(eu)) - 10.0 * (d1 * eu) - 1e-5 * (d3 * eu) - 0.02 * eu;
    EXPECT_LE(max_abs_diff(m.vector_field(u), from_eigen(oracle)), 1e-12 * oracle.cwiseAbs().maxCoeff());
}

TEST(KdvModel, HamiltonianAgainstDenseFormula) {
    const ConformalModel m = kdv_model(kdv_preset());
    const Grid g = m.grid();
    const Vector u = preset_initial(m);
    const Eigen::VectorXd eu = to_eigen(u);
    double cubic = 0, square = 0;
    for (double x : u) {
        cubic += x * x * x;
        square += x * x;
    }
    const double h = g.spacing();
    const double oracle = h * (-3.0 / 8.0 / 3.0 * cubic - 10.0 / 2.0 * square) +
                          (-1e-5) / 2.0 * h * eu.dot(dense_d2(g) * eu);
    EXPECT_NEAR(m.hamiltonian(u), oracle, 1e-13 * std::abs(oracle));
    EXPECT_FALSE(m.hamiltonian_rate());
}

TEST(KdvModel, InvariantsOfInitialProfile) {
    const ConformalModel m = kdv_model(kdv_preset());
    const Vector u0 = preset_initial(m);
    auto u0f = [](double x) { return 2.0 * std::exp(-2.0 * x * x) * kInvSqrt2Pi; };
    const double i1 = dense_riemann(10.0, 1'000'000, u0f);
    const double i2 = dense_riemann(10.0, 1'000'000, [&](double x) { return u0f(x) * u0f(x); });
    const auto inv = m.evaluate_invariants(u0);
    ASSERT_EQ(inv.size(), 2u);
    EXPECT_NEAR(inv[0].second, i1, 1e-12);
    EXPECT_NEAR(inv[1].second, i2, 1e-12);
    EXPECT_NEAR(i2, 1.0 / std::sqrt(M_PI), 1e-12);
    EXPECT_DOUBLE_EQ(*m.invariants()[0].exact_rate, 0.02);
    EXPECT_DOUBLE_EQ(*m.invariants()[1].exact_rate, 0.04);
    EXPECT_FALSE(m.invariants()[1].semidiscrete_exact);
}

TEST(NlsModel, FieldWithZeroImaginaryPart) {
    const ConformalModel m = nls_model({2.0, 5e-4, Grid(5.0, 64)});
    const Grid g = m.grid();
    const Vector u = g.sample([](double x) { return 1.0 / std::cosh(x); });
    Vector w(128, 0.0);
    std::copy(u.begin(), u.end(), w.begin());
    const Vector f = m.vector_field(w);
    const Eigen::VectorXd d2u = dense_d2(g) * to_eigen(u);
    for (int i = 0; i < 64; ++i) {
        EXPECT_NEAR(f[i], -2.5e-4 * u[i], 1e-15);
        EXPECT_NEAR(f[64 + i], d2u(i) + 2.0 * u[i] * u[i] * u[i], 1e-11 * d2u.cwiseAbs().maxCoeff());
    }
    // Without the nonlinearity the imaginary part follows D2 u alone.
    const ConformalModel linear = nls_model({1e-300, 5e-4, Grid(5.0, 64)});
    const Vector fl = linear.vector_field(w);
    for (int i = 0; i < 64; ++i) EXPECT_NEAR(fl[64 + i], d2u(i), 1e-11 * d2u.cwiseAbs().maxCoeff());
}

TEST(NlsModel, MassAndMomentumOfSoliton) {
    const ConformalModel m = nls_model(nls_preset());
    const Vector w = preset_initial(m);
    const auto inv = m.evaluate_invariants(w);
    ASSERT_EQ(inv.size(), 2u);
    EXPECT_NEAR(inv[0].second, 2.0 * std::tanh(25.0), 1e-12);
    // Discrete momentum through an independently assembled dense D1.
    const Grid g = m.grid();
    const Eigen::MatrixXd d1 = dense_d1(g);
    const Eigen::VectorXd u = to_eigen(std::span<const double>(w).subspan(0, 1024));
    const Eigen::VectorXd v = to_eigen(std::span<const double>(w).subspan(1024, 1024));
    const double oracle = g.spacing() * ((d1 * v).dot(u) - (d1 * u).dot(v));
    EXPECT_NEAR(inv[1].second, oracle, 1e-12 * std::abs(oracle));
    // Close to the continuum value 2k * mass = 4 up to the O(dx^2) difference error.
    EXPECT_NEAR(inv[1].second, 4.0 * std::tanh(25.0), 4.0 * g.spacing() * g.spacing() * 4.0);
    EXPECT_DOUBLE_EQ(*m.invariants()[0].exact_rate, 5e-4);
    EXPECT_DOUBLE_EQ(*m.invariants()[1].exact_rate, 5e-4);
}

TEST(NlsModel, PolarizedEnergyFormsDiffer) {
    NlsParams p{2.0, 5e-4, Grid(5.0, 64)};
    const ConformalModel sym = nls_model(p);
    p.polarized_form = NlsPolarizedForm::printed;
    const ConformalModel printed = nls_model(p);
    std::mt19937_64 rng(32);
    const Vector a = random_vector(rng, 128), b = random_vector(rng, 128);
    EXPECT_NEAR(sym.reported_polarized_energy(a, b), sym.reported_polarized_energy(b, a),
                1e-14 * std::abs(sym.reported_polarized_energy(a, b)));
    EXPECT_NE(printed.reported_polarized_energy(a, b), printed.reported_polarized_energy(b, a));
}

TEST(Models, InitialConditionsAtOrigin) {
    const Grid bg = burgers_grid(), kg = kdv_grid(), ng = nls_grid();
    EXPECT_NEAR(initial_condition(ModelKind::burgers, bg)[40], 0.398942, 1e-6);
    EXPECT_NEAR(initial_condition(ModelKind::kdv, kg)[124], 0.797885, 1e-6);
    const Vector w = initial_condition(ModelKind::nls, ng);
    EXPECT_DOUBLE_EQ(w[512], 1.0);
    EXPECT_DOUBLE_EQ(w[1024 + 512], 0.0);
    EXPECT_EQ(w.size(), 2048u);
}

TEST(Models, RejectInvalidParameters) {
    EXPECT_THROW(burgers_model({-0.1, burgers_grid()}), InvalidArgument);
    KdvParams k = kdv_preset();
    k.nu = std::numeric_limits<double>::infinity();
    EXPECT_THROW(kdv_model(k), InvalidArgument);
    EXPECT_THROW(nls_model({0.0, 5e-4, nls_grid()}), InvalidArgument);
    EXPECT_THROW(nls_model({2.0, -1.0, nls_grid()}), InvalidArgument);
    EXPECT_THROW(parse_model_kind("heat"), InvalidArgument);
}

TEST(Models, ZeroStateHasZeroInvariants) {
    for (const auto& m : preset_models()) {
        for (const auto& [name, value] : m.evaluate_invariants(Vector(m.dim(), 0.0))) EXPECT_EQ(value, 0.0) << name;
    }
}

TEST(Models, GradientConsistencyAndSkewness) {
    std::mt19937_64 rng(33);
    for (const auto& m : preset_models()) {
        for (int trial = 0; trial < 10; ++trial) {
            const Vector u = random_vector(rng, m.dim(), 0.8);
            const Vector dir = random_vector(rng, m.dim());
            Vector grad(m.dim());
            m.grad_H(u, grad);
            const double h = 1e-5;
            Vector up = u, um = u;
            for (std::size_t i = 0; i < u.size(); ++i) {
                up[i] += h * dir[i];
                um[i] -= h * dir[i];
            }
            const double fd = (m.hamiltonian(up) - m.hamiltonian(um)) / (2 * h);
            EXPECT_LE(std::abs(dot(grad, dir) - fd), 1e-6 * std::abs(fd)) << m.name();
        }
    }
}

TEST(Models, PolarizedIdentitiesOnRandomStates) {
    std::mt19937_64 rng(34);
    for (const auto& m : preset_models()) {
        const auto& e = m.energy();
        for (int trial = 0; trial < 100; ++trial) {
            const Vector u = random_vector(rng, m.dim()), v = random_vector(rng, m.dim()),
                         w = random_vector(rng, m.dim());
            const double h = e.value(u);
            EXPECT_NEAR(e.polarized(u, u), h, 1e-12 * std::abs(h));
            EXPECT_NEAR(e.polarized(v, w), e.polarized(w, v), 1e-14 * std::abs(e.polarized(v, w)));
            Vector pdg(m.dim());
            e.pdg(u, v, w, pdg);
            Vector diff(m.dim());
            for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = w[i] - u[i];
            const double lhs = e.polarized(v, w) - e.polarized(u, v);
            const double rhs = 0.5 * dot(diff, pdg);
            EXPECT_NEAR(lhs, rhs, 1e-11 * (std::abs(e.polarized(v, w)) + std::abs(e.polarized(u, v)))) << m.name();
            Vector diag(m.dim()), grad(m.dim());
            e.pdg(u, u, u, diag);
            e.gradient(u, grad);
            EXPECT_LE(max_abs_diff(diag, grad), 1e-12 * max_abs(grad)) << m.name();
        }
    }
}

TEST(Models, ConservativeLimitKeepsHamiltonian) {
    for (const auto& m : conservative_models()) {
        const Vector u0 = preset_initial(m);
        const double dt_ref = m.name() == "nls" ? 2.5e-4 : 1e-3;
        Vector u = u0;
        const double h0 = m.hamiltonian(u0);
        double worst = 0.0;
        for (int k = 0; k < 10; ++k) {
            u = reference_solve(m, u, 0.1, dt_ref);
            worst = std::max(worst, relative(m.hamiltonian(u), h0));
        }
        EXPECT_LE(worst, 1e-8) << m.name();
    }
}

TEST(Models, ExactRateInvariantsDecayAtTheirRate) {
    for (const auto& m : preset_models()) {
        const Vector u0 = preset_initial(m);
        const double dt_ref = m.name() == "nls" ? 2.5e-4 : 1e-3;
        const Vector u1 = reference_solve(m, u0, 0.1, dt_ref);
        for (const auto& inv : m.invariants()) {
            ASSERT_TRUE(inv.exact_rate);
            const double r = std::log(inv.evaluate(u1) / inv.evaluate(u0)) + *inv.exact_rate * 0.1;
            if (inv.semidiscrete_exact || inv.name == "momentum") {
                EXPECT_LE(std::abs(r), 1e-6) << m.name() << " " << inv.name;
            }
        }
    }
}

TEST(Models, KdvQuadraticInvariantLeaksUnderCentralDifferences) {
    // sum u^2 is not conserved by alpha D1(u.u): the residual over t = 0.1
    // is of the size of the spatial truncation error, far above roundoff.
    KdvParams p = kdv_preset();
    const ConformalModel m = kdv_model(p);
    const Vector u0 = preset_initial(m);
    const Vector u1 = reference_solve(m, u0, 0.1, 1e-3);
    const auto& i2 = m.invariants()[1];
    const double r = std::log(i2.evaluate(u1) / i2.evaluate(u0)) + *i2.exact_rate * 0.1;
    EXPECT_GT(std::abs(r), 1e-6);
    EXPECT_LT(std::abs(r), 1e-4);
    // With alpha = 0 the field is linear and skew, and I2 decays exactly.
    p.alpha = 0.0;
    const ConformalModel linear = kdv_model(p);
    const Vector v1 = reference_solve(linear, u0, 0.1, 1e-3);
    const double rl = std::log(i2.evaluate(v1) / i2.evaluate(u0)) + *i2.exact_rate * 0.1;
    EXPECT_LE(std::abs(rl), 1e-9);
}

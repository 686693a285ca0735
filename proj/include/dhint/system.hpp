#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dhint/linalg.hpp"
#include "dhint/spatial.hpp"

namespace dhint {

/// Quantity tracked along a run. When exact_rate is set the quantity decays
/// as exp(-exact_rate * t); semidiscrete_exact is false when this holds for
/// the continuous problem only and the semidiscrete flow leaks a small defect.
struct Invariant {
    std::string name;
    std::function<double(std::span<const double>)> evaluate;
    std::optional<double> exact_rate;
    int degree = 1;
    bool semidiscrete_exact = true;
};

/// Nodal quadratic polarization of a monomial u^p, p in {2, 3, 4}:
/// a symmetric two-point energy with value(u, u) = u^p and a three-point
/// gradient satisfying value(v, w) - value(u, v) = (w - u) pdg(u, v, w) / 2.
struct MonomialPolarization {
    int degree = 3;
    double theta = 0.5;

    double value(double v, double w) const;
    double pdg(double u, double v, double w) const;
};

/// theta is used only for degree 2.
MonomialPolarization polarize_monomial(int degree, double theta = 0.5);

/// Discrete Hamiltonian built from polynomial nodal terms and quadratic
/// forms, each carrying the dx quadrature weight. The state is stored as
/// `blocks` stacked components of `nodes` entries. Every term comes with its
/// quadratic polarization, so the same object serves as H and as H~.
class PolynomialEnergy {
public:
    PolynomialEnergy(std::size_t nodes, std::size_t blocks, double dx);

    /// coefficient * dx * sum u^3 over one block.
    void add_cubic(double coefficient, std::size_t block = 0);
    /// coefficient * dx * sum (u^2 + v^2)^2 over blocks 0 and 1.
    void add_quartic_modulus(double coefficient);
    /// coefficient/2 * dx * u^T K u with K = op (symmetric) or identity;
    /// theta is the polarization weight of the term.
    void add_quadratic(double coefficient, std::optional<PeriodicStencilOperator> op,
                       double theta, std::size_t block = 0);

    std::size_t dim() const noexcept { return nodes_ * blocks_; }
    std::size_t blocks() const noexcept { return blocks_; }
    bool is_empty() const noexcept {
        return cubic_.empty() && quartic_.empty() && quadratic_.empty();
    }
    /// True when the gradient is at most quadratic (no quartic terms).
    bool has_quadratic_gradient() const noexcept { return quartic_.empty(); }

    double value(std::span<const double> u) const;
    void gradient(std::span<const double> u, std::span<double> out) const;
    /// Hessian in node-interleaved ordering.
    PeriodicBandedMatrix<double> hessian(std::span<const double> u) const;

    /// Symmetric (affine-)bilinear extension G(a, b) of the gradient with
    /// G(a, a) = grad H(a). Requires has_quadratic_gradient().
    void gradient_bilinear(std::span<const double> a, std::span<const double> b,
                           std::span<double> out) const;

    /// Polarized energy H~(a, b).
    double polarized(std::span<const double> a, std::span<const double> b) const;
    /// Polarized discrete gradient; affine in w.
    void pdg(std::span<const double> u, std::span<const double> v, std::span<const double> w,
             std::span<double> out) const;
    /// Matrix of w -> pdg(u, v, w) - pdg(u, v, 0) (independent of u), interleaved.
    PeriodicBandedMatrix<double> pdg_matrix(std::span<const double> v) const;

    /// Polarization weight of the quadratic terms in insertion order.
    std::vector<double> thetas() const;
    void set_theta(std::size_t quadratic_term, double theta);

private:
    struct Cubic {
        double coefficient;
        std::size_t block;
    };
    struct Quadratic {
        double coefficient;
        std::optional<PeriodicStencilOperator> op;
        double theta;
        std::size_t block;
    };

    std::span<const double> block(std::span<const double> u, std::size_t b) const {
        return u.subspan(b * nodes_, nodes_);
    }
    std::span<double> block(std::span<double> u, std::size_t b) const {
        return u.subspan(b * nodes_, nodes_);
    }
    std::size_t band() const;
    void check(std::span<const double> u) const;
    double quadratic_form(const Quadratic& q, std::span<const double> a,
                          std::span<const double> b) const;
    void apply_form(const Quadratic& q, std::span<const double> x, double scale,
                    std::span<double> out) const;

    std::size_t nodes_;
    std::size_t blocks_;
    double dx_;
    std::vector<Cubic> cubic_;
    std::vector<double> quartic_;
    std::vector<Quadratic> quadratic_;
};

/// Linear system of a linearly implicit step. Complex systems carry a stacked
/// two-block state: the solution z maps back to (Re z; Im z).
struct RealLinearSystem {
    PeriodicBandedMatrix<double> matrix;  // interleaved ordering
    Vector rhs;                           // stacked ordering
    std::size_t blocks = 1;
};
struct ComplexLinearSystem {
    PeriodicBandedMatrix<Complex> matrix;
    std::vector<Complex> rhs;
};
using LinearStepSystem = std::variant<RealLinearSystem, ComplexLinearSystem>;

Vector solve_linear_step(const LinearStepSystem& system);

/// Semidiscrete damped Hamiltonian system u' = S grad H(u) - rate * u.
/// S is a constant skew matrix that absorbs the 1/dx compensating the
/// quadrature weight in H, so S grad H is the semidiscrete conservative field.
class ConformalModel {
public:
    /// Builds the complex operator (I - i tau K) of a two-block linearly
    /// implicit step whose pdg matrix has the form blockdiag(dx K, dx K).
    using ComplexStepOperator =
        std::function<PeriodicBandedMatrix<Complex>(std::span<const double> middle, double tau)>;

    ConformalModel(std::string name, Grid grid, std::size_t blocks, double damping_rate,
                   double printed_gamma, PolynomialEnergy energy,
                   PeriodicBandedMatrix<double> skew, std::vector<Invariant> invariants);

    const std::string& name() const noexcept { return name_; }
    const Grid& grid() const noexcept { return grid_; }
    std::size_t dim() const noexcept { return energy_.dim(); }
    std::size_t blocks() const noexcept { return blocks_; }
    /// Effective damping rate of the semidiscrete ODE.
    double damping_rate() const noexcept { return damping_rate_; }
    /// Damping coefficient as printed in the PDE.
    double printed_gamma() const noexcept { return printed_gamma_; }

    const PolynomialEnergy& energy() const noexcept { return energy_; }
    PolynomialEnergy& energy() noexcept { return energy_; }
    const PeriodicBandedMatrix<double>& skew() const noexcept { return skew_; }
    const std::vector<Invariant>& invariants() const noexcept { return invariants_; }

    void apply_S(std::span<const double> x, std::span<double> out) const;
    void grad_H(std::span<const double> u, std::span<double> out) const { energy_.gradient(u, out); }
    double hamiltonian(std::span<const double> u) const { return energy_.value(u); }

    /// Conservative field f(u) = S grad H(u).
    void conservative_field(std::span<const double> u, std::span<double> out) const;
    Vector conservative_field(std::span<const double> u) const;
    /// Full field f(u) - rate * u. Throws BlowUpError on non-finite output.
    Vector vector_field(std::span<const double> u) const;
    /// Jacobian of the conservative field, interleaved ordering.
    PeriodicBandedMatrix<double> field_jacobian(std::span<const double> u) const;
    std::size_t field_jacobian_bandwidth() const;

    bool has_kahan_bilinear() const noexcept { return energy_.has_quadratic_gradient(); }
    /// Symmetric bilinear form fbar with fbar(a, a) = f(a); linear terms enter
    /// as (L a + L b) / 2. Throws UnsupportedModelError for cubic fields.
    Vector kahan_bilinear(std::span<const double> a, std::span<const double> b) const;

    /// S * pdg(u, v, w).
    Vector polarized_field(std::span<const double> u, std::span<const double> v,
                           std::span<const double> w) const;
    double polarized_energy(std::span<const double> a, std::span<const double> b) const;

    /// Linear system for c in  c - tau * S pdg(a, b, c) = a.
    LinearStepSystem lie_system(std::span<const double> a, std::span<const double> b,
                                double tau) const;

    /// Hamiltonian as reported in outputs; defaults to the generator H.
    double reported_hamiltonian(std::span<const double> u) const;
    /// Decay rate of the reported Hamiltonian when it is homogeneous.
    std::optional<double> hamiltonian_rate() const noexcept { return hamiltonian_rate_; }
    bool reports_generator_separately() const noexcept { return static_cast<bool>(reported_); }

    std::vector<std::pair<std::string, double>> evaluate_invariants(std::span<const double> u) const;

    void set_reported_hamiltonian(std::function<double(std::span<const double>)> fn) {
        reported_ = std::move(fn);
    }
    void set_hamiltonian_rate(std::optional<double> rate) { hamiltonian_rate_ = rate; }
    void set_complex_step_operator(ComplexStepOperator op) { complex_step_ = std::move(op); }
    /// Replaces H~ in diagnostics only (the step still uses the energy's pdg).
    void set_reported_polarized_energy(
        std::function<double(std::span<const double>, std::span<const double>)> fn) {
        reported_polarized_ = std::move(fn);
    }
    double reported_polarized_energy(std::span<const double> a, std::span<const double> b) const;

private:
    void check(std::span<const double> u) const;

    std::string name_;
    Grid grid_;
    std::size_t blocks_;
    double damping_rate_;
    double printed_gamma_;
    PolynomialEnergy energy_;
    PeriodicBandedMatrix<double> skew_;
    std::vector<Invariant> invariants_;
    std::function<double(std::span<const double>)> reported_;
    std::optional<double> hamiltonian_rate_;
    ComplexStepOperator complex_step_;
    std::function<double(std::span<const double>, std::span<const double>)> reported_polarized_;
};

/// Model with grad H = 0: pure linear decay u' = -rate * u.
ConformalModel zero_field_model(const Grid& grid, double damping_rate);

}  // namespace dhint

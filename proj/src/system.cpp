#include "dhint/system.hpp"

#include <cmath>
#include <string>

#include "dhint/errors.hpp"

namespace dhint {

// ---------------------------------------------------------------------------
// Monomial polarization

double MonomialPolarization::value(double v, double w) const {
    switch (degree) {
        case 2: return theta * (v * v + w * w) / 2.0 + (1.0 - theta) * (v * w);
        case 3: return v * w * (v + w) / 2.0;
        case 4: return (v * v) * (w * w);
        default: throw InvalidArgument("polarization degree must be 2, 3 or 4");
    }
}

double MonomialPolarization::pdg(double u, double v, double w) const {
    switch (degree) {
        case 2: return theta * (u + w) + 2.0 * (1.0 - theta) * v;
        case 3: return v * (u + v + w);
        case 4: return 2.0 * v * v * (u + w);
        default: throw InvalidArgument("polarization degree must be 2, 3 or 4");
    }
}

MonomialPolarization polarize_monomial(int degree, double theta) {
    if (degree < 2 || degree > 4) {
        throw InvalidArgument("polarization degree must be 2, 3 or 4, got " + std::to_string(degree));
    }
    if (degree == 2 && !(theta >= 0.0 && theta <= 1.0)) {
        throw InvalidArgument("polarization weight theta must lie in [0, 1]");
    }
    return MonomialPolarization{degree, theta};
}

// ---------------------------------------------------------------------------
// PolynomialEnergy

PolynomialEnergy::PolynomialEnergy(std::size_t nodes, std::size_t blocks, double dx)
    : nodes_(nodes), blocks_(blocks), dx_(dx) {
    if (nodes == 0 || blocks == 0) throw InvalidArgument("energy needs a nonempty state");
}

void PolynomialEnergy::add_cubic(double coefficient, std::size_t block) {
    if (block >= blocks_) throw InvalidArgument("cubic term: block out of range");
    cubic_.push_back({coefficient, block});
}

void PolynomialEnergy::add_quartic_modulus(double coefficient) {
    if (blocks_ != 2) throw InvalidArgument("quartic modulus term needs two blocks");
    quartic_.push_back(coefficient);
}

void PolynomialEnergy::add_quadratic(double coefficient, std::optional<PeriodicStencilOperator> op,
                                     double theta, std::size_t block) {
    if (block >= blocks_) throw InvalidArgument("quadratic term: block out of range");
    if (op && op->size() != nodes_) throw InvalidArgument("quadratic term: operator size mismatch");
    if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgument("theta must lie in [0, 1]");
    quadratic_.push_back({coefficient, std::move(op), theta, block});
}

std::vector<double> PolynomialEnergy::thetas() const {
    std::vector<double> out;
    for (const auto& q : quadratic_) out.push_back(q.theta);
    return out;
}

void PolynomialEnergy::set_theta(std::size_t quadratic_term, double theta) {
    if (quadratic_term >= quadratic_.size()) throw InvalidArgument("no such quadratic term");
    if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgument("theta must lie in [0, 1]");
    quadratic_[quadratic_term].theta = theta;
}

void PolynomialEnergy::check(std::span<const double> u) const {
    if (u.size() != dim()) {
        throw InvalidArgument("state has length " + std::to_string(u.size()) + ", expected " +
                              std::to_string(dim()));
    }
}

std::size_t PolynomialEnergy::band() const {
    std::size_t b = quartic_.empty() ? 0 : 1;
    for (const auto& q : quadratic_) {
        if (q.op) b = std::max(b, q.op->bandwidth() * blocks_);
    }
    return b;
}

double PolynomialEnergy::quadratic_form(const Quadratic& q, std::span<const double> a,
                                        std::span<const double> b) const {
    double acc = 0.0;
    if (q.op) {
        const Vector kb = q.op->apply(b);
        for (std::size_t i = 0; i < nodes_; ++i) acc += a[i] * kb[i];
    } else {
        for (std::size_t i = 0; i < nodes_; ++i) acc += a[i] * b[i];
    }
    return acc;
}

void PolynomialEnergy::apply_form(const Quadratic& q, std::span<const double> x, double scale,
                                  std::span<double> out) const {
    if (q.op) {
        q.op->apply_add(x, scale, out);
    } else {
        for (std::size_t i = 0; i < nodes_; ++i) out[i] += scale * x[i];
    }
}

double PolynomialEnergy::value(std::span<const double> u) const {
    check(u);
    double acc = 0.0;
    for (const auto& c : cubic_) {
        double s = 0.0;
        for (double x : block(u, c.block)) s += x * x * x;
        acc += c.coefficient * s;
    }
    for (double c : quartic_) {
        const auto p = block(u, 0);
        const auto q = block(u, 1);
        double s = 0.0;
        for (std::size_t i = 0; i < nodes_; ++i) {
            const double rho = p[i] * p[i] + q[i] * q[i];
            s += rho * rho;
        }
        acc += c * s;
    }
    for (const auto& q : quadratic_) {
        const auto x = block(u, q.block);
        acc += 0.5 * q.coefficient * quadratic_form(q, x, x);
    }
    return dx_ * acc;
}

void PolynomialEnergy::gradient(std::span<const double> u, std::span<double> out) const {
    check(u);
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto& c : cubic_) {
        const auto x = block(u, c.block);
        auto g = block(out, c.block);
        for (std::size_t i = 0; i < nodes_; ++i) g[i] += 3.0 * c.coefficient * dx_ * x[i] * x[i];
    }
    for (double c : quartic_) {
        const auto p = block(u, 0);
        const auto q = block(u, 1);
        auto gp = block(out, 0);
        auto gq = block(out, 1);
        for (std::size_t i = 0; i < nodes_; ++i) {
            const double rho = p[i] * p[i] + q[i] * q[i];
            gp[i] += 4.0 * c * dx_ * rho * p[i];
            gq[i] += 4.0 * c * dx_ * rho * q[i];
        }
    }
    for (const auto& q : quadratic_) {
        apply_form(q, block(u, q.block), q.coefficient * dx_, block(out, q.block));
    }
}

PeriodicBandedMatrix<double> PolynomialEnergy::hessian(std::span<const double> u) const {
    check(u);
    const std::size_t k = blocks_;
    PeriodicBandedMatrix<double> h(dim(), band());
    for (const auto& c : cubic_) {
        const auto x = block(u, c.block);
        for (std::size_t i = 0; i < nodes_; ++i) h.at(i * k + c.block, 0) += 6.0 * c.coefficient * dx_ * x[i];
    }
    for (double c : quartic_) {
        const auto p = block(u, 0);
        const auto q = block(u, 1);
        for (std::size_t i = 0; i < nodes_; ++i) {
            const double rho = p[i] * p[i] + q[i] * q[i];
            const double s = 4.0 * c * dx_;
            h.at(2 * i, 0) += s * (rho + 2.0 * p[i] * p[i]);
            h.at(2 * i + 1, 0) += s * (rho + 2.0 * q[i] * q[i]);
            h.at(2 * i, 1) += s * 2.0 * p[i] * q[i];
            h.at(2 * i + 1, -1) += s * 2.0 * p[i] * q[i];
        }
    }
    for (const auto& q : quadratic_) {
        const double s = q.coefficient * dx_;
        for (std::size_t i = 0; i < nodes_; ++i) {
            if (q.op) {
                const int b = static_cast<int>(q.op->bandwidth());
                for (int d = -b; d <= b; ++d) {
                    h.at(i * k + q.block, d * static_cast<int>(k)) += s * q.op->coefficient(d);
                }
            } else {
                h.at(i * k + q.block, 0) += s;
            }
        }
    }
    return h;
}

void PolynomialEnergy::gradient_bilinear(std::span<const double> a, std::span<const double> b,
                                         std::span<double> out) const {
    check(a);
    check(b);
    if (!has_quadratic_gradient()) {
        throw UnsupportedModelError("gradient is not quadratic: no bilinear extension");
    }
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto& c : cubic_) {
        const auto x = block(a, c.block);
        const auto y = block(b, c.block);
        auto g = block(out, c.block);
        for (std::size_t i = 0; i < nodes_; ++i) g[i] += 3.0 * c.coefficient * dx_ * x[i] * y[i];
    }
    for (const auto& q : quadratic_) {
        const double s = 0.5 * q.coefficient * dx_;
        apply_form(q, block(a, q.block), s, block(out, q.block));
        apply_form(q, block(b, q.block), s, block(out, q.block));
    }
}

double PolynomialEnergy::polarized(std::span<const double> a, std::span<const double> b) const {
    check(a);
    check(b);
    double acc = 0.0;
    for (const auto& c : cubic_) {
        const auto v = block(a, c.block);
        const auto w = block(b, c.block);
        double s = 0.0;
        for (std::size_t i = 0; i < nodes_; ++i) s += v[i] * w[i] * (v[i] + w[i]) / 2.0;
        acc += c.coefficient * s;
    }
    for (double c : quartic_) {
        const auto vp = block(a, 0);
        const auto vq = block(a, 1);
        const auto wp = block(b, 0);
        const auto wq = block(b, 1);
        double s = 0.0;
        for (std::size_t i = 0; i < nodes_; ++i) {
            s += (vp[i] * vp[i] + vq[i] * vq[i]) * (wp[i] * wp[i] + wq[i] * wq[i]);
        }
        acc += c * s;
    }
    for (const auto& q : quadratic_) {
        const auto v = block(a, q.block);
        const auto w = block(b, q.block);
        const double pure = (quadratic_form(q, v, v) + quadratic_form(q, w, w)) / 2.0;
        const double mixed = quadratic_form(q, v, w);
        acc += 0.5 * q.coefficient * (q.theta * pure + (1.0 - q.theta) * mixed);
    }
    return dx_ * acc;
}

void PolynomialEnergy::pdg(std::span<const double> u, std::span<const double> v,
                           std::span<const double> w, std::span<double> out) const {
    check(u);
    check(v);
    check(w);
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto& c : cubic_) {
        const auto x = block(u, c.block);
        const auto y = block(v, c.block);
        const auto z = block(w, c.block);
        auto g = block(out, c.block);
        for (std::size_t i = 0; i < nodes_; ++i) g[i] += c.coefficient * dx_ * y[i] * (x[i] + y[i] + z[i]);
    }
    for (double c : quartic_) {
        const auto yp = block(v, 0);
        const auto yq = block(v, 1);
        for (std::size_t bl = 0; bl < 2; ++bl) {
            const auto x = block(u, bl);
            const auto z = block(w, bl);
            auto g = block(out, bl);
            for (std::size_t i = 0; i < nodes_; ++i) {
                const double rho = yp[i] * yp[i] + yq[i] * yq[i];
                g[i] += 2.0 * c * dx_ * rho * (x[i] + z[i]);
            }
        }
    }
    for (const auto& q : quadratic_) {
        const double s = q.coefficient * dx_;
        auto g = block(out, q.block);
        apply_form(q, block(u, q.block), s * q.theta / 2.0, g);
        apply_form(q, block(w, q.block), s * q.theta / 2.0, g);
        apply_form(q, block(v, q.block), s * (1.0 - q.theta), g);
    }
}

PeriodicBandedMatrix<double> PolynomialEnergy::pdg_matrix(std::span<const double> v) const {
    check(v);
    const std::size_t k = blocks_;
    PeriodicBandedMatrix<double> m(dim(), band());
    for (const auto& c : cubic_) {
        const auto y = block(v, c.block);
        for (std::size_t i = 0; i < nodes_; ++i) m.at(i * k + c.block, 0) += c.coefficient * dx_ * y[i];
    }
    for (double c : quartic_) {
        const auto yp = block(v, 0);
        const auto yq = block(v, 1);
        for (std::size_t i = 0; i < nodes_; ++i) {
            const double rho = yp[i] * yp[i] + yq[i] * yq[i];
            m.at(2 * i, 0) += 2.0 * c * dx_ * rho;
            m.at(2 * i + 1, 0) += 2.0 * c * dx_ * rho;
        }
    }
    for (const auto& q : quadratic_) {
        const double s = q.coefficient * dx_ * q.theta / 2.0;
        for (std::size_t i = 0; i < nodes_; ++i) {
            if (q.op) {
                const int b = static_cast<int>(q.op->bandwidth());
                for (int d = -b; d <= b; ++d) {
                    m.at(i * k + q.block, d * static_cast<int>(k)) += s * q.op->coefficient(d);
                }
            } else {
                m.at(i * k + q.block, 0) += s;
            }
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Linear step systems

Vector solve_linear_step(const LinearStepSystem& system) {
    if (const auto* real = std::get_if<RealLinearSystem>(&system)) {
        const Vector rhs = to_interleaved(real->rhs, real->blocks);
        return from_interleaved(solve_periodic_banded<double>(real->matrix, rhs), real->blocks);
    }
    const auto& cplx = std::get<ComplexLinearSystem>(system);
    const std::vector<Complex> z = solve_periodic_banded<Complex>(cplx.matrix, cplx.rhs);
    const std::size_t m = z.size();
    Vector out(2 * m);
    for (std::size_t i = 0; i < m; ++i) {
        out[i] = z[i].real();
        out[m + i] = z[i].imag();
    }
    return out;
}

// ---------------------------------------------------------------------------
// ConformalModel

ConformalModel::ConformalModel(std::string name, Grid grid, std::size_t blocks, double damping_rate,
                               double printed_gamma, PolynomialEnergy energy,
                               PeriodicBandedMatrix<double> skew, std::vector<Invariant> invariants)
    : name_(std::move(name)),
      grid_(grid),
      blocks_(blocks),
      damping_rate_(damping_rate),
      printed_gamma_(printed_gamma),
      energy_(std::move(energy)),
      skew_(std::move(skew)),
      invariants_(std::move(invariants)) {
    if (energy_.blocks() != blocks_) throw InvalidArgument("energy block count mismatch");
    if (skew_.size() != energy_.dim()) throw InvalidArgument("skew operator size mismatch");
    if (!(damping_rate_ >= 0.0) || !std::isfinite(damping_rate_)) {
        throw InvalidArgument("damping rate must be finite and non-negative");
    }
}

void ConformalModel::check(std::span<const double> u) const {
    if (u.size() != dim()) {
        throw InvalidArgument("state has length " + std::to_string(u.size()) + ", model expects " +
                              std::to_string(dim()));
    }
}

void ConformalModel::apply_S(std::span<const double> x, std::span<double> out) const {
    check(x);
    if (blocks_ == 1) {
        const Vector y = skew_.apply<double>(x);
        std::copy(y.begin(), y.end(), out.begin());
        return;
    }
    const Vector xi = to_interleaved(x, blocks_);
    const Vector yi = skew_.apply<double>(std::span<const double>(xi));
    const Vector y = from_interleaved(yi, blocks_);
    std::copy(y.begin(), y.end(), out.begin());
}

void ConformalModel::conservative_field(std::span<const double> u, std::span<double> out) const {
    Vector g(dim());
    energy_.gradient(u, g);
    apply_S(g, out);
}

Vector ConformalModel::conservative_field(std::span<const double> u) const {
    Vector out(dim());
    conservative_field(u, out);
    return out;
}

Vector ConformalModel::vector_field(std::span<const double> u) const {
    Vector out = conservative_field(u);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] -= damping_rate_ * u[i];
        if (!std::isfinite(out[i])) throw BlowUpError("vector field is not finite");
    }
    return out;
}

PeriodicBandedMatrix<double> ConformalModel::field_jacobian(std::span<const double> u) const {
    return skew_.multiply(energy_.hessian(u));
}

std::size_t ConformalModel::field_jacobian_bandwidth() const {
    return skew_.bandwidth() + energy_.hessian(Vector(dim(), 0.0)).bandwidth();
}

Vector ConformalModel::kahan_bilinear(std::span<const double> a, std::span<const double> b) const {
    if (!has_kahan_bilinear()) {
        throw UnsupportedModelError("model '" + name_ + "' has no Kahan bilinear form (field is not quadratic)");
    }
    Vector g(dim());
    energy_.gradient_bilinear(a, b, g);
    Vector out(dim());
    apply_S(g, out);
    return out;
}

Vector ConformalModel::polarized_field(std::span<const double> u, std::span<const double> v,
                                       std::span<const double> w) const {
    Vector g(dim());
    energy_.pdg(u, v, w, g);
    Vector out(dim());
    apply_S(g, out);
    return out;
}

double ConformalModel::polarized_energy(std::span<const double> a, std::span<const double> b) const {
    return energy_.polarized(a, b);
}

double ConformalModel::reported_polarized_energy(std::span<const double> a,
                                                 std::span<const double> b) const {
    return reported_polarized_ ? reported_polarized_(a, b) : energy_.polarized(a, b);
}

LinearStepSystem ConformalModel::lie_system(std::span<const double> a, std::span<const double> b,
                                            double tau) const {
    check(a);
    check(b);
    const Vector zero(dim(), 0.0);
    Vector rhs = polarized_field(a, b, zero);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = a[i] + tau * rhs[i];

    if (complex_step_) {
        const std::size_t m = dim() / 2;
        ComplexLinearSystem sys{complex_step_(b, tau), std::vector<Complex>(m)};
        for (std::size_t i = 0; i < m; ++i) sys.rhs[i] = Complex(rhs[i], rhs[m + i]);
        return sys;
    }
    PeriodicBandedMatrix<double> mat = skew_.multiply(energy_.pdg_matrix(b));
    mat.scale(-tau);
    for (std::size_t i = 0; i < mat.size(); ++i) mat.at(i, 0) += 1.0;
    return RealLinearSystem{std::move(mat), std::move(rhs), blocks_};
}

double ConformalModel::reported_hamiltonian(std::span<const double> u) const {
    return reported_ ? reported_(u) : energy_.value(u);
}

std::vector<std::pair<std::string, double>> ConformalModel::evaluate_invariants(
    std::span<const double> u) const {
    check(u);
    std::vector<std::pair<std::string, double>> out;
    out.reserve(invariants_.size());
    for (const auto& inv : invariants_) out.emplace_back(inv.name, inv.evaluate(u));
    return out;
}

ConformalModel zero_field_model(const Grid& grid, double damping_rate) {
    const std::size_t m = grid.size();
    PeriodicBandedMatrix<double> skew(m, 1);
    Invariant mass{"mass", [grid](std::span<const double> u) { return quadrature(grid, u); },
                   damping_rate, 1};
    return ConformalModel("zero-field", grid, 1, damping_rate, damping_rate,
                          PolynomialEnergy(m, 1, grid.spacing()), std::move(skew), {std::move(mass)});
}

}  // namespace dhint

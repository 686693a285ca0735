#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dhint {

using Vector = std::vector<double>;

/// Uniform periodic grid on [-L, L). The right endpoint is identified with
/// the left one, so the nodes are x_k = -L + k*dx for k = 0..M-1.
class Grid {
public:
    Grid(double half_length, std::size_t size);

    double half_length() const noexcept { return half_length_; }
    std::size_t size() const noexcept { return size_; }
    double spacing() const noexcept { return spacing_; }

    double node(std::size_t k) const noexcept {
        return -half_length_ + static_cast<double>(k) * spacing_;
    }
    Vector nodes() const;

    /// Evaluates f at every node.
    template <typename F>
    Vector sample(F&& f) const {
        Vector out(size_);
        for (std::size_t k = 0; k < size_; ++k) out[k] = f(node(k));
        return out;
    }

private:
    double half_length_;
    std::size_t size_;
    double spacing_;
};

Grid build_grid(double half_length, std::size_t size);

/// Circulant finite-difference operator stored as its centered stencil:
/// (D u)_k = sum_{d=-b..b} coefficient(d) * u_{(k+d) mod M}.
class PeriodicStencilOperator {
public:
    PeriodicStencilOperator(int order, std::size_t size, std::vector<double> stencil);

    int order() const noexcept { return order_; }
    std::size_t size() const noexcept { return size_; }
    std::size_t bandwidth() const noexcept { return (stencil_.size() - 1) / 2; }

    /// Stencil weight for column offset d, zero outside [-b, b].
    double coefficient(int offset) const noexcept;
    std::span<const double> stencil() const noexcept { return stencil_; }

    /// First row of the circulant matrix, indexed by column.
    Vector first_row() const;

    void apply(std::span<const double> u, std::span<double> out) const;
    Vector apply(std::span<const double> u) const;

    /// Adds scale * D u to out.
    void apply_add(std::span<const double> u, double scale, std::span<double> out) const;

    /// Circulant product this * rhs (stencil convolution).
    PeriodicStencilOperator compose(const PeriodicStencilOperator& rhs) const;

    /// Dense row-major M x M materialization. Intended for tests.
    std::vector<double> to_dense() const;

private:
    int order_;
    std::size_t size_;
    std::vector<double> stencil_;  // offsets -b..b
};

/// Centered periodic difference matrices: order 1 and 2 are the standard
/// three-point stencils, order 3 is the product D1 * D2.
PeriodicStencilOperator derivative_operator(const Grid& grid, int order);

/// Rectangle rule dx * sum(values).
double quadrature(const Grid& grid, std::span<const double> values);

}  // namespace dhint

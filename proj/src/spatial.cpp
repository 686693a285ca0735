#include "dhint/spatial.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "dhint/errors.hpp"

namespace dhint {

Grid::Grid(double half_length, std::size_t size)
    : half_length_(half_length), size_(size), spacing_(0.0) {
    if (!(half_length > 0.0) || !std::isfinite(half_length)) {
        throw InvalidArgument("grid half-length must be positive and finite");
    }
    if (size < 4 || size % 2 != 0) {
        throw InvalidArgument("grid size must be even and at least 4, got " +
                              std::to_string(size));
    }
    spacing_ = 2.0 * half_length / static_cast<double>(size);
}

Vector Grid::nodes() const {
    return sample([](double x) { return x; });
}

Grid build_grid(double half_length, std::size_t size) { return Grid(half_length, size); }

PeriodicStencilOperator::PeriodicStencilOperator(int order, std::size_t size,
                                                 std::vector<double> stencil)
    : order_(order), size_(size), stencil_(std::move(stencil)) {
    if (stencil_.empty() || stencil_.size() % 2 == 0) {
        throw InvalidArgument("stencil length must be odd");
    }
    if (size_ == 0) throw InvalidArgument("operator size must be positive");
}

double PeriodicStencilOperator::coefficient(int offset) const noexcept {
    const int b = static_cast<int>(bandwidth());
    if (offset < -b || offset > b) return 0.0;
    return stencil_[static_cast<std::size_t>(offset + b)];
}

Vector PeriodicStencilOperator::first_row() const {
    Vector row(size_, 0.0);
    const int b = static_cast<int>(bandwidth());
    const int n = static_cast<int>(size_);
    for (int d = -b; d <= b; ++d) {
        row[static_cast<std::size_t>(((d % n) + n) % n)] += coefficient(d);
    }
    return row;
}

void PeriodicStencilOperator::apply(std::span<const double> u, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    apply_add(u, 1.0, out);
}

Vector PeriodicStencilOperator::apply(std::span<const double> u) const {
    Vector out(size_);
    apply(u, out);
    return out;
}

void PeriodicStencilOperator::apply_add(std::span<const double> u, double scale,
                                        std::span<double> out) const {
    if (u.size() != size_ || out.size() != size_) {
        throw InvalidArgument("stencil operator applied to vector of length " +
                              std::to_string(u.size()) + ", expected " +
                              std::to_string(size_));
    }
    const int b = static_cast<int>(bandwidth());
    const int n = static_cast<int>(size_);
    // Interior rows need no wrap-around.
    for (int k = 0; k < n; ++k) {
        double acc = 0.0;
        if (k >= b && k + b < n) {
            for (int d = -b; d <= b; ++d) acc += stencil_[d + b] * u[k + d];
        } else {
            for (int d = -b; d <= b; ++d) acc += stencil_[d + b] * u[(((k + d) % n) + n) % n];
        }
        out[k] += scale * acc;
    }
}

PeriodicStencilOperator PeriodicStencilOperator::compose(const PeriodicStencilOperator& rhs) const {
    if (rhs.size_ != size_) throw InvalidArgument("composing operators of different sizes");
    const std::size_t b1 = bandwidth();
    const std::size_t b2 = rhs.bandwidth();
    std::vector<double> product(2 * (b1 + b2) + 1, 0.0);
    for (std::size_t i = 0; i < stencil_.size(); ++i) {
        for (std::size_t j = 0; j < rhs.stencil_.size(); ++j) {
            product[i + j] += stencil_[i] * rhs.stencil_[j];
        }
    }
    return PeriodicStencilOperator(order_ + rhs.order_, size_, std::move(product));
}

std::vector<double> PeriodicStencilOperator::to_dense() const {
    const std::size_t n = size_;
    std::vector<double> dense(n * n, 0.0);
    const Vector row = first_row();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) dense[i * n + (i + j) % n] = row[j];
    }
    return dense;
}

PeriodicStencilOperator derivative_operator(const Grid& grid, int order) {
    const double dx = grid.spacing();
    const std::size_t m = grid.size();
    switch (order) {
        case 1:
            return PeriodicStencilOperator(1, m, {-0.5 / dx, 0.0, 0.5 / dx});
        case 2: {
            const double s = 1.0 / (dx * dx);
            return PeriodicStencilOperator(2, m, {s, -2.0 * s, s});
        }
        case 3:
            return derivative_operator(grid, 1).compose(derivative_operator(grid, 2));
        default:
            throw InvalidArgument("derivative order must be 1, 2 or 3");
    }
}

double quadrature(const Grid& grid, std::span<const double> values) {
    if (values.size() != grid.size()) {
        throw InvalidArgument("quadrature: value count does not match grid size");
    }
    return grid.spacing() * std::accumulate(values.begin(), values.end(), 0.0);
}

}  // namespace dhint

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dhint/errors.hpp"
#include "dhint/spatial.hpp"

namespace dhint {

using Complex = std::complex<double>;

/// Square matrix whose nonzeros lie within half-bandwidth b of the diagonal,
/// measured cyclically: row i holds entries at columns (i + d) mod n, d in [-b, b].
/// The wrap-around entries form the two b x b corner blocks. When 2b + 1 > n
/// several offsets alias the same column and their entries add.
template <typename T>
class PeriodicBandedMatrix {
public:
    PeriodicBandedMatrix(std::size_t size, std::size_t bandwidth)
        : size_(size), bandwidth_(bandwidth), entries_(size * (2 * bandwidth + 1), T{}) {
        if (size == 0) throw InvalidArgument("banded matrix size must be positive");
    }

    static PeriodicBandedMatrix identity(std::size_t size, std::size_t bandwidth, T scale = T{1}) {
        PeriodicBandedMatrix m(size, bandwidth);
        for (std::size_t i = 0; i < size; ++i) m.at(i, 0) = scale;
        return m;
    }

    std::size_t size() const noexcept { return size_; }
    std::size_t bandwidth() const noexcept { return bandwidth_; }

    /// Entry in row i at cyclic column offset d.
    T& at(std::size_t i, int d) { return entries_[index(i, d)]; }
    const T& at(std::size_t i, int d) const { return entries_[index(i, d)]; }

    /// Adds scale * diag(weights) * D, i.e. row i gains scale * weights[i] * stencil.
    /// weights may be empty for an unweighted stencil.
    void add_stencil(const PeriodicStencilOperator& op, T scale,
                     std::span<const double> row_weights = {}) {
        check_stencil(op);
        const int b = static_cast<int>(op.bandwidth());
        for (std::size_t i = 0; i < size_; ++i) {
            const T w = row_weights.empty() ? scale : scale * row_weights[i];
            for (int d = -b; d <= b; ++d) at(i, d) += w * op.coefficient(d);
        }
    }

    /// Adds scale * D * diag(weights): column j of the stencil is scaled by weights[j].
    void add_stencil_times_diagonal(const PeriodicStencilOperator& op, T scale,
                                    std::span<const double> column_weights) {
        check_stencil(op);
        const int b = static_cast<int>(op.bandwidth());
        const int n = static_cast<int>(size_);
        for (std::size_t i = 0; i < size_; ++i) {
            for (int d = -b; d <= b; ++d) {
                const auto j = static_cast<std::size_t>(((static_cast<int>(i) + d) % n + n) % n);
                at(i, d) += scale * op.coefficient(d) * column_weights[j];
            }
        }
    }

    void add_diagonal(std::span<const double> diagonal, T scale = T{1}) {
        for (std::size_t i = 0; i < size_; ++i) at(i, 0) += scale * diagonal[i];
    }

    void scale(T factor) {
        for (auto& e : entries_) e *= factor;
    }

    template <typename V>
    std::vector<V> apply(std::span<const V> x) const {
        if (x.size() != size_) throw InvalidArgument("banded matrix: vector length mismatch");
        std::vector<V> y(size_, V{});
        const int b = static_cast<int>(bandwidth_);
        const int n = static_cast<int>(size_);
        for (int i = 0; i < n; ++i) {
            V acc{};
            for (int d = -b; d <= b; ++d) acc += at(i, d) * x[((i + d) % n + n) % n];
            y[i] = acc;
        }
        return y;
    }

    double inf_norm() const {
        double best = 0.0;
        const std::size_t w = 2 * bandwidth_ + 1;
        for (std::size_t i = 0; i < size_; ++i) {
            double row = 0.0;
            for (std::size_t c = 0; c < w; ++c) row += std::abs(entries_[i * w + c]);
            best = std::max(best, row);
        }
        return best;
    }

    /// Dense row-major materialization.
    std::vector<T> to_dense() const {
        std::vector<T> dense(size_ * size_, T{});
        const int b = static_cast<int>(bandwidth_);
        const int n = static_cast<int>(size_);
        for (int i = 0; i < n; ++i) {
            for (int d = -b; d <= b; ++d) dense[i * size_ + ((i + d) % n + n) % n] += at(i, d);
        }
        return dense;
    }

    /// Product this * rhs; the half-bandwidths add.
    PeriodicBandedMatrix multiply(const PeriodicBandedMatrix& rhs) const {
        if (rhs.size_ != size_) throw InvalidArgument("banded product: size mismatch");
        const int b1 = static_cast<int>(bandwidth_);
        const int b2 = static_cast<int>(rhs.bandwidth_);
        const int n = static_cast<int>(size_);
        PeriodicBandedMatrix out(size_, bandwidth_ + rhs.bandwidth_);
        for (int i = 0; i < n; ++i) {
            for (int d1 = -b1; d1 <= b1; ++d1) {
                const T left = at(i, d1);
                if (left == T{}) continue;
                const int k = ((i + d1) % n + n) % n;
                for (int d2 = -b2; d2 <= b2; ++d2) out.at(i, d1 + d2) += left * rhs.at(k, d2);
            }
        }
        return out;
    }

private:
    std::size_t index(std::size_t i, int d) const {
        return i * (2 * bandwidth_ + 1) + static_cast<std::size_t>(d + static_cast<int>(bandwidth_));
    }
    void check_stencil(const PeriodicStencilOperator& op) const {
        if (op.size() != size_ || op.bandwidth() > bandwidth_) {
            throw InvalidArgument("stencil does not fit the banded matrix");
        }
    }

    std::size_t size_;
    std::size_t bandwidth_;
    std::vector<T> entries_;
};

namespace detail {

/// Gaussian elimination with partial pivoting on a dense row-major matrix.
template <typename T>
class DenseLU {
public:
    DenseLU(std::vector<T> matrix, std::size_t n, double singular_threshold)
        : n_(n), lu_(std::move(matrix)), pivots_(n) {
        for (std::size_t k = 0; k < n_; ++k) {
            std::size_t p = k;
            double best = std::abs(lu_[k * n_ + k]);
            for (std::size_t i = k + 1; i < n_; ++i) {
                const double v = std::abs(lu_[i * n_ + k]);
                if (v > best) { best = v; p = i; }
            }
            if (!(best > singular_threshold)) {
                throw SingularMatrixError("dense LU: pivot " + std::to_string(best) +
                                          " below singularity threshold");
            }
            pivots_[k] = p;
            if (p != k) {
                for (std::size_t j = 0; j < n_; ++j) std::swap(lu_[k * n_ + j], lu_[p * n_ + j]);
            }
            const T inv = T{1} / lu_[k * n_ + k];
            for (std::size_t i = k + 1; i < n_; ++i) {
                const T l = lu_[i * n_ + k] * inv;
                lu_[i * n_ + k] = l;
                if (l == T{}) continue;
                for (std::size_t j = k + 1; j < n_; ++j) lu_[i * n_ + j] -= l * lu_[k * n_ + j];
            }
        }
    }

    void solve_in_place(std::span<T> b) const {
        for (std::size_t k = 0; k < n_; ++k) {
            if (pivots_[k] != k) std::swap(b[k], b[pivots_[k]]);
            for (std::size_t i = k + 1; i < n_; ++i) b[i] -= lu_[i * n_ + k] * b[k];
        }
        for (std::size_t k = n_; k-- > 0;) {
            T acc = b[k];
            for (std::size_t j = k + 1; j < n_; ++j) acc -= lu_[k * n_ + j] * b[j];
            b[k] = acc / lu_[k * n_ + k];
        }
    }

private:
    std::size_t n_;
    std::vector<T> lu_;
    std::vector<std::size_t> pivots_;
};

/// LU with partial pivoting of a (non-periodic) band matrix with kl = ku = b.
/// Row interchanges widen the upper band to 2b; multipliers stay in the rows
/// where they were computed and interchanges are replayed during the solve.
template <typename T>
class BandLU {
public:
    BandLU(std::size_t n, std::size_t b, double singular_threshold)
        : n_(n), b_(b), width_(3 * b + 1), band_(n * (3 * b + 1), T{}), pivots_(n),
          threshold_(singular_threshold) {}

    /// Entry (i, j); requires j - i in [-b, 2b].
    T& operator()(std::size_t i, std::size_t j) { return band_[i * width_ + (j + b_ - i)]; }
    const T& operator()(std::size_t i, std::size_t j) const {
        return band_[i * width_ + (j + b_ - i)];
    }

    void factor() {
        for (std::size_t k = 0; k < n_; ++k) {
            const std::size_t last_row = std::min(n_ - 1, k + b_);
            const std::size_t last_col = std::min(n_ - 1, k + 2 * b_);
            std::size_t p = k;
            double best = std::abs((*this)(k, k));
            for (std::size_t i = k + 1; i <= last_row; ++i) {
                const double v = std::abs((*this)(i, k));
                if (v > best) { best = v; p = i; }
            }
            if (!(best > threshold_)) {
                throw SingularMatrixError("banded LU: pivot " + std::to_string(best) +
                                          " below singularity threshold");
            }
            pivots_[k] = p;
            if (p != k) {
                for (std::size_t j = k; j <= last_col; ++j) std::swap((*this)(k, j), (*this)(p, j));
            }
            const T inv = T{1} / (*this)(k, k);
            for (std::size_t i = k + 1; i <= last_row; ++i) {
                const T l = (*this)(i, k) * inv;
                (*this)(i, k) = l;
                if (l == T{}) continue;
                for (std::size_t j = k + 1; j <= last_col; ++j) (*this)(i, j) -= l * (*this)(k, j);
            }
        }
    }

    void solve_in_place(std::span<T> x) const {
        for (std::size_t k = 0; k < n_; ++k) {
            if (pivots_[k] != k) std::swap(x[k], x[pivots_[k]]);
            const std::size_t last_row = std::min(n_ - 1, k + b_);
            for (std::size_t i = k + 1; i <= last_row; ++i) x[i] -= (*this)(i, k) * x[k];
        }
        for (std::size_t k = n_; k-- > 0;) {
            const std::size_t last_col = std::min(n_ - 1, k + 2 * b_);
            T acc = x[k];
            for (std::size_t j = k + 1; j <= last_col; ++j) acc -= (*this)(k, j) * x[j];
            x[k] = acc / (*this)(k, k);
        }
    }

private:
    std::size_t n_;
    std::size_t b_;
    std::size_t width_;
    std::vector<T> band_;
    std::vector<std::size_t> pivots_;
    double threshold_;
};

}  // namespace detail

enum class BandedSolveMethod { automatic, woodbury, dense };

/// Factorization of a PeriodicBandedMatrix. The default path factors the
/// band without its corners and restores the corners through a rank-2b
/// Woodbury correction: O(n b^2) work. Tiny systems, or systems whose
/// corner-free band is singular, use dense LU instead.
template <typename T>
class PeriodicBandedLU {
public:
    explicit PeriodicBandedLU(const PeriodicBandedMatrix<T>& a,
                              BandedSolveMethod method = BandedSolveMethod::automatic)
        : n_(a.size()), b_(a.bandwidth()) {
        const double threshold = 1e-14 * a.inf_norm();
        const bool tiny = n_ < 4 * b_ + 2 || b_ == 0;
        if (method == BandedSolveMethod::dense || (method == BandedSolveMethod::automatic && tiny && b_ > 0)) {
            dense_.emplace(a.to_dense(), n_, threshold);
            return;
        }
        if (b_ > 0 && n_ < 4 * b_ + 2) {
            throw InvalidArgument("Woodbury path requires n >= 4b + 2");
        }
        try {
            factor_woodbury(a, threshold);
        } catch (const SingularMatrixError&) {
            if (method == BandedSolveMethod::woodbury) throw;
            band_.reset();
            dense_.emplace(a.to_dense(), n_, threshold);
        }
    }

    std::size_t size() const noexcept { return n_; }
    bool uses_dense() const noexcept { return dense_.has_value(); }

    std::vector<T> solve(std::span<const T> rhs) const {
        if (rhs.size() != n_) throw InvalidArgument("banded solve: rhs length mismatch");
        std::vector<T> x(rhs.begin(), rhs.end());
        if (dense_.has_value()) {
            dense_->solve_in_place(x);
            return x;
        }
        woodbury_solve_in_place(x);
        if (b_ == 0) return x;
        // The corner-free band can be far worse conditioned than the full
        // matrix; a few refinement passes recover working accuracy then.
        const double eps = std::numeric_limits<double>::epsilon();
        for (int pass = 0; pass < 3; ++pass) {
            std::vector<T> r = matrix_->template apply<T>(std::span<const T>(x));
            double rnorm = 0.0, bnorm = 0.0, xnorm = 0.0;
            for (std::size_t i = 0; i < n_; ++i) {
                r[i] = rhs[i] - r[i];
                rnorm = std::max(rnorm, static_cast<double>(std::abs(r[i])));
                bnorm = std::max(bnorm, static_cast<double>(std::abs(rhs[i])));
                xnorm = std::max(xnorm, static_cast<double>(std::abs(x[i])));
            }
            if (rnorm <= 16.0 * eps * (matrix_norm_ * xnorm + bnorm)) break;
            woodbury_solve_in_place(r);
            for (std::size_t i = 0; i < n_; ++i) x[i] += r[i];
        }
        return x;
    }

private:
    void woodbury_solve_in_place(std::vector<T>& x) const {
        band_->solve_in_place(x);
        if (b_ == 0) return;
        // x <- y - Z * cap^{-1} * (W^T y)
        std::vector<T> t = apply_wt(x);
        capacitance_->solve_in_place(t);
        const std::size_t r = 2 * b_;
        for (std::size_t i = 0; i < n_; ++i) {
            T acc{};
            for (std::size_t c = 0; c < r; ++c) acc += z_[c * n_ + i] * t[c];
            x[i] -= acc;
        }
    }

    // Correction rows: the first b and last b rows carry the corner entries.
    std::size_t correction_row(std::size_t c) const { return c < b_ ? c : n_ - 2 * b_ + c; }

    // Column set of W^T for correction c: the corner entries of that row.
    std::vector<T> apply_wt(std::span<const T> y) const {
        const std::size_t r = 2 * b_;
        std::vector<T> out(r, T{});
        for (std::size_t c = 0; c < r; ++c) {
            for (const auto& [col, value] : corners_[c]) out[c] += value * y[col];
        }
        return out;
    }

    void factor_woodbury(const PeriodicBandedMatrix<T>& a, double threshold) {
        const int b = static_cast<int>(b_);
        const int n = static_cast<int>(n_);
        detail::BandLU<T> band(n_, b_, threshold);
        corners_.assign(2 * b_, {});
        for (int i = 0; i < n; ++i) {
            for (int d = -b; d <= b; ++d) {
                const int j = i + d;
                if (j >= 0 && j < n) {
                    band(i, j) = a.at(i, d);
                } else {
                    const std::size_t c = i < b ? static_cast<std::size_t>(i)
                                                : static_cast<std::size_t>(i - n + 2 * b);
                    corners_[c].emplace_back(static_cast<std::size_t>((j + n) % n), a.at(i, d));
                }
            }
        }
        band.factor();
        band_.emplace(std::move(band));
        matrix_.emplace(a);
        matrix_norm_ = a.inf_norm();
        if (b_ == 0) return;

        const std::size_t r = 2 * b_;
        z_.assign(r * n_, T{});
        for (std::size_t c = 0; c < r; ++c) {
            std::span<T> column(z_.data() + c * n_, n_);
            column[correction_row(c)] = T{1};
            band_->solve_in_place(column);
        }
        std::vector<T> cap(r * r, T{});
        for (std::size_t c = 0; c < r; ++c) {
            std::span<const T> column(z_.data() + c * n_, n_);
            const std::vector<T> wz = apply_wt(column);
            for (std::size_t row = 0; row < r; ++row) cap[row * r + c] = wz[row];
            cap[c * r + c] += T{1};
        }
        capacitance_.emplace(std::move(cap), r, 1e-14);
    }

    std::size_t n_;
    std::size_t b_;
    std::optional<detail::BandLU<T>> band_;
    std::optional<detail::DenseLU<T>> dense_;
    std::optional<detail::DenseLU<T>> capacitance_;
    std::vector<std::vector<std::pair<std::size_t, T>>> corners_;
    std::vector<T> z_;  // column-major n x 2b, Z = B^{-1} U
    std::optional<PeriodicBandedMatrix<T>> matrix_;
    double matrix_norm_ = 0.0;
};

template <typename T>
std::vector<T> solve_periodic_banded(const PeriodicBandedMatrix<T>& a, std::span<const T> rhs,
                                     BandedSolveMethod method = BandedSolveMethod::automatic) {
    return PeriodicBandedLU<T>(a, method).solve(rhs);
}

// ---------------------------------------------------------------------------
// Nonlinear solves

enum class NonlinearMethod { newton, fixed_point };
enum class JacobianKind { analytic, finite_difference };

struct NonlinearSolveSettings {
    /// Convergence when ||r(x)||_inf <= tolerance * ||x||_inf.
    double tolerance = 1e-12;
    int max_iterations = 50;
    NonlinearMethod method = NonlinearMethod::newton;
    JacobianKind jacobian = JacobianKind::analytic;

    void validate() const;
};

/// Residual in displacement form r(x) = x - G(x), so that the fixed-point
/// iteration is x <- x - r(x) and Newton uses J = dr/dx.
struct NonlinearProblem {
    std::function<void(std::span<const double>, std::span<double>)> residual;
    /// Analytic Jacobian dr/dx; may be empty. Rows and columns use the
    /// node-interleaved ordering described by `blocks`.
    std::function<PeriodicBandedMatrix<double>(std::span<const double>)> jacobian;
    /// Number of stacked components. With blocks = k, entry (c, i) of the
    /// stacked vector maps to interleaved position i * k + c.
    std::size_t blocks = 1;
    /// Half-bandwidth of the interleaved Jacobian, used for finite differences.
    std::size_t bandwidth = 1;
};

struct NonlinearSolveResult {
    Vector solution;
    int iterations = 0;
    double residual_norm = 0.0;
};

NonlinearSolveResult newton_solve(const NonlinearProblem& problem, Vector guess,
                                  const NonlinearSolveSettings& settings);

/// Column-colored forward-difference Jacobian of a periodic-banded residual.
PeriodicBandedMatrix<double> finite_difference_jacobian(const NonlinearProblem& problem,
                                                        std::span<const double> x);

Vector to_interleaved(std::span<const double> stacked, std::size_t blocks);
Vector from_interleaved(std::span<const double> interleaved, std::size_t blocks);

// ---------------------------------------------------------------------------
// Quadrature on [0, 1]

struct QuadratureRule {
    std::array<double, 2> nodes;
    std::array<double, 2> weights;
};

/// Two-point Gauss-Legendre rule on [0, 1]; exact for cubics.
QuadratureRule gauss_legendre_2();

double inf_norm(std::span<const double> v);

}  // namespace dhint

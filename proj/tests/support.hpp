#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "dhint/models.hpp"
#include "dhint/spatial.hpp"
#include "dhint/system.hpp"

namespace dhint::testing {

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double max_abs(std::span<const double> a) {
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline Eigen::VectorXd to_eigen(std::span<const double> v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> from_eigen(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

/// Dense circulant matrix built from scratch: entry (i, (i + d) mod M) = stencil[d].
inline Eigen::MatrixXd dense_circulant(std::size_t m, const std::vector<std::pair<int, double>>& stencil) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    const int n = static_cast<int>(m);
    for (int i = 0; i < n; ++i) {
        for (const auto& [d, c] : stencil) a(i, ((i + d) % n + n) % n) += c;
    }
    return a;
}

inline Eigen::MatrixXd dense_d1(const Grid& g) {
    const double h = g.spacing();
    return dense_circulant(g.size(), {{-1, -0.5 / h}, {1, 0.5 / h}});
}

inline Eigen::MatrixXd dense_d2(const Grid& g) {
    const double h2 = g.spacing() * g.spacing();
    return dense_circulant(g.size(), {{-1, 1.0 / h2}, {0, -2.0 / h2}, {1, 1.0 / h2}});
}

/// Left Riemann sum of f over [-L, L] with n points; for periodic-smooth
/// integrands this is an accurate oracle for the integral.
template <typename F>
double dense_riemann(double half_length, std::size_t n, F&& f) {
    const double h = 2.0 * half_length / static_cast<double>(n);
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += f(-half_length + static_cast<double>(k) * h);
    return h * s;
}

inline double relative(double value, double reference) {
    return std::abs(value - reference) / std::max(std::abs(reference), 1e-300);
}

/// Grids of the built-in experiments.
inline Grid burgers_grid() { return Grid(M_PI, 80); }
inline Grid kdv_grid() { return Grid(10.0, 248); }
inline Grid nls_grid() { return Grid(25.0, 1024); }

inline KdvParams kdv_preset() { return KdvParams{}; }

}  // namespace dhint::testing

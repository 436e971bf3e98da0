#pragma once

// Spectral operators on the periodic box [-L, L)^n.
//
// Fourier convention: f^(xi) = sum f(x) exp(-i xi.x), so d_j <-> i xi_j. Derivative-type
// (odd) symbols use wavenumbers with the Nyquist entry set to zero, which keeps real fields
// real and makes the projector exactly idempotent.

#include "stx/errors.hpp"

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace stx {

/// Real-valued field sampled on a uniform periodic grid.
struct SpectralGrid {
    int n = 2;
    double extent = 1.0;  // half-width L
    int points = 0;       // per axis, even
    std::vector<Eigen::VectorXd> components;

    SpectralGrid() = default;
    SpectralGrid(int dim, double L, int per_axis, int component_count = 1);

    double spacing() const { return 2.0 * extent / points; }
    Eigen::Index size() const;
    int component_count() const { return static_cast<int>(components.size()); }
    /// Node coordinates for linear index `idx` (axis 0 slowest).
    Eigen::VectorXd node(Eigen::Index idx) const;
    /// Same grid, `count` zeroed components.
    SpectralGrid like(int count) const;
};

using ScalarFunction = std::function<double(const Eigen::VectorXd&)>;
using VectorFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

SpectralGrid sample_scalar(int n, double L, int points, const ScalarFunction& f);
SpectralGrid sample_vector(int n, double L, int points, const VectorFunction& f);

/// n-dimensional forward / inverse DFT (inverse includes 1/N^n).
Eigen::VectorXcd fft_forward(const Eigen::VectorXcd& data, int n, int points);
Eigen::VectorXcd fft_inverse(const Eigen::VectorXcd& data, int n, int points);

/// Angular wavenumbers of the grid along one axis, FFT ordering. With `zero_nyquist` the
/// -pi/h entry is replaced by 0.
Eigen::VectorXd wavenumbers(const SpectralGrid& g, bool zero_nyquist);

/// R_j, symbol xi_j / (i|xi|); mean mode -> 0.
SpectralGrid riesz_transform(int j, const SpectralGrid& field);

/// Projection onto divergence-free fields, symbol delta_jk - xi_j xi_k / |xi|^2.
SpectralGrid leray_project(const SpectralGrid& field);

/// p with Delta p = div f, symbol xi_j f^_j / (i |xi|^2); mean-free.
SpectralGrid pressure_from_forcing(const SpectralGrid& f);

SpectralGrid spectral_divergence(const SpectralGrid& field);
SpectralGrid spectral_gradient(const SpectralGrid& scalar);
SpectralGrid spectral_laplacian(const SpectralGrid& scalar);
/// d_axis of every component.
SpectralGrid spectral_derivative(const SpectralGrid& field, int axis);

struct KernelOracle {
    SpectralGrid values;  // single component K_jk on the grid
    std::vector<std::string> warnings;
};

/// K_jk(., t) on the grid by inverse FFT of (delta_jk - xi_j xi_k/|xi|^2) exp(-|xi|^2 t).
/// The zero mode takes the angular average delta_jk (1 - 1/n). Warnings are raised when the box
/// is small compared with sqrt(t) + query_radius, or when exp(-|xi|^2 t) is not resolved at
/// the Nyquist frequency.
KernelOracle spectral_stokes_kernel_oracle(int j, int k, double t, const SpectralGrid& grid,
                                           double query_radius = 0.0);

/// Discrete L2 norm sqrt(h^n sum |f|^2) over all components.
double grid_l2_norm(const SpectralGrid& field);
double grid_max_abs(const SpectralGrid& field);

}  // namespace stx

#pragma once

// Asymptotic polynomial of a sampled local solution: Taylor coefficients at x = 0 on each time
// slice, the remainder U - P, the pressure companion of P and the vorticity tensor.

#include "stx/grid_field.hpp"
#include "stx/polynomial.hpp"

#include <json.hpp>

#include <vector>

namespace stx {

struct FitOptions {
    bool constrained = true;         // impose div P = 0 exactly
    double condition_limit = 1e10;   // on the scaled, constrained design matrix
};

/// Taylor coefficients (basis x n) of U at x = 0 on one slice. For each radius the fit uses
/// the nodes with |x| <= r and monomials scaled by r; the per-radius coefficients are then
/// extrapolated to r -> 0 assuming c(r) = c + a_0 r^p + a_1 r^{p+1} + ..., p = d + 1 - |alpha|.
/// Exact on polynomials of degree <= d. Throws FitError with the radius on ill-conditioning.
Eigen::MatrixXd fit_slice(const GridField& U, int d, int slice, const std::vector<double>& fit_radii,
                          const FitOptions& options = {});

/// fit_slice on every slice of U.
VectorPolynomial extract_polynomial(const GridField& U, int d, const std::vector<double>& fit_radii,
                                    const FitOptions& options = {});

/// Pointwise U - P on the grid of U (same slices).
GridField remainder_field(const GridField& U, const VectorPolynomial& P);

/// Q = d_t P - Delta P + grad R, with R of degree <= d - 1 chosen as the least-norm coefficient
/// vector that minimizes the coefficients of Q in degrees < d - 1.
struct ResidualStructure {
    int degree = 0;
    std::vector<double> times;
    std::vector<Eigen::MatrixXd> q;          // full Q per slice, basis(d) x n
    std::vector<Eigen::VectorXd> pressure;   // R per slice, basis(d - 1)
    std::vector<double> low_degree_mass;     // |Q| over degrees < d - 1
    std::vector<double> total_mass;          // |d_t P| + |Delta P|
    /// max over slices of low / total; 0 when every slice has total 0
    double mass_ratio = 0.0;

    /// Coefficients C_alpha of Q with |alpha| in {d - 1, d} on one slice (others zeroed).
    Eigen::MatrixXd leading(int slice) const;
};

/// Needs at least 3 slices; d_t of the coefficients uses Lagrange differentiation through all
/// slices. Also stores R in P.pressure.
ResidualStructure residual_structure(VectorPolynomial& P);

/// W with components W_{i,j} = d_i U_j - d_j U_i at index i * n + j.
GridField curl(const GridField& U);

nlohmann::json polynomial_to_json(const VectorPolynomial& P);
VectorPolynomial polynomial_from_json(const nlohmann::json& j);

}  // namespace stx

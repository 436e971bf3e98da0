#pragma once

// Polynomials are stored in Taylor form: P(x) = sum_alpha c_alpha x^alpha / alpha!, so that
// c_alpha = D^alpha P(0) and d_i shifts coefficients, (d_i P)_alpha = c_{alpha + e_i}.

#include "stx/errors.hpp"
#include "stx/geometry.hpp"

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <vector>

namespace stx {

/// Index of each multi-index inside multi_indices_up_to(n, degree).
class MonomialBasis {
public:
    MonomialBasis() = default;
    MonomialBasis(int n, int degree);

    int dim() const { return n_; }
    int degree() const { return degree_; }
    int size() const { return static_cast<int>(indices_.size()); }
    const MultiIndex& operator[](int i) const { return indices_[i]; }
    const std::vector<MultiIndex>& indices() const { return indices_; }
    /// -1 when alpha is outside the basis.
    int find(const MultiIndex& alpha) const;
    /// x^alpha / alpha! for every basis element.
    Eigen::VectorXd taylor_row(const Eigen::VectorXd& x) const;

private:
    int n_ = 0;
    int degree_ = -1;
    std::vector<MultiIndex> indices_;
    std::map<MultiIndex, int> lookup_;
};

/// n-component spatial polynomial of degree <= d at a list of time slices, with an optional
/// scalar pressure companion R of degree <= d - 1.
struct VectorPolynomial {
    int n = 2;
    int degree = 0;
    MonomialBasis basis;
    std::vector<double> times;
    std::vector<Eigen::MatrixXd> coefficients;  // per slice: basis.size() x n

    MonomialBasis pressure_basis;
    std::vector<Eigen::VectorXd> pressure;  // per slice, empty when absent

    VectorPolynomial() = default;
    VectorPolynomial(int n, int degree);

    int slice_count() const { return static_cast<int>(times.size()); }
    void add_slice(double t, Eigen::MatrixXd coeffs);

    /// Value at x on slice s.
    Eigen::VectorXd evaluate(int slice, const Eigen::VectorXd& x) const;
    /// Value at (x, t) with coefficients interpolated across slices (Lagrange, all slices).
    Eigen::VectorXd evaluate(const Eigen::VectorXd& x, double t) const;
    /// Taylor coefficients of div P on slice s (degree d - 1 basis).
    Eigen::VectorXd divergence(int slice) const;
    double max_divergence() const;
    /// Largest |coefficient| over all slices.
    double max_abs() const;
};

/// Polynomial in (x, t) jointly: P = sum_{|mu| + 2l <= d} c_{mu,l} x^mu t^l / (mu! l!), with
/// `components` values per term.
struct SpaceTimePolynomial {
    int n = 2;
    int degree = 0;
    int components = 2;
    std::vector<DerivativeSpec> specs;
    Eigen::MatrixXd coefficients;  // specs.size() x components

    SpaceTimePolynomial() = default;
    SpaceTimePolynomial(int n, int degree, int components);

    int find(const MultiIndex& mu, int l) const;
    Eigen::VectorXd evaluate(const Eigen::VectorXd& x, double t) const;
    /// Max over coefficients of |sum_k c_{mu+e_k,l,k}| (components == n).
    double divergence_residual() const;
    /// Max over coefficients of |c_{mu,l+1} - sum_i c_{mu+2e_i,l}|.
    double heat_residual() const;
    /// Spatial Taylor coefficients at time t, as a slice of a VectorPolynomial of degree `degree`.
    Eigen::MatrixXd spatial_coefficients(double t, const MonomialBasis& basis) const;
    SpaceTimePolynomial& operator+=(const SpaceTimePolynomial& o);
    double max_abs() const { return coefficients.size() ? coefficients.cwiseAbs().maxCoeff() : 0.0; }
};

}  // namespace stx

#pragma once

// Heat kernel and unsteady Stokes tensor.
//
//   Gamma(x,t)  = (4 pi t)^{-n/2} exp(-|x|^2 / 4t)  for t > 0, 0 otherwise
//   K_jk(x,t)   = delta_jk Gamma + R_j R_k Gamma
//
// The Fourier symbol of K is (delta_jk - xi_j xi_k/|xi|^2) exp(-|xi|^2 t). Writing
// exp(-|xi|^2 t)/|xi|^2 = int_t^inf exp(-|xi|^2 tau) dtau turns the inversion into
//
//   K_jk = delta_jk Gamma + d_j d_k Phi,   Phi(x,t) = int_t^inf Gamma(x,tau) dtau,
//
// and every space derivative of the second term is an incomplete-gamma sum over the
// Hermite expansion of d^nu Gamma. Time derivatives reduce to heat-kernel derivatives
// through d_t Phi = -Gamma.

#include "stx/errors.hpp"
#include "stx/geometry.hpp"

#include <Eigen/Dense>

#include <vector>

namespace stx {

/// Gamma(x,t); exactly 0 for t <= 0.
double heat_kernel(const Eigen::VectorXd& x, double t);
inline double heat_kernel(const Point& p) { return heat_kernel(p.x, p.t); }

/// D_x^mu D_t^l Gamma(x,t). Throws DomainError at (0,0).
double heat_kernel_deriv(const DerivativeSpec& spec, const Point& p);

/// K_jk(x,t), t > 0, n in {2,3}. Indices are 0-based.
double stokes_kernel(int j, int k, const Point& p);

/// D_x^mu D_t^l K_jk(x,t).
double stokes_kernel_deriv(const DerivativeSpec& spec, int j, int k, const Point& p);

/// Full n x n tensor D_x^mu D_t^l K(x,t).
Eigen::MatrixXd stokes_tensor(const Point& p, const DerivativeSpec& spec);
Eigen::MatrixXd stokes_tensor(const Point& p);

/// Same quantity as stokes_kernel_deriv, with the tau-integral of the nonlocal part done by
/// adaptive Gauss-Kronrod quadrature instead of the incomplete-gamma sum. Throws
/// QuadratureError when the requested tolerance is not met.
double stokes_kernel_deriv_quadrature(const DerivativeSpec& spec, int j, int k, const Point& p,
                                      double rel_tol = 1e-12);

/// lim_{t->0+} d^nu Phi(x,t) = -d^nu E(x), E the Newtonian potential (Delta E = delta).
/// Requires |nu| >= 2 and x != 0.
double nonlocal_limit(const MultiIndex& nu, const Eigen::VectorXd& x);

/// Scaled lower incomplete gamma z^{-a} gamma(a, z); equals 1/a at z = 0.
double scaled_lower_gamma(double a, double z);

/// All derivatives of Gamma, of Phi and of K at one point, up to a fixed order.
///
/// Construction evaluates the one-dimensional Hermite tables and the incomplete-gamma ladder
/// once; individual derivatives are then table lookups plus short sums. `max_order` bounds
/// |nu| for heat(nu) and nonlocal(nu), and |mu| + 2l + 2 for stokes(mu, l, ...).
class KernelJet {
public:
    KernelJet(const Point& p, int max_order);

    int dim() const { return n_; }
    int max_order() const { return max_order_; }

    /// d^nu Gamma
    double heat(const MultiIndex& nu) const;
    /// D^mu D_t^l Gamma = Delta^l d^mu Gamma
    double heat(const MultiIndex& mu, int l) const;
    /// d^nu Phi for |nu| >= 2
    double nonlocal(const MultiIndex& nu) const;
    /// D^mu D_t^l K_jk
    double stokes(const MultiIndex& mu, int l, int j, int k) const;
    double stokes(const DerivativeSpec& s, int j, int k) const { return stokes(s.mu, s.l, j, k); }

private:
    int n_;
    int max_order_;
    bool causal_;  // t > 0
    Eigen::VectorXd x_;
    double t_;
    // hermite_(i, m) = d^m/dx_i^m of the 1-D heat kernel at (x_i, t)
    Eigen::MatrixXd hermite_;
    // powers_(i, k) = x_i^k
    Eigen::MatrixXd powers_;
    // ladder_[k] = (4t)^{-a_k} E(a_k, Z), a_k = n/2 + k
    std::vector<double> ladder_;
};

/// m-th order Taylor term of K(x - y, t - s) about (x,t) = (0,0):
///   sum_{|mu|+2l=m} D^mu D^l K(-y,-s) x^mu t^l / (mu! l!)
struct KernelTaylorTerm {
    int m = 0;
    Point base_point;  // (-y, -s)
    std::vector<DerivativeSpec> specs;
    std::vector<Eigen::MatrixXd> coefficients;  // D^mu D^l K(-y,-s), aligned with specs

    Eigen::MatrixXd evaluate(const Eigen::VectorXd& x, double t) const;
    /// Max over (j,k) and monomials of |coefficient of d_t(term) - Delta(term)|.
    double heat_residual() const;
};

/// Terms m = 0..d of the Taylor expansion of K(x-y, t-s) about (0,0), for source point (y,s).
/// Throws DomainError when s == 0.
std::vector<KernelTaylorTerm> kernel_taylor_truncation(int d, const Point& source);

Eigen::MatrixXd evaluate_taylor_sum(const std::vector<KernelTaylorTerm>& terms, const Eigen::VectorXd& x,
                                    double t);

}  // namespace stx

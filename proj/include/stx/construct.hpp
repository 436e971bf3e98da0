#pragma once

// Local solution of the forced unsteady Stokes system vanishing to parabolic order d + alpha.
//
// With F supported in {|(y,s)| < 1, s < 0} and the kernel terms D^beta K of a Forcing,
//
//   w(x,t) = sum_r int D^{beta_r} K(x - y, t - s) F_r(y, s)
//   v(x,t) = sum_r int T_d[D^{beta_r} K](x, t; y, s) F_r(y, s)
//
// where T_d is the parabolic Taylor polynomial of degree d in (x,t) about (0,0). The kernel
// jumps across t = s away from x = y, so the Taylor polynomial of w also picks up
//
//   v_corr_k(x,t) = -t sum_{|mu| <= d-2} D^mu d_k p(0,0) x^mu / mu!
//
// with p = Delta^{-1} div f. The returned solution is u = w - v - v_corr. For built-in profiles
// (radial density times a constant tensor) v_corr vanishes identically.
//
// Evaluation splits the ball at R_n = min(c |(x,t)|, 1):
//   I1 = int_{|(y,s)| < R_n} K(x-y, t-s) F            rays about (x,t)
//   I2 = -int_{|(y,s)| < R_n} T_d K F                 homogeneous shell table
//   I3 = int_{R_n < |(y,s)| < 1} (K - T_d K) F         pointwise difference
// All three use parabolic polar coordinates (y, s) = R (omega_y, -omega_s^2 R), in which every
// kernel derivative is a power of R times its value on the unit hemisphere.

#include "stx/forcing.hpp"
#include "stx/geometry.hpp"
#include "stx/polynomial.hpp"

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace stx {

struct QuadratureSettings {
    int radial = 8;         // Gauss nodes per radial panel
    int polar = 6;          // Gauss nodes per polar panel (graded toward the equator)
    int azimuth = 24;       // trapezoid nodes on the circle; n = 3 adds azimuth/2 Gauss nodes
    int shells = 40;        // dyadic shells in the homogeneous table
    double near_factor = 2.0;
    int near_subpanels = 4;  // subdivisions of the first far-field panel
    int transition_panels = 8;  // panels across the cutoff band 1/2 < |(y,s)| < 1
};

/// Direction nodes on the upper unit hemisphere of R^{n+1}, omega = (sin theta xi, cos theta),
/// restricted to tau_lo < cos^2(theta) < tau_hi. Weights integrate against 2 cos(theta) d omega.
struct HemisphereRule {
    std::vector<Eigen::VectorXd> xi;  // unit vectors in R^n
    std::vector<double> sin_theta, cos_theta, weight;
};
HemisphereRule hemisphere_rule(int n, int polar, int azimuth, double tau_lo = 0.0, double tau_hi = 1.0);

/// Quadrature on the unit sphere of R^n (n = 2: trapezoid, n = 3: Gauss x trapezoid).
struct SphereRule {
    std::vector<Eigen::VectorXd> nodes;
    std::vector<double> weights;
};
SphereRule sphere_rule(int n, int azimuth);

class LocalSolution {
public:
    LocalSolution(std::shared_ptr<const Forcing> forcing, int d, QuadratureSettings settings = {});

    int dim() const { return n_; }
    int degree() const { return d_; }
    const Forcing& forcing() const { return *forcing_; }
    const QuadratureSettings& settings() const { return settings_; }

    /// u = w - v - v_corr at t <= 0.
    Eigen::VectorXd velocity(const Eigen::VectorXd& x, double t) const;

    struct Pieces {
        Eigen::VectorXd i1, i2, i3, correction;
    };
    /// The three integrals of the splitting, and v_corr(x,t).
    Pieces decomposition(const Eigen::VectorXd& x, double t) const;

    /// w by rays over the whole unit ball.
    Eigen::VectorXd volume_potential(const Eigen::VectorXd& x, double t) const;
    /// v as exact coefficients in (x,t) jointly.
    const SpaceTimePolynomial& polynomial_correction() const { return v_; }
    /// v_corr as exact coefficients.
    const SpaceTimePolynomial& pressure_correction() const { return corr_; }
    /// D^mu d_k p(0,0) for |mu| <= d - 2, rows aligned with multi_indices_up_to(n, d - 2).
    const Eigen::MatrixXd& pressure_taylor() const { return pressure_taylor_; }

    /// p(x,t) = Delta^{-1} div f.
    double pressure(const Eigen::VectorXd& x, double t) const;

private:
    struct DirectionJets {
        // jets[r][s] = D^{mu_s + beta_r} D^{l_s} K at (sin theta xi, cos^2 theta)
        std::vector<std::vector<Eigen::MatrixXd>> jets;
    };

    DirectionJets unit_jets(const Eigen::VectorXd& z, double tau) const;
    Eigen::MatrixXd shell_integral(double r_lo, double r_hi) const;
    Eigen::MatrixXd homogeneous_integral(double radius) const;
    Eigen::VectorXd rays(const Eigen::VectorXd& x, double t, double radius) const;
    Eigen::VectorXd far_field(const Eigen::VectorXd& x, double t, double r_near) const;
    Eigen::VectorXd taylor_contract(const Eigen::MatrixXd& table, const Eigen::VectorXd& x, double t) const;
    Eigen::MatrixXd density(const Eigen::VectorXd& y, double s) const;
    void build_pressure_taylor();

    std::shared_ptr<const Forcing> forcing_;
    int n_;
    int d_;
    QuadratureSettings settings_;
    std::vector<DerivativeSpec> specs_;
    HemisphereRule dirs_;
    std::vector<DirectionJets> dir_jets_;
    std::vector<Eigen::MatrixXd> shells_;  // shells_[k]: specs x n over [2^{-k-1}, 2^{-k}]
    std::vector<Eigen::MatrixXd> suffix_;  // suffix_[k]: integral over |(y,s)| < 2^{-k}
    SpaceTimePolynomial v_;
    SpaceTimePolynomial corr_;
    Eigen::MatrixXd pressure_taylor_;
};

}  // namespace stx

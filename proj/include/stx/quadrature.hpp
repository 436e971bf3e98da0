#pragma once

#include "stx/errors.hpp"
#include "stx/geometry.hpp"
#include "stx/quadrature_rules.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace stx {

using SpaceTimeFunction = std::function<double(const Eigen::VectorXd& y, double s)>;

/// Q_r(x,t) = {|y - x| < r, t - r^2 < s < t}.
struct ParabolicCylinder {
    Point center;
    double radius = 1.0;

    ParabolicCylinder() = default;
    ParabolicCylinder(Point c, double r);

    int dim() const { return center.dim(); }
    bool contains(const Eigen::VectorXd& y, double s) const;
    /// |B_r| r^2
    double volume() const;
};

/// Volume of the unit ball in R^n.
double unit_ball_volume(int n);

/// Tensor-product rule on a cylinder in polar coordinates about the axis.
struct CylinderRule {
    int radial = 12;   // Gauss points per radial panel
    int angular = 24;  // trapezoid points in the azimuth (n = 2, 3)
    int polar = 12;    // Gauss points in cos(theta) (n = 3)
    int time = 12;     // Gauss points per time panel
    int grading = 0;   // geometric panels toward the axis and toward the top of the cylinder
};

/// Integral of f over Q. Throws QuadratureError on a non-finite sample.
double integrate_cylinder(const SpaceTimeFunction& f, const ParabolicCylinder& Q, const CylinderRule& rule = {});

/// Integral over {|y - center| < radius, s_lo < s < s_hi}.
double integrate_slab(const SpaceTimeFunction& f, const Eigen::VectorXd& center, double radius, double s_lo,
                      double s_hi, const CylinderRule& rule = {});

struct ExcisionResult {
    double value = 0.0;                // Richardson limit
    double error_estimate = 0.0;       // |limit - previous level|
    std::vector<double> core_radii;    // eps values
    std::vector<double> excised;       // integral outside each core
};

/// Integral of f over Q with a parabolic core {|y - x_c|^2 + |s - s0| < eps^2} about the
/// singular point (x_c, s0) on the axis removed, extrapolated to eps -> 0 by Richardson with
/// error terms eps^p, eps^{p+1}, ... (p = leading_order). eps ranges over
/// eps_factors * radius; the defaults are 2^-4 .. 2^-7.
ExcisionResult integrate_cylinder_excised(const SpaceTimeFunction& f, const ParabolicCylinder& Q, double s0,
                                          const CylinderRule& rule = {},
                                          std::vector<double> eps_factors = {1.0 / 16, 1.0 / 32, 1.0 / 64,
                                                                             1.0 / 128},
                                          int leading_order = 2);

/// (int_Q |f|^q)^{1/q}
double lq_norm_on_cylinder(const SpaceTimeFunction& f, const ParabolicCylinder& Q, double q,
                           const CylinderRule& rule = {});

/// Shells 2^u rho < |(y,s)| < 2^{u+1} rho, u = 1..count, about the origin.
struct DyadicShellDecomposition {
    double base = 1.0;
    int count = 0;

    DyadicShellDecomposition() = default;
    DyadicShellDecomposition(double rho, int M);
    /// Shells with outer radii r_max, r_max/2, ..., r_max/2^{count-1}.
    static DyadicShellDecomposition from_outer(double r_max, int count);

    double inner(int u) const;  // u = 1..count
    double outer(int u) const;
};

enum class TimeSide { Past, Future };

/// Quasi-random points of the unit shell 1/2 < |(z,tau)| <= 1, tau >= 0 (Halton with a
/// Cranley-Patterson shift drawn from the seed). Prefixes are nested in `count`.
std::vector<std::pair<Eigen::VectorXd, double>> unit_shell_samples(int n, int count, std::uint64_t seed);

/// Unit-shell samples mapped to shell u by parabolic dilation with the shell's outer radius.
std::vector<Point> shell_points(const DyadicShellDecomposition& shells, int u, int n, int count, std::uint64_t seed,
                                TimeSide side);

struct ShellSup {
    int index = 0;
    double inner = 0.0;
    double outer = 0.0;
    double sup = 0.0;
};

/// Sampled sup of |f| per shell (default 4096 samples per shell).
std::vector<ShellSup> shell_supremum(const SpaceTimeFunction& f, const DyadicShellDecomposition& shells, int n,
                                     int samples = 4096, std::uint64_t seed = 0, TimeSide side = TimeSide::Past);

/// CSV with header shell_index,inner_radius,outer_radius,sup_value.
void write_shell_csv(std::ostream& out, const std::vector<ShellSup>& table);
std::vector<ShellSup> read_shell_csv(std::istream& in);

}  // namespace stx

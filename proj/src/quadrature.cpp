#include "stx/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace stx {

ParabolicCylinder::ParabolicCylinder(Point c, double r) : center(std::move(c)), radius(r) {
    if (!(r > 0.0)) throw DomainError("ParabolicCylinder: radius must be positive");
}

bool ParabolicCylinder::contains(const Eigen::VectorXd& y, double s) const {
    const double ds = s - center.t;
    return (y - center.x).norm() < radius && ds < 0.0 && ds > -radius * radius;
}

double unit_ball_volume(int n) {
    return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

double ParabolicCylinder::volume() const {
    return unit_ball_volume(dim()) * std::pow(radius, dim()) * radius * radius;
}

namespace {

struct Direction {
    Eigen::VectorXd omega;
    double weight;
};

std::vector<Direction> sphere_rule(int n, const CylinderRule& rule) {
    std::vector<Direction> dirs;
    if (n == 1) {
        dirs.push_back({Eigen::VectorXd::Constant(1, 1.0), 1.0});
        dirs.push_back({Eigen::VectorXd::Constant(1, -1.0), 1.0});
        return dirs;
    }
    const int A = rule.angular;
    const double dphi = 2.0 * std::numbers::pi / A;
    if (n == 2) {
        for (int i = 0; i < A; ++i) {
            const double phi = (i + 0.5) * dphi;
            Eigen::VectorXd w(2);
            w << std::cos(phi), std::sin(phi);
            dirs.push_back({w, dphi});
        }
        return dirs;
    }
    const auto g = gauss_legendre(rule.polar);
    for (int a = 0; a < g.size(); ++a) {
        const double c = g.nodes[a], s = std::sqrt(1.0 - c * c);
        for (int i = 0; i < A; ++i) {
            const double phi = (i + 0.5) * dphi;
            Eigen::VectorXd w(3);
            w << s * std::cos(phi), s * std::sin(phi), c;
            dirs.push_back({w, dphi * g.weights[a]});
        }
    }
    return dirs;
}

std::vector<double> sorted_unique(std::vector<double> v, double lo, double hi) {
    for (auto& x : v) x = std::clamp(x, lo, hi);
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (double x : v)
        if (out.empty() || x - out.back() > 1e-15 * std::max(1.0, std::abs(x))) out.push_back(x);
    return out;
}

struct Core {
    bool active = false;
    double s0 = 0.0;
    double eps = 0.0;
};

double integrate_region(const SpaceTimeFunction& f, const Eigen::VectorXd& xc, double r, double t_lo, double t_hi,
                        const CylinderRule& rule, const Core& core) {
    const int n = static_cast<int>(xc.size());
    const double s_sing = core.active ? core.s0 : t_hi;
    const bool graded = rule.grading > 0 || core.active;

    std::vector<double> tb{t_lo, t_hi, s_sing};
    if (graded) {
        const int levels = std::max(rule.grading, 1) + (core.active ? 8 : 0);
        for (double side : {-1.0, 1.0}) {
            const double D = side < 0 ? s_sing - t_lo : t_hi - s_sing;
            if (D <= 0.0) continue;
            for (int k = 1; k <= levels; ++k) tb.push_back(s_sing + side * D * std::pow(0.25, k));
        }
        if (core.active) {
            tb.push_back(s_sing - core.eps * core.eps);
            tb.push_back(s_sing + core.eps * core.eps);
        }
    }
    tb = sorted_unique(tb, t_lo, t_hi);

    const auto time_rule = gauss_legendre(rule.time);
    const auto radial_rule = gauss_legendre(rule.radial);
    const auto dirs = sphere_rule(n, rule);
    Eigen::VectorXd y(n);

    double total = 0.0;
    for (std::size_t p = 0; p + 1 < tb.size(); ++p) {
        for (const auto& tn : map_rule(time_rule, tb[p], tb[p + 1])) {
            const double tau = std::abs(tn.x - s_sing);
            double rho_min = 0.0;
            if (core.active) rho_min = std::sqrt(std::max(0.0, core.eps * core.eps - tau));
            if (rho_min >= r) continue;
            std::vector<double> rb{rho_min, r};
            if (graded) {
                const double span = r - rho_min;
                const double scale = std::max(std::sqrt(tau), 1e-300);
                const int kmax =
                    std::min(2 * std::max(rule.grading, 4), static_cast<int>(std::ceil(std::log2(span / scale))) + 1);
                for (int k = 1; k <= kmax; ++k) rb.push_back(rho_min + span * std::pow(0.5, k));
            }
            rb = sorted_unique(rb, rho_min, r);
            double slice = 0.0;
            for (std::size_t q = 0; q + 1 < rb.size(); ++q) {
                for (const auto& rn : map_rule(radial_rule, rb[q], rb[q + 1])) {
                    const double jac = std::pow(rn.x, n - 1);
                    double ang = 0.0;
                    for (const auto& d : dirs) {
                        y = xc + rn.x * d.omega;
                        const double v = f(y, tn.x);
                        if (!std::isfinite(v)) {
                            std::ostringstream msg;
                            msg << "non-finite integrand at y = (" << y.transpose() << "), s = " << tn.x;
                            throw QuadratureError(msg.str());
                        }
                        ang += d.weight * v;
                    }
                    slice += rn.w * jac * ang;
                }
            }
            total += tn.w * slice;
        }
    }
    return total;
}

// Limit of values v_i = I + sum_m c_m eps_i^{p+m}.
double richardson_limit(const std::vector<double>& eps, const std::vector<double>& v, int p) {
    const int M = static_cast<int>(v.size());
    Eigen::MatrixXd A(M, M);
    Eigen::VectorXd b(M);
    const double scale = eps.front();
    for (int i = 0; i < M; ++i) {
        A(i, 0) = 1.0;
        for (int m = 1; m < M; ++m) A(i, m) = std::pow(eps[i] / scale, p + m - 1);
        b[i] = v[i];
    }
    return A.colPivHouseholderQr().solve(b)[0];
}

double radical_inverse(std::uint64_t i, int base) {
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

}  // namespace

double integrate_cylinder(const SpaceTimeFunction& f, const ParabolicCylinder& Q, const CylinderRule& rule) {
    return integrate_region(f, Q.center.x, Q.radius, Q.center.t - Q.radius * Q.radius, Q.center.t, rule, Core{});
}

double integrate_slab(const SpaceTimeFunction& f, const Eigen::VectorXd& center, double radius, double s_lo,
                      double s_hi, const CylinderRule& rule) {
    if (!(radius > 0.0) || !(s_hi > s_lo)) throw DomainError("integrate_slab: empty region");
    return integrate_region(f, center, radius, s_lo, s_hi, rule, Core{});
}

ExcisionResult integrate_cylinder_excised(const SpaceTimeFunction& f, const ParabolicCylinder& Q, double s0,
                                          const CylinderRule& rule, std::vector<double> eps_factors,
                                          int leading_order) {
    if (eps_factors.size() < 2) throw DomainError("integrate_cylinder_excised: need at least two core radii");
    if (s0 > Q.center.t || s0 < Q.center.t - Q.radius * Q.radius)
        throw DomainError("integrate_cylinder_excised: singular time outside the cylinder");
    ExcisionResult res;
    for (double e : eps_factors) {
        const double eps = e * Q.radius;
        res.core_radii.push_back(eps);
        res.excised.push_back(integrate_region(f, Q.center.x, Q.radius, Q.center.t - Q.radius * Q.radius, Q.center.t,
                                               rule, Core{true, s0, eps}));
    }
    res.value = richardson_limit(res.core_radii, res.excised, leading_order);
    std::vector<double> e1(res.core_radii.begin(), res.core_radii.end() - 1);
    std::vector<double> v1(res.excised.begin(), res.excised.end() - 1);
    res.error_estimate = std::abs(res.value - richardson_limit(e1, v1, leading_order));
    return res;
}

double lq_norm_on_cylinder(const SpaceTimeFunction& f, const ParabolicCylinder& Q, double q, const CylinderRule& rule) {
    if (!(q >= 1.0)) throw DomainError("lq_norm_on_cylinder: q must be >= 1");
    const double I = integrate_cylinder([&](const Eigen::VectorXd& y, double s) { return std::pow(std::abs(f(y, s)), q); },
                                        Q, rule);
    return std::pow(I, 1.0 / q);
}

DyadicShellDecomposition::DyadicShellDecomposition(double rho, int M) : base(rho), count(M) {
    if (!(rho > 0.0)) throw DomainError("DyadicShellDecomposition: base must be positive");
    if (M < 1) throw DomainError("DyadicShellDecomposition: need at least one shell");
}

DyadicShellDecomposition DyadicShellDecomposition::from_outer(double r_max, int count) {
    return DyadicShellDecomposition(r_max * std::pow(0.5, count + 1), count);
}

double DyadicShellDecomposition::inner(int u) const { return base * std::pow(2.0, u); }
double DyadicShellDecomposition::outer(int u) const { return base * std::pow(2.0, u + 1); }

std::vector<std::pair<Eigen::VectorXd, double>> unit_shell_samples(int n, int count, std::uint64_t seed) {
    static constexpr int primes[] = {2, 3, 5, 7};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double shift[4];
    for (double& s : shift) s = u01(rng);
    std::vector<std::pair<Eigen::VectorXd, double>> out;
    out.reserve(count);
    Eigen::VectorXd z(n);
    for (std::uint64_t i = 1; static_cast<int>(out.size()) < count; ++i) {
        for (int a = 0; a < n; ++a) z[a] = 2.0 * std::fmod(radical_inverse(i, primes[a]) + shift[a], 1.0) - 1.0;
        const double tau = std::fmod(radical_inverse(i, primes[n]) + shift[n], 1.0);
        const double norm = parabolic_norm(z, tau);
        if (norm > 0.5 && norm <= 1.0) out.emplace_back(z, tau);
    }
    return out;
}

std::vector<Point> shell_points(const DyadicShellDecomposition& shells, int u, int n, int count, std::uint64_t seed,
                                TimeSide side) {
    const double lambda = shells.outer(u);
    const double sign = side == TimeSide::Past ? -1.0 : 1.0;
    std::vector<Point> pts;
    for (const auto& [z, tau] : unit_shell_samples(n, count, seed)) pts.emplace_back(lambda * z, sign * lambda * lambda * tau);
    return pts;
}

std::vector<ShellSup> shell_supremum(const SpaceTimeFunction& f, const DyadicShellDecomposition& shells, int n,
                                     int samples, std::uint64_t seed, TimeSide side) {
    const auto unit = unit_shell_samples(n, samples, seed);
    const double sign = side == TimeSide::Past ? -1.0 : 1.0;
    std::vector<ShellSup> out;
    for (int u = 1; u <= shells.count; ++u) {
        const double lambda = shells.outer(u);
        double sup = 0.0;
        for (const auto& [z, tau] : unit) sup = std::max(sup, std::abs(f(lambda * z, sign * lambda * lambda * tau)));
        out.push_back({u, shells.inner(u), shells.outer(u), sup});
    }
    return out;
}

void write_shell_csv(std::ostream& out, const std::vector<ShellSup>& table) {
    out << "shell_index,inner_radius,outer_radius,sup_value\n";
    out << std::setprecision(17);
    for (const auto& row : table) out << row.index << ',' << row.inner << ',' << row.outer << ',' << row.sup << '\n';
}

std::vector<ShellSup> read_shell_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "shell_index,inner_radius,outer_radius,sup_value")
        throw DomainError("shell CSV: unexpected header");
    std::vector<ShellSup> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        ShellSup row;
        char c1, c2, c3;
        if (!(ss >> row.index >> c1 >> row.inner >> c2 >> row.outer >> c3 >> row.sup) || c1 != ',' || c2 != ',' ||
            c3 != ',')
            throw DomainError("shell CSV: malformed row '" + line + "'");
        out.push_back(row);
    }
    return out;
}

}  // namespace stx

#include "stx/construct.hpp"

#include "stx/kernels.hpp"
#include "stx/quadrature_rules.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace stx {

namespace {

double sphere_area(int n) { return n == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi; }

void require_finite(const Eigen::MatrixXd& m, const Eigen::VectorXd& y, double s, const char* what) {
    if (m.allFinite()) return;
    std::ostringstream msg;
    msg << what << ": non-finite value at (y,s) = (" << y.transpose() << ", " << s << ")";
    throw QuadratureError(msg.str());
}

/// Breakpoints on (lo, hi) graded geometrically toward `center` at scale `h`.
std::vector<double> graded_breaks(double lo, double hi, double center, double h) {
    std::vector<double> b{lo, hi};
    if (center > lo && center < hi) b.push_back(center);
    const double span = hi - lo;
    h = std::max(h, 1e-14 * std::max(span, 1e-300));
    for (double d = 0.5 * h; d < span; d *= 2.0) {
        for (double c : {center - d, center + d})
            if (c > lo && c < hi) b.push_back(c);
    }
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

/// Interval of R' >= 0 where |x - R' e|^2 + |t| + (1 - |e|^2) R'^2 < radius^2, for |(e, e_s)| = 1.
/// Returns false when empty.
bool ray_interval(double a, double rho2, double radius, double& lo, double& hi) {
    const double disc = a * a + radius * radius - rho2;
    if (disc <= 0.0) return false;
    const double sq = std::sqrt(disc);
    hi = a + sq;
    lo = std::max(0.0, a - sq);
    return hi > lo;
}

/// Levels of |(y,s)| inside the cutoff transition 1/2 < |(y,s)| < 1.
std::vector<double> transition_levels(int panels) {
    std::vector<double> c;
    for (int i = 0; i <= panels; ++i) c.push_back(0.5 + 0.5 * i / panels);
    return c;
}

/// Radial Gauss nodes on (lo, hi), with extra breakpoints at the transition levels.
std::vector<MappedNode> radial_nodes(const GaussRule& gauss, double lo, double hi, int panels) {
    std::vector<double> b{lo, hi};
    for (double c : transition_levels(panels))
        if (c > lo && c < hi) b.push_back(c);
    std::sort(b.begin(), b.end());
    std::vector<MappedNode> out;
    for (std::size_t p = 0; p + 1 < b.size(); ++p) {
        const auto part = map_rule(gauss, b[p], b[p + 1]);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

/// Adds the parameters R' where a ray x - R' e (with |(x,t)|^2 = rho2 and closest approach a)
/// crosses the transition levels.
void add_transition_crossings(std::vector<double>& breaks, double a, double rho2, int panels) {
    const double lo = breaks.front(), hi = breaks.back();
    for (double c : transition_levels(panels)) {
        const double disc = a * a + c * c - rho2;
        if (disc <= 0.0) continue;
        for (double r : {a - std::sqrt(disc), a + std::sqrt(disc)})
            if (r > lo && r < hi) breaks.push_back(r);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
}

}  // namespace

SphereRule sphere_rule(int n, int azimuth) {
    SphereRule out;
    if (n == 2) {
        for (int i = 0; i < azimuth; ++i) {
            const double phi = 2.0 * std::numbers::pi * (i + 0.5) / azimuth;
            out.nodes.push_back(Eigen::Vector2d(std::cos(phi), std::sin(phi)));
            out.weights.push_back(2.0 * std::numbers::pi / azimuth);
        }
    } else if (n == 3) {
        const auto g = gauss_legendre(std::max(2, azimuth / 2));
        for (int a = 0; a < g.size(); ++a) {
            const double c = g.nodes[a], s = std::sqrt(1.0 - c * c);
            for (int i = 0; i < azimuth; ++i) {
                const double phi = 2.0 * std::numbers::pi * (i + 0.5) / azimuth;
                out.nodes.push_back(Eigen::Vector3d(s * std::cos(phi), s * std::sin(phi), c));
                out.weights.push_back(g.weights[a] * 2.0 * std::numbers::pi / azimuth);
            }
        }
    } else {
        throw DomainError("sphere_rule: dimension must be 2 or 3");
    }
    return out;
}

// Weights carry the factor 2 cos(theta) of the parabolic polar measure. The polar variable is
// theta near the pole and tau = cos^2(theta) near the equator, where 2 cos(theta) sin^{n-1}(theta)
// d theta = sin^{n-2}(theta) d tau and the heat factor exp(-sin^2/(4 tau)) needs graded panels.
HemisphereRule hemisphere_rule(int n, int polar, int azimuth, double tau_lo, double tau_hi) {
    HemisphereRule out;
    const auto sphere = sphere_rule(n, azimuth);
    const auto gauss = gauss_legendre(polar);
    auto emit = [&](double st, double ct, double w) {
        for (std::size_t i = 0; i < sphere.nodes.size(); ++i) {
            out.xi.push_back(sphere.nodes[i]);
            out.sin_theta.push_back(st);
            out.cos_theta.push_back(ct);
            out.weight.push_back(w * sphere.weights[i]);
        }
    };
    constexpr double split = 0.5;
    if (tau_hi > split) {
        // theta in (acos sqrt(tau_hi), acos sqrt(max(tau_lo, split)))
        const double th_lo = std::acos(std::sqrt(tau_hi)), th_hi = std::acos(std::sqrt(std::max(tau_lo, split)));
        for (const auto& node : map_rule(gauss, th_lo, th_hi)) {
            const double st = std::sin(node.x), ct = std::cos(node.x);
            emit(st, ct, 2.0 * ct * node.w * std::pow(st, n - 1));
        }
    }
    std::vector<double> breaks;
    for (double b = std::min(tau_hi, split); b > tau_lo && b > 1.0 / 256; b *= 0.5) breaks.push_back(b);
    breaks.push_back(tau_lo);
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        if (breaks[p] <= breaks[p + 1]) continue;
        for (const auto& node : map_rule(gauss, breaks[p + 1], breaks[p])) {
            const double ct = std::sqrt(node.x), st = std::sqrt(1.0 - node.x);
            emit(st, ct, node.w * std::pow(st, n - 2));
        }
    }
    return out;
}

LocalSolution::LocalSolution(std::shared_ptr<const Forcing> forcing, int d, QuadratureSettings settings)
    : forcing_(std::move(forcing)), n_(forcing_->dim()), d_(d), settings_(settings) {
    if (d < 0) throw DomainError("LocalSolution: degree must be non-negative");
    if (d + forcing_->max_beta_order() + 2 > 12) throw DomainError("LocalSolution: degree too large for the kernel tables");
    specs_ = parabolic_specs_up_to(n_, d_);
    v_ = SpaceTimePolynomial(n_, d_, n_);
    corr_ = SpaceTimePolynomial(n_, d_, n_);
    pressure_taylor_ = Eigen::MatrixXd::Zero(d_ >= 2 ? static_cast<Eigen::Index>(multi_indices_up_to(n_, d_ - 2).size()) : 0, n_);
    if (forcing_->is_zero()) return;

    dirs_ = hemisphere_rule(n_, settings_.polar, settings_.azimuth);
    dir_jets_.reserve(dirs_.xi.size());
    for (std::size_t i = 0; i < dirs_.xi.size(); ++i)
        dir_jets_.push_back(unit_jets(dirs_.sin_theta[i] * dirs_.xi[i], dirs_.cos_theta[i] * dirs_.cos_theta[i]));

    const int K = settings_.shells;
    shells_.resize(K);
    for (int k = 0; k < K; ++k) shells_[k] = shell_integral(std::ldexp(1.0, -k - 1), std::ldexp(1.0, -k));
    // geometric tail below the last shell, entry by entry
    Eigen::MatrixXd tail = Eigen::MatrixXd::Zero(specs_.size(), n_);
    if (K >= 2) {
        const auto& a = shells_[K - 2];
        const auto& b = shells_[K - 1];
        for (Eigen::Index i = 0; i < tail.rows(); ++i)
            for (Eigen::Index j = 0; j < tail.cols(); ++j) {
                if (a(i, j) == 0.0) continue;
                const double r = b(i, j) / a(i, j);
                if (r > 0.0 && r < 0.95) tail(i, j) = b(i, j) * r / (1.0 - r);
            }
    }
    suffix_.assign(K + 1, tail);
    for (int k = K - 1; k >= 0; --k) suffix_[k] = suffix_[k + 1] + shells_[k];
    v_.coefficients = suffix_[0];

    build_pressure_taylor();
}

LocalSolution::DirectionJets LocalSolution::unit_jets(const Eigen::VectorXd& z, double tau) const {
    const auto& betas = forcing_->betas();
    KernelJet jet(Point(z, tau), d_ + forcing_->max_beta_order() + 2);
    DirectionJets out;
    out.jets.resize(betas.size());
    for (std::size_t r = 0; r < betas.size(); ++r) {
        out.jets[r].reserve(specs_.size());
        for (const auto& s : specs_) {
            Eigen::MatrixXd m(n_, n_);
            for (int j = 0; j < n_; ++j)
                for (int k = j; k < n_; ++k) m(j, k) = m(k, j) = jet.stokes(s.mu + betas[r], s.l, j, k);
            out.jets[r].push_back(std::move(m));
        }
    }
    return out;
}

Eigen::MatrixXd LocalSolution::density(const Eigen::VectorXd& y, double s) const {
    Eigen::MatrixXd F = forcing_->density(y, s);
    require_finite(F, y, s, "forcing");
    return F;
}

// int_{r_lo < |(y,s)| < r_hi} D^{mu+beta} D^l K(-y,-s) F(y,s) for every spec, with
// (y, s) = (-R sin(theta) xi, -R^2 cos^2(theta)).
Eigen::MatrixXd LocalSolution::shell_integral(double r_lo, double r_hi) const {
    const auto& betas = forcing_->betas();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(specs_.size(), n_);
    if (r_hi <= r_lo) return out;
    const auto radial = radial_nodes(gauss_legendre(settings_.radial), r_lo, r_hi, settings_.transition_panels);
    const int max_m = d_ + forcing_->max_beta_order();
    Eigen::VectorXd y(n_);
    for (std::size_t i = 0; i < dirs_.xi.size(); ++i) {
        const double st = dirs_.sin_theta[i], ct = dirs_.cos_theta[i];
        // G[r][e](j) = int R^{1-e} F_{r,j} dR
        std::vector<Eigen::MatrixXd> G(betas.size(), Eigen::MatrixXd::Zero(max_m + 1, n_));
        for (const auto& node : radial) {
            y = -node.x * st * dirs_.xi[i];
            const Eigen::MatrixXd F = density(y, -node.x * node.x * ct * ct);
            double p = node.x * node.w;  // R^{1-e} w for e = 0
            for (int e = 0; e <= max_m; ++e) {
                for (std::size_t r = 0; r < betas.size(); ++r) G[r].row(e) += p * F.row(r);
                p /= node.x;
            }
        }
        const double w = dirs_.weight[i];
        for (std::size_t r = 0; r < betas.size(); ++r) {
            const int b = betas[r].order();
            for (std::size_t s = 0; s < specs_.size(); ++s)
                out.row(s) += w * (dir_jets_[i].jets[r][s].transpose() * G[r].row(specs_[s].order() + b).transpose()).transpose();
        }
    }
    return out;
}

Eigen::MatrixXd LocalSolution::homogeneous_integral(double radius) const {
    if (radius >= 1.0) return suffix_[0];
    const int k0 = static_cast<int>(std::floor(-std::log2(radius)));  // 2^{-k0-1} < radius <= 2^{-k0}
    const double lo = std::ldexp(1.0, -k0 - 1);
    const int K = settings_.shells;
    const Eigen::MatrixXd below = (k0 + 1 <= K) ? suffix_[k0 + 1] : Eigen::MatrixXd(suffix_[K]);
    return below + shell_integral(lo, radius);
}

Eigen::VectorXd LocalSolution::taylor_contract(const Eigen::MatrixXd& table, const Eigen::VectorXd& x, double t) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_);
    for (std::size_t s = 0; s < specs_.size(); ++s)
        out += table.row(s).transpose() * (specs_[s].mu.monomial(x) * std::pow(t, specs_[s].l) / specs_[s].factorial_weight());
    return out;
}

// int_{|(y,s)| < radius} D^beta K(x-y, t-s) F(y,s), rays (z, tau) = R' (sin theta xi, R' cos^2 theta) about (x,t).
Eigen::VectorXd LocalSolution::rays(const Eigen::VectorXd& x, double t, double radius) const {
    const auto& betas = forcing_->betas();
    const double rho2 = x.squaredNorm() + std::abs(t);
    const auto gauss = gauss_legendre(settings_.radial);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_);
    Eigen::VectorXd y(n_);
    for (std::size_t i = 0; i < dirs_.xi.size(); ++i) {
        const double st = dirs_.sin_theta[i], ct = dirs_.cos_theta[i];
        const Eigen::VectorXd ez = st * dirs_.xi[i];
        const double a = x.dot(ez);
        double lo = 0.0, hi = 0.0;
        if (!ray_interval(a, rho2, radius, lo, hi)) continue;
        const double h = std::sqrt(std::max(rho2 - a * a, 0.0));
        auto breaks = graded_breaks(lo, hi, a, h);
        add_transition_crossings(breaks, a, rho2, settings_.transition_panels);
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(n_);
        for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
            for (const auto& node : map_rule(gauss, breaks[p], breaks[p + 1])) {
                y = x - node.x * ez;
                const Eigen::MatrixXd F = density(y, t - node.x * node.x * ct * ct);
                for (std::size_t r = 0; r < betas.size(); ++r) {
                    const double scale = node.w * std::pow(node.x, 1 - betas[r].order());
                    acc += scale * (dir_jets_[i].jets[r][0].transpose() * F.row(r).transpose());
                }
            }
        }
        out += dirs_.weight[i] * acc;
    }
    return out;
}

// int_{r_near < |(y,s)| < 1} (D^beta K(x-y, t-s) - T_d D^beta K) F, pointwise difference.
Eigen::VectorXd LocalSolution::far_field(const Eigen::VectorXd& x, double t, double r_near) const {
    const auto& betas = forcing_->betas();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n_);
    if (r_near >= 1.0) return out;

    std::vector<double> breaks{r_near};
    const double first = std::min(2.0 * r_near, 1.0);
    for (int i = 1; i <= settings_.near_subpanels; ++i)
        breaks.push_back(r_near + (first - r_near) * i / settings_.near_subpanels);
    for (double r = 2.0 * first; r < 1.0; r *= 2.0) breaks.push_back(r);
    if (breaks.back() < 1.0) breaks.push_back(1.0);
    std::vector<MappedNode> radial;
    const auto gauss = gauss_legendre(settings_.radial);
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        const auto nodes = radial_nodes(gauss, breaks[p], breaks[p + 1], settings_.transition_panels);
        radial.insert(radial.end(), nodes.begin(), nodes.end());
    }

    const int jet_order = forcing_->max_beta_order() + 2;
    std::vector<double> mono(specs_.size());
    for (std::size_t s = 0; s < specs_.size(); ++s)
        mono[s] = specs_[s].mu.monomial(x) * std::pow(t, specs_[s].l) / specs_[s].factorial_weight();

    // Taylor part on the cached directions; per direction and order, sum_s J_s x^mu t^l / (mu! l!)
    const int max_m = d_ + forcing_->max_beta_order();
    std::vector<std::vector<std::vector<Eigen::MatrixXd>>> taylor(dirs_.xi.size());
    for (std::size_t i = 0; i < dirs_.xi.size(); ++i) {
        taylor[i].assign(betas.size(), std::vector<Eigen::MatrixXd>(max_m + 1, Eigen::MatrixXd::Zero(n_, n_)));
        for (std::size_t r = 0; r < betas.size(); ++r)
            for (std::size_t q = 0; q < specs_.size(); ++q)
                taylor[i][r][specs_[q].order() + betas[r].order()] += mono[q] * dir_jets_[i].jets[r][q];
    }

    Eigen::VectorXd y(n_);
    for (const auto& node : radial) {
        const double R = node.x;
        const double measure = node.w * std::pow(R, n_ + 1);
        for (std::size_t i = 0; i < dirs_.xi.size(); ++i) {
            const double ct = dirs_.cos_theta[i];
            y = -R * dirs_.sin_theta[i] * dirs_.xi[i];
            const Eigen::MatrixXd F = density(y, -R * R * ct * ct);
            Eigen::VectorXd acc = Eigen::VectorXd::Zero(n_);
            for (std::size_t r = 0; r < betas.size(); ++r) {
                Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n_, n_);
                double p = std::pow(R, -n_);
                for (int m = 0; m <= max_m; ++m, p /= R) T += p * taylor[i][r][m];
                acc += T.transpose() * F.row(r).transpose();
            }
            out -= measure * dirs_.weight[i] * acc;
        }
        // the kernel vanishes for s > t, i.e. cos^2(theta) < |t| / R^2
        const double tau_star = std::abs(t) / (R * R);
        if (tau_star >= 1.0) continue;
        const auto rule = hemisphere_rule(n_, settings_.polar, settings_.azimuth, tau_star, 1.0);
        for (std::size_t i = 0; i < rule.xi.size(); ++i) {
            const double ct = rule.cos_theta[i];
            y = -R * rule.sin_theta[i] * rule.xi[i];
            const double s = -R * R * ct * ct;
            if (!(t - s > 0.0)) continue;
            const Eigen::MatrixXd F = density(y, s);
            KernelJet K(Point(x - y, t - s), jet_order);
            Eigen::VectorXd acc = Eigen::VectorXd::Zero(n_);
            for (std::size_t r = 0; r < betas.size(); ++r) {
                Eigen::MatrixXd D(n_, n_);
                for (int j = 0; j < n_; ++j)
                    for (int k = j; k < n_; ++k) D(j, k) = D(k, j) = K.stokes(betas[r], 0, j, k);
                acc += D.transpose() * F.row(r).transpose();
            }
            out += measure * rule.weight[i] * acc;
        }
    }
    return out;
}

LocalSolution::Pieces LocalSolution::decomposition(const Eigen::VectorXd& x, double t) const {
    if (x.size() != n_) throw DomainError("LocalSolution: point dimension mismatch");
    if (t > 0.0) throw DomainError("LocalSolution: evaluation requires t <= 0");
    Pieces p{Eigen::VectorXd::Zero(n_), Eigen::VectorXd::Zero(n_), Eigen::VectorXd::Zero(n_), Eigen::VectorXd::Zero(n_)};
    const double rho = parabolic_norm(x, t);
    if (forcing_->is_zero() || rho == 0.0) return p;
    const double r_near = std::min(settings_.near_factor * rho, 1.0);
    p.i1 = rays(x, t, r_near);
    p.i2 = -taylor_contract(homogeneous_integral(r_near), x, t);
    p.i3 = far_field(x, t, r_near);
    p.correction = corr_.evaluate(x, t);
    return p;
}

Eigen::VectorXd LocalSolution::velocity(const Eigen::VectorXd& x, double t) const {
    const auto p = decomposition(x, t);
    return p.i1 + p.i2 + p.i3 - p.correction;
}

Eigen::VectorXd LocalSolution::volume_potential(const Eigen::VectorXd& x, double t) const {
    if (x.size() != n_) throw DomainError("LocalSolution: point dimension mismatch");
    if (t > 0.0) throw DomainError("LocalSolution: evaluation requires t <= 0");
    if (forcing_->is_zero()) return Eigen::VectorXd::Zero(n_);
    return rays(x, t, 1.0);
}

// D^mu d_k p(0,0) = sum_r sum_j int d^{mu + beta_r + e_j + e_k} E(-y) F_{r,j}(y, 0) dy
void LocalSolution::build_pressure_taylor() {
    if (d_ < 2) return;
    const auto mus = multi_indices_up_to(n_, d_ - 2);
    const auto& betas = forcing_->betas();
    const auto sphere = sphere_rule(n_, std::max(2 * settings_.azimuth, 48));
    const auto gauss = gauss_legendre(settings_.radial);
    const int K = settings_.shells;
    Eigen::MatrixXd value = Eigen::MatrixXd::Zero(mus.size(), n_);
    Eigen::MatrixXd magnitude = Eigen::MatrixXd::Zero(mus.size(), n_);
    const int top = d_ + forcing_->max_beta_order();  // largest |nu|
    for (std::size_t i = 0; i < sphere.nodes.size(); ++i) {
        const Eigen::VectorXd& xi = sphere.nodes[i];
        // radial moments M[e](r, j) = int_0^1 rho^{1-e} F_{r,j}(rho xi, 0) d rho, e = |nu|
        std::vector<Eigen::MatrixXd> M(top + 1, Eigen::MatrixXd::Zero(betas.size(), n_));
        std::vector<Eigen::MatrixXd> prev(top + 1), last(top + 1);
        for (int k = 0; k < K; ++k) {
            std::vector<Eigen::MatrixXd> acc(top + 1, Eigen::MatrixXd::Zero(betas.size(), n_));
            for (const auto& node : radial_nodes(gauss, std::ldexp(1.0, -k - 1), std::ldexp(1.0, -k), settings_.transition_panels)) {
                const Eigen::MatrixXd F = density(node.x * xi, 0.0);
                for (int e = 2; e <= top; ++e) acc[e] += node.w * std::pow(node.x, 1 - e) * F;
            }
            for (int e = 2; e <= top; ++e) {
                M[e] += acc[e];
                prev[e] = last[e];
                last[e] = acc[e];
            }
        }
        for (int e = 2; e <= top && K >= 2; ++e)
            for (Eigen::Index a = 0; a < last[e].rows(); ++a)
                for (Eigen::Index b = 0; b < last[e].cols(); ++b) {
                    if (prev[e](a, b) == 0.0) continue;
                    const double r = last[e](a, b) / prev[e](a, b);
                    if (r > 0.0 && r < 0.95) M[e](a, b) += last[e](a, b) * r / (1.0 - r);
                }
        for (std::size_t m = 0; m < mus.size(); ++m)
            for (std::size_t r = 0; r < betas.size(); ++r)
                for (int j = 0; j < n_; ++j)
                    for (int k = 0; k < n_; ++k) {
                        const MultiIndex nu = mus[m] + betas[r] + MultiIndex::unit(n_, j) + MultiIndex::unit(n_, k);
                        const double dE = -nonlocal_limit(nu, -xi);
                        const double term = sphere.weights[i] * dE * M[nu.order()](r, j);
                        value(m, k) += term;
                        magnitude(m, k) += std::abs(term);
                    }
    }
    for (Eigen::Index m = 0; m < value.rows(); ++m)
        for (Eigen::Index k = 0; k < n_; ++k)
            if (std::abs(value(m, k)) <= 1e-11 * magnitude(m, k)) value(m, k) = 0.0;
    pressure_taylor_ = value;
    if (d_ >= 4 && value.cwiseAbs().maxCoeff() > 0.0)
        throw DomainError("LocalSolution: the pressure jump correction is implemented for d <= 3 only");
    for (std::size_t m = 0; m < mus.size(); ++m) {
        const int idx = corr_.find(mus[m], 1);
        if (idx >= 0) corr_.coefficients.row(idx) = -value.row(m);
    }
}

double LocalSolution::pressure(const Eigen::VectorXd& x, double t) const {
    if (x.size() != n_) throw DomainError("LocalSolution: point dimension mismatch");
    if (forcing_->is_zero()) return 0.0;
    const double rho2 = x.squaredNorm() + std::abs(t);
    const auto sphere = sphere_rule(n_, std::max(2 * settings_.azimuth, 48));
    const auto gauss = gauss_legendre(settings_.radial);
    const double area = sphere_area(n_);
    const auto& betas = forcing_->betas();

    bool divergence_form = true;
    for (const auto& b : betas) divergence_form = divergence_form && b.order() == 1;

    Eigen::MatrixXd g0;
    if (divergence_form) {
        // assemble g_ij(x) from the density rows (row r carries g_{i_r, .})
        auto tensor = [&](const Eigen::VectorXd& y) {
            const Eigen::MatrixXd F = density(y, t);
            Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n_, n_);
            for (std::size_t r = 0; r < betas.size(); ++r)
                for (int i = 0; i < n_; ++i)
                    if (betas[r][i] == 1) g.row(i) += F.row(r);
            return g;
        };
        g0 = tensor(x);
        double p = g0.trace() / n_;
        for (std::size_t i = 0; i < sphere.nodes.size(); ++i) {
            const Eigen::VectorXd& xi = sphere.nodes[i];
            const Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n_, n_) - n_ * xi * xi.transpose();
            const double a = x.dot(xi);
            double lo = 0.0, hi = 0.0;
            double acc = 0.0;
            if (ray_interval(a, rho2, 1.0, lo, hi)) {
                // beyond hi the density vanishes; g(x) keeps its log term out to hi
                auto breaks = graded_breaks(0.0, hi, a, std::sqrt(std::max(rho2 - a * a, 0.0)));
                add_transition_crossings(breaks, a, rho2, settings_.transition_panels);
                for (std::size_t p2 = 0; p2 + 1 < breaks.size(); ++p2)
                    for (const auto& node : map_rule(gauss, breaks[p2], breaks[p2 + 1]))
                        acc += node.w * (H.cwiseProduct(tensor(x - node.x * xi) - g0)).sum() / node.x;
                acc += (H.cwiseProduct(g0)).sum() * std::log(hi);
            }
            p += sphere.weights[i] * acc / area;
        }
        return p;
    }

    double p = 0.0;
    for (std::size_t i = 0; i < sphere.nodes.size(); ++i) {
        const Eigen::VectorXd& xi = sphere.nodes[i];
        const double a = x.dot(xi);
        double lo = 0.0, hi = 0.0;
        if (!ray_interval(a, rho2, 1.0, lo, hi)) continue;
        auto breaks = graded_breaks(lo, hi, a, std::sqrt(std::max(rho2 - a * a, 0.0)));
        add_transition_crossings(breaks, a, rho2, settings_.transition_panels);
        double acc = 0.0;
        for (std::size_t p2 = 0; p2 + 1 < breaks.size(); ++p2)
            for (const auto& node : map_rule(gauss, breaks[p2], breaks[p2 + 1])) {
                const Eigen::VectorXd f = forcing_->effective(x - node.x * xi, t);
                acc += node.w * xi.dot(f);
            }
        p += sphere.weights[i] * acc / area;
    }
    return p;
}

}  // namespace stx

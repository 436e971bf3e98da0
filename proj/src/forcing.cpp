#include "stx/forcing.hpp"

#include "stx/quadrature.hpp"
#include "stx/riesz.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace stx {

CutoffValue cutoff(double r) {
    if (r <= 0.5) return {1.0, 0.0, 0.0};
    if (r >= 1.0) return {0.0, 0.0, 0.0};
    // chi = a / (a + b), a = h(1 - r), b = h(r - 1/2), h(z) = exp(-1/z)
    auto h = [](double z) {
        const double e = std::exp(-1.0 / z);
        return std::array<double, 3>{e, e / (z * z), e * (1.0 / (z * z * z * z) - 2.0 / (z * z * z))};
    };
    const auto A = h(1.0 - r), B = h(r - 0.5);
    const double a = A[0], a1 = -A[1], a2 = A[2];
    const double b = B[0], b1 = B[1], b2 = B[2];
    const double S = a + b, S1 = a1 + b1;
    const double N = a1 * b - a * b1, N1 = a2 * b - a * b2;
    return {a / S, N / (S * S), (N1 * S - 2.0 * N * S1) / (S * S * S)};
}

Forcing::Forcing(int n, std::vector<MultiIndex> betas, Density density, Field effective, std::string label,
                 double decay_exponent)
    : n_(n), betas_(std::move(betas)), density_(std::move(density)), effective_(std::move(effective)),
      label_(std::move(label)), decay_exponent_(decay_exponent) {
    if (n < 2 || n > 3) throw DomainError("Forcing: dimension must be 2 or 3");
    if (betas_.empty()) throw DomainError("Forcing: at least one kernel term required");
}

Forcing Forcing::zero(int n) {
    Forcing f(
        n, {MultiIndex(n)}, [n](const Eigen::VectorXd&, double) { return Eigen::MatrixXd::Zero(1, n); },
        [n](const Eigen::VectorXd&, double) { return Eigen::VectorXd::Zero(n); }, "zero", 0.0);
    f.zero_ = true;
    return f;
}

int Forcing::max_beta_order() const {
    int m = 0;
    for (const auto& b : betas_) m = std::max(m, b.order());
    return m;
}

Forcing Forcing::scaled(double c) const {
    auto d = density_;
    auto e = effective_;
    Forcing out(
        n_, betas_, [d, c](const Eigen::VectorXd& y, double s) -> Eigen::MatrixXd { return c * d(y, s); },
        [e, c](const Eigen::VectorXd& y, double s) -> Eigen::VectorXd { return c * e(y, s); }, label_, decay_exponent_);
    out.zero_ = zero_ || c == 0.0;
    return out;
}

Forcing Forcing::plus(const Forcing& other) const {
    if (other.n_ != n_ || other.betas_ != betas_) throw DomainError("Forcing::plus: incompatible kernel terms");
    auto d1 = density_, d2 = other.density_;
    auto e1 = effective_, e2 = other.effective_;
    Forcing out(
        n_, betas_, [d1, d2](const Eigen::VectorXd& y, double s) -> Eigen::MatrixXd { return d1(y, s) + d2(y, s); },
        [e1, e2](const Eigen::VectorXd& y, double s) -> Eigen::VectorXd { return e1(y, s) + e2(y, s); },
        label_ + "+" + other.label_, std::min(decay_exponent_, other.decay_exponent_));
    out.zero_ = zero_ && other.zero_;
    return out;
}

Forcing Forcing::as_standard() const {
    auto e = effective_;
    const int n = n_;
    // one derivative moved onto the density lowers the decay exponent by one
    const double a = decay_exponent_ - max_beta_order();
    Forcing out(
        n, {MultiIndex(n)},
        [e, n](const Eigen::VectorXd& y, double s) -> Eigen::MatrixXd { return e(y, s).transpose().reshaped(1, n); },
        e, label_ + ":standard", a);
    out.zero_ = zero_;
    return out;
}

void ForcingSpec::validate() const {
    if (n != 2 && n != 3) throw DomainError("forcing.n: must be 2 or 3");
    if (d < 2) throw DomainError("forcing.d: must be >= 2");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("forcing.alpha: must lie in (0,1)");
    if (!(gamma > 0.0)) throw DomainError("forcing.gamma: must be positive");
    if (!(q > 1.0 + 0.5 * n)) throw DomainError("forcing.q: must exceed 1 + n/2");
    if (form == ForcingForm::Standard) {
        if (profile != "radial_power" && profile != "oscillatory")
            throw DomainError("forcing.profile: standard form supports radial_power | oscillatory");
        if (direction.size() != 0 && (direction.size() != n || direction.norm() == 0.0))
            throw DomainError("forcing.direction: must be a nonzero vector of length n");
    } else {
        if (profile != "isotropic" && profile != "antisymmetric" && profile != "matrix")
            throw DomainError("forcing.profile: divergence form supports isotropic | antisymmetric | matrix");
        if (profile == "matrix" && (matrix.rows() != n || matrix.cols() != n))
            throw DomainError("forcing.matrix: must be n x n");
        if (profile == "antisymmetric" && n != 2 && matrix.size() == 0)
            throw DomainError("forcing.matrix: n = 3 antisymmetric profile needs an explicit matrix");
    }
}

namespace {

// psi(rho) = rho^p chi(rho) [1 + cos(6 pi rho)/2], with d psi / d rho
struct RadialProfile {
    double power;
    bool oscillatory;

    std::pair<double, double> operator()(double rho) const {
        if (rho <= 0.0) return {0.0, 0.0};
        const auto c = cutoff(rho);
        if (c.value == 0.0 && c.d1 == 0.0) return {0.0, 0.0};
        const double rp = std::pow(rho, power);
        double v = rp * c.value;
        double dv = power * rp / rho * c.value + rp * c.d1;
        if (oscillatory) {
            const double w = 1.0 + 0.5 * std::cos(6.0 * std::numbers::pi * rho);
            const double dw = -3.0 * std::numbers::pi * std::sin(6.0 * std::numbers::pi * rho);
            dv = dv * w + v * dw;
            v *= w;
        }
        return {v, dv};
    }
};

}  // namespace

std::vector<double> forcing_decay_ratios(const Forcing& f, const ForcingSpec& spec, int kmax) {
    const int n = f.dim();
    const double exponent = spec.d - 2 + spec.alpha + (n + 2) / spec.q;
    CylinderRule rule;
    rule.grading = 6;
    rule.angular = 32;
    std::vector<double> ratios;
    for (int k = 0; k <= kmax; ++k) {
        const double r = std::pow(0.5, k);
        ParabolicCylinder Q(Point(Eigen::VectorXd::Zero(n), 0.0), r);
        double worst = 0.0;
        for (int j = 0; j < n; ++j) {
            const double norm =
                lq_norm_on_cylinder([&](const Eigen::VectorXd& y, double s) { return f.effective(y, s)[j]; }, Q, spec.q, rule);
            worst = std::max(worst, norm);
        }
        ratios.push_back(worst / std::pow(r, exponent));
    }
    return ratios;
}

ForcingBundle make_forcing(const ForcingSpec& spec) {
    spec.validate();
    const int n = spec.n;
    ForcingBundle out;
    if (spec.form == ForcingForm::Standard) {
        Eigen::VectorXd e = spec.direction.size() ? Eigen::VectorXd(spec.direction.normalized())
                                                  : Eigen::VectorXd(Eigen::VectorXd::Unit(n, 0));
        const RadialProfile prof{spec.d - 2 + spec.alpha, spec.profile == "oscillatory"};
        auto build = [&](double amp) {
            auto field = [prof, e, amp](const Eigen::VectorXd& y, double s) -> Eigen::VectorXd {
                return amp * prof(parabolic_norm(y, s)).first * e;
            };
            return Forcing(
                n, {MultiIndex(n)},
                [field, n](const Eigen::VectorXd& y, double s) -> Eigen::MatrixXd { return field(y, s).reshaped(1, n); },
                field, spec.profile, spec.d - 2 + spec.alpha);
        };
        const auto ratios = forcing_decay_ratios(build(1.0), spec);
        const double peak = *std::max_element(ratios.begin(), ratios.end());
        out.calibrated_amplitude = spec.gamma / peak;
        out.measured_constant = spec.gamma;
        out.forcing = std::make_shared<const Forcing>(build(out.calibrated_amplitude));
        return out;
    }

    Eigen::MatrixXd M;
    if (spec.profile == "isotropic")
        M = Eigen::MatrixXd::Identity(n, n);
    else if (spec.profile == "antisymmetric") {
        if (spec.matrix.size()) {
            M = 0.5 * (spec.matrix - spec.matrix.transpose());
        } else {
            M = Eigen::MatrixXd::Zero(2, 2);
            M(0, 1) = 1.0;
            M(1, 0) = -1.0;
        }
    } else
        M = spec.matrix;
    const double mmax = M.cwiseAbs().maxCoeff();
    if (mmax == 0.0) throw DomainError("forcing.matrix: must be nonzero");
    const double amp = spec.gamma / mmax;
    const RadialProfile prof{spec.d - 1 + spec.alpha, false};
    std::vector<MultiIndex> betas;
    for (int i = 0; i < n; ++i) betas.push_back(MultiIndex::unit(n, i));
    auto density = [prof, M, amp](const Eigen::VectorXd& y, double s) -> Eigen::MatrixXd {
        return amp * prof(parabolic_norm(y, s)).first * M;
    };
    // f_k = sum_j d_j psi M_jk, d_j psi = psi'(rho) y_j / rho
    auto effective = [prof, M, amp](const Eigen::VectorXd& y, double s) -> Eigen::VectorXd {
        const double rho = parabolic_norm(y, s);
        if (rho == 0.0) return Eigen::VectorXd::Zero(y.size());
        const Eigen::VectorXd grad = prof(rho).second * y / rho;
        return amp * (M.transpose() * grad);
    };
    out.calibrated_amplitude = amp;
    out.measured_constant = spec.gamma;
    out.forcing = std::make_shared<const Forcing>(n, betas, density, effective, spec.profile, spec.d - 1 + spec.alpha);
    return out;
}

Forcing divergence_form_forcing_to_standard(const Forcing& g) {
    for (const auto& b : g.betas())
        if (b.order() != 1) throw DomainError("divergence_form_forcing_to_standard: expected first-order kernel terms");
    return g.as_standard();
}

std::vector<Eigen::VectorXd> divergence_of_gridded_tensor(const GriddedTensor& g) {
    const int n = g.n;
    if (static_cast<int>(g.components.size()) != n * n) throw DomainError("gridded tensor: expected n*n components");
    const double h = 2.0 * g.extent / g.points;
    if (2.0 / h < 16.0)
        throw DomainError("gridded tensor: fewer than 16 points per support diameter; refine the grid");
    std::vector<Eigen::VectorXd> f(n, Eigen::VectorXd::Zero(g.components[0].size()));
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            SpectralGrid comp(n, g.extent, g.points, 1);
            comp.components[0] = g.components[j * n + k];
            f[k] += spectral_derivative(comp, j).components[0];
        }
    return f;
}

ManufacturedField::ManufacturedField(int n, int order, std::uint64_t seed, double amplitude)
    : n_(n), order_(order), amplitude_(amplitude) {
    if (n != 2 && n != 3) throw DomainError("ManufacturedField: dimension must be 2 or 3");
    if (order < 0) throw DomainError("ManufacturedField: order must be non-negative");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (const auto& a : multi_indices_of_order(n, order + 1)) terms_.emplace_back(a, u(rng));
}

ManufacturedField::Derivs ManufacturedField::stream(const Eigen::VectorXd& y, double s) const {
    const int n = n_;
    // h and its derivatives
    double h = 0.0;
    Eigen::VectorXd hg = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd hh = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [a, c] : terms_) {
        h += c * a.monomial(y);
        for (int i = 0; i < n; ++i) {
            if (a[i] == 0) continue;
            MultiIndex ai = a;
            ai[i] -= 1;
            hg[i] += c * a[i] * ai.monomial(y);
            for (int j = 0; j < n; ++j) {
                if (ai[j] == 0) continue;
                MultiIndex aij = ai;
                aij[j] -= 1;
                hh(i, j) += c * a[i] * ai[j] * aij.monomial(y);
            }
        }
    }
    const double rho = parabolic_norm(y, s);
    const auto chi = cutoff(rho);
    Eigen::VectorXd cg = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd ch = Eigen::MatrixXd::Zero(n, n);
    if (chi.d1 != 0.0 || chi.d2 != 0.0) {
        cg = chi.d1 * y / rho;
        ch = chi.d2 * y * y.transpose() / (rho * rho) +
             chi.d1 * (Eigen::MatrixXd::Identity(n, n) / rho - y * y.transpose() / (rho * rho * rho));
    }
    Derivs d;
    d.v = amplitude_ * h * chi.value;
    d.g = amplitude_ * (hg * chi.value + h * cg);
    d.h = amplitude_ * (hh * chi.value + hg * cg.transpose() + cg * hg.transpose() + h * ch);
    return d;
}

Eigen::VectorXd ManufacturedField::value(const Eigen::VectorXd& y, double s) const {
    const auto d = stream(y, s);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n_);
    u[0] = d.g[1];
    u[1] = -d.g[0];
    return u;
}

Eigen::MatrixXd ManufacturedField::jacobian(const Eigen::VectorXd& y, double s) const {
    const auto d = stream(y, s);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n_, n_);
    J.row(0) = d.h.row(1);
    J.row(1) = -d.h.row(0);
    return J;
}

Forcing navier_stokes_forcing(std::shared_ptr<const ManufacturedField> u, double decay_exponent) {
    const int n = u->dim();
    std::vector<MultiIndex> betas;
    for (int i = 0; i < n; ++i) betas.push_back(MultiIndex::unit(n, i));
    auto density = [u](const Eigen::VectorXd& y, double s) -> Eigen::MatrixXd {
        const Eigen::VectorXd v = u->value(y, s);
        return -(v * v.transpose());
    };
    // f_k = -d_j (u_j u_k) = -(u . grad) u_k for divergence-free u
    auto effective = [u](const Eigen::VectorXd& y, double s) -> Eigen::VectorXd {
        return -(u->jacobian(y, s) * u->value(y, s));
    };
    return Forcing(n, betas, density, effective, "navier_stokes", decay_exponent);
}

Forcing oseen_forcing(std::shared_ptr<const ManufacturedField> u, Eigen::VectorXd a, double decay_exponent) {
    const int n = u->dim();
    if (a.size() != n) throw DomainError("oseen: advection vector must have length n");
    auto field = [u, a](const Eigen::VectorXd& y, double s) -> Eigen::VectorXd { return -(u->jacobian(y, s) * a); };
    return Forcing(
        n, {MultiIndex(n)},
        [field, n](const Eigen::VectorXd& y, double s) -> Eigen::MatrixXd { return field(y, s).reshaped(1, n); }, field,
        "oseen", decay_exponent);
}

}  // namespace stx

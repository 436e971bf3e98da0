#include "stx/kernels.hpp"

#include "stx/quadrature_rules.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace stx {

namespace {

constexpr int kTableOrder = 12;

// Physicists' Hermite coefficients: H_m(z) = sum_k hermite_coeffs[m][k] z^k.
std::array<std::array<double, kTableOrder + 1>, kTableOrder + 1> make_hermite_coeffs() {
    std::array<std::array<double, kTableOrder + 1>, kTableOrder + 1> h{};
    h[0][0] = 1.0;
    if (kTableOrder >= 1) h[1][1] = 2.0;
    for (int m = 1; m < kTableOrder; ++m)
        for (int k = 0; k <= kTableOrder; ++k) {
            double v = -2.0 * m * h[m - 1][k];
            if (k > 0) v += 2.0 * h[m][k - 1];
            h[m + 1][k] = v;
        }
    return h;
}

const auto& hermite_coeffs() {
    static const auto table = make_hermite_coeffs();
    return table;
}

struct NonlocalTerm {
    MultiIndex a;
    double coef;
    int ladder;  // index into the incomplete-gamma ladder, a_k = n/2 + ladder
};

// d^nu Phi = (pi^{-n/2}/4) sum_a C_a x^a (4t)^{-a_k} E(a_k, |x|^2/4t)
class NonlocalTable {
public:
    explicit NonlocalTable(int n) : n_(n), terms_(encode_size()) {
        const auto& h = hermite_coeffs();
        for (int order = 2; order <= kTableOrder; ++order) {
            for (const auto& nu : multi_indices_of_order(n, order)) {
                auto& list = terms_[encode(nu)];
                // Product over axes of Hermite coefficient lists.
                std::vector<std::pair<MultiIndex, double>> partial{{MultiIndex(n), 1.0}};
                for (int i = 0; i < n; ++i) {
                    std::vector<std::pair<MultiIndex, double>> next;
                    for (const auto& [a, c] : partial)
                        for (int k = 0; k <= nu[i]; ++k) {
                            if (h[nu[i]][k] == 0.0) continue;
                            MultiIndex b = a;
                            b[i] = k;
                            next.emplace_back(b, c * h[nu[i]][k]);
                        }
                    partial = std::move(next);
                }
                const double sign = (order % 2 == 0) ? 1.0 : -1.0;
                for (const auto& [a, c] : partial)
                    list.push_back({a, sign * c, (order + a.order()) / 2 - 1});
            }
        }
    }

    const std::vector<NonlocalTerm>& terms(const MultiIndex& nu) const {
        if (nu.order() < 2 || nu.order() > kTableOrder)
            throw DomainError("nonlocal kernel part needs 2 <= |nu| <= " + std::to_string(kTableOrder));
        return terms_[encode(nu)];
    }

private:
    int encode(const MultiIndex& nu) const {
        int code = 0;
        for (int i = n_ - 1; i >= 0; --i) code = code * (kTableOrder + 1) + nu[i];
        return code;
    }
    std::size_t encode_size() const {
        std::size_t s = 1;
        for (int i = 0; i < n_; ++i) s *= kTableOrder + 1;
        return s;
    }

    int n_;
    std::vector<std::vector<NonlocalTerm>> terms_;
};

const NonlocalTable& nonlocal_table(int n) {
    static const NonlocalTable t2(2);
    static const NonlocalTable t3(3);
    if (n == 2) return t2;
    if (n == 3) return t3;
    throw DomainError("Stokes tensor supports n = 2 or 3, got n = " + std::to_string(n));
}

void require_stokes_dim(int n) {
    if (n != 2 && n != 3)
        throw DomainError("Stokes tensor supports n = 2 or 3, got n = " + std::to_string(n));
}

}  // namespace

double scaled_lower_gamma(double a, double z) {
    if (a <= 0.0) throw DomainError("scaled_lower_gamma: a must be positive");
    if (z < 0.0) throw DomainError("scaled_lower_gamma: z must be non-negative");
    if (z == 0.0) return 1.0 / a;
    if (z < a + 1.0) {
        double term = 1.0 / a;
        double sum = term;
        for (int k = 1; k < 1000; ++k) {
            term *= z / (a + k);
            sum += term;
            if (term < sum * 1e-17) break;
        }
        return sum * std::exp(-z);
    }
    // Lentz continued fraction for Gamma(a,z) = e^{-z} z^a h
    constexpr double tiny = 1e-300;
    double b = z + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return std::exp(std::lgamma(a) - a * std::log(z)) - std::exp(-z) * h;
}

double heat_kernel(const Eigen::VectorXd& x, double t) {
    if (t <= 0.0) return 0.0;
    const double n = static_cast<double>(x.size());
    return std::pow(4.0 * std::numbers::pi * t, -0.5 * n) * std::exp(-x.squaredNorm() / (4.0 * t));
}

KernelJet::KernelJet(const Point& p, int max_order)
    : n_(p.dim()), max_order_(max_order), causal_(p.t > 0.0), x_(p.x), t_(p.t) {
    if (n_ < 1 || n_ > kMaxDim) throw DomainError("KernelJet: dimension must be 1..3");
    if (max_order < 0 || max_order > kTableOrder)
        throw DomainError("KernelJet: max_order must be in 0.." + std::to_string(kTableOrder));
    if (p.t == 0.0 && p.x.squaredNorm() == 0.0)
        throw DomainError("kernel singularity at (x,t) = (0,0)");

    hermite_.setZero(n_, max_order_ + 1);
    powers_.setOnes(n_, max_order_ + 1);
    for (int i = 0; i < n_; ++i)
        for (int k = 1; k <= max_order_; ++k) powers_(i, k) = powers_(i, k - 1) * x_[i];
    if (!causal_) return;

    const double sqrt4t = std::sqrt(4.0 * t_);
    for (int i = 0; i < n_; ++i) {
        const double z = x_[i] / sqrt4t;
        const double g = std::exp(-z * z) / std::sqrt(std::numbers::pi * 4.0 * t_);
        double h_prev = 1.0, h_cur = 2.0 * z;
        double scale = 1.0;
        hermite_(i, 0) = g;
        for (int m = 1; m <= max_order_; ++m) {
            scale *= -1.0 / sqrt4t;
            hermite_(i, m) = scale * h_cur * g;
            const double h_next = 2.0 * z * h_cur - 2.0 * m * h_prev;
            h_prev = h_cur;
            h_cur = h_next;
        }
    }

    if (n_ >= 2 && max_order_ >= 2) {
        // ladder_[k] = (4t)^{-a_k} E(a_k, Z); downward recurrence
        //   E(a) = (Z E(a+1) + e^{-Z}) / a  =>  L_k = (|x|^2 L_{k+1} + (4t)^{-a_k} e^{-Z}) / a_k
        const int top = max_order_ - 1;
        ladder_.assign(top + 1, 0.0);
        const double r2 = x_.squaredNorm();
        const double z = r2 / (4.0 * t_);
        const double log4t = std::log(4.0 * t_);
        const double a_top = 0.5 * n_ + top;
        ladder_[top] = std::exp(-a_top * log4t) * scaled_lower_gamma(a_top, z);
        for (int k = top - 1; k >= 0; --k) {
            const double a = 0.5 * n_ + k;
            ladder_[k] = (r2 * ladder_[k + 1] + std::exp(-a * log4t - z)) / a;
        }
    }
}

double KernelJet::heat(const MultiIndex& nu) const {
    if (nu.order() > max_order_) throw DomainError("KernelJet::heat: order exceeds jet order");
    double v = 1.0;
    for (int i = 0; i < n_; ++i) v *= hermite_(i, nu[i]);
    return v;
}

double KernelJet::heat(const MultiIndex& mu, int l) const {
    if (l == 0) return heat(mu);
    // Delta^l = sum_{|beta| = l} l!/beta! d^{2 beta}
    double sum = 0.0;
    const double lf = factorial(l);
    for (const auto& beta : multi_indices_of_order(n_, l)) sum += lf / beta.factorial() * heat(mu + beta + beta);
    return sum;
}

double KernelJet::nonlocal(const MultiIndex& nu) const {
    if (nu.order() > max_order_) throw DomainError("KernelJet::nonlocal: order exceeds jet order");
    if (!causal_) return 0.0;
    const auto& terms = nonlocal_table(n_).terms(nu);
    double sum = 0.0;
    for (const auto& term : terms) {
        double xa = 1.0;
        for (int i = 0; i < n_; ++i) xa *= powers_(i, term.a[i]);
        sum += term.coef * xa * ladder_[term.ladder];
    }
    return 0.25 * std::pow(std::numbers::pi, -0.5 * n_) * sum;
}

double KernelJet::stokes(const MultiIndex& mu, int l, int j, int k) const {
    if (mu.order() + 2 * l + 2 > max_order_) throw DomainError("KernelJet::stokes: order exceeds jet order");
    if (!causal_) return 0.0;
    const MultiIndex nu = mu + MultiIndex::unit(n_, j) + MultiIndex::unit(n_, k);
    double v = (j == k) ? heat(mu, l) : 0.0;
    if (l == 0)
        v += nonlocal(nu);
    else
        v -= heat(nu, l - 1);
    return v;
}

double heat_kernel_deriv(const DerivativeSpec& spec, const Point& p) {
    if (spec.mu.dim != p.dim()) throw DomainError("heat_kernel_deriv: multi-index dimension mismatch");
    if (p.t <= 0.0) {
        if (p.t == 0.0 && p.x.squaredNorm() == 0.0) throw DomainError("kernel singularity at (x,t) = (0,0)");
        return 0.0;
    }
    KernelJet jet(p, spec.order());
    return jet.heat(spec.mu, spec.l);
}

double stokes_kernel_deriv(const DerivativeSpec& spec, int j, int k, const Point& p) {
    require_stokes_dim(p.dim());
    if (!(p.t > 0.0)) throw DomainError("Stokes tensor evaluation requires t > 0");
    if (j < 0 || k < 0 || j >= p.dim() || k >= p.dim()) throw DomainError("Stokes tensor index out of range");
    KernelJet jet(p, spec.order() + 2);
    return jet.stokes(spec.mu, spec.l, j, k);
}

double stokes_kernel(int j, int k, const Point& p) {
    return stokes_kernel_deriv({MultiIndex(p.dim()), 0}, j, k, p);
}

Eigen::MatrixXd stokes_tensor(const Point& p, const DerivativeSpec& spec) {
    require_stokes_dim(p.dim());
    if (!(p.t > 0.0)) throw DomainError("Stokes tensor evaluation requires t > 0");
    KernelJet jet(p, spec.order() + 2);
    const int n = p.dim();
    Eigen::MatrixXd K(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = j; k < n; ++k) K(j, k) = K(k, j) = jet.stokes(spec.mu, spec.l, j, k);
    return K;
}

Eigen::MatrixXd stokes_tensor(const Point& p) { return stokes_tensor(p, {MultiIndex(p.dim()), 0}); }

double stokes_kernel_deriv_quadrature(const DerivativeSpec& spec, int j, int k, const Point& p, double rel_tol) {
    require_stokes_dim(p.dim());
    if (!(p.t > 0.0)) throw DomainError("Stokes tensor evaluation requires t > 0");
    const int n = p.dim();
    const MultiIndex nu = spec.mu + MultiIndex::unit(n, j) + MultiIndex::unit(n, k);
    double v = (j == k) ? heat_kernel_deriv(spec, p) : 0.0;
    if (spec.l > 0) return v - heat_kernel_deriv({nu, spec.l - 1}, p);

    // int_t^inf d^nu Gamma(x,tau) dtau with tau = t/u^2, u in (0,1]
    const double t = p.t;
    auto integrand = [&](double u) {
        if (u <= 0.0) return 0.0;
        const double tau = t / (u * u);
        KernelJet jet(Point(p.x, tau), nu.order());
        return jet.heat(nu) * 2.0 * t / (u * u * u);
    };
    // absolute floor relative to the size of the local heat-kernel scale
    const double scale = std::pow(t, -0.5 * (n + nu.order()) + 1.0);
    try {
        auto r = integrate_adaptive(integrand, 0.0, 1.0, rel_tol * 1e-3 * scale, rel_tol, 4000);
        return v + r.value;
    } catch (const QuadratureError& e) {
        std::ostringstream msg;
        msg << "Stokes kernel quadrature at x = (" << p.x.transpose() << "), t = " << p.t << ": " << e.what();
        throw QuadratureError(msg.str());
    }
}

double nonlocal_limit(const MultiIndex& nu, const Eigen::VectorXd& x) {
    const int n = static_cast<int>(x.size());
    const double r2 = x.squaredNorm();
    if (r2 == 0.0) throw DomainError("nonlocal_limit: singular at x = 0");
    const auto& terms = nonlocal_table(n).terms(nu);
    double sum = 0.0;
    for (const auto& term : terms) {
        const double a = 0.5 * n + term.ladder;
        sum += term.coef * term.a.monomial(x) * std::tgamma(a) * std::pow(r2, -a);
    }
    return 0.25 * std::pow(std::numbers::pi, -0.5 * n) * sum;
}

Eigen::MatrixXd KernelTaylorTerm::evaluate(const Eigen::VectorXd& x, double t) const {
    const int n = static_cast<int>(x.size());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& s = specs[i];
        out += coefficients[i] * (s.mu.monomial(x) * std::pow(t, s.l) / s.factorial_weight());
    }
    return out;
}

double KernelTaylorTerm::heat_residual() const {
    // coefficient of x^mu t^l/(mu! l!) in d_t P - Delta P is c_{mu,l+1} - sum_i c_{mu+2e_i,l}
    if (m < 2) return 0.0;
    const int n = base_point.dim();
    auto find = [&](const MultiIndex& mu, int l) -> const Eigen::MatrixXd& {
        for (std::size_t i = 0; i < specs.size(); ++i)
            if (specs[i].mu == mu && specs[i].l == l) return coefficients[i];
        throw DomainError("KernelTaylorTerm: missing coefficient");
    };
    double worst = 0.0;
    for (const auto& s : parabolic_specs_of_order(n, m - 2)) {
        Eigen::MatrixXd r = find(s.mu, s.l + 1);
        for (int i = 0; i < n; ++i) {
            MultiIndex two = MultiIndex::unit(n, i);
            r -= find(s.mu + two + two, s.l);
        }
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
    }
    return worst;
}

std::vector<KernelTaylorTerm> kernel_taylor_truncation(int d, const Point& source) {
    const int n = source.dim();
    require_stokes_dim(n);
    if (d < 0) throw DomainError("kernel_taylor_truncation: degree must be non-negative");
    if (source.t == 0.0) throw DomainError("kernel_taylor_truncation requires s != 0");
    const Point base(-source.x, -source.t);
    KernelJet jet(base, d + 2);
    std::vector<KernelTaylorTerm> terms;
    for (int m = 0; m <= d; ++m) {
        KernelTaylorTerm term;
        term.m = m;
        term.base_point = base;
        for (const auto& s : parabolic_specs_of_order(n, m)) {
            Eigen::MatrixXd c(n, n);
            for (int j = 0; j < n; ++j)
                for (int k = j; k < n; ++k) c(j, k) = c(k, j) = jet.stokes(s, j, k);
            term.specs.push_back(s);
            term.coefficients.push_back(std::move(c));
        }
        terms.push_back(std::move(term));
    }
    return terms;
}

Eigen::MatrixXd evaluate_taylor_sum(const std::vector<KernelTaylorTerm>& terms, const Eigen::VectorXd& x,
                                    double t) {
    const int n = static_cast<int>(x.size());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    for (const auto& term : terms) out += term.evaluate(x, t);
    return out;
}

}  // namespace stx

#include "stx/polynomial.hpp"

#include <cmath>

namespace stx {

MonomialBasis::MonomialBasis(int n, int degree) : n_(n), degree_(degree) {
    if (degree >= 0) indices_ = multi_indices_up_to(n, degree);
    for (int i = 0; i < size(); ++i) lookup_[indices_[i]] = i;
}

int MonomialBasis::find(const MultiIndex& alpha) const {
    auto it = lookup_.find(alpha);
    return it == lookup_.end() ? -1 : it->second;
}

Eigen::VectorXd MonomialBasis::taylor_row(const Eigen::VectorXd& x) const {
    Eigen::VectorXd row(size());
    for (int i = 0; i < size(); ++i) row[i] = indices_[i].monomial(x) / indices_[i].factorial();
    return row;
}

VectorPolynomial::VectorPolynomial(int n_, int degree_)
    : n(n_), degree(degree_), basis(n_, degree_), pressure_basis(n_, degree_ - 1) {
    if (degree_ < 0) throw DomainError("VectorPolynomial: negative degree");
}

void VectorPolynomial::add_slice(double t, Eigen::MatrixXd coeffs) {
    if (coeffs.rows() != basis.size() || coeffs.cols() != n)
        throw DomainError("VectorPolynomial: coefficient table has the wrong shape");
    times.push_back(t);
    coefficients.push_back(std::move(coeffs));
}

Eigen::VectorXd VectorPolynomial::evaluate(int slice, const Eigen::VectorXd& x) const {
    return coefficients.at(slice).transpose() * basis.taylor_row(x);
}

Eigen::VectorXd VectorPolynomial::evaluate(const Eigen::VectorXd& x, double t) const {
    if (times.empty()) throw DomainError("VectorPolynomial: no slices");
    const Eigen::VectorXd row = basis.taylor_row(x);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (int a = 0; a < slice_count(); ++a) {
        double w = 1.0;
        for (int b = 0; b < slice_count(); ++b)
            if (b != a) w *= (t - times[b]) / (times[a] - times[b]);
        out += w * (coefficients[a].transpose() * row);
    }
    return out;
}

Eigen::VectorXd VectorPolynomial::divergence(int slice) const {
    MonomialBasis lower(n, degree - 1);
    Eigen::VectorXd div = Eigen::VectorXd::Zero(lower.size());
    const auto& c = coefficients.at(slice);
    for (int i = 0; i < lower.size(); ++i)
        for (int k = 0; k < n; ++k) div[i] += c(basis.find(lower[i] + MultiIndex::unit(n, k)), k);
    return div;
}

double VectorPolynomial::max_divergence() const {
    double m = 0.0;
    for (int s = 0; s < slice_count(); ++s) {
        const auto d = divergence(s);
        if (d.size()) m = std::max(m, d.cwiseAbs().maxCoeff());
    }
    return m;
}

double VectorPolynomial::max_abs() const {
    double m = 0.0;
    for (const auto& c : coefficients) m = std::max(m, c.cwiseAbs().maxCoeff());
    return m;
}

SpaceTimePolynomial::SpaceTimePolynomial(int n_, int degree_, int components_)
    : n(n_), degree(degree_), components(components_), specs(parabolic_specs_up_to(n_, degree_)),
      coefficients(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(specs.size()), components_)) {}

int SpaceTimePolynomial::find(const MultiIndex& mu, int l) const {
    for (std::size_t i = 0; i < specs.size(); ++i)
        if (specs[i].mu == mu && specs[i].l == l) return static_cast<int>(i);
    return -1;
}

Eigen::VectorXd SpaceTimePolynomial::evaluate(const Eigen::VectorXd& x, double t) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(components);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& s = specs[i];
        out += coefficients.row(i).transpose() * (s.mu.monomial(x) * std::pow(t, s.l) / s.factorial_weight());
    }
    return out;
}

double SpaceTimePolynomial::divergence_residual() const {
    if (components != n) throw DomainError("divergence needs an n-component polynomial");
    double worst = 0.0;
    for (const auto& s : parabolic_specs_up_to(n, degree - 1)) {
        double d = 0.0;
        for (int k = 0; k < n; ++k) {
            const int idx = find(s.mu + MultiIndex::unit(n, k), s.l);
            if (idx >= 0) d += coefficients(idx, k);
        }
        worst = std::max(worst, std::abs(d));
    }
    return worst;
}

double SpaceTimePolynomial::heat_residual() const {
    double worst = 0.0;
    for (const auto& s : parabolic_specs_up_to(n, degree - 2)) {
        Eigen::VectorXd r = coefficients.row(find(s.mu, s.l + 1)).transpose();
        for (int i = 0; i < n; ++i) {
            const MultiIndex two = MultiIndex::unit(n, i) + MultiIndex::unit(n, i);
            r -= coefficients.row(find(s.mu + two, s.l)).transpose();
        }
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
    }
    return worst;
}

Eigen::MatrixXd SpaceTimePolynomial::spatial_coefficients(double t, const MonomialBasis& basis) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(basis.size(), components);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const int row = basis.find(specs[i].mu);
        if (row < 0) continue;
        out.row(row) += coefficients.row(i) * (std::pow(t, specs[i].l) / factorial(specs[i].l));
    }
    return out;
}

SpaceTimePolynomial& SpaceTimePolynomial::operator+=(const SpaceTimePolynomial& o) {
    if (o.n != n || o.degree != degree || o.components != components)
        throw DomainError("SpaceTimePolynomial: shape mismatch in +=");
    coefficients += o.coefficients;
    return *this;
}

}  // namespace stx

#include "stx/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stx {

namespace {

// Coefficients of the scaled fit on the ball |x| <= r, in Taylor form (basis x n).
Eigen::MatrixXd fit_on_ball(const GridField& U, const MonomialBasis& basis, int slice, double r,
                            const FitOptions& options) {
    const int n = U.n, N = basis.size(), unknowns = N * n;
    std::vector<Eigen::Index> nodes;
    for (Eigen::Index i = 0; i < U.spatial_size(); ++i)
        if (U.node(i).norm() <= r * (1.0 + 1e-12)) nodes.push_back(i);
    const Eigen::Index rows = static_cast<Eigen::Index>(nodes.size()) * n;
    if (rows < unknowns) {
        std::ostringstream msg;
        msg << "extract_polynomial: radius " << r << " holds " << nodes.size() << " nodes, too few for degree "
            << basis.degree();
        throw FitError(msg.str());
    }

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, unknowns);
    Eigen::VectorXd y(rows);
    for (std::size_t p = 0; p < nodes.size(); ++p) {
        const Eigen::VectorXd row = basis.taylor_row(U.node(nodes[p]) / r);
        for (int k = 0; k < n; ++k) {
            const Eigen::Index at = static_cast<Eigen::Index>(p) * n + k;
            A.block(at, k * N, 1, N) = row.transpose();
            y[at] = U(k, slice, nodes[p]);
        }
    }

    // div P = 0: sum_k b_{alpha + e_k, k} = 0 for |alpha| <= d - 1 (the scaling cancels)
    Eigen::MatrixXd Z = Eigen::MatrixXd::Identity(unknowns, unknowns);
    if (options.constrained && basis.degree() >= 1) {
        const MonomialBasis lower(n, basis.degree() - 1);
        Eigen::MatrixXd C = Eigen::MatrixXd::Zero(lower.size(), unknowns);
        for (int a = 0; a < lower.size(); ++a)
            for (int k = 0; k < n; ++k) C(a, k * N + basis.find(lower[a] + MultiIndex::unit(n, k))) = 1.0;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullV);
        svd.setThreshold(1e-12);
        Z = svd.matrixV().rightCols(unknowns - svd.rank());
    }

    const Eigen::MatrixXd M = A * Z;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cond = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : INFINITY;
    if (!(cond <= options.condition_limit)) {
        std::ostringstream msg;
        msg << "extract_polynomial: ill-conditioned fit at radius " << r << " (condition " << cond << ", "
            << nodes.size() << " nodes)";
        throw FitError(msg.str());
    }
    const Eigen::VectorXd b = Z * svd.solve(y);

    Eigen::MatrixXd c(N, n);
    for (int k = 0; k < n; ++k)
        for (int a = 0; a < N; ++a) c(a, k) = b[k * N + a] / std::pow(r, basis[a].order());
    return c;
}

// Lagrange differentiation weights at times[s] through all nodes.
Eigen::VectorXd derivative_weights(const std::vector<double>& times, int s) {
    const int m = static_cast<int>(times.size());
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
    for (int a = 0; a < m; ++a) {
        if (a == s) {
            for (int b = 0; b < m; ++b)
                if (b != s) w[a] += 1.0 / (times[s] - times[b]);
            continue;
        }
        double num = 1.0, den = 1.0;
        for (int b = 0; b < m; ++b) {
            if (b == a) continue;
            den *= times[a] - times[b];
            if (b != s) num *= times[s] - times[b];
        }
        w[a] = num / den;
    }
    return w;
}

}  // namespace

Eigen::MatrixXd fit_slice(const GridField& U, int d, int slice, const std::vector<double>& fit_radii,
                          const FitOptions& options) {
    if (U.components != U.n) throw DomainError("extract_polynomial: U must have n components");
    if (d < 0) throw DomainError("extract_polynomial: negative degree");
    if (slice < 0 || slice >= U.slices) throw DomainError("extract_polynomial: slice out of range");
    if (fit_radii.empty()) throw DomainError("extract_polynomial: no fit radii");
    std::vector<double> radii = fit_radii;
    std::sort(radii.begin(), radii.end(), std::greater<>());
    for (double r : radii)
        if (!(r > 0.0) || r > U.extent) throw DomainError("extract_polynomial: fit radius outside the grid");
    if (std::adjacent_find(radii.begin(), radii.end()) != radii.end())
        throw DomainError("extract_polynomial: repeated fit radius");

    const MonomialBasis basis(U.n, d);
    std::vector<Eigen::MatrixXd> per_radius;
    for (double r : radii) per_radius.push_back(fit_on_ball(U, basis, slice, r, options));
    const int m = static_cast<int>(radii.size());
    if (m == 1) return per_radius[0];

    Eigen::MatrixXd out(basis.size(), U.n);
    for (int a = 0; a < basis.size(); ++a) {
        const double p = d + 1 - basis[a].order();
        Eigen::MatrixXd V(m, m);
        for (int i = 0; i < m; ++i) {
            V(i, 0) = 1.0;
            for (int j = 1; j < m; ++j) V(i, j) = std::pow(radii[i], p + j - 1);
        }
        const auto lu = V.fullPivLu();
        for (int k = 0; k < U.n; ++k) {
            Eigen::VectorXd rhs(m);
            for (int i = 0; i < m; ++i) rhs[i] = per_radius[i](a, k);
            out(a, k) = lu.solve(rhs)[0];
        }
    }
    return out;
}

VectorPolynomial extract_polynomial(const GridField& U, int d, const std::vector<double>& fit_radii,
                                    const FitOptions& options) {
    VectorPolynomial P(U.n, d);
    for (int s = 0; s < U.slices; ++s) P.add_slice(U.time(s), fit_slice(U, d, s, fit_radii, options));
    return P;
}

GridField remainder_field(const GridField& U, const VectorPolynomial& P) {
    if (U.components != P.n || U.n != P.n || P.slice_count() != U.slices)
        throw DomainError("remainder_field: polynomial and grid are incompatible");
    GridField R = U;
    R.divergence_free = false;
    for (int s = 0; s < U.slices; ++s)
        for (Eigen::Index i = 0; i < U.spatial_size(); ++i) {
            const Eigen::VectorXd p = P.evaluate(s, U.node(i));
            for (int k = 0; k < U.n; ++k) R(k, s, i) -= p[k];
        }
    return R;
}

Eigen::MatrixXd ResidualStructure::leading(int slice) const {
    Eigen::MatrixXd c = q.at(slice);
    const MonomialBasis basis(c.cols(), degree);
    for (int a = 0; a < basis.size(); ++a)
        if (basis[a].order() < degree - 1) c.row(a).setZero();
    return c;
}

ResidualStructure residual_structure(VectorPolynomial& P) {
    if (P.slice_count() < 3) throw DomainError("residual_structure: need at least 3 time slices");
    const int n = P.n, d = P.degree;
    const MonomialBasis& basis = P.basis;
    const MonomialBasis rbasis(n, d - 1);

    // gradient map R -> (d_k R)_alpha = R_{alpha + e_k}, restricted to |alpha| <= d - 2
    const MonomialBasis low(n, d - 2);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(low.size() * n, rbasis.size());
    for (int a = 0; a < low.size(); ++a)
        for (int k = 0; k < n; ++k) G(a * n + k, rbasis.find(low[a] + MultiIndex::unit(n, k))) = 1.0;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    if (low.size() > 0) cod.compute(G);

    ResidualStructure out;
    out.degree = d;
    out.times = P.times;
    P.pressure.clear();
    for (int s = 0; s < P.slice_count(); ++s) {
        const Eigen::VectorXd w = derivative_weights(P.times, s);
        Eigen::MatrixXd dt = Eigen::MatrixXd::Zero(basis.size(), n);
        for (int b = 0; b < P.slice_count(); ++b) dt += w[b] * P.coefficients[b];
        Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(basis.size(), n);
        for (int a = 0; a < basis.size(); ++a)
            for (int i = 0; i < n; ++i) {
                const int src = basis.find(basis[a] + MultiIndex::unit(n, i) + MultiIndex::unit(n, i));
                if (src >= 0) lap.row(a) += P.coefficients[s].row(src);
            }
        Eigen::MatrixXd q = dt - lap;

        Eigen::VectorXd R = Eigen::VectorXd::Zero(rbasis.size());
        if (low.size() > 0) {
            Eigen::VectorXd rhs(low.size() * n);
            for (int a = 0; a < low.size(); ++a)
                for (int k = 0; k < n; ++k) rhs[a * n + k] = -q(basis.find(low[a]), k);
            R = cod.solve(rhs);
            for (int b = 0; b < rbasis.size(); ++b)
                for (int k = 0; k < n; ++k) {
                    if (rbasis[b][k] == 0) continue;
                    MultiIndex alpha = rbasis[b];
                    alpha[k] -= 1;
                    q(basis.find(alpha), k) += R[b];
                }
        }

        double low_mass = 0.0;
        for (int a = 0; a < basis.size(); ++a)
            if (basis[a].order() < d - 1) low_mass += q.row(a).squaredNorm();
        out.low_degree_mass.push_back(std::sqrt(low_mass));
        out.total_mass.push_back(dt.norm() + lap.norm());
        out.q.push_back(std::move(q));
        out.pressure.push_back(R);
        P.pressure.push_back(R);
    }
    for (std::size_t s = 0; s < out.q.size(); ++s)
        if (out.total_mass[s] > 0.0)
            out.mass_ratio = std::max(out.mass_ratio, out.low_degree_mass[s] / out.total_mass[s]);
    return out;
}

GridField curl(const GridField& U) {
    if (U.components != U.n || U.n < 2) throw DomainError("curl: U must have n >= 2 components");
    const int n = U.n;
    GridField W(n, n * n, U.extent, U.points, U.duration, U.slices);
    W.provenance = U.provenance;
    for (int s = 0; s < U.slices; ++s) {
        // D[i * n + j] = d_i U_j
        std::vector<Eigen::VectorXd> D(n * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) D[i * n + j] = grid_derivative(U, j, s, i);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const Eigen::VectorXd w = D[i * n + j] - D[j * n + i];
                W.values[i * n + j].segment(s * U.spatial_size(), U.spatial_size()) = w;
                W.values[j * n + i].segment(s * U.spatial_size(), U.spatial_size()) = -w;
            }
    }
    return W;
}

nlohmann::json polynomial_to_json(const VectorPolynomial& P) {
    nlohmann::json slices = nlohmann::json::array();
    for (int s = 0; s < P.slice_count(); ++s) {
        nlohmann::json coeffs = nlohmann::json::array();
        for (int k = 0; k < P.n; ++k)
            for (int a = 0; a < P.basis.size(); ++a) {
                std::vector<int> mi(P.basis[a].idx.begin(), P.basis[a].idx.begin() + P.n);
                coeffs.push_back({{"component", k}, {"multi_index", mi}, {"value", P.coefficients[s](a, k)}});
            }
        slices.push_back({{"t", P.times[s]}, {"coefficients", coeffs}});
    }
    nlohmann::json pressure = nlohmann::json::array();
    for (std::size_t s = 0; s < P.pressure.size(); ++s) {
        nlohmann::json coeffs = nlohmann::json::array();
        for (int a = 0; a < P.pressure_basis.size(); ++a) {
            std::vector<int> mi(P.pressure_basis[a].idx.begin(), P.pressure_basis[a].idx.begin() + P.n);
            coeffs.push_back({{"multi_index", mi}, {"value", P.pressure[s][a]}});
        }
        pressure.push_back({{"t", P.times[s]}, {"coefficients", coeffs}});
    }
    return {{"degree", P.degree},
            {"dimension", P.n},
            {"form", "taylor: P = sum c_alpha x^alpha / alpha!"},
            {"slices", slices},
            {"pressure", pressure}};
}

VectorPolynomial polynomial_from_json(const nlohmann::json& j) {
    VectorPolynomial P(j.at("dimension").get<int>(), j.at("degree").get<int>());
    auto index_of = [&](const MonomialBasis& basis, const nlohmann::json& mi) {
        MultiIndex alpha(P.n);
        for (int i = 0; i < P.n; ++i) alpha[i] = mi.at(i).get<int>();
        const int at = basis.find(alpha);
        if (at < 0) throw DomainError("polynomial_from_json: multi-index outside the basis");
        return at;
    };
    for (const auto& slice : j.at("slices")) {
        Eigen::MatrixXd c = Eigen::MatrixXd::Zero(P.basis.size(), P.n);
        for (const auto& e : slice.at("coefficients"))
            c(index_of(P.basis, e.at("multi_index")), e.at("component").get<int>()) = e.at("value").get<double>();
        P.add_slice(slice.at("t").get<double>(), c);
    }
    if (j.contains("pressure"))
        for (const auto& slice : j.at("pressure")) {
            Eigen::VectorXd r = Eigen::VectorXd::Zero(P.pressure_basis.size());
            for (const auto& e : slice.at("coefficients"))
                r[index_of(P.pressure_basis, e.at("multi_index"))] = e.at("value").get<double>();
            P.pressure.push_back(r);
        }
    return P;
}

}  // namespace stx

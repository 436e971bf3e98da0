#include "doctest.h"

#include "stx/expansion.hpp"
#include "stx/verify.hpp"

#include <cmath>

using namespace stx;

namespace {

GridField sample_polynomial(const SpaceTimePolynomial& p, int points = 9) {
    return GridField::sample(p.n, p.n, 0.25, points, 0.25, 3,
                             [&](const Eigen::VectorXd& x, double t) { return p.evaluate(x, t); });
}

// (e^{x2 + t}, e^{x1 + t}): caloric and divergence-free
Eigen::VectorXd exponential(const Eigen::VectorXd& x, double t) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(x.size());
    v[0] = std::exp(x[1] + t);
    v[1] = std::exp(x[0] + t);
    return v;
}

}  // namespace

TEST_CASE("extraction is exact on divergence-free polynomials") {
    for (int n : {2, 3})
        for (int d : {1, 2, 3}) {
            const auto bg = caloric_background(n, d, 1.0, 7);
            const auto P = extract_polynomial(sample_polynomial(bg), d, {0.25, 0.125});
            REQUIRE(P.slice_count() == 3);
            for (int s = 0; s < 3; ++s) {
                const Eigen::MatrixXd expected = bg.spatial_coefficients(P.times[s], P.basis);
                CHECK((P.coefficients[s] - expected).cwiseAbs().maxCoeff() <= 1e-8);
            }
            CHECK(P.max_divergence() <= 1e-10);
        }
}

TEST_CASE("extraction is a projection") {
    const auto bg = caloric_background(2, 2, 1.0, 3);
    const auto U = sample_polynomial(bg);
    const auto P = extract_polynomial(U, 2, {0.25, 0.125});
    const auto R = remainder_field(U, P);
    const auto Q = extract_polynomial(R, 2, {0.25, 0.125});
    CHECK(Q.max_abs() <= 1e-10);
    for (const auto& v : R.values) CHECK(v.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("degree-3 extraction of an exponential shrinks the remainder sixteenfold per halving") {
    const auto U = GridField::sample(2, 2, 0.25, 17, 0.25, 3, exponential);
    const auto P = extract_polynomial(U, 3, {0.25, 0.1875, 0.125});
    double previous = 0.0;
    for (double r : {0.2, 0.1, 0.05}) {
        double sup = 0.0;
        for (int k = 0; k < 32; ++k) {
            Eigen::VectorXd x(2);
            x << r * std::cos(0.2 * k), r * std::sin(0.2 * k);
            sup = std::max(sup, (exponential(x, 0.0) - P.evaluate(2, x)).norm());
        }
        if (previous > 0.0) CHECK(previous / sup >= 16.0);
        previous = sup;
    }
}

TEST_CASE("residual structure of a caloric polynomial") {
    const auto bg = caloric_background(2, 3, 1.0, 11);
    auto P = extract_polynomial(sample_polynomial(bg), 3, {0.25, 0.125});
    const auto r = residual_structure(P);
    CHECK(r.mass_ratio <= 1e-8);
    REQUIRE(P.pressure.size() == 3);
    for (const auto& q : r.q) CHECK(q.cwiseAbs().maxCoeff() <= 1e-8);

    VectorPolynomial zero(2, 2);
    for (double t : {-0.2, -0.1, 0.0}) zero.add_slice(t, Eigen::MatrixXd::Zero(zero.basis.size(), 2));
    CHECK(residual_structure(zero).mass_ratio == 0.0);
}

TEST_CASE("vorticity tensor") {
    auto grad = GridField::sample(2, 2, 0.5, 9, 0.1, 1, [](const Eigen::VectorXd& x, double) {
        Eigen::VectorXd v(2);
        v << 2 * x[0] * x[1], x[0] * x[0];  // gradient of x1^2 x2
        return v;
    });
    const auto W = curl(grad);
    REQUIRE(W.components == 4);
    for (int c = 0; c < 4; ++c) CHECK(W.values[c].cwiseAbs().maxCoeff() <= 1e-10);

    const auto E = GridField::sample(2, 2, 0.25, 9, 0.25, 3, exponential);
    const auto V = curl(E);
    CHECK((V.values[1] + V.values[2]).cwiseAbs().maxCoeff() == 0.0);
    CHECK(V.values[0].cwiseAbs().maxCoeff() == 0.0);
    // W_01 = d_1 u_2 - d_2 u_1 = e^{x1+t} - e^{x2+t} at interior nodes
    const Eigen::Index centre = V.index({4, 4});
    CHECK(V(1, 2, centre) == doctest::Approx(0.0).epsilon(1e-8));
    const Eigen::Index off = V.index({6, 4});
    const Eigen::VectorXd x = V.node(off);
    CHECK(V(1, 2, off) == doctest::Approx(std::exp(x[0]) - std::exp(x[1])).epsilon(1e-6));
}

TEST_CASE("polynomial JSON round trip") {
    const auto bg = caloric_background(3, 2, 1.0, 5);
    auto P = extract_polynomial(sample_polynomial(bg, 7), 2, {0.25, 0.125});
    residual_structure(P);
    const auto Q = polynomial_from_json(polynomial_to_json(P));
    CHECK(Q.n == 3);
    CHECK(Q.degree == 2);
    REQUIRE(Q.slice_count() == P.slice_count());
    for (int s = 0; s < P.slice_count(); ++s) {
        CHECK(Q.times[s] == P.times[s]);
        CHECK((Q.coefficients[s] - P.coefficients[s]).cwiseAbs().maxCoeff() == 0.0);
        CHECK((Q.pressure[s] - P.pressure[s]).cwiseAbs().maxCoeff() == 0.0);
    }
}

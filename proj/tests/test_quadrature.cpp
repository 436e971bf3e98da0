#include "doctest.h"

#include "stx/kernels.hpp"
#include "stx/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace stx;

namespace {

double fitted_slope(const std::vector<double>& r, const std::vector<double>& v) {
    const int m = static_cast<int>(r.size());
    Eigen::MatrixXd A(m, 2);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) {
        A(i, 0) = std::log(r[i]);
        A(i, 1) = 1.0;
        b[i] = std::log(v[i]);
    }
    return A.colPivHouseholderQr().solve(b)[0];
}

Point origin(int n) { return Point(Eigen::VectorXd::Zero(n), 0.0); }

}  // namespace

TEST_CASE("Gauss-Legendre rules") {
    for (int m : {1, 2, 5, 12, 20}) {
        const auto g = gauss_legendre(m);
        double s = 0.0;
        for (double w : g.weights) s += w;
        CHECK(s == doctest::Approx(2.0).epsilon(1e-14));
        // exact for x^{2m-2}
        double moment = 0.0;
        for (int i = 0; i < m; ++i) moment += g.weights[i] * std::pow(g.nodes[i], 2 * m - 2);
        CHECK(moment == doctest::Approx(2.0 / (2 * m - 1)).epsilon(1e-13));
    }
}

TEST_CASE("adaptive Gauss-Kronrod") {
    auto r = integrate_adaptive([](double x) { return std::sqrt(x); }, 0.0, 1.0, 1e-14, 1e-13);
    CHECK(r.value == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK_THROWS_AS(integrate_adaptive([](double x) { return 1.0 / x; }, 0.0, 1.0, 1e-14, 1e-14, 20), QuadratureError);
}

TEST_CASE("cylinder volume and odd symmetry") {
    for (double r : {1.0, 0.5, 0.3}) {
        ParabolicCylinder Q(origin(2), r);
        CHECK(integrate_cylinder([](const Eigen::VectorXd&, double) { return 1.0; }, Q) ==
              doctest::Approx(std::numbers::pi * r * r * r * r).epsilon(1e-8));
        CHECK(std::abs(integrate_cylinder([](const Eigen::VectorXd& y, double) { return y[0]; }, Q)) <= 1e-10);
    }
    ParabolicCylinder Q3(origin(3), 0.7);
    CHECK(integrate_cylinder([](const Eigen::VectorXd&, double) { return 1.0; }, Q3) ==
          doctest::Approx(Q3.volume()).epsilon(1e-12));
    CHECK(Q3.contains(Eigen::VectorXd::Zero(3), -0.1));
    CHECK(!Q3.contains(Eigen::VectorXd::Zero(3), 0.1));
}

TEST_CASE("cylinder integration is linear and additive over time slabs") {
    ParabolicCylinder Q(Point(Eigen::Vector2d(0.1, -0.2), 0.3), 0.8);
    auto f = [](const Eigen::VectorXd& y, double s) { return std::exp(y[0] - s) * std::cos(3 * y[1]); };
    auto g = [](const Eigen::VectorXd& y, double s) { return y.squaredNorm() * s; };
    const double If = integrate_cylinder(f, Q), Ig = integrate_cylinder(g, Q);
    const double Ifg = integrate_cylinder([&](const Eigen::VectorXd& y, double s) { return 2 * f(y, s) - 3 * g(y, s); }, Q);
    CHECK(std::abs(Ifg - (2 * If - 3 * Ig)) <= 1e-12 * (std::abs(If) + std::abs(Ig)));
    const double mid = 0.3 - 0.25;
    const double lower = integrate_slab(f, Q.center.x, 0.8, 0.3 - 0.64, mid);
    const double upper = integrate_slab(f, Q.center.x, 0.8, mid, 0.3);
    CHECK(std::abs(lower + upper - If) <= 1e-12 * std::abs(If));
}

TEST_CASE("non-finite integrand is reported") {
    ParabolicCylinder Q(origin(2), 1.0);
    CHECK_THROWS_AS(integrate_cylinder([](const Eigen::VectorXd&, double) { return std::nan(""); }, Q), QuadratureError);
}

TEST_CASE("excised singular integral matches the exact heat-kernel mass") {
    // int_{Q_1} Gamma(y, -s) = int_0^1 (1 - exp(-1/(4 tau))) dtau = 1 - e^{-1/4} + E_1(1/4)/4 for n = 2
    const double E1 = -std::expint(-0.25);
    const double exact = 1.0 - std::exp(-0.25) + 0.25 * E1;
    ParabolicCylinder Q(origin(2), 1.0);
    auto res = integrate_cylinder_excised([](const Eigen::VectorXd& y, double s) { return heat_kernel(y, -s); }, Q, 0.0);
    CHECK(res.value == doctest::Approx(exact).epsilon(1e-6));
    CHECK(res.excised.size() == 4);
    for (std::size_t i = 1; i < res.excised.size(); ++i) CHECK(res.excised[i] > res.excised[i - 1]);
}

TEST_CASE("Lq norms") {
    ParabolicCylinder Q(origin(2), 0.6);
    const double c = 1.7, q = 3.0;
    CHECK(lq_norm_on_cylinder([&](const Eigen::VectorXd&, double) { return c; }, Q, q) ==
          doctest::Approx(c * std::pow(Q.volume(), 1.0 / q)).epsilon(1e-10));

    const double beta = 0.7;
    auto f = [&](const Eigen::VectorXd& y, double s) { return std::pow(parabolic_norm(y, s), beta); };
    CylinderRule rule;
    rule.grading = 6;
    std::vector<double> radii, norms;
    for (double r : {1.0, 0.5, 0.25}) {
        radii.push_back(r);
        norms.push_back(lq_norm_on_cylinder(f, ParabolicCylinder(origin(2), r), q, rule));
    }
    CHECK(std::abs(fitted_slope(radii, norms) - (beta + 4.0 / q)) < 0.02);
    CHECK(norms[0] > norms[1]);
    CHECK(norms[1] > norms[2]);
    CHECK_THROWS_AS(lq_norm_on_cylinder(f, Q, 0.5), DomainError);
}

TEST_CASE("dyadic shells") {
    auto shells = DyadicShellDecomposition::from_outer(0.5, 5);
    CHECK(shells.outer(shells.count) == doctest::Approx(0.5));
    CHECK(shells.inner(1) == doctest::Approx(0.5 / 32));
    for (int u = 1; u < shells.count; ++u) CHECK(shells.outer(u) == doctest::Approx(shells.inner(u + 1)));

    auto pts = shell_points(shells, 3, 2, 64, 9, TimeSide::Past);
    for (const auto& p : pts) {
        CHECK(parabolic_norm(p) > shells.inner(3));
        CHECK(parabolic_norm(p) <= shells.outer(3) * (1 + 1e-12));
        CHECK(p.t <= 0.0);
    }
}

TEST_CASE("shell suprema") {
    auto shells = DyadicShellDecomposition::from_outer(0.5, 5);
    auto norm = shell_supremum([](const Eigen::VectorXd& y, double s) { return parabolic_norm(y, s); }, shells, 2, 4096, 1);
    for (const auto& row : norm) {
        CHECK(row.sup <= row.outer * (1 + 1e-12));
        CHECK(row.sup >= row.outer * 0.98);
    }
    auto pw = shell_supremum([](const Eigen::VectorXd& y, double s) { return std::pow(parabolic_norm(y, s), 2.5); },
                             shells, 2, 4096, 1);
    for (std::size_t i = 1; i < pw.size(); ++i) CHECK(std::log2(pw[i].sup / pw[i - 1].sup) == doctest::Approx(2.5).epsilon(0.02));

    auto k11 = shell_supremum([](const Eigen::VectorXd& y, double s) { return s > 0 ? stokes_kernel(0, 0, Point(y, s)) : 0.0; },
                              shells, 2, 4096, 1, TimeSide::Future);
    std::vector<double> r, v;
    for (const auto& row : k11) {
        r.push_back(row.outer);
        v.push_back(row.sup);
    }
    CHECK(std::abs(fitted_slope(r, v) + 2.0) <= 0.1);

    // nested samples: sup never decreases with more samples
    auto f = [](const Eigen::VectorXd& y, double s) { return std::sin(40 * y[0]) * std::cos(17 * s) + y[1]; };
    auto a = shell_supremum(f, shells, 2, 256, 4);
    auto b = shell_supremum(f, shells, 2, 1024, 4);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i].sup >= a[i].sup);
}

TEST_CASE("shell CSV round trip") {
    std::vector<ShellSup> table{{1, 0.125, 0.25, 3.5e-4}, {2, 0.25, 0.5, 1.0 / 3.0}};
    std::stringstream ss;
    write_shell_csv(ss, table);
    auto back = read_shell_csv(ss);
    REQUIRE(back.size() == 2);
    CHECK(back[1].sup == table[1].sup);
    CHECK(back[0].inner == table[0].inner);
}

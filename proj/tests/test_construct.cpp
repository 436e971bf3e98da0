#include "doctest.h"

#include "stx/construct.hpp"

#include <cmath>

using namespace stx;

namespace {

std::shared_ptr<const Forcing> standard_forcing(int n, int d, double alpha, const std::string& profile = "radial_power") {
    ForcingSpec s;
    s.n = n;
    s.d = d;
    s.alpha = alpha;
    s.profile = profile;
    return make_forcing(s).forcing;
}

std::shared_ptr<const Forcing> divergence_forcing(const std::string& profile, Eigen::MatrixXd m = {}) {
    ForcingSpec s;
    s.form = ForcingForm::Divergence;
    s.profile = profile;
    s.matrix = std::move(m);
    return make_forcing(s).forcing;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    int i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

}  // namespace

TEST_CASE("zero forcing gives the zero solution") {
    LocalSolution s(std::make_shared<const Forcing>(Forcing::zero(2)), 2);
    CHECK(s.velocity(vec({0.1, 0.2}), -0.05).norm() == 0.0);
    CHECK(s.pressure(vec({0.1, 0.2}), -0.05) == 0.0);
    CHECK(s.polynomial_correction().max_abs() == 0.0);
}

TEST_CASE("hemisphere rule integrates 2 cos(theta) over the upper hemisphere") {
    for (int n : {2, 3}) {
        const auto h = hemisphere_rule(n, 6, 24);
        double sum = 0.0;
        for (double w : h.weight) sum += w;
        // |S^{n-1}| * int_0^{pi/2} 2 cos sin^{n-1} = 2 |S^{n-1}| / n
        const double sphere = n == 2 ? 2 * M_PI : 4 * M_PI;
        CHECK(sum == doctest::Approx(2.0 * sphere / n).epsilon(1e-10));
    }
}

TEST_CASE("Taylor polynomial solves the heat and divergence equations") {
    for (const auto& profile : {"radial_power", "oscillatory"}) {
        LocalSolution s(standard_forcing(2, 3, 0.5, profile), 3);
        const auto& v = s.polynomial_correction();
        CHECK(v.max_abs() > 0.0);
        CHECK(v.heat_residual() <= 1e-8 * v.max_abs());
        CHECK(v.divergence_residual() <= 1e-8 * v.max_abs());
        CHECK(s.pressure_correction().max_abs() == 0.0);
    }
}

TEST_CASE("degree zero subtracts the value at the origin") {
    auto f = standard_forcing(2, 2, 0.5);
    LocalSolution s(f, 0);
    const Eigen::VectorXd w0 = s.volume_potential(Eigen::VectorXd::Zero(2), 0.0);
    const Eigen::VectorXd v = s.polynomial_correction().evaluate(vec({0.3, -0.1}), -0.2);
    CHECK((v - w0).norm() <= 1e-4 * w0.norm());
}

TEST_CASE("splitting agrees with the direct volume potential") {
    auto f = standard_forcing(2, 2, 0.5);
    QuadratureSettings q;
    q.azimuth = 64;
    LocalSolution s(f, 2, q);
    const Eigen::VectorXd x = vec({0.2, -0.1});
    const double t = -0.04;
    const Eigen::VectorXd direct = s.volume_potential(x, t) - s.polynomial_correction().evaluate(x, t) -
                                   s.pressure_correction().evaluate(x, t);
    const Eigen::VectorXd u = s.velocity(x, t);
    CHECK((u - direct).norm() <= 1e-3 * s.polynomial_correction().max_abs());
}

TEST_CASE("velocity and pressure satisfy the Stokes system") {
    auto f = standard_forcing(2, 2, 0.5, "oscillatory");
    LocalSolution s(f, 2);
    const Eigen::VectorXd x = vec({0.3, 0.2});
    const double t = -0.1, h = 5e-3;
    auto u = [&](const Eigen::VectorXd& y, double tt) { return s.velocity(y, tt); };
    const Eigen::VectorXd u0 = u(x, t);
    const Eigen::VectorXd ut = (u(x, t + h * h) - u(x, t - h * h)) / (2 * h * h);
    Eigen::VectorXd lap = Eigen::VectorXd::Zero(2), grad_p(2);
    double div = 0.0;
    for (int i = 0; i < 2; ++i) {
        const Eigen::VectorXd e = h * Eigen::VectorXd::Unit(2, i);
        const Eigen::VectorXd up = u(x + e, t), um = u(x - e, t);
        lap += (up - 2 * u0 + um) / (h * h);
        div += (up[i] - um[i]) / (2 * h);
        grad_p[i] = (s.pressure(x + e, t) - s.pressure(x - e, t)) / (2 * h);
    }
    const Eigen::VectorXd fx = f->effective(x, t);
    CHECK((ut - lap + grad_p - fx).norm() <= 1e-3 * fx.norm());
    CHECK(std::abs(div) <= 1e-4 * fx.norm());
}

TEST_CASE("pressure of divergence-form profiles") {
    const Eigen::VectorXd x = vec({0.18, -0.15});
    const double t = -0.03;
    auto iso = divergence_forcing("isotropic");
    LocalSolution a(iso, 2);
    CHECK(a.pressure(x, t) == doctest::Approx(iso->density(x, t)(0, 0)).epsilon(1e-9));
    CHECK(a.velocity(x, t).norm() <= 1e-14);

    LocalSolution b(divergence_forcing("antisymmetric"), 2);
    CHECK(std::abs(b.pressure(x, t)) <= 1e-9);

    auto std_iso = std::make_shared<const Forcing>(iso->as_standard());
    LocalSolution c(std_iso, 2);
    CHECK(c.pressure(x, t) == doctest::Approx(a.pressure(x, t)).epsilon(1e-9));
}

TEST_CASE("divergence-form and standard routes agree") {
    Eigen::MatrixXd m(2, 2);
    m << 1.0, 0.4, -0.2, 0.7;
    auto g = divergence_forcing("matrix", m);
    auto f = std::make_shared<const Forcing>(g->as_standard());
    QuadratureSettings q;
    q.polar = 16;
    LocalSolution a(g, 2, q), b(f, 2, q);
    const Eigen::VectorXd x = vec({0.18, -0.15});
    const double t = -0.03;
    const Eigen::VectorXd ua = a.velocity(x, t), ub = b.velocity(x, t);
    CHECK((ua - ub).norm() <= 1e-6 * ua.norm());
    CHECK(a.pressure(x, t) == doctest::Approx(b.pressure(x, t)).epsilon(1e-8));
}

TEST_CASE("pressure Taylor coefficients match finite differences") {
    // g = -u u^T is even, so only the second derivatives of p survive at the origin
    auto field = std::make_shared<const ManufacturedField>(2, 2, 5);
    auto f = std::make_shared<const Forcing>(navier_stokes_forcing(field, 4.0));
    LocalSolution s(f, 3);
    CHECK(s.pressure_correction().max_abs() > 0.0);
    const auto& T = s.pressure_taylor();
    REQUIRE(T.rows() == 3);
    const double h = 5e-3;
    auto p = [&](double a, double b) { return s.pressure(vec({a, b}), 0.0); };
    const double scale = T.cwiseAbs().maxCoeff();
    REQUIRE(scale > 0.0);
    CHECK(std::abs(T(0, 0)) <= 1e-10 * scale);
    const double p00 = p(0, 0);
    CHECK(std::abs(T(1, 0) - (p(h, 0) - 2 * p00 + p(-h, 0)) / (h * h)) <= 1e-3 * scale);
    CHECK(std::abs(T(2, 1) - (p(0, h) - 2 * p00 + p(0, -h)) / (h * h)) <= 1e-3 * scale);
    const double mixed = (p(h, h) - p(h, -h) - p(-h, h) + p(-h, -h)) / (4 * h * h);
    CHECK(std::abs(T(1, 1) - mixed) <= 1e-3 * scale);
    CHECK(std::abs(T(2, 0) - mixed) <= 1e-3 * scale);
}

TEST_CASE("velocity vanishes to order d + alpha") {
    for (double alpha : {0.3, 0.5}) {
        LocalSolution s(standard_forcing(2, 2, alpha), 2);
        const Eigen::VectorXd x = vec({0.06, 0.03});
        const double t = -0.002;
        const double r1 = s.velocity(x, t).norm();
        const double r2 = s.velocity(x / 2, t / 4).norm();
        CHECK(std::log2(r1 / r2) == doctest::Approx(2.0 + alpha).epsilon(0.03));
    }
}

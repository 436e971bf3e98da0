#include "doctest.h"

#include "stx/kernels.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace stx;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd x(v.size());
    int i = 0;
    for (double a : v) x[i++] = a;
    return x;
}

// Central differences of a scalar function of (x,t) along one coordinate; axis == n means time.
template <typename F>
double central_diff(F f, Eigen::VectorXd x, double t, int axis, double h) {
    const int n = static_cast<int>(x.size());
    auto at = [&](double s) {
        Eigen::VectorXd y = x;
        double tt = t;
        if (axis == n)
            tt += s;
        else
            y[axis] += s;
        return f(y, tt);
    };
    // fourth-order stencil
    return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
}

std::vector<Point> random_points(int n, int count, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(-1.0, 1.0), ut(0.02, 1.0);
    std::vector<Point> pts;
    while (static_cast<int>(pts.size()) < count) {
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) x[i] = ux(rng);
        const double t = ut(rng);
        if (parabolic_norm(x, t) < 0.1) continue;
        pts.emplace_back(x, t);
    }
    return pts;
}

}  // namespace

TEST_CASE("multi-index enumeration") {
    CHECK(multi_indices_of_order(2, 3).size() == 4);
    CHECK(multi_indices_of_order(3, 2).size() == 6);
    CHECK(multi_indices_up_to(3, 2).size() == 10);
    CHECK(parabolic_specs_of_order(2, 4).size() == 5 + 3 + 1);
    for (const auto& s : parabolic_specs_up_to(3, 5)) CHECK(s.order() <= 5);
    CHECK(MultiIndex(2, {2, 1}).factorial() == 2.0);
}

TEST_CASE("parabolic norm scaling") {
    Point p(vec({0.3, -0.4}), -0.2);
    const double lambda = 1.7;
    CHECK(parabolic_norm(parabolic_dilate(p, lambda)) == doctest::Approx(lambda * parabolic_norm(p)).epsilon(1e-14));
    CHECK(parabolic_norm(vec({0.0, 0.0}), 0.0) == 0.0);
}

TEST_CASE("heat kernel values") {
    CHECK(heat_kernel(vec({0.0}), 1.0 / (4.0 * std::numbers::pi)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(heat_kernel(vec({0.3, 0.2}), -0.5) == 0.0);
    CHECK(heat_kernel(vec({0.3, 0.2}), 0.0) == 0.0);
}

TEST_CASE("heat kernel normalization") {
    // Gauss-Hermite-free check: tensor trapezoid on a wide box is spectrally accurate for Gaussians.
    for (int n = 1; n <= 3; ++n)
        for (double t : {0.05, 0.1, 0.5}) {
            const double L = 12.0 * std::sqrt(t);
            const int m = 60;
            const double h = 2 * L / m;
            double sum = 0.0;
            Eigen::VectorXd x(n);
            const int total = static_cast<int>(std::pow(m, n));
            for (int idx = 0; idx < total; ++idx) {
                int r = idx;
                for (int i = 0; i < n; ++i) {
                    x[i] = -L + h * (r % m);
                    r /= m;
                }
                sum += heat_kernel(x, t);
            }
            CHECK(sum * std::pow(h, n) == doctest::Approx(1.0).epsilon(1e-6));
        }
}

TEST_CASE("heat kernel derivatives match finite differences") {
    const Eigen::VectorXd x = vec({0.3, 0.1});
    const double t = 0.2;
    Point p(x, t);
    auto g = [](const Eigen::VectorXd& y, double s) { return heat_kernel(y, s); };
    CHECK(heat_kernel_deriv({MultiIndex(2), 0}, p) == doctest::Approx(heat_kernel(p)).epsilon(1e-15));

    // D_x1 D_t Gamma by nested differences, step sweep
    auto dt = [&](const Eigen::VectorXd& y, double s) { return central_diff(g, y, s, 2, 1e-3); };
    double best = 1.0;
    const double exact = heat_kernel_deriv({MultiIndex::unit(2, 0), 1}, p);
    for (double h : {4e-3, 2e-3, 1e-3}) {
        const double fd = central_diff(dt, x, t, 0, h);
        best = std::min(best, std::abs(fd - exact) / std::abs(exact));
    }
    CHECK(best < 1e-5);

    CHECK(heat_kernel_deriv({MultiIndex::unit(1, 0), 0}, Point(vec({0.0}), 0.7)) == 0.0);
    CHECK_THROWS_AS(heat_kernel_deriv({MultiIndex(2), 0}, Point(vec({0.0, 0.0}), 0.0)), DomainError);
    CHECK(heat_kernel_deriv({MultiIndex(2, {1, 1}), 1}, Point(x, -0.1)) == 0.0);
}

TEST_CASE("incomplete gamma helper") {
    // E(1, z) = (1 - e^{-z}) / z
    for (double z : {0.0, 0.3, 1.9, 2.1, 7.0, 40.0}) {
        const double exact = z == 0.0 ? 1.0 : -std::expm1(-z) / z;
        CHECK(scaled_lower_gamma(1.0, z) == doctest::Approx(exact).epsilon(1e-14));
    }
    // E(1/2, z) = sqrt(pi) erf(sqrt z) / sqrt z
    for (double z : {0.2, 1.0, 1.6, 5.0, 30.0}) {
        const double exact = std::sqrt(std::numbers::pi) * std::erf(std::sqrt(z)) / std::sqrt(z);
        CHECK(scaled_lower_gamma(0.5, z) == doctest::Approx(exact).epsilon(1e-14));
    }
}

TEST_CASE("Stokes tensor trace, symmetry and origin value") {
    for (int n : {2, 3}) {
        for (const auto& p : random_points(n, 20, 11 + n)) {
            const Eigen::MatrixXd K = stokes_tensor(p);
            CHECK(K.trace() == doctest::Approx((n - 1) * heat_kernel(p)).epsilon(1e-12));
            CHECK(stokes_kernel(0, 1, p) == stokes_kernel(1, 0, p));
        }
        const double t = 0.3;
        Point origin(Eigen::VectorXd::Zero(n), t);
        const Eigen::MatrixXd K0 = stokes_tensor(origin);
        const double expected = (1.0 - 1.0 / n) * heat_kernel(origin);
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) CHECK(K0(j, k) == doctest::Approx(j == k ? expected : 0.0).epsilon(1e-13));
    }
}

TEST_CASE("Stokes tensor domain checks") {
    CHECK_THROWS_AS(stokes_kernel(0, 0, Point(vec({0.1, 0.2}), 0.0)), DomainError);
    CHECK_THROWS_AS(stokes_kernel(0, 0, Point(vec({0.1, 0.2}), -1.0)), DomainError);
    CHECK_THROWS_AS(stokes_kernel(0, 0, Point(vec({0.1}), 1.0)), DomainError);
}

TEST_CASE("Stokes tensor divergence and heat residual") {
    for (int n : {2, 3}) {
        for (const auto& p : random_points(n, 20, 5 * n)) {
            KernelJet jet(p, 6);
            for (int k = 0; k < n; ++k) {
                double div = 0.0;
                for (int j = 0; j < n; ++j) div += jet.stokes(MultiIndex::unit(n, j), 0, j, k);
                const double scale = std::abs(jet.heat(MultiIndex::unit(n, 0))) + heat_kernel(p) / std::sqrt(p.t);
                CHECK(std::abs(div) <= 1e-10 * scale + 1e-12);
                for (int j = 0; j < n; ++j) {
                    double lap = 0.0;
                    for (int i = 0; i < n; ++i) lap += jet.stokes(MultiIndex::unit(n, i) + MultiIndex::unit(n, i), 0, j, k);
                    const double dt = jet.stokes(MultiIndex(n), 1, j, k);
                    CHECK(std::abs(dt - lap) <= 1e-10 * (std::abs(dt) + std::abs(lap)) + 1e-10);
                }
            }
        }
    }
}

TEST_CASE("Stokes derivatives agree with finite differences of the tensor") {
    const Point p(vec({0.4, -0.25}), 0.15);
    auto K01 = [](const Eigen::VectorXd& y, double s) { return stokes_kernel(0, 1, Point(y, s)); };
    const double fd_x = central_diff(K01, p.x, p.t, 1, 1e-3);
    const double fd_t = central_diff(K01, p.x, p.t, 2, 1e-4);
    CHECK(stokes_kernel_deriv({MultiIndex::unit(2, 1), 0}, 0, 1, p) == doctest::Approx(fd_x).epsilon(1e-8));
    CHECK(stokes_kernel_deriv({MultiIndex(2), 1}, 0, 1, p) == doctest::Approx(fd_t).epsilon(1e-7));
}

TEST_CASE("closed form agrees with tau-quadrature route") {
    for (int n : {2, 3}) {
        for (const auto& p : random_points(n, 8, 77 + n)) {
            for (const auto& s : parabolic_specs_up_to(n, 3)) {
                for (int j = 0; j < n; ++j)
                    for (int k = j; k < n; ++k) {
                        const double a = stokes_kernel_deriv(s, j, k, p);
                        const double b = stokes_kernel_deriv_quadrature(s, j, k, p);
                        const double scale = std::pow(parabolic_norm(p), -(n + s.order()));
                        CHECK(std::abs(a - b) <= 1e-9 * scale);
                    }
            }
        }
    }
}

TEST_CASE("nonlocal part at t -> 0+ is minus the Newtonian potential Hessian") {
    const Eigen::VectorXd x = vec({0.3, -0.5});
    const double r2 = x.squaredNorm();
    for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
            const double hessE = ((j == k ? r2 : 0.0) - 2 * x[j] * x[k]) / (2 * std::numbers::pi * r2 * r2);
            const MultiIndex nu = MultiIndex::unit(2, j) + MultiIndex::unit(2, k);
            CHECK(nonlocal_limit(nu, x) == doctest::Approx(-hessE).epsilon(1e-13));
            KernelJet jet(Point(x, 1e-9), 2);
            CHECK(jet.nonlocal(nu) == doctest::Approx(-hessE).epsilon(1e-6));
        }
    const Eigen::VectorXd y = vec({0.3, -0.5, 0.2});
    const double r = y.norm();
    // E = -1/(4 pi r): d_j d_k E = (delta r^2 - 3 x_j x_k)/(4 pi r^5)
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
            const double hessE = ((j == k ? r * r : 0.0) - 3 * y[j] * y[k]) / (4 * std::numbers::pi * std::pow(r, 5));
            CHECK(nonlocal_limit(MultiIndex::unit(3, j) + MultiIndex::unit(3, k), y) ==
                  doctest::Approx(-hessE).epsilon(1e-13));
        }
}

TEST_CASE("Stokes tensor homogeneity") {
    const Point p(vec({0.2, 0.35}), 0.11);
    for (const auto& s : parabolic_specs_up_to(2, 3)) {
        const double lambda = 0.37;
        const double a = stokes_kernel_deriv(s, 0, 1, parabolic_dilate(p, lambda));
        const double b = std::pow(lambda, -(2 + s.order())) * stokes_kernel_deriv(s, 0, 1, p);
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
}

TEST_CASE("kernel Taylor truncation") {
    const Point source(vec({0.3, -0.2}), -0.16);  // s < 0 so K(-y,-s) is in the causal region
    CHECK_THROWS_AS(kernel_taylor_truncation(2, Point(vec({0.3, 0.1}), 0.0)), DomainError);

    auto d0 = kernel_taylor_truncation(0, source);
    REQUIRE(d0.size() == 1);
    const Eigen::MatrixXd K = stokes_tensor(Point(-source.x, -source.t));
    CHECK((d0[0].coefficients[0] - K).norm() == 0.0);

    auto terms = kernel_taylor_truncation(3, source);
    for (const auto& term : terms) CHECK(term.heat_residual() <= 1e-10 * K.norm() / std::pow(0.5, term.m));
    CHECK((evaluate_taylor_sum(terms, Eigen::VectorXd::Zero(2), 0.0) - terms[0].coefficients[0]).norm() == 0.0);
    CHECK((terms[0].coefficients[0] - K).norm() <= 1e-14 * K.norm());

    auto error_at = [&](double scale) {
        const Eigen::VectorXd x = vec({0.01 * scale, 0.0});
        const double t = 1e-4 * scale * scale;
        const Eigen::MatrixXd exact = stokes_tensor(Point(x - source.x, t - source.t));
        return (evaluate_taylor_sum(terms, x, t) - exact).cwiseAbs().maxCoeff();
    };
    const double e1 = error_at(1.0), e2 = error_at(0.5);
    CHECK(e1 / e2 >= 16.0);
}

#include "doctest.h"

#include "stx/grid_field.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace stx;

namespace {

// (-x2, x1) sin(t): divergence-free rotation
Eigen::VectorXd rotation(const Eigen::VectorXd& x, double t) {
    Eigen::VectorXd v(2);
    v << -x[1] * std::cos(t), x[0] * std::cos(t);
    return v;
}

}  // namespace

TEST_CASE("grid geometry") {
    GridField g(2, 1, 0.5, 5, 0.2, 3);
    CHECK(g.spacing() == doctest::Approx(0.25));
    CHECK(g.spatial_size() == 25);
    CHECK(g.time(0) == doctest::Approx(-0.2));
    CHECK(g.time(2) == doctest::Approx(0.0));
    const Eigen::VectorXd x = g.node(g.index({4, 1}));
    CHECK(x[0] == doctest::Approx(0.5));
    CHECK(x[1] == doctest::Approx(-0.25));
    CHECK_THROWS_AS(GridField(2, 1, 0.5, 4, 0.2, 3), DomainError);
    CHECK_THROWS_AS(GridField(2, 1, -1.0, 5, 0.2, 3), DomainError);
    CHECK_THROWS_AS(GridField(2, 1, 1.0, 5, 0.0, 3), DomainError);
}

TEST_CASE("grid derivative is exact on cubics") {
    auto g = GridField::sample(2, 1, 1.0, 9, 0.1, 1, [](const Eigen::VectorXd& x, double) {
        return Eigen::VectorXd::Constant(1, x[0] * x[0] * x[0] + x[0] * x[1]);
    });
    const Eigen::VectorXd d0 = grid_derivative(g, 0, 0, 0);
    for (Eigen::Index i = 0; i < g.spatial_size(); ++i) {
        const Eigen::VectorXd x = g.node(i);
        const double k = std::round((x[0] + 1.0) / g.spacing());
        // one-sided edge stencils are second order
        const double tol = (k < 2 || k > 6) ? 0.2 : 1e-12;
        CHECK(d0[i] == doctest::Approx(3 * x[0] * x[0] + x[1]).epsilon(tol));
    }
}

TEST_CASE("divergence tag is validated") {
    auto g = GridField::sample(2, 2, 0.5, 7, 0.25, 3, rotation);
    g.divergence_free = true;
    CHECK_NOTHROW(g.validate());
    auto h = GridField::sample(2, 2, 0.5, 7, 0.25, 3, [](const Eigen::VectorXd& x, double) { return x; });
    h.divergence_free = true;
    CHECK_THROWS_AS(h.validate(), DomainError);
}

TEST_CASE("binary round trip") {
    auto g = GridField::sample(2, 2, 0.5, 7, 0.25, 3, rotation);
    g.divergence_free = true;
    g.provenance = {{"source", "rotation"}};
    const auto file = std::filesystem::temp_directory_path() / "stx_grid_roundtrip.bin";
    write_grid_field(g, file);
    const auto r = read_grid_field(file);
    std::filesystem::remove(file);
    CHECK(r.n == 2);
    CHECK(r.points == 7);
    CHECK(r.slices == 3);
    CHECK(r.divergence_free);
    CHECK(r.provenance["source"] == "rotation");
    for (int c = 0; c < 2; ++c) CHECK((r.values[c] - g.values[c]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("slice CSV keeps the x3 = 0 plane") {
    auto g = GridField::sample(3, 1, 1.0, 5, 0.1, 1,
                               [](const Eigen::VectorXd& x, double) { return Eigen::VectorXd::Constant(1, x.sum()); });
    std::ostringstream out;
    write_slice_csv(out, g, 0, 0);
    const std::string text = out.str();
    CHECK(text.rfind("x1,x2,value\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 25);
}

// One PASS/FAIL line per acceptance criterion. Tolerances are fixed here.

#include "stx/construct.hpp"
#include "stx/expansion.hpp"
#include "stx/kernels.hpp"
#include "stx/riesz.hpp"
#include "stx/verify.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

using namespace stx;

namespace {

constexpr double kKernelIdentityTol = 1e-6;
constexpr double kOracleTol = 1e-5;
constexpr double kKernelSlopeTol = 0.1;
constexpr double kSlopeTol = 0.15;
constexpr double kLinearityTol = 0.01;
constexpr double kBackgroundTol = 1e-6;
constexpr double kMassRatioTol = 1e-3;
constexpr double kDivergenceTol = 1e-8;
constexpr double kRouteTol = 1e-6;
constexpr double kHypothesisSlopeTol = 0.1;
constexpr double kExactFitTol = 1e-8;
constexpr double kTaylorReduction = 16.0;
constexpr double kRieszTol = 1e-10;

int failures = 0;

void report(int id, const std::string& title, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS" : "FAIL") << " [" << id << "] " << title << ": " << detail << std::endl;
    if (!pass) ++failures;
}

template <typename F>
void criterion(int id, const std::string& title, F body) {
    std::ostringstream detail;
    detail.precision(4);
    bool pass = false;
    try {
        pass = body(detail);
    } catch (const std::exception& e) {
        detail << " exception: " << e.what();
    }
    report(id, title, pass, detail.str());
}

ForcingSpec standard_spec(int d, double alpha, double gamma = 1.0) {
    ForcingSpec s;
    s.n = 2;
    s.d = d;
    s.alpha = alpha;
    s.gamma = gamma;
    s.q = 3.0;
    return s;
}

ScenarioConfig scenario(Scenario kind) {
    ScenarioConfig c;
    c.scenario = kind;
    c.background.enabled = true;
    return c;
}

/// Assertion `name` of a scenario report, formatted; false when missing or failed.
bool assertion(const ScenarioReport& r, const std::string& name, std::ostream& detail) {
    const Assertion* a = r.find(name);
    if (!a) {
        detail << " [" << name << " missing]";
        return false;
    }
    detail << " " << a->name << " " << a->measured << " " << a->relation << " " << a->threshold << ";";
    return a->pass;
}

Eigen::VectorXd exponential(const Eigen::VectorXd& x, double t) {
    Eigen::VectorXd v(2);
    v << std::exp(x[1] + t), std::exp(x[0] + t);
    return v;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

int main() {
    criterion(1, "kernel heat residual, divergence and spectral oracle", [](std::ostream& out) {
        bool ok = true;
        for (int n : {2, 3}) {
            const auto r = kernel_identity_suite(n, 100);
            out << "n=" << n << " heat " << r.heat_residual << " div " << r.divergence << " oracle "
                << r.oracle_deviation << "; ";
            ok = ok && r.points == 100 && r.heat_residual <= kKernelIdentityTol && r.divergence <= kKernelIdentityTol &&
                 r.oracle_deviation <= kOracleTol;
        }
        return ok;
    });

    criterion(2, "kernel shell slopes -(n+|mu|+2l), |mu|+2l <= 3, n=2", [](std::ostream& out) {
        const auto rows = kernel_decay_suite(2, 3);
        double worst = 0.0;
        for (const auto& r : rows) worst = std::max(worst, std::isfinite(r.slope) ? std::abs(r.slope - r.expected) : INFINITY);
        out << rows.size() << " derivatives, max |slope - expected| " << worst;
        return !rows.empty() && worst <= kKernelSlopeTol;
    });

    criterion(3, "constructed u decays at order d+alpha and is linear in gamma", [](std::ostream& out) {
        const auto shells = DyadicShellDecomposition::from_outer(0.5, 5);
        const Point origin(Eigen::VectorXd::Zero(2), 0.0);
        bool ok = true;
        for (auto [d, alpha] : {std::pair{2, 0.3}, std::pair{2, 0.5}, std::pair{3, 0.5}}) {
            const LocalSolution base(make_forcing(standard_spec(d, alpha)).forcing, d);
            const auto r = decay_exponent([&](const Eigen::VectorXd& x, double t) { return base.velocity(x, t); }, origin,
                                          shells, 2, 24, kDefaultSeed);
            double linearity = 0.0;
            for (double gamma : {0.5, 2.0}) {
                const LocalSolution scaled(make_forcing(standard_spec(d, alpha, gamma)).forcing, d);
                for (int u = 1; u <= shells.count; ++u) {
                    double diff = 0.0, peak = 0.0;
                    for (const auto& p : shell_points(shells, u, 2, 8, kDefaultSeed, TimeSide::Past)) {
                        const Eigen::VectorXd v = base.velocity(p.x, p.t);
                        diff = std::max(diff, (scaled.velocity(p.x, p.t) - gamma * v).norm());
                        peak = std::max(peak, gamma * v.norm());
                    }
                    linearity = std::max(linearity, diff / peak);
                }
            }
            out << "(d,alpha)=(" << d << "," << alpha << ") slope " << r.slope << " >= " << d + alpha - kSlopeTol
                << ", gamma deviation " << linearity << "; ";
            ok = ok && !r.identically_zero && r.slope >= d + alpha - kSlopeTol && linearity <= kLinearityTol;
        }
        return ok;
    });

    std::optional<ScenarioReport> theorem1;
    criterion(4, "pipeline with caloric background: recovery, remainder slope, residual structure", [&](std::ostream& out) {
        auto c = scenario(Scenario::Theorem1);
        c.forcing = standard_spec(2, 0.5);
        c.tolerances.background = kBackgroundTol;
        c.tolerances.slope = kSlopeTol;
        c.tolerances.mass_ratio = kMassRatioTol;
        c.tolerances.divergence = kDivergenceTol;
        theorem1 = run_scenario(c);
        bool ok = assertion(*theorem1, "background recovery (relative)", out);
        ok = assertion(*theorem1, "remainder slope", out) && ok;
        ok = assertion(*theorem1, "residual structure: low-degree mass ratio", out) && ok;
        ok = assertion(*theorem1, "divergence of P", out) && ok;
        return ok && theorem1->passed();
    });

    criterion(5, "divergence-form route equals the standard route", [](std::ostream& out) {
        auto c = scenario(Scenario::Theorem2);
        c.forcing.form = ForcingForm::Divergence;
        c.forcing.profile = "matrix";
        c.forcing.matrix = (Eigen::MatrixXd(2, 2) << 1.0, 0.4, -0.2, 0.7).finished();
        c.quadrature.polar = 16;
        c.quadrature.azimuth = 48;
        c.cross_check = true;
        c.tolerances.cross_check = kRouteTol;
        const auto r = run_scenario(c);
        return assertion(r, "cross-check: standard route (relative)", out) && r.passed();
    });

    criterion(6, "Navier-Stokes and Oseen remainder slopes with hypotheses", [](std::ostream& out) {
        bool ok = true;
        auto ns = scenario(Scenario::NavierStokes);
        ns.tolerances.hypothesis_slope = kHypothesisSlopeTol;
        const auto a = run_scenario(ns);
        out << "NS:";
        ok = assertion(a, "hypothesis: vanishing order", out) && ok;
        ok = assertion(a, "hypothesis: order of u (x) u", out) && ok;
        ok = assertion(a, "remainder slope", out) && a.passed() && ok;
        auto os = scenario(Scenario::Oseen);
        os.tolerances.hypothesis_slope = kHypothesisSlopeTol;
        os.field.advection = Eigen::Vector2d(1.0, 0.0);
        const auto b = run_scenario(os);
        out << " Oseen:";
        ok = assertion(b, "hypothesis: vanishing order", out) && ok;
        ok = assertion(b, "hypothesis: order of (a . grad) u", out) && ok;
        ok = assertion(b, "remainder slope", out) && b.passed() && ok;
        return ok;
    });

    criterion(7, "oracles: exact extraction, Taylor remainder order, Riesz identity", [](std::ostream& out) {
        double exact = 0.0;
        for (int n : {2, 3})
            for (int d = 1; d <= 3; ++d) {
                const auto bg = caloric_background(n, d, 1.0, kDefaultSeed + d);
                const auto U = GridField::sample(n, n, 0.25, 9, 0.25, 3,
                                                 [&](const Eigen::VectorXd& x, double t) { return bg.evaluate(x, t); });
                const auto P = extract_polynomial(U, d, {0.25, 0.125});
                for (int s = 0; s < P.slice_count(); ++s)
                    exact = std::max(exact,
                                     (P.coefficients[s] - bg.spatial_coefficients(P.times[s], P.basis)).cwiseAbs().maxCoeff());
            }

        const auto E = GridField::sample(2, 2, 0.25, 17, 0.25, 3, exponential);
        const auto P = extract_polynomial(E, 3, {0.25, 0.1875, 0.125});
        std::vector<double> sups;
        for (double r : {0.2, 0.1, 0.05}) {
            double sup = 0.0;
            for (int k = 0; k < 64; ++k) {
                const double th = 2.0 * std::numbers::pi * k / 64;
                const Eigen::Vector2d x(r * std::cos(th), r * std::sin(th));
                sup = std::max(sup, (exponential(x, 0.0) - P.evaluate(P.slice_count() - 1, x)).norm());
            }
            sups.push_back(sup);
        }
        const double reduction = std::min(sups[0] / sups[1], sups[1] / sups[2]);

        double riesz = 0.0;
        std::mt19937_64 rng(kDefaultSeed);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        for (int n : {2, 3}) {
            const int N = n == 2 ? 32 : 16;
            const double L = std::numbers::pi;
            std::vector<std::pair<Eigen::VectorXd, double>> modes;
            for (int m = 0; m < 6; ++m) {
                Eigen::VectorXd k(n);
                for (int a = 0; a < n; ++a) k[a] = std::round(3 * unif(rng));
                if (k.norm() == 0.0) k[0] = 1.0;
                modes.emplace_back(k, std::numbers::pi * unif(rng));
            }
            const auto f = sample_scalar(n, L, N, [&](const Eigen::VectorXd& x) {
                double v = 0.0;
                for (const auto& [k, phase] : modes) v += std::sin(k.dot(x) + phase);
                return v;
            });
            Eigen::VectorXd sum = f.components[0];
            for (int j = 0; j < n; ++j) sum += riesz_transform(j, riesz_transform(j, f)).components[0];
            riesz = std::max(riesz, sum.cwiseAbs().maxCoeff());
        }
        out << "polynomial fit error " << exact << ", d=3 remainder reduction per halving " << reduction
            << ", |sum R_j^2 f + f| " << riesz;
        return exact <= kExactFitTol && reduction >= kTaylorReduction && riesz <= kRieszTol;
    });

    criterion(8, "identical config and seed give byte-identical summary.json", [&](std::ostream& out) {
        if (!theorem1) {
            out << "criterion 4 produced no report";
            return false;
        }
        const auto root = std::filesystem::temp_directory_path() / "stx_acceptance_determinism";
        std::filesystem::remove_all(root);
        write_report(*theorem1, root / "first");
        write_report(run_scenario(theorem1->config), root / "second");
        const std::string a = read_file(root / "first" / "summary.json");
        const std::string b = read_file(root / "second" / "summary.json");
        std::filesystem::remove_all(root);
        out << a.size() << " bytes, " << (a == b ? "identical" : "different");
        return !a.empty() && a == b;
    });

    std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}

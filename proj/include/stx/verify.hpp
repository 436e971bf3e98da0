#pragma once

// Decay measurement and end-to-end scenario runs with pass/fail assertions.

#include "stx/construct.hpp"
#include "stx/expansion.hpp"
#include "stx/forcing.hpp"
#include "stx/quadrature.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace stx {

inline constexpr double kNoiseFloor = 1e-12;
inline constexpr std::uint64_t kDefaultSeed = 20240917;

using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)>;

struct DecayReport {
    std::vector<ShellSup> shells;
    bool identically_zero = false;  // every shell sup below the noise floor; no slope
    int used_shells = 0;
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    nlohmann::json provenance = nlohmann::json::object();
};

/// Least-squares slope of log sup against log outer radius over the shells whose sup exceeds
/// kNoiseFloor. Throws FitError when fewer than 4 such shells remain (and not all are zero).
DecayReport fit_decay(std::vector<ShellSup> shells);

/// Shell sups of |f(center + p)| at `samples` quasi-random points per shell.
DecayReport decay_exponent(const VectorField& f, const Point& center, const DyadicShellDecomposition& shells, int n,
                           int samples, std::uint64_t seed, TimeSide side = TimeSide::Past);

/// Shell sups over the grid nodes (x, t) of g with (x, t) - center inside each shell.
DecayReport decay_exponent(const GridField& g, const Point& center, const DyadicShellDecomposition& shells);

nlohmann::json to_json(const DecayReport& r);

/// P_k = sum_j d_j A_jk with A antisymmetric and every entry caloric of degree d + 1, seeded
/// coefficients scaled so that max |c| = amplitude. Divergence-free and caloric, degree d.
SpaceTimePolynomial caloric_background(int n, int d, double amplitude, std::uint64_t seed);

// ---------------------------------------------------------------------------------------------
// Kernel suites

struct KernelIdentityResult {
    int n = 2;
    int points = 0;
    double heat_residual = 0.0;    // max |d_t K - Delta K| |(x,t)|^{n+2}
    double divergence = 0.0;       // max |d_j K_jk| |(x,t)|^{n+1}
    double oracle_deviation = 0.0; // max |K_fft - K_quad| / K_00(0, 1)
};

/// Heat residual and divergence of the closed-form K by fourth-order differences at `points`
/// Halton points of {|x| < 1, 0 < t < 1} with |(x,t)| >= 0.1, and the spectral oracle against
/// the tau-quadrature route at t = 1 on the grid nodes with |x| <= 3.
KernelIdentityResult kernel_identity_suite(int n, int points = 100, std::uint64_t seed = kDefaultSeed);

struct KernelDecayRow {
    DerivativeSpec spec;
    int j = 0, k = 0;
    double slope = 0.0;
    double expected = 0.0;
};

/// Shell slopes of |D^mu D_t^l K_jk| for every |mu| + 2l <= max_order on shells 2^{-u}, t > 0.
std::vector<KernelDecayRow> kernel_decay_suite(int n, int max_order = 3, std::uint64_t seed = kDefaultSeed);

// ---------------------------------------------------------------------------------------------
// Scenarios

enum class Scenario { Theorem1, Theorem2, NavierStokes, Oseen };

std::string scenario_name(Scenario s);
/// Throws ConfigError on an unknown name.
Scenario parse_scenario(const std::string& name, const std::string& path = "scenario");

struct BackgroundSpec {
    bool enabled = false;
    double amplitude = 1.0;
};

struct FieldSpec {
    int order = 2;             // manufactured u vanishes to this order
    double amplitude = 1.0;
    Eigen::VectorXd advection; // Oseen; defaults to e_1
};

struct ExtractionSpec {
    double extent = 0.25;
    int points = 9;
    double duration = 0.25;
    int slices = 3;
    std::vector<double> fit_radii{0.25, 0.125};
};

struct ShellSpec {
    double outer = 0.5;
    int count = 5;
    int samples = 24;
};

struct ToleranceSpec {
    double slope = 0.15;
    double hypothesis_slope = 0.1;
    double background = 1e-6;
    double divergence = 1e-8;
    double mass_ratio = 1e-3;
    double cross_check = 1e-6;
    double forcing_constant = 1.1;  // measured decay constant <= this times gamma
};

struct ScenarioConfig {
    Scenario scenario = Scenario::Theorem1;
    std::uint64_t seed = kDefaultSeed;
    ForcingSpec forcing;
    BackgroundSpec background;
    FieldSpec field;
    ExtractionSpec extraction;
    ShellSpec shells;
    QuadratureSettings quadrature;
    ToleranceSpec tolerances;
    bool cross_check = false;  // theorem2: compare with the standard route field-wise
};

/// Strict parsing: unknown keys and wrong types raise ConfigError naming the key path.
ScenarioConfig parse_config(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioConfig& c);

struct Assertion {
    std::string name;
    double measured = 0.0;
    std::string relation;  // ">=" or "<="
    double threshold = 0.0;
    bool pass = false;
};

struct ScenarioReport {
    ScenarioConfig config;
    std::vector<Assertion> assertions;
    std::map<std::string, DecayReport> decays;
    std::optional<VectorPolynomial> polynomial;
    nlohmann::json measurements = nlohmann::json::object();

    bool passed() const;
    const Assertion* find(const std::string& name) const;
    /// Deterministic: no timestamps, fixed key order.
    nlohmann::json summary() const;
};

/// Runs the pipeline for the configured scenario. Hypothesis failures are recorded as failed
/// assertions named "hypothesis: ..." and stop the run.
ScenarioReport run_scenario(const ScenarioConfig& config);

/// Bundle: config.json, shells_<name>.csv, polynomial.json, summary.json, metadata.json.
void write_report(const ScenarioReport& report, const std::filesystem::path& dir);

}  // namespace stx

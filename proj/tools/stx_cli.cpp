// stx: kernel evaluation and checks, scenario runs and bundle export.

#include "stx/expansion.hpp"
#include "stx/kernels.hpp"
#include "stx/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kUsageError = 1;
constexpr int kCheckFailed = 2;

fs::path default_output_root() {
    const char* env = std::getenv("STX_OUTPUT_ROOT");
    return env && *env ? fs::path(env) : fs::path("stx_output");
}

std::ofstream open_output(const fs::path& file) {
    fs::create_directories(file.parent_path());
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << std::setprecision(17);
    return out;
}

struct KernelEvalArgs {
    int j = 0, k = 0, n = 2;
    std::vector<double> x;
    double t = 1.0;
};

int kernel_eval(const KernelEvalArgs& a) {
    if (a.n != 2 && a.n != 3) {
        std::cerr << "kernel eval: --n must be 2 or 3\n";
        return kUsageError;
    }
    if (!(a.t > 0.0)) {
        std::cerr << "kernel eval: --t must be positive (K is evaluated for t > 0)\n";
        return kUsageError;
    }
    if (static_cast<int>(a.x.size()) != a.n || a.j < 0 || a.j >= a.n || a.k < 0 || a.k >= a.n) {
        std::cerr << "kernel eval: --x needs n coordinates and 0 <= j, k < n\n";
        return kUsageError;
    }
    const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(a.x.data(), a.n);
    const stx::Point p(x, a.t);
    const stx::DerivativeSpec value{stx::MultiIndex(a.n), 0};
    std::cout << std::setprecision(17)
              << json{{"j", a.j},
                      {"k", a.k},
                      {"x", a.x},
                      {"t", a.t},
                      {"closed_form", stx::stokes_kernel(a.j, a.k, p)},
                      {"symbol_quadrature", stx::stokes_kernel_deriv_quadrature(value, a.j, a.k, p)}}
                     .dump(2)
              << "\n";
    return 0;
}

struct KernelCheckArgs {
    std::string suite;
    int n = 2;
    std::uint64_t seed = stx::kDefaultSeed;
    fs::path out;
};

int kernel_check(const KernelCheckArgs& a) {
    if (a.n != 2 && a.n != 3) {
        std::cerr << "kernel check: --n must be 2 or 3\n";
        return kUsageError;
    }
    const fs::path dir = a.out.empty() ? default_output_root() / "kernel" : a.out;
    bool ok = true;
    if (a.suite == "decay") {
        const auto rows = stx::kernel_decay_suite(a.n, 3, a.seed);
        auto csv = open_output(dir / ("kernel_decay_n" + std::to_string(a.n) + ".csv"));
        csv << "mu,l,j,k,slope,expected,deviation\n";
        double worst = 0.0;
        for (const auto& r : rows) {
            const double dev = std::abs(r.slope - r.expected);
            worst = std::isfinite(dev) ? std::max(worst, dev) : INFINITY;
            ok = ok && dev <= 0.1;
            csv << '"' << r.spec.mu.str() << "\"," << r.spec.l << ',' << r.j << ',' << r.k << ',' << r.slope << ','
                << r.expected << ',' << dev << '\n';
        }
        std::cout << "kernel decay n=" << a.n << ": " << rows.size() << " derivatives, max |slope - expected| = " << worst
                  << (ok ? "" : " (above 0.1)") << "\n";
    } else {
        const auto r = stx::kernel_identity_suite(a.n, 100, a.seed);
        auto out = open_output(dir / ("kernel_identities_n" + std::to_string(a.n) + ".json"));
        out << json{{"n", r.n},
                    {"points", r.points},
                    {"heat_residual", r.heat_residual},
                    {"divergence", r.divergence},
                    {"oracle_deviation", r.oracle_deviation}}
                   .dump(2)
            << "\n";
        const double residual = a.suite == "heat" ? r.heat_residual : r.divergence;
        ok = residual <= 1e-6 && r.oracle_deviation <= 1e-5;
        std::cout << "kernel " << a.suite << " n=" << a.n << ": max normalized residual = " << residual
                  << ", spectral oracle deviation = " << r.oracle_deviation << "\n";
    }
    return ok ? 0 : kCheckFailed;
}

struct RunArgs {
    std::string scenario;
    fs::path config;
    fs::path out;
    std::optional<std::uint64_t> seed;
    int verbosity = 0;
};

void print_table(std::ostream& os, const stx::ScenarioReport& r) {
    os << std::left << std::setw(48) << "assertion" << std::setw(14) << "measured" << std::setw(4) << "" << std::setw(14)
       << "threshold"
       << "result\n";
    for (const auto& a : r.assertions)
        os << std::setw(48) << a.name << std::setw(14) << a.measured << std::setw(4) << a.relation << std::setw(14)
           << a.threshold << (a.pass ? "PASS" : "FAIL") << "\n";
}

int run(const RunArgs& a) {
    stx::ScenarioConfig config;
    try {
        json j = json::object();
        if (!a.config.empty()) {
            std::ifstream in(a.config);
            if (!in) {
                std::cerr << "run: cannot open config " << a.config << "\n";
                return kUsageError;
            }
            j = json::parse(in);
        }
        if (!j.is_object()) throw stx::ConfigError("<root>", "expected an object");
        if (j.contains("scenario") && j["scenario"] != a.scenario)
            throw stx::ConfigError("scenario", "config names a different scenario than --scenario");
        j["scenario"] = a.scenario;
        if (a.seed) j["seed"] = *a.seed;
        config = stx::parse_config(j);
    } catch (const stx::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kUsageError;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kUsageError;
    }

    const auto report = stx::run_scenario(config);
    const fs::path dir = a.out.empty() ? default_output_root() / stx::scenario_name(config.scenario) : a.out;
    stx::write_report(report, dir);
    if (a.verbosity > 0 || !report.passed()) print_table(report.passed() ? std::cout : std::cerr, report);
    std::cout << stx::scenario_name(config.scenario) << ": " << (report.passed() ? "all assertions pass" : "FAILED")
              << " (bundle in " << dir.string() << ")\n";
    return report.passed() ? 0 : kCheckFailed;
}

struct ExportArgs {
    fs::path bundle;
    fs::path out;
};

int export_bundle(const ExportArgs& a) {
    if (!fs::is_directory(a.bundle) || !fs::exists(a.bundle / "summary.json")) {
        std::cerr << "export: " << a.bundle << " is not a report bundle (no summary.json)\n";
        return kUsageError;
    }
    const fs::path dir = a.out.empty() ? a.bundle / "export" : a.out;
    std::vector<fs::path> tables;
    for (const auto& entry : fs::directory_iterator(a.bundle)) {
        const auto name = entry.path().filename().string();
        if (name.rfind("shells_", 0) == 0 && entry.path().extension() == ".csv") tables.push_back(entry.path());
    }
    std::sort(tables.begin(), tables.end());
    for (const auto& t : tables) {
        std::ifstream in(t);
        const auto rows = stx::read_shell_csv(in);
        auto out = open_output(dir / t.filename());
        stx::write_shell_csv(out, rows);
        if (t.filename() == "shells_remainder.csv" || tables.size() == 1) {
            std::vector<stx::ShellSup> sorted = rows;
            std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.outer < y.outer; });
            auto main = open_output(dir / "shells.csv");
            stx::write_shell_csv(main, sorted);
        }
    }
    const fs::path poly_file = a.bundle / "polynomial.json";
    if (fs::exists(poly_file)) {
        std::ifstream in(poly_file);
        const auto P = stx::polynomial_from_json(json::parse(in));
        auto csv = open_output(dir / "polynomial.csv");
        csv << "component,multi_index,t,value\n";
        for (int s = 0; s < P.slice_count(); ++s)
            for (int c = 0; c < P.n; ++c)
                for (int b = 0; b < P.basis.size(); ++b)
                    csv << c << ",\"" << P.basis[b].str() << "\"," << P.times[s] << ',' << P.coefficients[s](b, c) << '\n';
    }
    std::cout << "exported " << tables.size() << " shell tables" << (fs::exists(poly_file) ? " and polynomial.csv" : "")
              << " to " << dir.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local solutions of the unsteady Stokes system: kernels, scenarios, export"};
    app.require_subcommand(1);

    auto* kernel = app.add_subcommand("kernel", "Stokes kernel evaluation and checks");
    kernel->require_subcommand(1);
    KernelEvalArgs eval_args;
    auto* eval = kernel->add_subcommand("eval", "K_jk(x, t) by the closed form and by symbol quadrature");
    eval->add_option("--j", eval_args.j, "row index")->required();
    eval->add_option("--k", eval_args.k, "column index")->required();
    eval->add_option("--x", eval_args.x, "spatial point (n values)")->required();
    eval->add_option("--t", eval_args.t, "time, t > 0")->required();
    eval->add_option("--n", eval_args.n, "dimension (2 or 3)");
    KernelCheckArgs check_args;
    auto* check = kernel->add_subcommand("check", "kernel validation suites");
    check->add_option("--suite", check_args.suite, "decay | heat | divergence")
        ->required()
        ->check(CLI::IsMember({"decay", "heat", "divergence"}));
    check->add_option("--n", check_args.n, "dimension (2 or 3)");
    check->add_option("--seed", check_args.seed, "sampling seed");
    check->add_option("--out", check_args.out, "output directory");

    RunArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "run a verification scenario and write its report bundle");
    run_cmd->add_option("--scenario", run_args.scenario, "theorem1 | theorem2 | navier_stokes | oseen")
        ->required()
        ->check(CLI::IsMember({"theorem1", "theorem2", "navier_stokes", "oseen"}));
    run_cmd->add_option("--config", run_args.config, "JSON config");
    run_cmd->add_option("--out", run_args.out, "bundle directory");
    run_cmd->add_option("--seed", run_args.seed, "overrides the config seed");
    run_cmd->add_flag("-v,--verbose", run_args.verbosity, "print the assertion table");

    ExportArgs export_args;
    auto* export_cmd = app.add_subcommand("export", "flatten a report bundle into CSV");
    export_cmd->add_option("--bundle", export_args.bundle, "report bundle directory")->required();
    export_cmd->add_option("--out", export_args.out, "output directory (default <bundle>/export)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    try {
        if (*eval) return kernel_eval(eval_args);
        if (*check) return kernel_check(check_args);
        if (*run_cmd) return run(run_args);
        if (*export_cmd) return export_bundle(export_args);
    } catch (const stx::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kCheckFailed;
    }
    return kUsageError;
}

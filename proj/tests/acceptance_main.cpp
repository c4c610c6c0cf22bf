// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Every tolerance is pinned here; temporary outputs go to a scratch dir.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "oracles.hpp"
#include "spce/cli.hpp"
#include "spce/coincidence.hpp"
#include "spce/hv_models.hpp"
#include "spce/purity.hpp"
#include "spce/quantum.hpp"
#include "spce/rng.hpp"
#include "spce/timeseries.hpp"
#include "test_support.hpp"

using namespace spce;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int number, const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS" : "FAIL") << " " << std::setw(2) << number << ". " << name
              << " — " << detail << '\n';
    if (!pass) ++g_failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "spce_acceptance" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

nlohmann::json load_json(const fs::path& p) {
    std::ifstream in(p);
    nlohmann::json j;
    in >> j;
    return j;
}

std::string fmt(double v, int prec = 4) {
    std::ostringstream oss;
    oss << std::setprecision(prec) << v;
    return oss.str();
}

// --------------------------------------------------------------------------
// 1. Singlet curve through the scan CLI
// --------------------------------------------------------------------------
void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto dir = scratch_dir("c1_scan");
    const int rc = cli::run_cli({"scan", "--model", "qt", "--points", "13", "--n", "100000",
                                 "--seed", "20240601", "--window", "off", "--out",
                                 dir.string()});
    bool pass = rc == 0;
    double worst_ratio = 0.0;
    if (pass) {
        const auto report_json = load_json(dir / "report.json");
        for (const auto& point : report_json["results"]["points"]) {
            const double e = point["e_hat"].get<double>();
            const double target = -std::cos(point["delta_rad"].get<double>());
            const double se = point["std_error"].get<double>();
            const double dev = std::fabs(e - target);
            if (se == 0.0) {
                if (dev != 0.0) pass = false;
            } else {
                worst_ratio = std::max(worst_ratio, dev / se);
                if (dev > 4.0 * se) pass = false;
            }
        }
    }
    const double elapsed = seconds_since(t0);
    if (elapsed > 10.0) pass = false;
    report(1, "singlet curve via scan (13 points, n=1e5, 4 std errors)", pass,
           "worst |dev|/stderr = " + fmt(worst_ratio) + ", runtime " + fmt(elapsed, 3) +
               " s (limit 10 s)");
}

// --------------------------------------------------------------------------
// 2. Quantum CHSH violation at the standard quadruple
// --------------------------------------------------------------------------
void criterion_2() {
    const hv::QtOracleSource source;
    const Setting a{"a", AnalyzerSetting::from_degrees(0.0)};
    const Setting ap{"ap", AnalyzerSetting::from_degrees(90.0)};
    const Setting b{"b", AnalyzerSetting::from_degrees(45.0)};
    const Setting bp{"bp", AnalyzerSetting::from_degrees(135.0)};
    const auto result = run_chsh_experiment(source, a, ap, b, bp, 100000,
                                            CoincidenceWindow::unwindowed(), 901);
    const double target = 2.0 * std::numbers::sqrt2;
    const bool pass = std::fabs(result.s - target) <= 3.0 * result.s_std_error &&
                      std::fabs(result.s - target) <= 0.04;
    report(2, "quantum CHSH at (0,90,45,135) within 3 sigma of 2.8284", pass,
           "S = " + fmt(result.s, 5) + " +/- " + fmt(result.s_std_error, 3) + " (3 sigma = " +
               fmt(3.0 * result.s_std_error, 3) + ")");
}

// --------------------------------------------------------------------------
// 3./4. CHSH bound for the stochastic and deterministic model families
// --------------------------------------------------------------------------
template <typename MakeSource>
std::pair<int, double> bound_sweep(MakeSource make_source, std::uint64_t seed_base) {
    const Setting a{"a", AnalyzerSetting(0.0)};
    const Setting ap{"ap", AnalyzerSetting(0.0)};
    const Setting b{"b", AnalyzerSetting(0.0)};
    const Setting bp{"bp", AnalyzerSetting(0.0)};
    int violations = 0;
    double worst_margin = -10.0;  // max of s - (2 + 5 se)
    for (int i = 0; i < 100; ++i) {
        const auto source = make_source(i);
        const auto result = run_chsh_experiment(
            *source, a, ap, b, bp, 10000, CoincidenceWindow::unwindowed(),
            seed_base + static_cast<std::uint64_t>(i));
        const double margin = result.s - (2.0 + 5.0 * result.s_std_error);
        worst_margin = std::max(worst_margin, margin);
        if (margin > 0.0) ++violations;
    }
    return {violations, worst_margin};
}

void criterion_3() {
    RandomStream rng(333);
    auto make = [&rng](int) {
        return std::make_unique<hv::FactorizableSource>(test_support::random_factorizable(rng));
    };
    const auto [violations, worst] = bound_sweep(make, 50000);
    report(3, "CHSH bound holds for 100 random factorizable models", violations == 0,
           std::to_string(violations) + " violations, worst S - (2 + 5 se) = " + fmt(worst));
}

void criterion_4() {
    RandomStream rng(444);
    auto make = [&rng](int) {
        return std::make_unique<hv::DeterministicSource>(test_support::random_deterministic(rng));
    };
    const auto [violations, worst] = bound_sweep(make, 60000);
    report(4, "CHSH bound holds for 100 random deterministic models", violations == 0,
           std::to_string(violations) + " violations, worst S - (2 + 5 se) = " + fmt(worst));
}

// --------------------------------------------------------------------------
// 5. Contextual model: calibrate, then reproduce the curve and violate CHSH
// --------------------------------------------------------------------------
void criterion_5() {
    const auto t0 = std::chrono::steady_clock::now();
    hv::ContextualEventModel base;

    const std::vector<double> d_grid{0.0, 1.0, 2.0, 3.0, 4.0};
    const std::vector<double> w_grid{0.005, 0.01, 0.02, 0.05};
    const auto calibration = hv::calibrate_contextual(base, d_grid, w_grid, 1000000, 515151);
    const auto& best = calibration.cells[calibration.best_cell];

    hv::ContextualEventModel model = base;
    model.delay_exponent = best.delay_exponent;
    const hv::ContextualSource source(model);
    const auto window = CoincidenceWindow::width(best.window);

    const auto grid = hv::calibration_delta_grid();
    double worst = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const Setting sa{"a", AnalyzerSetting(0.0)};
        const Setting sb{"b", AnalyzerSetting(grid[j])};
        const auto streams = source.generate(
            sa, sb, 1000000, derive_seed(717171, {static_cast<std::uint64_t>(j)}));
        const auto est =
            estimate_correlation(match_coincidences(streams.a, streams.b, window));
        worst = std::max(worst, std::fabs(est.e_hat - (-std::cos(grid[j]))));
    }

    const Setting a{"a", AnalyzerSetting::from_degrees(0.0)};
    const Setting ap{"ap", AnalyzerSetting::from_degrees(90.0)};
    const Setting b{"b", AnalyzerSetting::from_degrees(45.0)};
    const Setting bp{"bp", AnalyzerSetting::from_degrees(135.0)};
    const auto chsh = run_chsh_experiment(source, a, ap, b, bp, 1000000, window, 828282);

    const double elapsed = seconds_since(t0);
    const bool pass = worst <= 0.05 && chsh.s > 2.4 && elapsed <= 120.0;
    report(5, "calibrated contextual model: curve within 0.05 and S > 2.4", pass,
           "best cell (d=" + fmt(best.delay_exponent, 2) + ", W=" + fmt(best.window, 3) +
               "), max dev = " + fmt(worst) + ", S = " + fmt(chsh.s, 4) + ", runtime " +
               fmt(elapsed, 3) + " s (limit 120 s)");
}

// --------------------------------------------------------------------------
// 6. Smearing forbids strict anti-correlation
// --------------------------------------------------------------------------
void criterion_6() {
    const quantum::AngularSmearing smear{0.0, 0.1, quantum::SmearingDensity::uniform, 0.0};
    const double got = quantum::smeared_correlation(smear, smear);
    // Closed-form oracle -(sin 0.1 / 0.1)^2.
    const double s = std::sin(0.1) / 0.1;
    const double oracle = -s * s;
    const bool pass = std::fabs(got - oracle) <= 1e-6 && got > -1.0 &&
                      std::fabs(oracle - (-0.9966711079379185)) < 1e-15;
    report(6, "uniform smearing delta=0.1 matches the closed form and exceeds -1", pass,
           "E = " + fmt(got, 10) + ", oracle = " + fmt(oracle, 10));
}

// --------------------------------------------------------------------------
// 7. Runs test exactness
// --------------------------------------------------------------------------
void criterion_7() {
    bool pass = purity::count_runs(purity::BinarySequence::from_string("00101100011011")) == 8;
    pass = pass &&
           purity::count_runs(purity::BinarySequence::from_string("11111100000111")) == 3;

    double worst = 0.0;
    for (int n1 = 1; n1 <= 6; ++n1) {
        for (int n2 = 1; n2 <= 6; ++n2) {
            const auto [mean, var] = test_oracles::enumerate_runs_moments(n1, n2);
            std::vector<int> s;
            for (int i = 0; i < n1; ++i) s.push_back(0);
            for (int i = 0; i < n2; ++i) s.push_back(1);
            const auto rt = purity::runs_test(purity::BinarySequence(s));
            worst = std::max({worst, std::fabs(rt.expected_runs - mean),
                              std::fabs(rt.var_runs - var)});
        }
    }
    pass = pass && worst <= 1e-12;
    report(7, "runs test: reference counts and exact moments up to 6/6", pass,
           "worst |formula - enumeration| = " + fmt(worst, 3));
}

// --------------------------------------------------------------------------
// 8. Mann-Whitney exactness
// --------------------------------------------------------------------------
void criterion_8() {
    RandomStream rng(888);
    double worst_u = 0.0;
    int checked_p = 0;
    double worst_p = 0.0;
    bool pass = true;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> s1, s2;
        const int n1 = 1 + static_cast<int>(rng.uniform() * 8.0);
        const int n2 = 1 + static_cast<int>(rng.uniform() * 8.0);
        for (int i = 0; i < n1; ++i) s1.push_back(std::floor(rng.uniform() * 5.0));
        for (int i = 0; i < n2; ++i) s2.push_back(std::floor(rng.uniform() * 5.0));
        const auto mw = purity::mann_whitney_u(s1, s2);
        worst_u = std::max(worst_u, std::fabs(mw.u - test_oracles::pairwise_u(s1, s2)));
        // Exact p applies below the 8/8 threshold; spot-check a subsample to
        // keep the enumeration time sane.
        const bool exact_regime = n1 < 8 || n2 < 8;
        if (mw.exact != exact_regime) pass = false;
        if (exact_regime && trial % 10 == 0) {
            worst_p = std::max(worst_p,
                               std::fabs(mw.p_value - test_oracles::enumerated_p(s1, s2)));
            ++checked_p;
        }
    }
    pass = pass && worst_u <= 1e-12 && worst_p <= 1e-12;
    report(8, "Mann-Whitney: U and exact p match brute force (1000 samples, ties)", pass,
           "worst |dU| = " + fmt(worst_u, 3) + ", worst |dp| = " + fmt(worst_p, 3) + " over " +
               std::to_string(checked_p) + " enumerations");
}

// --------------------------------------------------------------------------
// 9. AR(2) reproduction across 100 seeds
// --------------------------------------------------------------------------
void criterion_9() {
    const auto t0 = std::chrono::steady_clock::now();
    const ts::ARModel truth({0.25, 0.5}, 1.0);
    int order_two = 0, in_band_011 = 0, in_band_008 = 0;
    double min1 = 1e9, max1 = -1e9, min2 = 1e9, max2 = -1e9;
    for (int s = 0; s < 100; ++s) {
        const auto sample =
            ts::simulate_ar(truth, 500, 977000 + static_cast<std::uint64_t>(s));
        if (ts::select_order(sample.values, 20) != 2) continue;
        ++order_two;
        const auto fit = ts::fit_ar(sample.values, 2);
        const double c1 = fit.coefficients()[0];
        const double c2 = fit.coefficients()[1];
        min1 = std::min(min1, c1);
        max1 = std::max(max1, c1);
        min2 = std::min(min2, c2);
        max2 = std::max(max2, c2);
        if (std::fabs(c1 - 0.25) <= 0.11 && std::fabs(c2 - 0.5) <= 0.11) ++in_band_011;
        if (std::fabs(c1 - 0.25) <= 0.08 && std::fabs(c2 - 0.5) <= 0.08) ++in_band_008;
    }
    const bool contains_reference =
        min1 <= 0.243 && 0.243 <= max1 && min2 <= 0.487 && 0.487 <= max2;
    const double elapsed = seconds_since(t0);
    const double band_rate =
        order_two > 0 ? static_cast<double>(in_band_011) / order_two : 0.0;
    const bool pass =
        order_two >= 90 && band_rate >= 0.95 && contains_reference && elapsed <= 5.0;
    report(9, "AR(2) n=500: order-2 cutoff and coefficient band across 100 seeds", pass,
           "order 2 in " + std::to_string(order_two) + "/100, |coef err| <= 0.11 in " +
               std::to_string(in_band_011) + "/" + std::to_string(order_two) +
               " (<= 0.08: " + std::to_string(in_band_008) + "), band contains (0.243, 0.487): " +
               (contains_reference ? "yes" : "no") + ", runtime " + fmt(elapsed, 3) + " s");
}

// --------------------------------------------------------------------------
// 10. Correlogram oracles
// --------------------------------------------------------------------------
void criterion_10() {
    const ts::ARModel ar2({0.25, 0.5}, 1.0);
    const auto rho = ts::theoretical_acf(ar2, 2);
    bool pass = std::fabs(rho[1] - 0.5) <= 1e-12 && std::fabs(rho[2] - 0.625) <= 1e-12;

    RandomStream rng(1010);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int p = 1 + static_cast<int>(rng.uniform() * 6.0);
        const auto phi = test_support::random_stationary_ar(rng, p);
        const ts::ARModel model(phi, 1.0);
        const auto acf = ts::theoretical_acf(model, p);
        const auto lev = ts::levinson_recursion(acf, p);

        Eigen::MatrixXd r(p, p);
        Eigen::VectorXd rhs(p);
        for (int i = 0; i < p; ++i) {
            rhs(i) = acf[static_cast<std::size_t>(i + 1)];
            for (int j = 0; j < p; ++j)
                r(i, j) = acf[static_cast<std::size_t>(std::abs(i - j))];
        }
        const Eigen::VectorXd direct = r.colPivHouseholderQr().solve(rhs);
        for (int j = 0; j < p; ++j)
            worst = std::max(worst,
                             std::fabs(lev.coefficients[static_cast<std::size_t>(j)] -
                                       direct(j)));
    }
    pass = pass && worst <= 1e-10;
    report(10, "correlogram oracles: Yule-Walker values and Durbin-Levinson vs Toeplitz",
           pass,
           "rho(1)=" + fmt(rho[1], 10) + ", rho(2)=" + fmt(rho[2], 10) +
               ", worst |DL - direct| = " + fmt(worst, 3));
}

// --------------------------------------------------------------------------
// 11. Determinism: byte-identical reports for identical seeds
// --------------------------------------------------------------------------
void criterion_11() {
    const std::vector<std::vector<std::string>> invocations = {
        {"scan", "--model", "qt", "--points", "13", "--n", "20000", "--seed", "20240601",
         "--window", "off"},
        {"scan", "--model", "contextual", "--points", "5", "--n", "20000", "--seed", "7"},
        {"chsh", "--model", "qt", "--angles", "0,90,45,135", "--n", "20000", "--seed", "5",
         "--window", "off"},
        {"chsh", "--model", "contextual", "--n", "20000", "--seed", "5"},
        {"simulate", "--model", "contextual", "--theta-a", "0", "--theta-b", "60", "--n",
         "5000", "--seed", "2"},
        {"timeseries", "--gen-ar", "0.25,0.5", "--gen-n", "500", "--seed", "777", "--maxlag",
         "20", "--fit", "2"},
        {"calibrate", "--d-grid", "0,2", "--w-grid", "0.005,0.05", "--n", "20000", "--seed",
         "9"},
    };

    bool pass = true;
    std::string first_mismatch;
    for (std::size_t i = 0; i < invocations.size(); ++i) {
        std::vector<std::string> files;
        std::vector<std::string> contents[2];
        for (int run = 0; run < 2; ++run) {
            const auto dir = scratch_dir("c11_" + std::to_string(i) + "_" +
                                         std::to_string(run));
            auto args = invocations[i];
            args.push_back("--out");
            args.push_back(dir.string());
            if (cli::run_cli(args) != 0) {
                pass = false;
                first_mismatch = "invocation " + std::to_string(i) + " failed";
                break;
            }
            std::vector<fs::path> produced;
            for (const auto& entry : fs::directory_iterator(dir))
                produced.push_back(entry.path());
            std::sort(produced.begin(), produced.end());
            for (const auto& p : produced) {
                if (run == 0) files.push_back(p.filename().string());
                contents[run].push_back(test_support::read_file_bytes(p));
            }
        }
        if (!pass) break;
        if (contents[0] != contents[1]) {
            pass = false;
            first_mismatch = "byte mismatch in invocation " + std::to_string(i);
            break;
        }
    }
    report(11, "determinism: repeated seeded runs produce byte-identical outputs", pass,
           pass ? std::to_string(invocations.size()) + " invocation pairs compared"
                : first_mismatch);
}

}  // namespace

int main() {
    std::cout << "spce acceptance suite\n";
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED"
                                  : std::to_string(g_failures) + " CRITERIA FAILED")
              << '\n';
    return g_failures == 0 ? 0 : 1;
}

#include <doctest.h>

#include <cmath>

#include "spce/coincidence.hpp"
#include "spce/hv_models.hpp"
#include "spce/quantum.hpp"
#include "spce/rng.hpp"

using namespace spce;

namespace {

StationRecord rec(std::int64_t pair, Station st, int outcome, double t) {
    StationRecord r;
    r.pair_id = pair;
    r.station = st;
    r.setting_label = st == Station::A ? "a" : "b";
    r.outcome = outcome;
    r.time_tag = t;
    return r;
}

}  // namespace

TEST_SUITE("coincidence") {

TEST_CASE("window construction") {
    CHECK(CoincidenceWindow::unwindowed().is_unwindowed());
    CHECK(CoincidenceWindow::width(0.0).seconds() == 0.0);
    CHECK_THROWS_AS(CoincidenceWindow::width(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(CoincidenceWindow::width(
                        std::numeric_limits<double>::infinity()),
                    std::invalid_argument);
}

TEST_CASE("unwindowed matching pairs by id") {
    Stream a{rec(0, Station::A, +1, 0.0), rec(1, Station::A, -1, 1.0)};
    Stream b{rec(1, Station::B, +1, 1.0), rec(0, Station::B, -1, 0.0)};
    const auto matched = match_coincidences(a, b, CoincidenceWindow::unwindowed());
    REQUIRE(matched.size() == 2);
    CHECK(matched[0].outcome_a == +1);
    CHECK(matched[0].outcome_b == -1);
    CHECK(matched[1].outcome_a == -1);
    CHECK(matched[1].outcome_b == +1);
}

TEST_CASE("unwindowed matching rejects unequal pair_id sets") {
    Stream a{rec(0, Station::A, +1, 0.0)};
    Stream b{rec(1, Station::B, +1, 0.0)};
    CHECK_THROWS_AS(match_coincidences(a, b, CoincidenceWindow::unwindowed()),
                    std::invalid_argument);
    Stream b2{rec(0, Station::B, +1, 0.0), rec(1, Station::B, -1, 1.0)};
    CHECK_THROWS_AS(match_coincidences(a, b2, CoincidenceWindow::unwindowed()),
                    std::invalid_argument);
}

TEST_CASE("zero window with unequal tags matches nothing") {
    Stream a{rec(0, Station::A, +1, 0.0), rec(1, Station::A, +1, 2.0)};
    Stream b{rec(0, Station::B, -1, 0.5), rec(1, Station::B, -1, 2.5)};
    CHECK(match_coincidences(a, b, CoincidenceWindow::width(0.0)).empty());
}

TEST_CASE("greedy matching prefers the nearest candidate") {
    // a1 at t=3 is nearer to b0 at t=2 than a0 at t=0 is; greedy takes
    // (a1, b0) and leaves a0 unmatched.
    Stream a{rec(0, Station::A, +1, 0.0), rec(1, Station::A, -1, 3.0)};
    Stream b{rec(0, Station::B, +1, 2.0)};
    const auto matched = match_coincidences(a, b, CoincidenceWindow::width(3.0));
    REQUIRE(matched.size() == 1);
    CHECK(matched[0].outcome_a == -1);
    CHECK(matched[0].outcome_b == +1);
}

TEST_CASE("each record is consumed at most once") {
    Stream a{rec(0, Station::A, +1, 0.0), rec(1, Station::A, +1, 0.1)};
    Stream b{rec(0, Station::B, -1, 0.05)};
    const auto matched = match_coincidences(a, b, CoincidenceWindow::width(1.0));
    CHECK(matched.size() == 1);
}

TEST_CASE("matching is symmetric under stream swap") {
    RandomStream rng(314);
    Stream a, b;
    double ta = 0.0, tb = 0.0;
    for (int i = 0; i < 400; ++i) {
        ta += rng.uniform(0.0, 1.0);
        tb += rng.uniform(0.0, 1.0);
        a.push_back(rec(i, Station::A, rng.uniform() < 0.5 ? +1 : -1, ta));
        b.push_back(rec(i, Station::B, rng.uniform() < 0.5 ? +1 : -1, tb));
    }
    const auto forward = match_coincidences(a, b, CoincidenceWindow::width(0.35));
    const auto backward = match_coincidences(b, a, CoincidenceWindow::width(0.35));
    REQUIRE(forward.size() == backward.size());
    for (std::size_t i = 0; i < forward.size(); ++i) {
        CHECK(forward[i].outcome_a == backward[i].outcome_b);
        CHECK(forward[i].outcome_b == backward[i].outcome_a);
    }
}

TEST_CASE("unsorted input is rejected") {
    Stream a{rec(0, Station::A, +1, 1.0), rec(1, Station::A, +1, 0.5)};
    Stream b{rec(0, Station::B, +1, 0.0)};
    CHECK_THROWS_AS(match_coincidences(a, b, CoincidenceWindow::width(1.0)),
                    std::invalid_argument);
}

TEST_CASE("correlation estimate: frozen cases") {
    std::vector<MatchedPair> anti(100, MatchedPair{+1, -1});
    const auto est = estimate_correlation(anti);
    CHECK(est.e_hat == doctest::Approx(-1.0));
    CHECK(est.std_error == doctest::Approx(0.0));
    CHECK(est.n_matched == 100);

    const std::vector<MatchedPair> mixed{{+1, +1}, {+1, -1}, {-1, +1}, {-1, -1}};
    const auto est2 = estimate_correlation(mixed);
    CHECK(est2.e_hat == doctest::Approx(0.0));
    CHECK(est2.std_error == doctest::Approx(0.5));

    const std::vector<MatchedPair> one{{+1, +1}};
    CHECK_THROWS_AS(estimate_correlation(one), std::invalid_argument);
}

TEST_CASE("correlation estimate stays in range for any generator output") {
    RandomStream rng(808);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<MatchedPair> pairs;
        const int n = 2 + static_cast<int>(rng.uniform() * 50.0);
        for (int i = 0; i < n; ++i)
            pairs.push_back({rng.uniform() < 0.5 ? 1 : -1, rng.uniform() < 0.5 ? 1 : -1});
        const auto est = estimate_correlation(pairs);
        CHECK(est.e_hat >= -1.0);
        CHECK(est.e_hat <= 1.0);
        CHECK(est.std_error >= 0.0);
    }
}

TEST_CASE("chsh statistic: reference values") {
    CHECK(chsh_statistic(0.0, 0.0, 0.0, 0.0) == doctest::Approx(0.0));
    CHECK(chsh_statistic(1.0, 1.0, 1.0, 1.0) == doctest::Approx(2.0));

    const double r = std::numbers::sqrt2 / 2.0;
    CHECK(chsh_statistic(-r, r, -r, -r) == doctest::Approx(2.0 * std::numbers::sqrt2)
                                               .epsilon(1e-12));
    // The same combination on inputs rounded to five decimals.
    CHECK(chsh_statistic(-0.70711, 0.70711, -0.70711, -0.70711) ==
          doctest::Approx(2.82844).epsilon(1e-9));
}

TEST_CASE("chsh statistic: symmetry and range") {
    RandomStream rng(12);
    for (int i = 0; i < 200; ++i) {
        const double e1 = rng.uniform(-1.0, 1.0);
        const double e2 = rng.uniform(-1.0, 1.0);
        const double e3 = rng.uniform(-1.0, 1.0);
        const double e4 = rng.uniform(-1.0, 1.0);
        const double s = chsh_statistic(e1, e2, e3, e4);
        CHECK(s >= 0.0);
        CHECK(s <= 4.0);
        CHECK(chsh_statistic(-e1, -e2, -e3, -e4) == doctest::Approx(s));
        // Row swap with the sign flips that keep the combination's form.
        CHECK(chsh_statistic(e3, -e4, e1, -e2) == doctest::Approx(s));
    }
}

TEST_CASE("chsh statistic: out-of-range inputs") {
    CHECK_THROWS_AS(chsh_statistic(1.2, 0.0, 0.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(chsh_statistic(0.0, 0.0, 0.0, -1.01), std::domain_error);
}

TEST_CASE("qt oracle experiment reproduces the quantum S") {
    const hv::QtOracleSource source;
    const Setting a{"a", AnalyzerSetting::from_degrees(0.0)};
    const Setting ap{"ap", AnalyzerSetting::from_degrees(90.0)};
    const Setting b{"b", AnalyzerSetting::from_degrees(45.0)};
    const Setting bp{"bp", AnalyzerSetting::from_degrees(135.0)};
    const auto result = run_chsh_experiment(source, a, ap, b, bp, 100000,
                                            CoincidenceWindow::unwindowed(), 2718);
    CHECK(std::fabs(result.s - 2.0 * std::numbers::sqrt2) <= 3.0 * result.s_std_error);
    CHECK(result.s > 2.79);
    CHECK(result.s < 2.87);
    CHECK(result.ab.estimate.e_hat == doctest::Approx(-std::numbers::sqrt2 / 2.0).epsilon(0.02));
    CHECK(result.ab_prime.estimate.e_hat ==
          doctest::Approx(std::numbers::sqrt2 / 2.0).epsilon(0.02));
}

TEST_CASE("four passes use independent derived seeds") {
    CHECK(chsh_pass_seed(1, 0) != chsh_pass_seed(1, 1));
    CHECK(chsh_pass_seed(1, 0) != chsh_pass_seed(2, 0));

    // A degenerate quadruple repeats the same (a, b) experiment four times;
    // the independent passes still draw different samples.
    const hv::QtOracleSource source;
    const Setting a{"a", AnalyzerSetting::from_degrees(0.0)};
    const Setting b{"b", AnalyzerSetting::from_degrees(45.0)};
    const auto result = run_chsh_experiment(source, a, a, b, b, 5000,
                                            CoincidenceWindow::unwindowed(), 5);
    CHECK(result.ab.estimate.e_hat != result.ab_prime.estimate.e_hat);
    CHECK(result.a_prime_b.estimate.e_hat != result.a_prime_b_prime.estimate.e_hat);
}

TEST_CASE("unwindowed qt scan stays within four standard errors of the curve") {
    const std::int64_t n = 20000;
    const auto grid = hv::calibration_delta_grid();
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const auto streams = hv::sample_qt_oracle(
            AnalyzerSetting(0.0), AnalyzerSetting(grid[j]), n,
            derive_seed(1234, {static_cast<std::uint64_t>(j)}));
        const auto est =
            estimate_correlation(match_coincidences(streams.a, streams.b,
                                                    CoincidenceWindow::unwindowed()));
        const double target = -std::cos(grid[j]);
        if (est.std_error == 0.0)
            CHECK(est.e_hat == doctest::Approx(target));
        else
            CHECK(std::fabs(est.e_hat - target) <= 4.0 * est.std_error);
    }
}

}  // TEST_SUITE

#include "spce/hv_models.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "spce/coincidence.hpp"
#include "spce/quantum.hpp"
#include "spce/rng.hpp"

namespace spce::hv {

namespace {

void validate_weights(const std::vector<double>& weights, const char* who) {
    if (weights.empty())
        throw std::invalid_argument(std::string(who) + ": empty label set");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw std::invalid_argument(std::string(who) + ": weights must be >= 0");
        total += w;
    }
    if (std::fabs(total - 1.0) > 1e-12)
        throw std::invalid_argument(std::string(who) + ": weights must sum to 1");
}

std::vector<double> cumulative(const std::vector<double>& weights) {
    std::vector<double> cum(weights.size());
    std::partial_sum(weights.begin(), weights.end(), cum.begin());
    return cum;
}

template <typename Table>
const typename Table::mapped_type& lookup(const Table& table, const std::string& label,
                                          const char* who) {
    auto it = table.find(label);
    if (it == table.end())
        throw std::invalid_argument(std::string(who) + ": unknown setting label '" + label +
                                    "'");
    return it->second;
}

StationRecord make_record(std::int64_t pair, Station st, std::string_view label,
                          double setting_rad, int outcome, double time_tag) {
    StationRecord r;
    r.pair_id = pair;
    r.station = st;
    r.setting_label = std::string(label);
    r.setting_rad = setting_rad;
    r.outcome = outcome;
    r.time_tag = time_tag;
    return r;
}

}  // namespace

void FactorizableModel::validate() const {
    validate_weights(weights, "FactorizableModel");
    auto check = [&](const auto& table, const char* side) {
        if (table.empty())
            throw std::invalid_argument(std::string("FactorizableModel: no settings for ") +
                                        side);
        for (const auto& [label, probs] : table) {
            if (probs.size() != weights.size())
                throw std::invalid_argument("FactorizableModel: table for '" + label +
                                            "' has wrong length");
            for (double p : probs)
                if (!(p >= 0.0 && p <= 1.0))
                    throw std::invalid_argument("FactorizableModel: probabilities must be in "
                                                "[0, 1]");
        }
    };
    check(p_a, "station A");
    check(p_b, "station B");
}

void DeterministicSharedSpaceModel::validate() const {
    validate_weights(weights, "DeterministicSharedSpaceModel");
    auto check = [&](const auto& table, const char* side) {
        if (table.empty())
            throw std::invalid_argument(
                std::string("DeterministicSharedSpaceModel: no settings for ") + side);
        for (const auto& [label, resp] : table) {
            if (resp.size() != weights.size())
                throw std::invalid_argument("DeterministicSharedSpaceModel: table for '" +
                                            label + "' has wrong length");
            for (int v : resp)
                if (v != 1 && v != -1)
                    throw std::invalid_argument(
                        "DeterministicSharedSpaceModel: responses must be +1 or -1");
        }
    };
    check(response_a, "station A");
    check(response_b, "station B");
}

void ContextualEventModel::validate() const {
    if (!(t0 > 0.0) || !std::isfinite(t0))
        throw std::invalid_argument("ContextualEventModel: t0 must be > 0");
    if (!(delay_exponent >= 0.0) || !std::isfinite(delay_exponent))
        throw std::invalid_argument("ContextualEventModel: delay exponent must be >= 0");
    if (!(pair_spacing > 0.0) || !std::isfinite(pair_spacing))
        throw std::invalid_argument("ContextualEventModel: pair spacing must be > 0");
}

StationResponse contextual_station_response(double particle_phase, double analyzer_rad,
                                            double delay_exponent, double t0,
                                            double uniform_draw) {
    const double xi = particle_phase - analyzer_rad;
    const double c = std::cos(2.0 * xi);
    const double s = std::fabs(std::sin(2.0 * xi));
    StationResponse out;
    out.outcome = c >= 0.0 ? +1 : -1;
    out.delay = t0 * uniform_draw * std::pow(s, delay_exponent);
    return out;
}

StreamPair sample_qt_oracle(AnalyzerSetting theta_a, AnalyzerSetting theta_b,
                            std::int64_t n_pairs, std::uint64_t seed,
                            std::string_view label_a, std::string_view label_b) {
    if (n_pairs < 1) throw std::invalid_argument("sample_qt_oracle: n_pairs must be >= 1");

    const auto joint = quantum::singlet_joint_probabilities(theta_a, theta_b);
    const std::vector<double> cum = {joint.p_pp, joint.p_pp + joint.p_pm,
                                     joint.p_pp + joint.p_pm + joint.p_mp, 1.0};
    static constexpr int outcomes_a[4] = {+1, +1, -1, -1};
    static constexpr int outcomes_b[4] = {+1, -1, +1, -1};

    RandomStream source(derive_seed(seed, {seed_tag::source}));
    StreamPair out;
    out.a.reserve(n_pairs);
    out.b.reserve(n_pairs);
    for (std::int64_t k = 0; k < n_pairs; ++k) {
        const std::size_t cell = source.categorical(cum);
        const double t = static_cast<double>(k);
        out.a.push_back(make_record(k, Station::A, label_a, theta_a.radians(),
                                    outcomes_a[cell], t));
        out.b.push_back(make_record(k, Station::B, label_b, theta_b.radians(),
                                    outcomes_b[cell], t));
    }
    return out;
}

StreamPair sample_factorizable(const FactorizableModel& model, const std::string& x,
                               const std::string& y, std::int64_t n_pairs,
                               std::uint64_t seed) {
    if (n_pairs < 1)
        throw std::invalid_argument("sample_factorizable: n_pairs must be >= 1");
    model.validate();
    const auto& pa = lookup(model.p_a, x, "sample_factorizable");
    const auto& pb = lookup(model.p_b, y, "sample_factorizable");
    const auto cum = cumulative(model.weights);

    RandomStream source(derive_seed(seed, {seed_tag::source}));
    RandomStream station_a(derive_seed(seed, {seed_tag::station_a}));
    RandomStream station_b(derive_seed(seed, {seed_tag::station_b}));

    StreamPair out;
    out.a.reserve(n_pairs);
    out.b.reserve(n_pairs);
    for (std::int64_t k = 0; k < n_pairs; ++k) {
        const std::size_t lambda = source.categorical(cum);
        const int a = station_a.sign_with_probability(pa[lambda]);
        const int b = station_b.sign_with_probability(pb[lambda]);
        const double t = static_cast<double>(k);
        out.a.push_back(make_record(k, Station::A, x, 0.0, a, t));
        out.b.push_back(make_record(k, Station::B, y, 0.0, b, t));
    }
    return out;
}

StreamPair sample_deterministic(const DeterministicSharedSpaceModel& model,
                                const std::string& x, const std::string& y,
                                std::int64_t n_pairs, std::uint64_t seed) {
    if (n_pairs < 1)
        throw std::invalid_argument("sample_deterministic: n_pairs must be >= 1");
    model.validate();
    const auto& ra = lookup(model.response_a, x, "sample_deterministic");
    const auto& rb = lookup(model.response_b, y, "sample_deterministic");
    const auto cum = cumulative(model.weights);

    RandomStream source(derive_seed(seed, {seed_tag::source}));
    StreamPair out;
    out.a.reserve(n_pairs);
    out.b.reserve(n_pairs);
    for (std::int64_t k = 0; k < n_pairs; ++k) {
        const std::size_t lambda = source.categorical(cum);
        const double t = static_cast<double>(k);
        out.a.push_back(make_record(k, Station::A, x, 0.0, ra[lambda], t));
        out.b.push_back(make_record(k, Station::B, y, 0.0, rb[lambda], t));
    }
    return out;
}

StreamPair sample_contextual_event(const ContextualEventModel& model,
                                   AnalyzerSetting alpha_a, AnalyzerSetting alpha_b,
                                   std::int64_t n_pairs, std::uint64_t seed,
                                   std::string_view label_a, std::string_view label_b) {
    if (n_pairs < 1)
        throw std::invalid_argument("sample_contextual_event: n_pairs must be >= 1");
    model.validate();

    RandomStream source(derive_seed(seed, {seed_tag::source}));
    RandomStream station_a(derive_seed(seed, {seed_tag::station_a}));
    RandomStream station_b(derive_seed(seed, {seed_tag::station_b}));

    StreamPair out;
    out.a.reserve(n_pairs);
    out.b.reserve(n_pairs);
    for (std::int64_t k = 0; k < n_pairs; ++k) {
        const double lambda = source.uniform(0.0, k_two_pi);
        const double emitted = static_cast<double>(k) * model.pair_spacing;

        // Each station sees only its own particle, setting and stream.
        const StationResponse resp_a = contextual_station_response(
            lambda, alpha_a.radians(), model.delay_exponent, model.t0, station_a.uniform());
        const StationResponse resp_b = contextual_station_response(
            lambda + 0.5 * k_pi, alpha_b.radians(), model.delay_exponent, model.t0,
            station_b.uniform());

        out.a.push_back(make_record(k, Station::A, label_a, alpha_a.radians(),
                                    resp_a.outcome, emitted + resp_a.delay));
        out.b.push_back(make_record(k, Station::B, label_b, alpha_b.radians(),
                                    resp_b.outcome, emitted + resp_b.delay));
    }
    return out;
}

StreamPair QtOracleSource::generate(const Setting& a, const Setting& b,
                                    std::int64_t n_pairs, std::uint64_t seed) const {
    return sample_qt_oracle(a.angle, b.angle, n_pairs, seed, a.label, b.label);
}

FactorizableSource::FactorizableSource(FactorizableModel model) : model_(std::move(model)) {
    model_.validate();
}

StreamPair FactorizableSource::generate(const Setting& a, const Setting& b,
                                        std::int64_t n_pairs, std::uint64_t seed) const {
    return sample_factorizable(model_, a.label, b.label, n_pairs, seed);
}

DeterministicSource::DeterministicSource(DeterministicSharedSpaceModel model)
    : model_(std::move(model)) {
    model_.validate();
}

StreamPair DeterministicSource::generate(const Setting& a, const Setting& b,
                                         std::int64_t n_pairs, std::uint64_t seed) const {
    return sample_deterministic(model_, a.label, b.label, n_pairs, seed);
}

ContextualSource::ContextualSource(ContextualEventModel model) : model_(model) {
    model_.validate();
}

StreamPair ContextualSource::generate(const Setting& a, const Setting& b,
                                      std::int64_t n_pairs, std::uint64_t seed) const {
    // Spin-convention settings drive photon-convention analyzers.
    const AnalyzerSetting alpha_a(a.angle.radians() / 2.0);
    const AnalyzerSetting alpha_b(b.angle.radians() / 2.0);
    StreamPair streams =
        sample_contextual_event(model_, alpha_a, alpha_b, n_pairs, seed, a.label, b.label);
    // Records carry the experiment-level (spin) setting, not the internal one.
    for (auto& r : streams.a) r.setting_rad = a.angle.radians();
    for (auto& r : streams.b) r.setting_rad = b.angle.radians();
    return streams;
}

std::vector<double> calibration_delta_grid(int points) {
    if (points < 2) throw std::invalid_argument("calibration_delta_grid: need >= 2 points");
    std::vector<double> grid(points);
    for (int j = 0; j < points; ++j)
        grid[j] = k_pi * static_cast<double>(j) / static_cast<double>(points - 1);
    return grid;
}

CalibrationReport calibrate_contextual(const ContextualEventModel& base,
                                       std::span<const double> exponent_grid,
                                       std::span<const double> window_grid,
                                       std::int64_t n_pairs, std::uint64_t seed) {
    if (exponent_grid.empty() || window_grid.empty())
        throw std::invalid_argument("calibrate_contextual: empty grid");
    if (n_pairs < 1)
        throw std::invalid_argument("calibrate_contextual: n_pairs must be >= 1");
    base.validate();

    CalibrationReport report;
    report.delta_grid = calibration_delta_grid();
    report.n_pairs = n_pairs;

    for (double d : exponent_grid) {
        ContextualEventModel model = base;
        model.delay_exponent = d;

        // One generation per grid point; every window reuses the streams.
        std::vector<std::vector<CorrelationEstimate>> per_window(window_grid.size());
        for (std::size_t j = 0; j < report.delta_grid.size(); ++j) {
            const std::uint64_t point_seed =
                derive_seed(seed, {seed_tag::calibration, static_cast<std::uint64_t>(j)});
            const Setting sa{"a", AnalyzerSetting(0.0)};
            const Setting sb{"b", AnalyzerSetting(report.delta_grid[j])};
            const ContextualSource source(model);
            const StreamPair streams = source.generate(sa, sb, n_pairs, point_seed);
            for (std::size_t w = 0; w < window_grid.size(); ++w) {
                const auto matched = match_coincidences(
                    streams.a, streams.b, CoincidenceWindow::width(window_grid[w]));
                CorrelationEstimate est;
                est.n_matched = static_cast<std::int64_t>(matched.size());
                if (matched.size() >= 2) est = estimate_correlation(matched);
                per_window[w].push_back(est);
            }
        }

        for (std::size_t w = 0; w < window_grid.size(); ++w) {
            CalibrationCell cell;
            cell.delay_exponent = d;
            cell.window = window_grid[w];
            cell.deviations.reserve(report.delta_grid.size());
            double worst = 0.0;
            for (std::size_t j = 0; j < report.delta_grid.size(); ++j) {
                const double target = -std::cos(report.delta_grid[j]);
                // A cell that matches almost nothing is useless: score it
                // with the worst possible deviation.
                const double dev = per_window[w][j].n_matched < 2
                                       ? 2.0
                                       : std::fabs(per_window[w][j].e_hat - target);
                cell.deviations.push_back(dev);
                worst = std::max(worst, dev);
            }
            cell.max_abs_deviation = worst;
            report.cells.push_back(std::move(cell));
        }
    }

    for (std::size_t i = 0; i < report.cells.size(); ++i)
        if (report.cells[i].max_abs_deviation <
            report.cells[report.best_cell].max_abs_deviation)
            report.best_cell = i;
    return report;
}

}  // namespace spce::hv

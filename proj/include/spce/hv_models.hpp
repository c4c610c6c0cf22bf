#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spce/angles.hpp"
#include "spce/records.hpp"

namespace spce::hv {

// ---------------------------------------------------------------------------
// Model parameterizations
// ---------------------------------------------------------------------------

/// Mixed ensemble of independent stochastic responses: a finite label set
/// with weights, and for each setting label a table of P(outcome = +1 | λ)
/// per station. Station outcomes are drawn independently inside each λ cell.
struct FactorizableModel {
    std::vector<double> weights;                         // P(λ), sums to 1
    std::map<std::string, std::vector<double>> p_a;      // label -> P(a=+1 | x, λ) per λ
    std::map<std::string, std::vector<double>> p_b;      // label -> P(b=+1 | y, λ) per λ

    void validate() const;
};

/// Shared-randomness model with predetermined outcomes: responses are fixed
/// +/-1 tables over (λ, setting); all randomness sits in the source draw.
struct DeterministicSharedSpaceModel {
    std::vector<double> weights;                         // P(λ), sums to 1
    std::map<std::string, std::vector<int>> response_a;  // label -> A(λ, x) in {+1, -1}
    std::map<std::string, std::vector<int>> response_b;  // label -> B(λ, y) in {+1, -1}

    void validate() const;
};

/// Event-based local model with per-station time delays. The source emits a
/// pair with a shared phase λ ~ U[0, 2π); particle A carries λ and particle B
/// carries λ + π/2 (orthogonal-pair convention). Each station computes
/// ξ = phase - α against its own analyzer angle α, outputs sign(cos 2ξ)
/// deterministically, and time-tags the event with delay
/// t0 * r * |sin 2ξ|^delay_exponent, r drawn from that station's own stream.
/// Statistics follow the photon convention -cos 2(αA - αB); spin-convention
/// settings θ map through α = θ/2 (see ContextualSource).
struct ContextualEventModel {
    double t0 = 1.0;               // delay scale, seconds
    double delay_exponent = 3.0;   // calibrated default; see calibrate_contextual
    double pair_spacing = 1000.0;  // emission period, seconds; >> t0

    /// Coincidence window giving the best singlet reproduction at the
    /// calibrated exponent.
    double default_window() const { return 0.02 * t0; }

    void validate() const;
};

/// Outcome and time delay of one station evaluation. Depends only on the
/// particle's own phase, the station's own setting and the station's own
/// random draw; no cross-station data enters.
struct StationResponse {
    int outcome;
    double delay;
};

StationResponse contextual_station_response(double particle_phase, double analyzer_rad,
                                            double delay_exponent, double t0,
                                            double uniform_draw);

// ---------------------------------------------------------------------------
// Samplers. All are pure functions of their arguments; per-station substreams
// are derived from the seed via derive_seed(seed, {station tag}).
// ---------------------------------------------------------------------------

/// Nonlocal reference sampler drawing pair outcomes directly from the
/// singlet joint law. Time tags are equal within a pair (ideal detectors).
StreamPair sample_qt_oracle(AnalyzerSetting theta_a, AnalyzerSetting theta_b,
                            std::int64_t n_pairs, std::uint64_t seed,
                            std::string_view label_a = "A", std::string_view label_b = "B");

/// Throws std::invalid_argument for setting labels the model does not define.
StreamPair sample_factorizable(const FactorizableModel& model, const std::string& x,
                               const std::string& y, std::int64_t n_pairs,
                               std::uint64_t seed);

StreamPair sample_deterministic(const DeterministicSharedSpaceModel& model,
                                const std::string& x, const std::string& y,
                                std::int64_t n_pairs, std::uint64_t seed);

/// alpha_a / alpha_b are the stations' internal analyzer angles (photon
/// convention). Emits nontrivial time tags: pair k is emitted at
/// k * pair_spacing and each station adds its own delay.
StreamPair sample_contextual_event(const ContextualEventModel& model,
                                   AnalyzerSetting alpha_a, AnalyzerSetting alpha_b,
                                   std::int64_t n_pairs, std::uint64_t seed,
                                   std::string_view label_a = "A",
                                   std::string_view label_b = "B");

// ---------------------------------------------------------------------------
// PairSource adapters (used by the CHSH runner and the CLI)
// ---------------------------------------------------------------------------

class QtOracleSource final : public PairSource {
public:
    StreamPair generate(const Setting& a, const Setting& b, std::int64_t n_pairs,
                        std::uint64_t seed) const override;
};

class FactorizableSource final : public PairSource {
public:
    explicit FactorizableSource(FactorizableModel model);
    StreamPair generate(const Setting& a, const Setting& b, std::int64_t n_pairs,
                        std::uint64_t seed) const override;
    const FactorizableModel& model() const { return model_; }

private:
    FactorizableModel model_;
};

class DeterministicSource final : public PairSource {
public:
    explicit DeterministicSource(DeterministicSharedSpaceModel model);
    StreamPair generate(const Setting& a, const Setting& b, std::int64_t n_pairs,
                        std::uint64_t seed) const override;
    const DeterministicSharedSpaceModel& model() const { return model_; }

private:
    DeterministicSharedSpaceModel model_;
};

/// Presents the contextual model as a spin-convention source: a setting θ is
/// mapped to the internal analyzer angle α = θ/2, so coincidence-selected
/// statistics approximate -cos(θA - θB).
class ContextualSource final : public PairSource {
public:
    explicit ContextualSource(ContextualEventModel model);
    StreamPair generate(const Setting& a, const Setting& b, std::int64_t n_pairs,
                        std::uint64_t seed) const override;
    const ContextualEventModel& model() const { return model_; }

private:
    ContextualEventModel model_;
};

// ---------------------------------------------------------------------------
// Calibration of the contextual model
// ---------------------------------------------------------------------------

struct CalibrationCell {
    double delay_exponent;
    double window;                   // seconds
    double max_abs_deviation;        // vs -cos(Δ) over the Δ grid
    std::vector<double> deviations;  // per Δ grid point
};

struct CalibrationReport {
    std::vector<double> delta_grid;     // spin-convention Δ values, radians
    std::vector<CalibrationCell> cells; // row-major over (exponent, window)
    std::size_t best_cell = 0;          // index of minimal max_abs_deviation
    std::int64_t n_pairs = 0;
};

/// Sweeps (delay exponent, window) over the given grids; for each cell,
/// estimates the coincidence-selected correlation on a fixed 13-point Δ grid
/// in [0, π] (spin settings θA = 0, θB = Δ) and records the maximum absolute
/// deviation from -cos Δ. Per-point streams are derived from
/// (seed, calibration tag, point index) only, so a single-cell sweep
/// reproduces the matching cell of a full-grid sweep exactly.
CalibrationReport calibrate_contextual(const ContextualEventModel& base,
                                       std::span<const double> exponent_grid,
                                       std::span<const double> window_grid,
                                       std::int64_t n_pairs, std::uint64_t seed);

/// The fixed Δ grid used by calibrate_contextual and the acceptance sweeps.
std::vector<double> calibration_delta_grid(int points = 13);

}  // namespace spce::hv

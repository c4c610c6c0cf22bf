#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace spce::ts {

/// An observed series; known_mean, when set, replaces the sample mean in
/// autocovariance estimates.
struct TimeSeriesSample {
    std::vector<double> values;
    std::optional<double> known_mean;
};

struct DescriptiveStats {
    std::int64_t n = 0;
    double mean = 0.0;
    double variance = 0.0;  // n-1 denominator
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double min = 0.0;
    double max = 0.0;
};

DescriptiveStats descriptive_stats(std::span<const double> series);

struct Histogram {
    std::vector<double> edges;        // bins + 1 edges, equal width
    std::vector<std::int64_t> counts; // sum equals n
};

/// Equal-width histogram over [min, max]; the rightmost bin is closed.
/// Throws std::invalid_argument when all values are equal.
Histogram histogram(std::span<const double> series, int bins);

/// (theoretical standard-normal quantile, ordered value) pairs using the
/// Blom plotting positions (i - 3/8) / (n + 1/4). Requires n >= 8.
std::vector<std::pair<double, double>> normal_scores(std::span<const double> series);

/// The n-k pairs (z_t, z_{t+k}) in order; requires 1 <= k < n.
std::vector<std::pair<double, double>> lagged_pairs(std::span<const double> series, int lag);

/// Sample autocorrelations rho(0..max_lag) with the biased (1/n)
/// autocovariance denominator, which keeps the sequence positive
/// semidefinite. Throws std::domain_error on a zero-variance series.
std::vector<double> autocorrelation(std::span<const double> series, int max_lag,
                                    std::optional<double> known_mean = std::nullopt);

/// One sweep of the Durbin-Levinson recursion on an autocorrelation
/// sequence rho(0..order).
struct LevinsonResult {
    std::vector<double> coefficients;        // AR coefficients at the final order
    std::vector<double> partials;            // reflection coefficients phi_kk, k = 1..order
    double prediction_error_variance = 1.0;  // in rho units (starts at 1)
};

LevinsonResult levinson_recursion(std::span<const double> rho, int order);

/// Partial autocorrelations phi_kk for k = 1..(rho.size() - 1).
std::vector<double> pacf_from_acf(std::span<const double> rho);

struct CorrelogramReport {
    std::int64_t n = 0;
    double band = 0.0;             // +/- 1.96 / sqrt(n)
    std::vector<double> acf;       // rho(0..K)
    std::vector<double> pacf;      // phi_kk for k = 0..K, phi_00 := 1; empty for acf()
};

CorrelogramReport acf(std::span<const double> series, int max_lag,
                      std::optional<double> known_mean = std::nullopt);
CorrelogramReport pacf(std::span<const double> series, int max_lag,
                       std::optional<double> known_mean = std::nullopt);

/// A stationary autoregressive model. Construction verifies that every root
/// of 1 - phi_1 z - ... - phi_p z^p lies strictly outside the unit circle
/// and that the noise variance is positive.
class ARModel {
public:
    ARModel(std::vector<double> coefficients, double noise_variance);

    int order() const noexcept { return static_cast<int>(coefficients_.size()); }
    const std::vector<double>& coefficients() const noexcept { return coefficients_; }
    double noise_variance() const noexcept { return noise_variance_; }

private:
    std::vector<double> coefficients_;
    double noise_variance_;
};

/// Drives the AR recursion with Gaussian white noise from zero initial
/// conditions, discarding burn_in values before recording n.
TimeSeriesSample simulate_ar(const ARModel& model, std::int64_t n, std::uint64_t seed,
                             std::int64_t burn_in = 1000);

/// Yule-Walker fit of the given order via Durbin-Levinson on the sample
/// autocorrelations; the noise variance is the final prediction-error
/// variance scaled by the sample autocovariance at lag 0.
/// Requires n >= 10 * order.
ARModel fit_ar(std::span<const double> series, int order);

/// Largest lag whose partial autocorrelation exits the selection band,
/// provided all larger lags up to max_lag stay inside; 0 when none exits.
/// The band is Bonferroni-corrected across the max_lag tested lags
/// (family-wise level family_alpha), so a white-noise series selects 0 with
/// probability about 1 - family_alpha.
int select_order(std::span<const double> series, int max_lag, double family_alpha = 0.05);

/// Exact autocorrelations rho(0..max_lag) of a stationary AR model: the
/// Yule-Walker system solved for rho(1..p), then extended by the recursion.
std::vector<double> theoretical_acf(const ARModel& model, int max_lag);

}  // namespace spce::ts

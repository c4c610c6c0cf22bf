#include "spce/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "spce/rng.hpp"
#include "spce/stats.hpp"

namespace spce::ts {

DescriptiveStats descriptive_stats(std::span<const double> series) {
    const std::int64_t n = static_cast<std::int64_t>(series.size());
    if (n < 2) throw std::invalid_argument("descriptive_stats: need at least 2 points");

    DescriptiveStats out;
    out.n = n;
    double sum = 0.0;
    out.min = series[0];
    out.max = series[0];
    for (double v : series) {
        sum += v;
        out.min = std::min(out.min, v);
        out.max = std::max(out.max, v);
    }
    out.mean = sum / static_cast<double>(n);

    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : series) {
        const double d = v - out.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    out.variance = m2 / static_cast<double>(n - 1);
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    if (m2 > 0.0) {
        out.skewness = m3 / std::pow(m2, 1.5);
        out.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }
    return out;
}

Histogram histogram(std::span<const double> series, int bins) {
    if (series.empty()) throw std::invalid_argument("histogram: empty series");
    if (bins < 1) throw std::invalid_argument("histogram: need at least one bin");
    const auto [lo_it, hi_it] = std::minmax_element(series.begin(), series.end());
    const double lo = *lo_it, hi = *hi_it;
    if (lo == hi)
        throw std::invalid_argument("histogram: degenerate range (all values equal)");

    Histogram h;
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i)
        h.edges[static_cast<std::size_t>(i)] =
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    for (double v : series) {
        int idx = static_cast<int>((v - lo) / (hi - lo) * bins);
        idx = std::clamp(idx, 0, bins - 1);  // closes the rightmost bin
        ++h.counts[static_cast<std::size_t>(idx)];
    }
    return h;
}

std::vector<std::pair<double, double>> normal_scores(std::span<const double> series) {
    const std::size_t n = series.size();
    if (n < 8) throw std::invalid_argument("normal_scores: need at least 8 points");
    std::vector<double> sorted(series.begin(), series.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::pair<double, double>> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double p = (static_cast<double>(i + 1) - 0.375) /
                         (static_cast<double>(n) + 0.25);
        out.emplace_back(normal_quantile(p), sorted[i]);
    }
    return out;
}

std::vector<std::pair<double, double>> lagged_pairs(std::span<const double> series, int lag) {
    const std::int64_t n = static_cast<std::int64_t>(series.size());
    if (lag < 1 || lag >= n)
        throw std::invalid_argument("lagged_pairs: lag must satisfy 1 <= k < n");
    std::vector<std::pair<double, double>> out;
    out.reserve(static_cast<std::size_t>(n - lag));
    for (std::int64_t t = 0; t + lag < n; ++t)
        out.emplace_back(series[static_cast<std::size_t>(t)],
                         series[static_cast<std::size_t>(t + lag)]);
    return out;
}

std::vector<double> autocorrelation(std::span<const double> series, int max_lag,
                                    std::optional<double> known_mean) {
    const std::int64_t n = static_cast<std::int64_t>(series.size());
    if (n < 2) throw std::invalid_argument("autocorrelation: need at least 2 points");
    if (max_lag < 0 || max_lag >= n)
        throw std::invalid_argument("autocorrelation: max_lag must satisfy 0 <= K < n");

    double mean;
    if (known_mean) {
        mean = *known_mean;
    } else {
        mean = 0.0;
        for (double v : series) mean += v;
        mean /= static_cast<double>(n);
    }

    std::vector<double> gamma(static_cast<std::size_t>(max_lag) + 1, 0.0);
    for (int k = 0; k <= max_lag; ++k) {
        double acc = 0.0;
        for (std::int64_t t = 0; t + k < n; ++t)
            acc += (series[static_cast<std::size_t>(t)] - mean) *
                   (series[static_cast<std::size_t>(t + k)] - mean);
        gamma[static_cast<std::size_t>(k)] = acc / static_cast<double>(n);
    }
    if (!(gamma[0] > 0.0))
        throw std::domain_error("autocorrelation: zero sample variance");
    std::vector<double> rho(gamma.size());
    for (std::size_t k = 0; k < gamma.size(); ++k) rho[k] = gamma[k] / gamma[0];
    return rho;
}

LevinsonResult levinson_recursion(std::span<const double> rho, int order) {
    if (order < 0) throw std::invalid_argument("levinson_recursion: negative order");
    if (static_cast<int>(rho.size()) < order + 1)
        throw std::invalid_argument("levinson_recursion: need rho(0..order)");
    if (rho[0] != 1.0)
        throw std::invalid_argument("levinson_recursion: rho(0) must be 1");

    LevinsonResult res;
    res.prediction_error_variance = 1.0;
    std::vector<double> phi;  // coefficients at the current order
    for (int k = 1; k <= order; ++k) {
        double num = rho[static_cast<std::size_t>(k)];
        for (int j = 1; j < k; ++j)
            num -= phi[static_cast<std::size_t>(j - 1)] * rho[static_cast<std::size_t>(k - j)];
        if (!(res.prediction_error_variance > 0.0))
            throw std::domain_error(
                "levinson_recursion: prediction error variance vanished (degenerate ACF)");
        const double kappa = num / res.prediction_error_variance;

        std::vector<double> next(static_cast<std::size_t>(k));
        for (int j = 0; j < k - 1; ++j)
            next[static_cast<std::size_t>(j)] =
                phi[static_cast<std::size_t>(j)] -
                kappa * phi[static_cast<std::size_t>(k - 2 - j)];
        next[static_cast<std::size_t>(k - 1)] = kappa;
        phi = std::move(next);

        res.partials.push_back(kappa);
        res.prediction_error_variance *= 1.0 - kappa * kappa;
    }
    res.coefficients = std::move(phi);
    return res;
}

std::vector<double> pacf_from_acf(std::span<const double> rho) {
    if (rho.empty()) throw std::invalid_argument("pacf_from_acf: empty input");
    const int order = static_cast<int>(rho.size()) - 1;
    return levinson_recursion(rho, order).partials;
}

CorrelogramReport acf(std::span<const double> series, int max_lag,
                      std::optional<double> known_mean) {
    CorrelogramReport report;
    report.n = static_cast<std::int64_t>(series.size());
    report.band = 1.96 / std::sqrt(static_cast<double>(report.n));
    report.acf = autocorrelation(series, max_lag, known_mean);
    return report;
}

CorrelogramReport pacf(std::span<const double> series, int max_lag,
                       std::optional<double> known_mean) {
    CorrelogramReport report = acf(series, max_lag, known_mean);
    report.pacf.assign(1, 1.0);  // phi_00 by convention
    const auto partials = pacf_from_acf(report.acf);
    report.pacf.insert(report.pacf.end(), partials.begin(), partials.end());
    return report;
}

namespace {

/// Largest modulus among the inverse characteristic roots; stationarity
/// demands it be strictly below 1.
double companion_spectral_radius(const std::vector<double>& coeffs) {
    const int p = static_cast<int>(coeffs.size());
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
    for (int j = 0; j < p; ++j) companion(0, j) = coeffs[static_cast<std::size_t>(j)];
    for (int i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
    const Eigen::VectorXcd eigs = companion.eigenvalues();
    double radius = 0.0;
    for (int i = 0; i < eigs.size(); ++i) radius = std::max(radius, std::abs(eigs[i]));
    return radius;
}

}  // namespace

ARModel::ARModel(std::vector<double> coefficients, double noise_variance)
    : coefficients_(std::move(coefficients)), noise_variance_(noise_variance) {
    if (!(noise_variance_ > 0.0) || !std::isfinite(noise_variance_))
        throw std::invalid_argument("ARModel: noise variance must be > 0");
    for (double c : coefficients_)
        if (!std::isfinite(c)) throw std::invalid_argument("ARModel: coefficients must be finite");
    if (!coefficients_.empty()) {
        // |inverse root| < 1 - 1e-9 is |root| > 1 + 1e-9 up to rounding.
        if (companion_spectral_radius(coefficients_) >= 1.0 - 1e-9)
            throw std::invalid_argument(
                "ARModel: not stationary (characteristic root on or inside the unit circle)");
    }
}

TimeSeriesSample simulate_ar(const ARModel& model, std::int64_t n, std::uint64_t seed,
                             std::int64_t burn_in) {
    if (n < 1) throw std::invalid_argument("simulate_ar: n must be >= 1");
    if (burn_in < 0) throw std::invalid_argument("simulate_ar: burn_in must be >= 0");

    RandomStream noise(derive_seed(seed, {seed_tag::ar_noise}));
    const double sd = std::sqrt(model.noise_variance());
    const int p = model.order();
    const auto& phi = model.coefficients();

    const std::int64_t total = n + burn_in;
    std::vector<double> z(static_cast<std::size_t>(total), 0.0);
    for (std::int64_t t = 0; t < total; ++t) {
        double v = sd * noise.normal();
        for (int i = 1; i <= p && t - i >= 0; ++i)
            v += phi[static_cast<std::size_t>(i - 1)] * z[static_cast<std::size_t>(t - i)];
        z[static_cast<std::size_t>(t)] = v;
    }
    z.erase(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(burn_in));

    TimeSeriesSample sample;
    sample.values = std::move(z);
    sample.known_mean = 0.0;
    return sample;
}

ARModel fit_ar(std::span<const double> series, int order) {
    if (order < 0) throw std::invalid_argument("fit_ar: negative order");
    const std::int64_t n = static_cast<std::int64_t>(series.size());
    if (n < 10 * static_cast<std::int64_t>(order) || n < 2)
        throw std::invalid_argument("fit_ar: need at least 10 * order points");

    // Biased lag-0 autocovariance, to scale the prediction error variance.
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(n);
    double gamma0 = 0.0;
    for (double v : series) gamma0 += (v - mean) * (v - mean);
    gamma0 /= static_cast<double>(n);

    const auto rho = autocorrelation(series, order);
    const auto lev = levinson_recursion(rho, order);
    const double noise_var = lev.prediction_error_variance * gamma0;
    if (!(noise_var > 0.0))
        throw std::domain_error("fit_ar: degenerate fit (nonpositive noise variance)");
    return ARModel(lev.coefficients, noise_var);
}

int select_order(std::span<const double> series, int max_lag, double family_alpha) {
    const std::int64_t n = static_cast<std::int64_t>(series.size());
    if (max_lag < 1) throw std::invalid_argument("select_order: max_lag must be >= 1");
    if (static_cast<std::int64_t>(max_lag) * 4 >= n)
        throw std::invalid_argument("select_order: max_lag must be below n/4");
    if (!(family_alpha > 0.0 && family_alpha < 1.0))
        throw std::invalid_argument("select_order: family_alpha must be in (0, 1)");

    const auto partials = pacf_from_acf(autocorrelation(series, max_lag));
    // Family-wise band: each of the max_lag lags is tested at
    // family_alpha / max_lag, so a white-noise series stays fully inside
    // with probability about 1 - family_alpha.
    const double band =
        normal_quantile(1.0 - family_alpha / (2.0 * static_cast<double>(max_lag))) /
        std::sqrt(static_cast<double>(n));

    int order = 0;
    for (int k = 1; k <= max_lag; ++k)
        if (std::fabs(partials[static_cast<std::size_t>(k - 1)]) > band) order = k;
    return order;
}

std::vector<double> theoretical_acf(const ARModel& model, int max_lag) {
    if (max_lag < 0) throw std::invalid_argument("theoretical_acf: negative max_lag");
    const int p = model.order();
    const auto& phi = model.coefficients();

    std::vector<double> rho(static_cast<std::size_t>(std::max(max_lag, p)) + 1, 0.0);
    rho[0] = 1.0;
    if (p > 0) {
        // Yule-Walker equations for rho(1..p):
        // rho(k) = sum_i phi_i rho(|k - i|), the i = k term contributing
        // phi_k rho(0) to the right-hand side.
        Eigen::MatrixXd m = Eigen::MatrixXd::Identity(p, p);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
        for (int k = 1; k <= p; ++k) {
            b(k - 1) = phi[static_cast<std::size_t>(k - 1)];
            for (int i = 1; i <= p; ++i) {
                const int j = std::abs(k - i);
                if (j >= 1) m(k - 1, j - 1) -= phi[static_cast<std::size_t>(i - 1)];
            }
        }
        const Eigen::VectorXd head = m.partialPivLu().solve(b);
        for (int k = 1; k <= p; ++k) rho[static_cast<std::size_t>(k)] = head(k - 1);
        for (int k = p + 1; k <= max_lag; ++k) {
            double acc = 0.0;
            for (int i = 1; i <= p; ++i)
                acc += phi[static_cast<std::size_t>(i - 1)] *
                       rho[static_cast<std::size_t>(k - i)];
            rho[static_cast<std::size_t>(k)] = acc;
        }
    }
    rho.resize(static_cast<std::size_t>(max_lag) + 1);
    return rho;
}

}  // namespace spce::ts

#include "spce/coincidence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "spce/rng.hpp"

namespace spce {

namespace {

void require_time_sorted(const Stream& s, const char* name) {
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i].time_tag < s[i - 1].time_tag)
            throw std::invalid_argument(std::string("match_coincidences: stream ") + name +
                                        " is not sorted by time_tag");
}

std::vector<MatchedPair> match_by_pair_id(const Stream& a, const Stream& b) {
    if (a.size() != b.size())
        throw std::invalid_argument(
            "match_coincidences: unwindowed matching requires equal pair_id sets");
    std::unordered_map<std::int64_t, std::size_t> index_b;
    index_b.reserve(b.size());
    for (std::size_t j = 0; j < b.size(); ++j) {
        if (!index_b.emplace(b[j].pair_id, j).second)
            throw std::invalid_argument(
                "match_coincidences: duplicate pair_id in stream B");
    }
    std::vector<MatchedPair> out;
    out.reserve(a.size());
    for (const auto& ra : a) {
        auto it = index_b.find(ra.pair_id);
        if (it == index_b.end())
            throw std::invalid_argument(
                "match_coincidences: unwindowed matching requires equal pair_id sets");
        out.push_back({ra.outcome, b[it->second].outcome});
        index_b.erase(it);  // also rejects duplicate pair_ids in stream A
    }
    return out;
}

struct Candidate {
    double distance;
    std::size_t i;
    std::size_t j;
};

}  // namespace

CoincidenceWindow CoincidenceWindow::width(double seconds) {
    if (!(seconds >= 0.0) || !std::isfinite(seconds))
        throw std::invalid_argument("CoincidenceWindow: width must be finite and >= 0");
    return CoincidenceWindow(false, seconds);
}

std::vector<MatchedPair> match_coincidences(const Stream& stream_a, const Stream& stream_b,
                                            const CoincidenceWindow& window) {
    if (window.is_unwindowed()) return match_by_pair_id(stream_a, stream_b);

    require_time_sorted(stream_a, "A");
    require_time_sorted(stream_b, "B");

    const double w = window.seconds();
    std::vector<Candidate> candidates;
    std::size_t lo = 0;
    for (std::size_t i = 0; i < stream_a.size(); ++i) {
        const double t = stream_a[i].time_tag;
        while (lo < stream_b.size() && stream_b[lo].time_tag < t - w) ++lo;
        for (std::size_t j = lo; j < stream_b.size() && stream_b[j].time_tag <= t + w; ++j)
            candidates.push_back({std::fabs(t - stream_b[j].time_tag), i, j});
    }

    // Nearest pairs first; ties broken by the symmetric key i + j so that
    // swapping the streams transposes the result.
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& x, const Candidate& y) {
                  if (x.distance != y.distance) return x.distance < y.distance;
                  if (x.i + x.j != y.i + y.j) return x.i + x.j < y.i + y.j;
                  return x.i < y.i;
              });

    std::vector<char> used_a(stream_a.size(), 0), used_b(stream_b.size(), 0);
    std::vector<MatchedPair> out;
    for (const auto& c : candidates) {
        if (used_a[c.i] || used_b[c.j]) continue;
        used_a[c.i] = used_b[c.j] = 1;
        out.push_back({stream_a[c.i].outcome, stream_b[c.j].outcome});
    }
    return out;
}

CorrelationEstimate estimate_correlation(std::span<const MatchedPair> pairs) {
    if (pairs.size() < 2)
        throw std::invalid_argument("estimate_correlation: need at least 2 matched pairs");
    double sum = 0.0;
    for (const auto& p : pairs) sum += static_cast<double>(p.outcome_a * p.outcome_b);
    CorrelationEstimate est;
    est.n_matched = static_cast<std::int64_t>(pairs.size());
    est.e_hat = sum / static_cast<double>(est.n_matched);
    est.std_error = std::sqrt(std::max(0.0, 1.0 - est.e_hat * est.e_hat) /
                              static_cast<double>(est.n_matched));
    return est;
}

double chsh_statistic(double e_ab, double e_ab_prime, double e_a_prime_b,
                      double e_a_prime_b_prime) {
    for (double e : {e_ab, e_ab_prime, e_a_prime_b, e_a_prime_b_prime})
        if (!(std::fabs(e) <= 1.0))
            throw std::domain_error("chsh_statistic: correlations must be in [-1, 1]");
    return std::fabs(e_ab - e_ab_prime) + std::fabs(e_a_prime_b + e_a_prime_b_prime);
}

std::uint64_t chsh_pass_seed(std::uint64_t master_seed, std::uint64_t pass_index) {
    return derive_seed(master_seed, {seed_tag::chsh_pass, pass_index});
}

CHSHResult run_chsh_experiment(const PairSource& source, const Setting& a,
                               const Setting& a_prime, const Setting& b,
                               const Setting& b_prime, std::int64_t n_pairs,
                               const CoincidenceWindow& window, std::uint64_t seed) {
    auto pass = [&](const Setting& sa, const Setting& sb,
                    std::uint64_t pass_index) -> SettingPairEstimate {
        const std::uint64_t pass_seed = chsh_pass_seed(seed, pass_index);
        const StreamPair streams = source.generate(sa, sb, n_pairs, pass_seed);
        const auto matched = match_coincidences(streams.a, streams.b, window);
        return {sa, sb, estimate_correlation(matched)};
    };

    CHSHResult result;
    result.ab = pass(a, b, 0);
    result.ab_prime = pass(a, b_prime, 1);
    result.a_prime_b = pass(a_prime, b, 2);
    result.a_prime_b_prime = pass(a_prime, b_prime, 3);

    result.s = chsh_statistic(result.ab.estimate.e_hat, result.ab_prime.estimate.e_hat,
                              result.a_prime_b.estimate.e_hat,
                              result.a_prime_b_prime.estimate.e_hat);
    const double v = result.ab.estimate.std_error * result.ab.estimate.std_error +
                     result.ab_prime.estimate.std_error * result.ab_prime.estimate.std_error +
                     result.a_prime_b.estimate.std_error * result.a_prime_b.estimate.std_error +
                     result.a_prime_b_prime.estimate.std_error *
                         result.a_prime_b_prime.estimate.std_error;
    result.s_std_error = std::sqrt(v);
    return result;
}

}  // namespace spce

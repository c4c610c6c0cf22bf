#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spce/records.hpp"

namespace spce {

/// Pair-matching rule: either a maximum time-tag distance W >= 0, or the
/// "unwindowed" sentinel that matches records by pair_id.
class CoincidenceWindow {
public:
    static CoincidenceWindow unwindowed() { return CoincidenceWindow(true, 0.0); }
    static CoincidenceWindow width(double seconds);

    bool is_unwindowed() const noexcept { return unwindowed_; }
    double seconds() const noexcept { return seconds_; }

private:
    CoincidenceWindow(bool unwindowed, double seconds)
        : unwindowed_(unwindowed), seconds_(seconds) {}
    bool unwindowed_;
    double seconds_;
};

struct MatchedPair {
    int outcome_a;
    int outcome_b;
};

/// Greedy nearest-in-time matching: candidate pairs with |tA - tB| <= W are
/// taken in order of increasing time distance, each record consumed at most
/// once. Both streams must be sorted by time_tag (throws otherwise).
/// Unwindowed mode requires the two streams to carry equal pair_id sets and
/// matches by pair_id.
std::vector<MatchedPair> match_coincidences(const Stream& stream_a, const Stream& stream_b,
                                            const CoincidenceWindow& window);

struct CorrelationEstimate {
    double e_hat = 0.0;
    std::int64_t n_matched = 0;
    double std_error = 0.0;  // sqrt((1 - e_hat^2) / n_matched) for +/-1 products
};

/// Mean outcome product over matched pairs; needs at least 2 pairs.
CorrelationEstimate estimate_correlation(std::span<const MatchedPair> pairs);

/// |e_ab - e_ab'| + |e_a'b + e_a'b'|. Inputs must lie in [-1, 1]; the result
/// lies in [0, 4].
double chsh_statistic(double e_ab, double e_ab_prime, double e_a_prime_b,
                      double e_a_prime_b_prime);

struct SettingPairEstimate {
    Setting setting_a;
    Setting setting_b;
    CorrelationEstimate estimate;
};

/// Seed of pass i (0..3) of the four-settings protocol; exposed so callers
/// that persist per-pass event logs reproduce run_chsh_experiment exactly.
std::uint64_t chsh_pass_seed(std::uint64_t master_seed, std::uint64_t pass_index);

struct CHSHResult {
    SettingPairEstimate ab;
    SettingPairEstimate ab_prime;
    SettingPairEstimate a_prime_b;
    SettingPairEstimate a_prime_b_prime;
    double s = 0.0;
    double s_std_error = 0.0;  // quadrature sum of the four std errors
};

/// Runs the four-settings protocol: four independent generation + matching +
/// estimation passes with fresh derived seeds (the passes share no state,
/// mirroring incompatible experimental settings), then assembles the CHSH
/// combination.
CHSHResult run_chsh_experiment(const PairSource& source, const Setting& a,
                               const Setting& a_prime, const Setting& b,
                               const Setting& b_prime, std::int64_t n_pairs,
                               const CoincidenceWindow& window, std::uint64_t seed);

}  // namespace spce

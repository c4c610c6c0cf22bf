#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace spce::purity {

/// Ordered sequence over a two-letter alphabet {0, 1}.
/// n1 counts the 0s and n2 the 1s.
class BinarySequence {
public:
    explicit BinarySequence(std::vector<int> symbols);
    static BinarySequence from_string(std::string_view s);
    /// Binarize a real series: 1 above the sample median, 0 below,
    /// points exactly at the median dropped.
    static BinarySequence from_reals_by_median(std::span<const double> series);

    const std::vector<int>& symbols() const noexcept { return symbols_; }
    std::int64_t n1() const noexcept { return n1_; }
    std::int64_t n2() const noexcept { return n2_; }
    std::int64_t size() const noexcept { return static_cast<std::int64_t>(symbols_.size()); }

private:
    std::vector<int> symbols_;
    std::int64_t n1_ = 0;
    std::int64_t n2_ = 0;
};

/// Number of maximal constant blocks. Throws on an empty sequence.
std::int64_t count_runs(const BinarySequence& seq);

struct RunsTestReport {
    std::int64_t n1 = 0;
    std::int64_t n2 = 0;
    std::int64_t runs = 0;
    double expected_runs = 0.0;
    double var_runs = 0.0;
    double z = 0.0;
    double p_value = 1.0;
    /// Normal approximation is considered unreliable below min(n1, n2) = 10.
    bool normal_approx_reliable = false;
};

/// Wald-Wolfowitz runs test. Requires both symbols present; a single-symbol
/// sequence is degenerate and throws std::domain_error.
RunsTestReport runs_test(const BinarySequence& seq);

struct MannWhitneyReport {
    double u = 0.0;           // min(U1, U2)
    double u1 = 0.0;          // n1*n2 + n1(n1+1)/2 - R1
    double rank_sum_1 = 0.0;  // R1, mid-ranks
    double z = 0.0;           // (U1 - n1*n2/2) / sigma, tie-corrected
    double p_value = 1.0;     // two-sided
    std::int64_t n1 = 0;
    std::int64_t n2 = 0;
    bool exact = false;       // p from exact enumeration rather than normal law
};

/// Mann-Whitney U with mid-ranks for ties. The p-value comes from exact
/// enumeration of the permutation null when either sample is smaller than 8
/// (and the subset count is tractable), otherwise from the tie-corrected
/// normal approximation. Throws std::invalid_argument on empty samples.
MannWhitneyReport mann_whitney_u(std::span<const double> sample1,
                                 std::span<const double> sample2);

struct PurityPairTest {
    int block_i;
    int block_j;
    double u;
    double p_value;
};

struct PurityReport {
    int blocks = 0;
    std::vector<PurityPairTest> pairwise;
    bool runs_degenerate = false;
    RunsTestReport runs;       // meaningful only when !runs_degenerate
    int tests_performed = 0;   // Bonferroni family size
    double alpha = 0.05;
    bool flagged = false;      // any corrected p below alpha
};

/// Splits the series into k contiguous blocks (each at least 8 long), runs
/// all pairwise Mann-Whitney tests between blocks plus a runs test on the
/// above/below-median binarization of the full series, and flags the
/// family-wise result under Bonferroni correction at level 0.05.
PurityReport split_sample_purity(std::span<const double> series, int blocks);

/// Same harness for a binary sequence: the runs test acts on the sequence
/// itself and the rank tests on its 0/1 values.
PurityReport split_sample_purity(const BinarySequence& seq, int blocks);

}  // namespace spce::purity

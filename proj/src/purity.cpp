#include "spce/purity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "spce/stats.hpp"

namespace spce::purity {

namespace {

/// Mid-ranks (1-based, ties averaged) of the pooled sorted values.
std::vector<double> mid_ranks(std::vector<double> pooled_sorted) {
    const std::size_t n = pooled_sorted.size();
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && pooled_sorted[j + 1] == pooled_sorted[i]) ++j;
        const double r = 0.5 * static_cast<double>(i + 1 + j + 1);
        for (std::size_t k = i; k <= j; ++k) ranks[k] = r;
        i = j + 1;
    }
    return ranks;
}

double binomial_or_cap(std::int64_t n, std::int64_t k, double cap) {
    k = std::min(k, n - k);
    double c = 1.0;
    for (std::int64_t i = 1; i <= k; ++i) {
        c *= static_cast<double>(n - k + i) / static_cast<double>(i);
        if (c > cap) return cap + 1.0;
    }
    return c;
}

// Exact permutation null of U: enumerate every way to pick which of the n
// pooled observations form the smaller sample, count the fraction with
// min(U1, U2) at or below the observed value.
double exact_min_u_p_value(const std::vector<double>& pooled_ranks, std::int64_t n_small,
                           std::int64_t n_large, double u_observed) {
    const std::int64_t n = n_small + n_large;
    const double nn = static_cast<double>(n_small) * static_cast<double>(n_large);
    std::vector<std::int64_t> idx(n_small);
    std::iota(idx.begin(), idx.end(), 0);

    std::int64_t at_or_below = 0, total = 0;
    const double tol = 1e-9;
    while (true) {
        double rank_sum = 0.0;
        for (std::int64_t i : idx) rank_sum += pooled_ranks[static_cast<std::size_t>(i)];
        const double u_side =
            nn + 0.5 * static_cast<double>(n_small) * static_cast<double>(n_small + 1) -
            rank_sum;
        const double u = std::min(u_side, nn - u_side);
        if (u <= u_observed + tol) ++at_or_below;
        ++total;

        // Next combination in lexicographic order.
        std::int64_t k = n_small - 1;
        while (k >= 0 && idx[static_cast<std::size_t>(k)] == n - n_small + k) --k;
        if (k < 0) break;
        ++idx[static_cast<std::size_t>(k)];
        for (std::int64_t m = k + 1; m < n_small; ++m)
            idx[static_cast<std::size_t>(m)] = idx[static_cast<std::size_t>(m - 1)] + 1;
    }
    return static_cast<double>(at_or_below) / static_cast<double>(total);
}

}  // namespace

BinarySequence::BinarySequence(std::vector<int> symbols) : symbols_(std::move(symbols)) {
    for (int s : symbols_) {
        if (s == 0)
            ++n1_;
        else if (s == 1)
            ++n2_;
        else
            throw std::invalid_argument("BinarySequence: symbols must be 0 or 1");
    }
}

BinarySequence BinarySequence::from_string(std::string_view s) {
    std::vector<int> symbols;
    symbols.reserve(s.size());
    for (char c : s) {
        if (c == '0')
            symbols.push_back(0);
        else if (c == '1')
            symbols.push_back(1);
        else
            throw std::invalid_argument("BinarySequence: characters must be '0' or '1'");
    }
    return BinarySequence(std::move(symbols));
}

BinarySequence BinarySequence::from_reals_by_median(std::span<const double> series) {
    if (series.empty()) return BinarySequence(std::vector<int>{});
    std::vector<double> sorted(series.begin(), series.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double median = n % 2 == 1 ? sorted[n / 2]
                                     : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    std::vector<int> symbols;
    symbols.reserve(n);
    for (double v : series) {
        if (v > median)
            symbols.push_back(1);
        else if (v < median)
            symbols.push_back(0);
        // exact-median points dropped
    }
    return BinarySequence(std::move(symbols));
}

std::int64_t count_runs(const BinarySequence& seq) {
    const auto& s = seq.symbols();
    if (s.empty()) throw std::invalid_argument("count_runs: empty sequence");
    std::int64_t runs = 1;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i] != s[i - 1]) ++runs;
    return runs;
}

RunsTestReport runs_test(const BinarySequence& seq) {
    if (seq.size() == 0) throw std::invalid_argument("runs_test: empty sequence");
    if (seq.n1() == 0 || seq.n2() == 0)
        throw std::domain_error("runs_test: both symbols must be present");

    const double n1 = static_cast<double>(seq.n1());
    const double n2 = static_cast<double>(seq.n2());
    const double n = n1 + n2;

    RunsTestReport report;
    report.n1 = seq.n1();
    report.n2 = seq.n2();
    report.runs = count_runs(seq);
    report.expected_runs = 1.0 + 2.0 * n1 * n2 / n;
    report.var_runs = 2.0 * n1 * n2 * (2.0 * n1 * n2 - n) / (n * n * (n - 1.0));
    report.normal_approx_reliable = std::min(seq.n1(), seq.n2()) >= 10;
    if (report.var_runs > 0.0) {
        report.z = (static_cast<double>(report.runs) - report.expected_runs) /
                   std::sqrt(report.var_runs);
        report.p_value = two_sided_normal_p(report.z);
    } else {
        report.z = 0.0;
        report.p_value = 1.0;
    }
    return report;
}

MannWhitneyReport mann_whitney_u(std::span<const double> sample1,
                                 std::span<const double> sample2) {
    if (sample1.empty() || sample2.empty())
        throw std::invalid_argument("mann_whitney_u: samples must be nonempty");

    const std::int64_t n1 = static_cast<std::int64_t>(sample1.size());
    const std::int64_t n2 = static_cast<std::int64_t>(sample2.size());
    const std::int64_t n = n1 + n2;

    std::vector<double> pooled(sample1.begin(), sample1.end());
    pooled.insert(pooled.end(), sample2.begin(), sample2.end());
    std::vector<std::size_t> order(pooled.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });

    std::vector<double> pooled_sorted(pooled.size());
    for (std::size_t k = 0; k < order.size(); ++k) pooled_sorted[k] = pooled[order[k]];
    const std::vector<double> ranks_sorted = mid_ranks(pooled_sorted);

    // Scatter the ranks back and accumulate R1.
    double r1 = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k)
        if (order[k] < static_cast<std::size_t>(n1)) r1 += ranks_sorted[k];

    const double nn = static_cast<double>(n1) * static_cast<double>(n2);
    MannWhitneyReport report;
    report.n1 = n1;
    report.n2 = n2;
    report.rank_sum_1 = r1;
    report.u1 = nn + 0.5 * static_cast<double>(n1) * static_cast<double>(n1 + 1) - r1;
    report.u = std::min(report.u1, nn - report.u1);

    // Tie-corrected normal statistic (reported in all cases).
    double tie_sum = 0.0;
    std::size_t i = 0;
    while (i < pooled_sorted.size()) {
        std::size_t j = i;
        while (j + 1 < pooled_sorted.size() && pooled_sorted[j + 1] == pooled_sorted[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        tie_sum += t * t * t - t;
        i = j + 1;
    }
    const double dn = static_cast<double>(n);
    const double var = nn / 12.0 * ((dn + 1.0) - tie_sum / (dn * (dn - 1.0)));
    if (var > 0.0) {
        report.z = (report.u1 - 0.5 * nn) / std::sqrt(var);
    } else {
        report.z = 0.0;
    }

    const bool want_exact = n1 < 8 || n2 < 8;
    constexpr double k_enumeration_cap = 5e6;
    if (want_exact &&
        binomial_or_cap(n, std::min(n1, n2), k_enumeration_cap) <= k_enumeration_cap) {
        report.exact = true;
        report.p_value = exact_min_u_p_value(ranks_sorted, std::min(n1, n2),
                                             std::max(n1, n2), report.u);
    } else {
        report.exact = false;
        report.p_value = var > 0.0 ? two_sided_normal_p(report.z) : 1.0;
    }
    return report;
}

namespace {

PurityReport purity_harness(std::span<const double> series,
                            const BinarySequence& runs_input, int blocks) {
    if (blocks < 2) throw std::invalid_argument("split_sample_purity: need k >= 2 blocks");
    const std::int64_t n = static_cast<std::int64_t>(series.size());
    const std::int64_t base = n / blocks;
    if (base < 8)
        throw std::invalid_argument("split_sample_purity: blocks shorter than 8 points");

    // First (n mod k) blocks take one extra point.
    std::vector<std::span<const double>> parts;
    std::int64_t offset = 0;
    for (int b = 0; b < blocks; ++b) {
        const std::int64_t len = base + (b < n % blocks ? 1 : 0);
        parts.push_back(series.subspan(static_cast<std::size_t>(offset),
                                       static_cast<std::size_t>(len)));
        offset += len;
    }

    PurityReport report;
    report.blocks = blocks;
    for (int i = 0; i < blocks; ++i) {
        for (int j = i + 1; j < blocks; ++j) {
            const auto mw = mann_whitney_u(parts[static_cast<std::size_t>(i)],
                                           parts[static_cast<std::size_t>(j)]);
            report.pairwise.push_back({i, j, mw.u, mw.p_value});
        }
    }

    try {
        report.runs = runs_test(runs_input);
        report.runs_degenerate = false;
    } catch (const std::exception&) {
        report.runs_degenerate = true;  // constant or empty binarization
    }

    report.tests_performed =
        static_cast<int>(report.pairwise.size()) + (report.runs_degenerate ? 0 : 1);
    const double corrected = report.alpha / static_cast<double>(report.tests_performed);
    for (const auto& t : report.pairwise)
        if (t.p_value < corrected) report.flagged = true;
    if (!report.runs_degenerate && report.runs.p_value < corrected) report.flagged = true;
    return report;
}

}  // namespace

PurityReport split_sample_purity(std::span<const double> series, int blocks) {
    return purity_harness(series, BinarySequence::from_reals_by_median(series), blocks);
}

PurityReport split_sample_purity(const BinarySequence& seq, int blocks) {
    std::vector<double> as_reals;
    as_reals.reserve(static_cast<std::size_t>(seq.size()));
    for (int s : seq.symbols()) as_reals.push_back(static_cast<double>(s));
    return purity_harness(as_reals, seq, blocks);
}

}  // namespace spce::purity

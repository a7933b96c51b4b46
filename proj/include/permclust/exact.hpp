#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <variant>

#include "permclust/permutation.hpp"
#include "permclust/shift_distribution.hpp"

namespace permclust {

/// The measure on S_n proportional to q^{inversions}, q > 0. q = 1 is the
/// uniform measure; q in (0,1) coincides with the geometric shifted law.
struct MallowsMeasure {
    double q = 1.0;
};

using Measure = std::variant<MallowsMeasure, ShiftDistribution>;

/// Z_n(q) = prod_{k=1}^n (1-q^k)/(1-q), with the continuous limit n! at q=1.
double mallows_normalizer(int n, double q);
double log_mallows_normalizer(int n, double q);

/// q^{inversions(p)} / Z_n(q), evaluated in log space.
double mallows_pmf(const Permutation& p, double q);

/// Product of the independent truncated backward-rank factors
/// prod_{j=2}^n P(X_j = I_{<j}(p)).
double pshifted_pmf(const Permutation& p, const ShiftDistribution& d);

struct EnumerationOptions {
    /// Enumeration is refused above this size. Must not exceed kHardCap.
    int cap = 10;
    int workers = 1;
    static constexpr int kHardCap = 12;
};

struct ExactEventResult {
    double probability = 0.0;
    int n = 0;
    unsigned long long support_size = 0;  // n!
    enum class Method { enumeration, closed_form } method = Method::enumeration;
};

/// Sums pmf(sigma) * stat(sigma) over all of S_n, deterministically. The
/// enumeration walks S_n in lexicographic order with O(1) incremental
/// inversion updates; parallel runs partition by the first symbol and reduce
/// block sums in fixed order.
double exact_expectation(int n, const Measure& m,
                         const std::function<double(std::span<const std::int32_t>)>& stat,
                         const EnumerationOptions& opts = {});

/// Probability of an event under the measure, by full enumeration of S_n.
ExactEventResult exact_event_prob(
    int n, const Measure& m,
    const std::function<bool(std::span<const std::int32_t>)>& event,
    const EnumerationOptions& opts = {});

/// Probability that the value block {k..k+l-1} clusters (optionally with the
/// query's pattern).
double exact_cluster_prob(int n, const Measure& m, const ClusterQuery& q,
                          const EnumerationOptions& opts = {});

/// E[N_l] = expected number of clustering value blocks of length l.
double exact_expected_Nl(int n, const Measure& m, int l,
                         const EnumerationOptions& opts = {});

/// Probability, over S_{k+l-1}, that the block {k..k+l-1} clusters with
/// exactly a of the values 1..k-1 to its right.
double exact_block_alignment(const ShiftDistribution& d, int l, int k, int a,
                             const EnumerationOptions& opts = {});

}  // namespace permclust

#pragma once

#include <cstdint>
#include <vector>

#include "permclust/permutation.hpp"
#include "permclust/rng.hpp"
#include "permclust/shift_distribution.hpp"

namespace permclust {

/// Precomputed inverse-cdf machinery for the truncated rank laws X_2..X_n of
/// one distribution. draw(j, u) returns exactly the same value as
/// d.truncated_sample(j, u) but amortizes the cdf evaluations.
class TruncatedSampler {
public:
    TruncatedSampler(const ShiftDistribution& d, int n);
    std::int64_t draw(int j, double u) const;
    int size() const { return n_; }

private:
    int n_;
    std::vector<double> cdf_;  // cdf_[i] = N_i for i = 0..n
    bool geometric_ = false;
    double log_q_ = 0.0;
};

/// Incremental increasing enumeration of the unused positive integers:
/// push(m) consumes the m-th smallest unused value and returns it.
class PsiBuilder {
public:
    std::int64_t push(std::int64_t m);
    const std::vector<std::int64_t>& used_sorted() const { return used_; }

private:
    std::vector<std::int64_t> used_;  // sorted
};

/// Draws a permutation of size n by the insertion construction: ranks
/// X_j ~ truncated law for j = 2..n, assembled via from_backward_ranks.
/// One uniform is consumed per rank, in increasing j.
Permutation sample_perm_insertion(const ShiftDistribution& d, int n, RngStream& rng);

/// Draws the first `length` values of the infinite-permutation construction:
/// i.i.d. untruncated draws mapped through the increasing enumeration of
/// unused integers.
std::vector<std::int64_t> sample_prefix_psi(const ShiftDistribution& d, int length,
                                            RngStream& rng);

/// Extends the infinite-prefix construction until all of 1..n have appeared
/// and projects down to S_n. Same law as sample_perm_insertion.
Permutation sample_projected_psi(const ShiftDistribution& d, int n, RngStream& rng);

/// Fisher-Yates shuffle driven by the stream; the uniform measure on S_n.
Permutation sample_uniform_perm(int n, RngStream& rng);

/// Renewal times and reduced segments of one prefix. T is a renewal time iff
/// max(prefix[0..T)) == T, i.e. the prefix through T holds exactly {1..T}.
struct RenewalRecord {
    std::vector<std::int64_t> renewal_times;
    std::vector<Permutation> segments;
};

RenewalRecord renewal_scan(std::span<const std::int64_t> prefix);

struct RenewalStatistics {
    long long prefixes = 0;
    int prefix_length = 0;
    std::vector<double> u_empirical;  // [n-1] = frequency of a renewal at n
    std::vector<double> u_std_error;
    std::vector<double> t1_pmf;       // [n-1] = empirical P(T_1 = n)
    double t1_censored_fraction = 0.0;  // prefixes with no renewal in window
    double mean_gap = 0.0;            // over completed gaps T_i - T_{i-1}
    double mean_gap_std_error = 0.0;
    long long gap_count = 0;
};

/// Aggregates renewal_scan over independent prefixes. Prefix i uses stream
/// base.stream_id() + i under base.seed(), so results are a pure function of
/// (seed, stream range) regardless of worker count.
RenewalStatistics renewal_statistics(const ShiftDistribution& d, long long num_prefixes,
                                     int prefix_length, const RngStream& base,
                                     int workers = 1);

namespace detail {

// Rank-draw kernel shared with tests that script the uniform source.
template <class UniformFn>
Permutation sample_perm_insertion_with(const TruncatedSampler& ts, int n,
                                       UniformFn&& uniform) {
    BackwardRanks r;
    r.ranks.reserve(static_cast<std::size_t>(std::max(0, n - 1)));
    for (int j = 2; j <= n; ++j) {
        r.ranks.push_back(static_cast<std::int32_t>(ts.draw(j, uniform())));
    }
    return from_backward_ranks(r);
}

}  // namespace detail

}  // namespace permclust

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "permclust/exact.hpp"
#include "permclust/permutation.hpp"
#include "permclust/shift_distribution.hpp"

namespace permclust {

struct McConfig {
    long long samples = 10000;
    std::uint64_t seed = 1;
    double confidence = 0.99;
    int workers = 1;
};

/// Point estimate with its standard error and confidence interval. Reports
/// are a pure function of (samples, seed): sample i always runs on stream i,
/// and fixed-size blocks are reduced in index order, so the worker count
/// never changes a digit.
struct EstimateReport {
    double estimate = 0.0;
    double std_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    long long samples = 0;
};

/// P(A_{l;k}) under the measure. Mallows q in (0,1) samples the geometric
/// shifted law; q = 1 shuffles uniformly; q > 1 samples at 1/q and evaluates
/// the event on the reversed permutation (reversal duality). Wilson interval
/// at cfg.confidence.
EstimateReport estimate_cluster_prob(const Measure& m, int n, const ClusterQuery& q,
                                     const McConfig& cfg);

/// E[N_l] by sample mean of the block-cluster count; normal interval.
EstimateReport estimate_expected_Nl(const Measure& m, int n, int l, const McConfig& cfg);

/// Total-variation distance between the empirical law of N_2 under the
/// uniform measure and Poisson(2), with the Poisson tail truncated where its
/// mass drops below 1e-9.
double n2_poisson_tv(int n, const McConfig& cfg);

/// E[inversions/n] under the shifted law; compare against mean(d) - 1.
EstimateReport estimate_inversion_rate(const ShiftDistribution& d, int n,
                                       const McConfig& cfg);

struct GofCell {
    int j = 0;  // truncation level; 0 for the joint independence test
    double chi2 = 0.0;
    int df = 0;
    double p_value = 0.0;
};

struct GofReport {
    std::vector<GofCell> per_level;          // marginal fit of I_{<j}, j = 2..j_max
    std::optional<GofCell> independence_23;  // contingency test of (I_{<2}, I_{<3})
};

/// Chi-square goodness of fit of the sampled backward ranks against the
/// truncated laws. Cells are pooled from the tail so that every expected
/// count is at least 5. `null_d` substitutes a different distribution for
/// the expected frequencies (power checks); default is d itself.
GofReport gof_backward_ranks(const ShiftDistribution& d, int n, int j_max,
                             const McConfig& cfg,
                             const ShiftDistribution* null_d = nullptr);

}  // namespace permclust

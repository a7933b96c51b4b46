#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "permclust/errors.hpp"

namespace permclust {

/// Mean of a distribution on N, tagged finite or +infinity.
struct MeanValue {
    bool finite = false;
    double value = 0.0;  // +inf when not finite

    static MeanValue of(double v) { return {true, v}; }
    static MeanValue infinite();
};

/// A probability distribution p on {1,2,...} with full support, exposing the
/// cumulative sums N_j = p_1+...+p_j, the tails R_j = 1-N_j, truncated laws,
/// and the renewal quantities derived from them.
///
/// Three families are supported:
///   geometric(q):      p_j = (1-q) q^{j-1},      q in (0,1)
///   finite+geom tail:  p_j = w_j for j <= m, then a geometric tail with
///                      ratio r carrying the remaining mass
///   power law(s):      p_j = j^{-s} / zeta(s),   s > 1
///
/// All quantities are evaluated to absolute error <= 1e-12 (power-law sums
/// use Euler-Maclaurin tail corrections past an exact prefix). Instances are
/// immutable after construction and safe to share across threads.
class ShiftDistribution {
public:
    static ShiftDistribution geometric(double q);
    static ShiftDistribution finite_with_geometric_tail(std::vector<double> weights,
                                                        double ratio);
    static ShiftDistribution power_law(double s, int cutoff = 4096);

    /// Parses "geom:q=0.5", "finitetail:w=0.5,0.2;r=0.5", "power:s=3".
    static ShiftDistribution parse(std::string_view spec);
    std::string spec_string() const;

    double pmf(std::int64_t j) const;

    /// N_j = sum_{i<=j} p_i; cdf(0) = 0.
    double cdf(std::int64_t j) const;

    /// R_j = 1 - N_j, computed without cancellation.
    double tail(std::int64_t j) const;

    double log_cdf(std::int64_t j) const;

    /// P(X_j = i) = p_{i+1} / N_j for i in 0..j-1 (the law of the backward
    /// rank at level j). Requires j >= 2.
    double truncated_pmf(std::int64_t j, std::int64_t i) const;

    /// Inverse-cdf draw from the truncated law: the smallest i with
    /// cdf(i+1)/cdf(j) > u. Deterministic in u.
    std::int64_t truncated_sample(std::int64_t j, double u) const;

    /// Inverse-cdf draw from the untruncated law: the smallest j >= 1 with
    /// cdf(j) > u.
    std::int64_t sample(double u) const;

    MeanValue mean() const;
    bool is_positive_recurrent() const;

    /// Whether p_1 >= p_2 >= ... holds for this family instance.
    bool is_nonincreasing() const;

    /// u_n = prod_{j=1}^n N_j, evaluated in log space. u_0 = 1.
    double renewal_prob(std::int64_t n) const;
    double log_renewal_prob(std::int64_t n) const;

    /// u_0..u_nmax in one pass.
    std::vector<double> renewal_prob_prefix(int nmax) const;

    /// Law f_1..f_nmax of the first renewal number, obtained by inverting the
    /// renewal equation u_n = sum_{k=1}^n f_k u_{n-k}.
    std::vector<double> first_renewal_pmf(int nmax) const;

    /// sum_{j>J} R_j, or +inf when the mean is infinite. Drives truncation
    /// control for the infinite products built on this distribution.
    double tail_sum(std::int64_t J) const;

    /// The Mallows parameter when this is the geometric family.
    std::optional<double> geometric_q() const;

private:
    struct Geometric {
        double q;
        double log_q;
        double log_one_minus_q;
    };
    struct FiniteGeomTail {
        std::vector<double> w;
        double r;
        double tail_mass;            // 1 - sum w
        std::vector<double> cum;     // cum[j] = N_j for j = 0..m
        std::vector<double> tails;   // tails[j] = R_j for j = 0..m
        double mean;
    };
    struct PowerLaw {
        double s;
        int cutoff;
        double zeta_s;
        double log_zeta_s;
        std::vector<double> cdf_table;   // cdf_table[j] = N_j, j = 0..cutoff
        std::vector<double> tail_table;  // tail_table[j] = R_j, j = 0..cutoff
        double mean;                     // +inf when s <= 2
    };

    using Family = std::variant<Geometric, FiniteGeomTail, PowerLaw>;
    explicit ShiftDistribution(Family f) : family_(std::move(f)) {}
    Family family_;
};

}  // namespace permclust

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "permclust/exact.hpp"
#include "permclust/shift_distribution.hpp"

namespace permclust {

/// (n-l+1) l! (n-l)! / n! - the block-cluster probability under the uniform
/// measure, ~ l!/n^{l-1}.
double uniform_cluster_prob(long long n, int l);

/// (n-l+1)^2 l! (n-l)! / n! - the uniform expectation of N_l, ~ l!/n^{l-2}.
double uniform_expected_Nl(long long n, int l);

/// Asymptotic reference l!/n^{l-2} for the probability of any cluster of
/// length l; meaningful for l >= 3.
double uniform_any_cluster_asympt(long long n, int l);

/// P(B_{l;k;a}) = prod_{j=0}^{l-1} (N_{a+j+1} - N_a) / N_{k+j}: the block
/// {k..k+l-1} is mutually adjacent right after value k+l-1 is placed, with
/// exactly a of 1..k-1 to its right.
double block_alignment_prob(const ShiftDistribution& d, int l, int k, int a);

/// Certified lower bound on P_n(A_{l;k}): the block aligns and every later
/// value is inserted to its right.
double cluster_lower_bound(const ShiftDistribution& d, long long n, int l, int k);

/// Certified upper bound on P_n(A_{l;k}); requires a non-increasing pmf
/// (throws ValidationError otherwise, since the bound is not certified).
double cluster_upper_bound(const ShiftDistribution& d, long long n, int l, int k);

/// Sharper lower bound for the geometric (Mallows) case, built from the
/// appearance-order decomposition over how many of 1..k-1 precede the block.
double mallows_cluster_lower_bound(long long n, int l, int k, double q);

/// P(C_{j;k,l}): exactly j of the values 1..k-1 appear before the first value
/// of the block {k..k+l-1} in the infinite construction. The C_j partition
/// the sample space over j = 0..k-1.
double mallows_precedence_prob(int k, int l, double q, int j);

/// Double limit (n, then l, to infinity) of the cluster probability:
/// prod_{j<k} N_j * prod_{j>=1} N_j for fixed k, or (prod N_j)^2 when the
/// block start drifts to the interior. Zero when the mean is infinite. The
/// infinite product is truncated with a certified remainder below 1e-10 in
/// the log.
double supercluster_limit(const ShiftDistribution& d, std::optional<int> fixed_k);

/// log prod_{j>=1} (1 - q^j), truncated with certified remainder <= 1e-10.
double log_euler_product(double q);
double euler_product(double q);

/// exp(-pi^2 / (6(1-q))), the q -> 1 asymptote of the Euler product.
double euler_product_asymptote(double q);

/// Coefficients bounding the scaled cluster probability for q_n = 1-c/n^alpha.
/// The lower coefficient is printed inconsistently in the literature, so both
/// candidate forms are exposed; envelopes use the conservative minimum.
struct LowerEnvelopeCoefficient {
    double factorial_form;  // ((l-1)!)^2 / (2l)!
    double beta_form;       // Beta(l,l) = ((l-1)!)^2 / (2l-1)!
    double min() const { return factorial_form < beta_form ? factorial_form : beta_form; }
};
LowerEnvelopeCoefficient lower_envelope_coefficient(int l);

/// int_0^1 x^{l-1} e^{-(l-1)x} dx, in closed form.
double upper_envelope_coefficient(int l);
/// Same integral by adaptive quadrature (self-check path).
double upper_envelope_coefficient_quadrature(int l, double abs_tol = 1e-11);

/// log((1 - e^{-cd}) / (1 - e^{-c})) < 0 for c > 0, d in (0,1).
double gamma_factor(double c, double d);

/// Upper-bound coefficient for the q_n = 1 - c/n regime with block start
/// k_n ~ dn: c^{l-1} (1-e^{-cd})^{-l} times the gamma_factor-weighted beta
/// integral. Tends to 1 as c -> 0.
double linear_regime_upper_coeff(double c, double d, int l, double abs_tol = 1e-10);

struct ScalingGrid {
    double alpha = 0.5;  // in (0,1]
    double c = 1.0;      // > 0
    int l = 2;           // >= 2
    std::vector<long long> n_values;
    std::optional<double> k_fraction;   // k_n = round(d*n) when set
    std::vector<long long> k_values;    // explicit otherwise

    void validate() const;
    double q_for(long long n) const;    // 1 - c/n^alpha
    long long k_for(std::size_t idx) const;
};

struct EnvelopeRow {
    long long n = 0;
    double q_n = 0.0;
    long long k_n = 0;
    double scale = 0.0;  // c^{l-1} l! / n^{alpha(l-1)}
    double lower = 0.0;
    double upper_general = 0.0;
    double upper_improved = 0.0;
};

/// Predicted bounds for each n in the grid under q_n = 1 - c/n^alpha.
std::vector<EnvelopeRow> scaling_envelope(const ScalingGrid& grid);

/// One certified-bounds row for a cluster query, with the enumeration value
/// attached when the size is within the cap.
struct BoundsReport {
    long long n = 0;
    int l = 0;
    int k = 0;
    std::string measure;
    double lower = 0.0;
    std::optional<double> upper;
    std::optional<double> mallows_lower;
    std::optional<double> exact;
    std::string notes;
};

BoundsReport bounds_report(const ShiftDistribution& d, long long n, int l, int k,
                           bool with_exact, const EnumerationOptions& opts = {});

}  // namespace permclust

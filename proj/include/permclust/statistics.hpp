#pragma once

namespace permclust {

/// Quantile of the standard normal distribution (Acklam's rational
/// approximation polished with one Halley step; |error| < 1e-14).
double inverse_normal_cdf(double p);

/// Regularized incomplete gamma functions P(a,x) and Q(a,x) = 1 - P(a,x).
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

/// Survival function of the chi-square distribution with df degrees of
/// freedom: P(X > x).
double chi_square_sf(double x, int df);

struct Interval {
    double low = 0.0;
    double high = 0.0;
};

/// Wilson score interval for a binomial proportion at normal quantile z,
/// clipped to [0,1].
Interval wilson_interval(long long successes, long long trials, double z);

}  // namespace permclust

#include "permclust/analytic.hpp"

#include <cmath>

#include "permclust/numeric.hpp"
#include "permclust/quadrature.hpp"

namespace permclust {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_query(long long n, int l, int k) {
    if (l < 2) throw ValidationError("block length l must be >= 2");
    if (k < 1) throw ValidationError("block start k must be >= 1");
    if (n < k + l - 1) throw ValidationError("need n >= k+l-1");
}

// log(N_b - N_a) for b > a, via the tails to avoid cancellation
double log_cdf_diff(const ShiftDistribution& d, std::int64_t a, std::int64_t b) {
    return std::log(d.tail(a) - d.tail(b));
}

// prefix[i] = sum_{m=1}^{i} log N_m, i = 0..n
std::vector<double> log_cdf_prefix(const ShiftDistribution& d, std::int64_t n) {
    std::vector<double> s(static_cast<std::size_t>(n) + 1);
    s[0] = 0.0;
    KahanSum acc;
    for (std::int64_t m = 1; m <= n; ++m) {
        acc.add(d.log_cdf(m));
        s[static_cast<std::size_t>(m)] = acc.value();
    }
    return s;
}

double log_block_alignment(const ShiftDistribution& d, int l, int k, int a) {
    KahanSum acc;
    for (int j = 0; j < l; ++j) {
        acc.add(log_cdf_diff(d, a, a + j + 1) - d.log_cdf(k + j));
    }
    return acc.value();
}

}  // namespace

double uniform_cluster_prob(long long n, int l) {
    if (l < 2 || l > n) throw ValidationError("uniform cluster prob requires 2 <= l <= n");
    if (l <= 128) {
        double v = static_cast<double>(n - l + 1);
        for (int i = 0; i < l; ++i) {
            v *= static_cast<double>(l - i) / static_cast<double>(n - i);
        }
        return v;
    }
    const double ln = std::lgamma(static_cast<double>(l) + 1.0) +
                      std::lgamma(static_cast<double>(n - l) + 1.0) -
                      std::lgamma(static_cast<double>(n) + 1.0) +
                      std::log(static_cast<double>(n - l + 1));
    return std::exp(ln);
}

double uniform_expected_Nl(long long n, int l) {
    if (l < 2 || l > n) throw ValidationError("uniform expected N_l requires 2 <= l <= n");
    return static_cast<double>(n - l + 1) * uniform_cluster_prob(n, l);
}

double uniform_any_cluster_asympt(long long n, int l) {
    if (l < 3) throw ValidationError("the any-cluster asymptotic applies for l >= 3");
    return std::exp(std::lgamma(static_cast<double>(l) + 1.0) -
                    static_cast<double>(l - 2) * std::log(static_cast<double>(n)));
}

double block_alignment_prob(const ShiftDistribution& d, int l, int k, int a) {
    if (l < 2 || k < 1) throw ValidationError("block alignment requires l >= 2, k >= 1");
    if (a < 0 || a > k - 1) throw ValidationError("alignment count must lie in 0..k-1");
    return std::exp(log_block_alignment(d, l, k, a));
}

double cluster_lower_bound(const ShiftDistribution& d, long long n, int l, int k) {
    check_query(n, l, k);
    const auto S = log_cdf_prefix(d, n);
    const long long tail_len = n - k - l + 1;  // factors in the right-insertion product
    KahanSum total;
    for (int a = 0; a < k; ++a) {
        const double logB = log_block_alignment(d, l, k, a);
        // prod_{j=0}^{n-k-l} N_{a+j+1} / N_{k+l+j}
        const double logT = (S[static_cast<std::size_t>(a + tail_len)] -
                             S[static_cast<std::size_t>(a)]) -
                            (S[static_cast<std::size_t>(n)] -
                             S[static_cast<std::size_t>(k + l - 1)]);
        total.add(std::exp(logB + logT));
    }
    return total.value();
}

double cluster_upper_bound(const ShiftDistribution& d, long long n, int l, int k) {
    check_query(n, l, k);
    if (!d.is_nonincreasing()) {
        throw ValidationError(
            "upper bound requires a non-increasing pmf; it is not certified for this "
            "distribution");
    }
    // H[m] = sum_{i<=m} log(1 - (N_{i+l-1} - N_i)); the a-th summand uses the
    // window m = a+1 .. a + (n-k-l+1)
    const long long mmax = n - l;
    std::vector<double> H(static_cast<std::size_t>(std::max<long long>(mmax, 0)) + 1);
    H[0] = 0.0;
    KahanSum acc;
    for (long long m = 1; m <= mmax; ++m) {
        acc.add(std::log1p(-(d.tail(m) - d.tail(m + l - 1))));
        H[static_cast<std::size_t>(m)] = acc.value();
    }
    const long long window = n - k - l + 1;
    KahanSum total;
    for (int a = 0; a < k; ++a) {
        const double logB = log_block_alignment(d, l, k, a);
        const double logU = H[static_cast<std::size_t>(a + window)] -
                            H[static_cast<std::size_t>(a)];
        total.add(std::exp(logB + logU));
    }
    return total.value();
}

double mallows_cluster_lower_bound(long long n, int l, int k, double q) {
    check_query(n, l, k);
    if (!(q > 0.0 && q < 1.0)) throw ValidationError("this bound requires q in (0,1)");
    const double lnq = std::log(q);
    // lg[m] = log(1-q^m), prefix LG[m] = sum_{i<=m} lg[i]
    const long long mmax = std::max<long long>(k - 1 + l, n);
    std::vector<double> lg(static_cast<std::size_t>(mmax) + 1, 0.0);
    std::vector<double> LG(static_cast<std::size_t>(mmax) + 1, 0.0);
    KahanSum lgacc;
    for (long long m = 1; m <= mmax; ++m) {
        lg[static_cast<std::size_t>(m)] = log1mexp(static_cast<double>(m) * lnq);
        lgacc.add(lg[static_cast<std::size_t>(m)]);
        LG[static_cast<std::size_t>(m)] = lgacc.value();
    }
    const long long c = n - k - l + 1;  // values above the block still pending
    KahanSum total;
    for (int j = 0; j <= k - 1; ++j) {
        // P(C_j) = (prod_{i=1}^{j} r_{k-i,l}) (1 - r_{k-j-1,l})
        double logC = (LG[static_cast<std::size_t>(k - 1)] -
                       LG[static_cast<std::size_t>(k - 1 - j)]) -
                      (LG[static_cast<std::size_t>(k - 1 + l)] -
                       LG[static_cast<std::size_t>(k - 1 - j + l)]);
        const long long a = k - 1 - j;
        if (a > 0) {
            logC += static_cast<double>(a) * lnq + lg[static_cast<std::size_t>(l)] -
                    lg[static_cast<std::size_t>(a + l)];
        }
        // prod_{i=1}^{l-1} (1 - r_{a,i,c}), each factor q^a (1-q^i) / (1-q^{a+i+c})
        double logInner = static_cast<double>(a) * static_cast<double>(l - 1) * lnq +
                          LG[static_cast<std::size_t>(l - 1)] -
                          (LG[static_cast<std::size_t>(a + l - 1 + c)] -
                           LG[static_cast<std::size_t>(a + c)]);
        total.add(std::exp(logC + logInner));
    }
    return total.value();
}

double mallows_precedence_prob(int k, int l, double q, int j) {
    if (k < 1 || l < 2) throw ValidationError("precedence prob requires k >= 1, l >= 2");
    if (j < 0 || j > k - 1) throw ValidationError("precedence count must lie in 0..k-1");
    if (!(q > 0.0 && q < 1.0)) throw ValidationError("precedence prob requires q in (0,1)");
    auto r = [&](int a, int b) {
        if (a == 0) return 0.0;
        return one_minus_qpow(q, a) / one_minus_qpow(q, a + b);
    };
    double prob = 1.0 - r(k - j - 1, l);
    for (int i = 1; i <= j; ++i) prob *= r(k - i, l);
    return prob;
}

double supercluster_limit(const ShiftDistribution& d, std::optional<int> fixed_k) {
    if (fixed_k && *fixed_k < 1) throw ValidationError("fixed k must be >= 1");
    if (!d.is_positive_recurrent()) return 0.0;
    // log prod_{j>J} N_j = -sum_{j>J} R_j - delta with
    // 0 <= delta <= R_{J+1} * sum_{j>J} R_j / (2 N_{J+1}); the first-order
    // term is available in closed form via tail_sum, so only the quadratic
    // remainder needs to be driven below the certification threshold.
    constexpr std::int64_t kMaxJ = std::int64_t{1} << 24;
    std::int64_t J = 64;
    for (;;) {
        const double bound = d.tail(J + 1) * d.tail_sum(J) / (2.0 * d.cdf(J + 1));
        if (bound <= 1e-10) break;
        if (J >= kMaxJ) {
            throw CapacityError(
                "cannot certify the infinite-product tail to 1e-10 for this distribution");
        }
        J *= 2;
    }
    KahanSum log_full;
    for (std::int64_t j = 1; j <= J; ++j) log_full.add(d.log_cdf(j));
    log_full.add(-d.tail_sum(J));
    if (!fixed_k) return std::exp(2.0 * log_full.value());
    KahanSum log_prefix;
    for (int j = 1; j < *fixed_k; ++j) log_prefix.add(d.log_cdf(j));
    return std::exp(log_prefix.value() + log_full.value());
}

double log_euler_product(double q) {
    if (!(q > 0.0 && q < 1.0)) throw ValidationError("Euler product requires q in (0,1)");
    const double lnq = std::log(q);
    // remainder after J terms is at most q^{J+1} / ((1-q)(1-q^{J+1}))
    std::int64_t J = 64;
    auto remainder = [&](std::int64_t JJ) {
        const double t = std::exp(static_cast<double>(JJ + 1) * lnq);
        return t / ((1.0 - q) * (1.0 - t));
    };
    while (remainder(J) > 1e-10) J *= 2;
    KahanSum acc;
    for (std::int64_t j = 1; j <= J; ++j) {
        acc.add(log1mexp(static_cast<double>(j) * lnq));
    }
    return acc.value();
}

double euler_product(double q) { return std::exp(log_euler_product(q)); }

double euler_product_asymptote(double q) {
    if (!(q > 0.0 && q < 1.0)) throw ValidationError("asymptote requires q in (0,1)");
    return std::exp(-kPi * kPi / (6.0 * (1.0 - q)));
}

LowerEnvelopeCoefficient lower_envelope_coefficient(int l) {
    if (l < 2) throw ValidationError("envelope coefficients require l >= 2");
    const double two_lg = 2.0 * std::lgamma(static_cast<double>(l));
    return {std::exp(two_lg - std::lgamma(2.0 * l + 1.0)),
            std::exp(two_lg - std::lgamma(2.0 * l))};
}

double upper_envelope_coefficient(int l) {
    if (l < 2) throw ValidationError("envelope coefficients require l >= 2");
    const double lambda = static_cast<double>(l - 1);
    // 1 - e^{-lambda} sum_{i<l} lambda^i/i!, accumulated with scaled terms
    double term = std::exp(-lambda);
    KahanSum upper_tail;
    for (int i = 0; i < l; ++i) {
        upper_tail.add(term);
        term *= lambda / static_cast<double>(i + 1);
    }
    const double head = 1.0 - upper_tail.value();
    return std::exp(std::lgamma(static_cast<double>(l)) -
                    static_cast<double>(l) * std::log(lambda)) *
           head;
}

double upper_envelope_coefficient_quadrature(int l, double abs_tol) {
    if (l < 2) throw ValidationError("envelope coefficients require l >= 2");
    const double lambda = static_cast<double>(l - 1);
    return adaptive_simpson(
        [&](double x) { return std::pow(x, l - 1) * std::exp(-lambda * x); }, 0.0, 1.0,
        abs_tol);
}

double gamma_factor(double c, double d) {
    if (!(c > 0.0)) throw ValidationError("gamma factor requires c > 0");
    if (!(d > 0.0 && d < 1.0)) throw ValidationError("gamma factor requires d in (0,1)");
    return std::log(-std::expm1(-c * d)) - std::log(-std::expm1(-c));
}

double linear_regime_upper_coeff(double c, double d, int l, double abs_tol) {
    if (l < 2) throw ValidationError("upper coefficient requires l >= 2");
    const double g = gamma_factor(c, d);
    const double lo = std::exp(-c * d);
    const double rate = g * std::exp(c * d) * static_cast<double>(l - 1);
    const double denom = -std::expm1(-c * d);
    const double prefactor = std::exp(static_cast<double>(l - 1) * std::log(c) -
                                      static_cast<double>(l) * std::log(denom));
    // the error budget applies to the coefficient, so the integral gets the
    // budget scaled down by the prefactor
    const double integral = adaptive_simpson(
        [&](double y) { return std::pow(y, l - 1) * std::exp(rate * y); }, lo, 1.0,
        abs_tol / std::max(prefactor, 1.0));
    return prefactor * integral;
}

void ScalingGrid::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in (0,1]");
    if (!(c > 0.0)) throw ValidationError("c must be positive");
    if (l < 2) throw ValidationError("l must be >= 2");
    if (n_values.empty()) throw ValidationError("grid needs at least one n");
    for (std::size_t i = 0; i < n_values.size(); ++i) {
        if (n_values[i] < l) throw ValidationError("grid n must be >= l");
        if (i && n_values[i] <= n_values[i - 1]) {
            throw ValidationError("grid n values must increase");
        }
        const double q = q_for(n_values[i]);
        if (!(q > 0.0 && q < 1.0)) {
            throw ValidationError("q_n = 1 - c/n^alpha must lie in (0,1) for every grid n");
        }
        const long long k = k_for(i);
        if (k < 1 || k > n_values[i] - l + 1) {
            throw ValidationError("grid block start k_n out of range");
        }
    }
    if (!k_fraction && k_values.size() != n_values.size()) {
        throw ValidationError("explicit k sequence must match the n grid");
    }
    if (k_fraction && !(*k_fraction > 0.0 && *k_fraction < 1.0)) {
        throw ValidationError("k fraction must lie in (0,1)");
    }
}

double ScalingGrid::q_for(long long n) const {
    return 1.0 - c / std::pow(static_cast<double>(n), alpha);
}

long long ScalingGrid::k_for(std::size_t idx) const {
    const long long n = n_values[idx];
    if (k_fraction) {
        const auto k = static_cast<long long>(std::llround(*k_fraction * static_cast<double>(n)));
        return std::min<long long>(std::max<long long>(k, 1), n - l + 1);
    }
    return k_values[idx];
}

std::vector<EnvelopeRow> scaling_envelope(const ScalingGrid& grid) {
    grid.validate();
    const double lower_coeff = lower_envelope_coefficient(grid.l).min();
    const double upper_coeff = upper_envelope_coefficient(grid.l);
    const double log_cl = static_cast<double>(grid.l - 1) * std::log(grid.c) +
                          std::lgamma(static_cast<double>(grid.l) + 1.0);
    std::vector<EnvelopeRow> rows;
    rows.reserve(grid.n_values.size());
    for (std::size_t i = 0; i < grid.n_values.size(); ++i) {
        EnvelopeRow row;
        row.n = grid.n_values[i];
        row.q_n = grid.q_for(row.n);
        row.k_n = grid.k_for(i);
        row.scale = std::exp(log_cl - grid.alpha * static_cast<double>(grid.l - 1) *
                                          std::log(static_cast<double>(row.n)));
        row.lower = lower_coeff * row.scale;
        row.upper_general = row.scale / static_cast<double>(grid.l);
        row.upper_improved = upper_coeff * row.scale;
        rows.push_back(row);
    }
    return rows;
}

BoundsReport bounds_report(const ShiftDistribution& d, long long n, int l, int k,
                           bool with_exact, const EnumerationOptions& opts) {
    check_query(n, l, k);
    BoundsReport rep;
    rep.n = n;
    rep.l = l;
    rep.k = k;
    rep.measure = d.spec_string();
    rep.lower = cluster_lower_bound(d, n, l, k);
    if (d.is_nonincreasing()) {
        rep.upper = cluster_upper_bound(d, n, l, k);
    } else {
        rep.notes = "upper bound omitted: pmf is not non-increasing";
    }
    if (auto q = d.geometric_q()) {
        rep.mallows_lower = mallows_cluster_lower_bound(n, l, k, *q);
    }
    if (with_exact && n <= opts.cap) {
        ClusterQuery query{static_cast<int>(n), l, k, {}};
        rep.exact = exact_cluster_prob(static_cast<int>(n), Measure(d), query, opts);
    }
    return rep;
}

}  // namespace permclust

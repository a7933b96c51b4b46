#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "permclust/analytic.hpp"
#include "permclust/numeric.hpp"

using namespace permclust;
using doctest::Approx;

TEST_CASE("uniform cluster probability") {
    CHECK(uniform_cluster_prob(4, 2) == Approx(0.5).epsilon(1e-14));
    for (int n : {2, 5, 9}) CHECK(uniform_cluster_prob(n, n) == Approx(1.0).epsilon(1e-13));
    // ~ l!/n^{l-1}
    CHECK(uniform_cluster_prob(1000, 2) * 1000.0 / 2.0 == Approx(1.0).epsilon(0.01));
    CHECK_THROWS_AS(uniform_cluster_prob(5, 1), ValidationError);
    CHECK_THROWS_AS(uniform_cluster_prob(5, 6), ValidationError);
}

TEST_CASE("uniform expected block count and any-cluster asymptotics") {
    CHECK(uniform_expected_Nl(5, 2) == Approx(1.6).epsilon(1e-13));
    for (int n : {3, 6, 9}) CHECK(uniform_expected_Nl(n, n) == Approx(1.0).epsilon(1e-13));
    for (long long n : {10, 100, 1000}) {
        const double ratio = uniform_expected_Nl(n, 3) / uniform_any_cluster_asympt(n, 3);
        CHECK(std::abs(ratio - 1.0) <= 10.0 / static_cast<double>(n));
    }
    CHECK_THROWS_AS(uniform_any_cluster_asympt(10, 2), ValidationError);
}

TEST_CASE("block alignment closed form") {
    auto d = ShiftDistribution::geometric(0.5);
    CHECK(block_alignment_prob(d, 5, 1, 0) == Approx(1.0).epsilon(1e-13));
    CHECK(block_alignment_prob(d, 2, 2, 0) == Approx(4.0 / 7.0).epsilon(1e-13));
    CHECK(block_alignment_prob(d, 2, 2, 1) == Approx(1.0 / 7.0).epsilon(1e-13));
    CHECK_THROWS_AS(block_alignment_prob(d, 2, 2, 2), ValidationError);

    // equality with the enumeration oracle, and the disjoint decomposition
    for (const auto& dd : {ShiftDistribution::geometric(0.5),
                           ShiftDistribution::finite_with_geometric_tail({0.5}, 0.5),
                           ShiftDistribution::power_law(2.0)}) {
        for (auto [l, k] : std::vector<std::pair<int, int>>{{2, 2}, {2, 5}, {3, 3}, {4, 2}, {2, 6}}) {
            KahanSum sum;
            for (int a = 0; a < k; ++a) {
                const double closed = block_alignment_prob(dd, l, k, a);
                REQUIRE(std::abs(closed - exact_block_alignment(dd, l, k, a)) <= 1e-12);
                sum.add(closed);
            }
            const int n = k + l - 1;
            REQUIRE(sum.value() ==
                    Approx(exact_cluster_prob(n, Measure(dd), {n, l, k, {}})).epsilon(1e-12));
        }
    }
}

TEST_CASE("finite-n bounds sandwich the enumeration value") {
    for (const auto& d : {ShiftDistribution::geometric(0.3), ShiftDistribution::geometric(0.6),
                          ShiftDistribution::finite_with_geometric_tail({0.5}, 0.5)}) {
        const auto q = d.geometric_q();
        for (int n = 5; n <= 7; ++n) {
            for (int l = 2; l <= n; ++l) {
                for (int k = 1; k + l - 1 <= n; ++k) {
                    const double exact = exact_cluster_prob(n, Measure(d), {n, l, k, {}});
                    const double lo = cluster_lower_bound(d, n, l, k);
                    const double hi = cluster_upper_bound(d, n, l, k);
                    REQUIRE(lo <= exact + 1e-12);
                    REQUIRE(exact <= hi + 1e-12);
                    REQUIRE(lo <= hi + 1e-12);
                    if (q) {
                        REQUIRE(mallows_cluster_lower_bound(n, l, k, *q) <= exact + 1e-12);
                    }
                }
            }
        }
    }
}

TEST_CASE("lower bound reduces to the alignment sum at n = k+l-1") {
    auto d = ShiftDistribution::geometric(0.4);
    for (auto [l, k] : std::vector<std::pair<int, int>>{{2, 2}, {3, 2}, {2, 4}}) {
        KahanSum sum;
        for (int a = 0; a < k; ++a) sum.add(block_alignment_prob(d, l, k, a));
        CHECK(cluster_lower_bound(d, k + l - 1, l, k) == Approx(sum.value()).epsilon(1e-12));
    }
}

TEST_CASE("lower bound at k=1 telescopes") {
    // single a=0 term: prod_{j=0}^{n-1-l} N_{j+1}/N_{l+1+j}, a ratio of two
    // runs of the q-cdf values
    const double q = 0.5;
    auto d = ShiftDistribution::geometric(q);
    for (int n : {6, 9, 14}) {
        for (int l : {2, 3}) {
            KahanSum logs;
            for (int j = 0; j <= n - 1 - l; ++j) {
                logs.add(std::log(one_minus_qpow(q, j + 1)) -
                         std::log(one_minus_qpow(q, l + 1 + j)));
            }
            CHECK(cluster_lower_bound(d, n, l, 1) == Approx(std::exp(logs.value())).epsilon(1e-12));
        }
    }
}

TEST_CASE("upper bound refuses non-monotone pmf") {
    auto bumpy = ShiftDistribution::finite_with_geometric_tail({0.2, 0.3}, 0.5);
    CHECK_THROWS_AS(cluster_upper_bound(bumpy, 6, 2, 2), ValidationError);
    CHECK_NOTHROW(cluster_lower_bound(bumpy, 6, 2, 2));
    auto rep = bounds_report(bumpy, 6, 2, 2, false);
    CHECK_FALSE(rep.upper.has_value());
    CHECK(rep.notes.find("non-increasing") != std::string::npos);
}

TEST_CASE("precedence probabilities partition the sample space") {
    for (double q : {0.3, 0.6}) {
        for (auto [k, l] : std::vector<std::pair<int, int>>{{1, 2}, {4, 3}, {7, 2}}) {
            KahanSum sum;
            for (int j = 0; j < k; ++j) sum.add(mallows_precedence_prob(k, l, q, j));
            REQUIRE(sum.value() == Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("geometric-case lower bound, frozen values and k=1 reduction") {
    CHECK(mallows_cluster_lower_bound(7, 2, 2, 0.3) == Approx(0.563787692198).epsilon(1e-10));
    CHECK(mallows_cluster_lower_bound(7, 2, 2, 0.6) == Approx(0.344592957337).epsilon(1e-10));

    // k=1: the single j=0 term with the r_{0,b} = 0 convention
    const double q = 0.45;
    for (int n : {5, 8}) {
        for (int l : {2, 3}) {
            double direct = 1.0;
            const int c = n - 1 - l + 1;
            for (int i = 1; i < l; ++i) {
                const double r0ic = (one_minus_qpow(q, 0) + std::pow(q, 0 + i) -
                                     std::pow(q, 0 + i + c)) /
                                    one_minus_qpow(q, i + c);
                direct *= 1.0 - r0ic;
            }
            CHECK(mallows_cluster_lower_bound(n, l, 1, q) == Approx(direct).epsilon(1e-12));
        }
    }
}

TEST_CASE("supercluster limits") {
    auto heavy = ShiftDistribution::power_law(1.5);
    CHECK(supercluster_limit(heavy, std::nullopt) == 0.0);
    CHECK(supercluster_limit(heavy, 3) == 0.0);

    auto g = ShiftDistribution::geometric(0.5);
    CHECK(supercluster_limit(g, 1) == Approx(0.2887880950866024).epsilon(1e-10));
    CHECK(supercluster_limit(g, std::nullopt) == Approx(0.0833985638637485).epsilon(1e-10));

    auto g3 = ShiftDistribution::geometric(0.3);
    CHECK(supercluster_limit(g3, std::nullopt) == Approx(0.3753377608609101).epsilon(1e-10));

    // interior equals the square of the k=1 limit; k recurrence multiplies N_k
    for (const auto& d : {ShiftDistribution::geometric(0.5),
                          ShiftDistribution::finite_with_geometric_tail({0.5}, 0.5),
                          ShiftDistribution::power_law(3.0)}) {
        const double fixed1 = supercluster_limit(d, 1);
        CHECK(supercluster_limit(d, std::nullopt) == Approx(fixed1 * fixed1).epsilon(1e-12));
        double prev = fixed1;
        for (int k = 1; k <= 6; ++k) {
            const double next = supercluster_limit(d, k + 1);
            REQUIRE(next == Approx(prev * d.cdf(k)).epsilon(1e-12));
            REQUIRE(next <= prev + 1e-15);
            prev = next;
        }
    }
}

TEST_CASE("euler product") {
    CHECK(euler_product(0.5) == Approx(0.2887880950866024).epsilon(1e-11));
    CHECK(log_euler_product(0.5) == Approx(std::log(0.2887880950866024)).epsilon(1e-11));
    CHECK(euler_product(1e-6) == Approx(1.0).epsilon(1e-5));
    // the geometric supercluster limit is the Euler product
    for (double q : {0.3, 0.7}) {
        CHECK(supercluster_limit(ShiftDistribution::geometric(q), 1) ==
              Approx(euler_product(q)).epsilon(1e-10));
    }
    // near q=1 the log tracks -pi^2/(6(1-q)); tight agreement is checked in
    // the acceptance suite
    const double target = -M_PI * M_PI / (6.0 * 0.01);
    CHECK(std::abs(log_euler_product(0.99) - target) / std::abs(target) < 0.05);
}

TEST_CASE("envelope coefficients") {
    auto low2 = lower_envelope_coefficient(2);
    CHECK(low2.factorial_form == Approx(1.0 / 24.0).epsilon(1e-14));
    CHECK(low2.beta_form == Approx(1.0 / 6.0).epsilon(1e-14));
    CHECK(low2.min() == Approx(1.0 / 24.0).epsilon(1e-14));

    CHECK(upper_envelope_coefficient(2) == Approx(1.0 - 2.0 / std::exp(1.0)).epsilon(1e-14));
    // frozen from an independent evaluation
    CHECK(upper_envelope_coefficient(3) == Approx(0.080830895954234135).epsilon(1e-12));
    CHECK(upper_envelope_coefficient(5) == Approx(0.0086991343317217143).epsilon(1e-12));
    CHECK(upper_envelope_coefficient(10) == Approx(4.2939648420443046e-5).epsilon(1e-12));
    CHECK(upper_envelope_coefficient(20) == Approx(1.4219206165903537e-9).epsilon(1e-12));

    for (int l = 2; l <= 20; ++l) {
        REQUIRE(std::abs(upper_envelope_coefficient(l) -
                         upper_envelope_coefficient_quadrature(l)) <= 1e-10);
    }
    // improved coefficient beats the general 1/l one
    for (int l = 2; l <= 50; ++l) {
        REQUIRE(upper_envelope_coefficient(l) <= 1.0 / l);
    }
    // large-l envelope of the upper coefficient: between e^{1/2} and
    // sqrt(2 pi) e (with slack) after scaling by e^l sqrt(l)
    for (int l = 10; l <= 50; ++l) {
        const double scaled = upper_envelope_coefficient(l) * std::exp(static_cast<double>(l)) *
                              std::sqrt(static_cast<double>(l));
        REQUIRE(scaled >= std::exp(0.5));
        REQUIRE(scaled <= std::sqrt(2.0 * M_PI) * std::exp(1.0) * 1.1);
    }
}

TEST_CASE("gamma factor and the linear-regime coefficient") {
    CHECK(gamma_factor(1.0, 0.5) == Approx(-0.47407698418010668).epsilon(1e-12));
    for (double c : {0.1, 1.0, 3.0}) {
        for (double d : {0.1, 0.5, 0.9}) {
            REQUIRE(gamma_factor(c, d) < 0.0);
        }
    }
    CHECK_THROWS_AS(gamma_factor(0.0, 0.5), ValidationError);
    CHECK_THROWS_AS(gamma_factor(1.0, 1.0), ValidationError);

    CHECK(linear_regime_upper_coeff(1e-3, 0.5, 3) == Approx(1.00015343879661).epsilon(1e-9));
    CHECK(linear_regime_upper_coeff(1.0, 0.5, 2) == Approx(1.0802122640855416).epsilon(1e-9));
    CHECK(linear_regime_upper_coeff(1.0, 0.5, 3) == Approx(1.1703176108169016).epsilon(1e-9));
    CHECK(linear_regime_upper_coeff(0.5, 0.25, 4) == Approx(1.3422317646877975).epsilon(1e-9));

    // quadrature self-test: two tolerance settings agree to the coarser one
    const double coarse = linear_regime_upper_coeff(1.7, 0.35, 3, 1e-6);
    const double fine = linear_regime_upper_coeff(1.7, 0.35, 3, 1e-11);
    CHECK(std::abs(coarse - fine) <= 1e-6);
}

TEST_CASE("scaling envelope rows") {
    ScalingGrid grid;
    grid.alpha = 0.5;
    grid.c = 1.0;
    grid.l = 2;
    grid.n_values = {100, 1000, 10000};
    grid.k_fraction = 0.5;
    auto rows = scaling_envelope(grid);
    REQUIRE(rows.size() == 3);
    CHECK(rows[2].n == 10000);
    CHECK(rows[2].q_n == Approx(0.99).epsilon(1e-12));
    CHECK(rows[2].k_n == 5000);
    CHECK(rows[2].lower == Approx((1.0 / 24.0) * 2.0 / 100.0).epsilon(1e-12));
    CHECK(rows[2].upper_improved == Approx(0.26424111765711536 * 0.02).epsilon(1e-10));
    // scale drops by 10^{-alpha(l-1)} per decade of n
    CHECK(rows[1].scale / rows[0].scale == Approx(std::pow(10.0, -0.5)).epsilon(1e-12));
    CHECK(rows[2].scale / rows[1].scale == Approx(std::pow(10.0, -0.5)).epsilon(1e-12));
    for (const auto& r : rows) {
        CHECK(r.lower < r.upper_improved);
        CHECK(r.upper_improved < r.upper_general);
    }

    ScalingGrid bad = grid;
    bad.n_values = {100, 100};
    CHECK_THROWS_AS(scaling_envelope(bad), ValidationError);
    ScalingGrid huge_c = grid;
    huge_c.c = 50.0;  // q_n out of (0,1) at n = 100
    CHECK_THROWS_AS(scaling_envelope(huge_c), ValidationError);
}

TEST_CASE("bounds report assembles the sandwich") {
    auto d = ShiftDistribution::geometric(0.5);
    auto rep = bounds_report(d, 7, 2, 2, true);
    REQUIRE(rep.exact.has_value());
    REQUIRE(rep.upper.has_value());
    REQUIRE(rep.mallows_lower.has_value());
    CHECK(rep.lower <= *rep.exact + 1e-12);
    CHECK(*rep.mallows_lower <= *rep.exact + 1e-12);
    CHECK(*rep.exact <= *rep.upper + 1e-12);
    CHECK(rep.measure == "geom:q=0.5");
    CHECK(*rep.exact == Approx(0.41057367829021372).epsilon(1e-12));

    auto pl = bounds_report(ShiftDistribution::power_law(3.0), 20, 3, 4, false);
    CHECK_FALSE(pl.exact.has_value());
    CHECK_FALSE(pl.mallows_lower.has_value());
    REQUIRE(pl.upper.has_value());
    CHECK(pl.lower <= *pl.upper);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "permclust/exact.hpp"
#include "permclust/numeric.hpp"

using namespace permclust;
using doctest::Approx;

namespace {

Permutation P(std::string_view s) { return Permutation::parse(s); }

template <typename F>
void for_all_permutations(int n, F&& f) {
    std::vector<std::int32_t> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 1);
    do {
        f(Permutation(std::vector<std::int32_t>(v)));
    } while (std::next_permutation(v.begin(), v.end()));
}

}  // namespace

TEST_CASE("mallows normalizer") {
    CHECK(mallows_normalizer(3, 0.5) == Approx(2.625).epsilon(1e-13));
    CHECK(mallows_normalizer(1, 0.37) == Approx(1.0).epsilon(1e-14));
    for (int n : {1, 2, 5, 8}) {
        double fact = 1;
        for (int i = 2; i <= n; ++i) fact *= i;
        CHECK(mallows_normalizer(n, 1.0) == Approx(fact).epsilon(1e-13));
    }
    // normalizer equals the enumerated weight sum
    for (double q : {0.2, 0.5, 1.25, 2.0}) {
        for (int n : {3, 5}) {
            KahanSum z;
            for_all_permutations(n, [&](const Permutation& p) {
                z.add(std::pow(q, static_cast<double>(inversions(p))));
            });
            CHECK(mallows_normalizer(n, q) == Approx(z.value()).epsilon(1e-12));
        }
    }
}

TEST_CASE("mallows pmf") {
    CHECK(mallows_pmf(P("3 2 1"), 0.5) == Approx(1.0 / 21.0).epsilon(1e-13));
    for_all_permutations(4, [&](const Permutation& p) {
        CHECK(mallows_pmf(p, 1.0) == Approx(1.0 / 24.0).epsilon(1e-13));
    });
    // q -> 0 degenerates onto the identity
    CHECK(mallows_pmf(Permutation::identity(6), 1e-9) == Approx(1.0).epsilon(1e-8));
}

TEST_CASE("pshifted pmf: empty product, normalization, frozen table") {
    auto d = ShiftDistribution::geometric(0.5);
    CHECK(pshifted_pmf(Permutation::identity(1), d) == 1.0);

    for (const auto& dd :
         {ShiftDistribution::geometric(0.5),
          ShiftDistribution::finite_with_geometric_tail({0.5}, 0.5),
          ShiftDistribution::power_law(2.0)}) {
        KahanSum total;
        for_all_permutations(4, [&](const Permutation& p) { total.add(pshifted_pmf(p, dd)); });
        CHECK(total.value() == Approx(1.0).epsilon(1e-13));
    }

    // spot values frozen from an independent computation
    CHECK(pshifted_pmf(P("1 2 3 4"), d) == Approx(0.2031746031746032).epsilon(1e-13));
    CHECK(pshifted_pmf(P("2 3 4 1"), d) == Approx(0.0253968253968254).epsilon(1e-13));
    CHECK(pshifted_pmf(P("4 3 2 1"), d) == Approx(0.0031746031746032).epsilon(1e-12));
}

TEST_CASE("geometric shifted law is the Mallows law") {
    for (double q : {0.2, 0.5, 0.8}) {
        auto d = ShiftDistribution::geometric(q);
        for (int n = 1; n <= 6; ++n) {
            for_all_permutations(n, [&](const Permutation& p) {
                REQUIRE(std::abs(pshifted_pmf(p, d) - mallows_pmf(p, q)) <= 1e-12);
            });
        }
    }
}

TEST_CASE("reversal duality links q and 1/q") {
    for (double q : {1.25, 2.0}) {
        for (int n : {4, 6}) {
            for_all_permutations(n, [&](const Permutation& p) {
                REQUIRE(mallows_pmf(p, q) ==
                        Approx(mallows_pmf(reverse(p), 1.0 / q)).epsilon(1e-11));
            });
        }
    }
}

TEST_CASE("enumeration sums the pmf to one") {
    std::vector<Measure> measures;
    measures.emplace_back(MallowsMeasure{0.5});
    measures.emplace_back(MallowsMeasure{1.0});
    measures.emplace_back(MallowsMeasure{2.0});
    measures.emplace_back(ShiftDistribution::geometric(0.5));
    measures.emplace_back(ShiftDistribution::finite_with_geometric_tail({0.5}, 0.5));
    measures.emplace_back(ShiftDistribution::power_law(1.5));
    for (const auto& m : measures) {
        for (int n = 1; n <= 8; ++n) {
            auto r = exact_event_prob(n, m, [](auto) { return true; });
            REQUIRE(std::abs(r.probability - 1.0) <= 1e-12);
            REQUIRE(r.method == ExactEventResult::Method::enumeration);
        }
    }
    CHECK(exact_event_prob(4, MallowsMeasure{1.0}, [](auto) { return true; }).support_size == 24);
}

TEST_CASE("enumeration cap is enforced") {
    auto everything = [](std::span<const std::int32_t>) { return true; };
    CHECK_THROWS_AS(exact_event_prob(11, MallowsMeasure{1.0}, everything), CapacityError);
    EnumerationOptions wide;
    wide.cap = 13;
    CHECK_THROWS_AS(exact_event_prob(4, MallowsMeasure{1.0}, everything, wide), ValidationError);
    EnumerationOptions eleven;
    eleven.cap = 11;
    CHECK_NOTHROW(exact_event_prob(4, MallowsMeasure{1.0}, everything, eleven));
}

TEST_CASE("parallel enumeration reduces deterministically") {
    ClusterQuery q{7, 2, 3, {}};
    const double p1 = exact_cluster_prob(7, MallowsMeasure{0.5}, q);
    EnumerationOptions four;
    four.workers = 4;
    const double p4 = exact_cluster_prob(7, MallowsMeasure{0.5}, q, four);
    CHECK(p1 == p4);  // bit-identical, fixed block reduction order
}

TEST_CASE("uniform cluster probability closed form vs enumeration") {
    // (n-l+1) l! (n-l)! / n! against brute force
    for (int n = 2; n <= 8; ++n) {
        for (int l = 2; l <= n; ++l) {
            double fact_l = 1, fact_nl = 1, fact_n = 1;
            for (int i = 2; i <= l; ++i) fact_l *= i;
            for (int i = 2; i <= n - l; ++i) fact_nl *= i;
            for (int i = 2; i <= n; ++i) fact_n *= i;
            const double closed = (n - l + 1) * fact_l * fact_nl / fact_n;
            for (int k = 1; k + l - 1 <= n; ++k) {
                REQUIRE(exact_cluster_prob(n, MallowsMeasure{1.0}, {n, l, k, {}}) ==
                        Approx(closed).epsilon(1e-12));
            }
        }
    }
    CHECK(exact_cluster_prob(4, MallowsMeasure{1.0}, {4, 2, 1, {}}) == Approx(0.5).epsilon(1e-13));
}

TEST_CASE("frozen cluster probabilities from an independent enumeration") {
    CHECK(exact_cluster_prob(5, MallowsMeasure{0.5}, {5, 2, 2, {}}) ==
          Approx(0.46543778801843318).epsilon(1e-12));
    CHECK(exact_cluster_prob(7, MallowsMeasure{0.5}, {7, 2, 2, {}}) ==
          Approx(0.41057367829021372).epsilon(1e-12));
    CHECK(exact_cluster_prob(7, ShiftDistribution::geometric(0.3), {7, 2, 2, {}}) ==
          Approx(0.564265294748).epsilon(1e-10));
    CHECK(exact_cluster_prob(7, ShiftDistribution::geometric(0.6), {7, 2, 2, {}}) ==
          Approx(0.360544396852).epsilon(1e-10));
}

TEST_CASE("cluster probabilities agree across the two measure routes") {
    auto d = ShiftDistribution::geometric(0.5);
    for (int n : {4, 5, 6}) {
        for (int l = 2; l <= n; ++l) {
            for (int k = 1; k + l - 1 <= n; ++k) {
                ClusterQuery q{n, l, k, {}};
                REQUIRE(std::abs(exact_cluster_prob(n, MallowsMeasure{0.5}, q) -
                                 exact_cluster_prob(n, Measure(d), q)) <= 1e-12);
            }
        }
    }
}

TEST_CASE("duality over block starts, exact to 1e-12") {
    for (double q : {0.3, 2.0}) {
        for (int n = 2; n <= 7; ++n) {
            for (int l = 2; l <= n; ++l) {
                for (int k = 1; k + l - 1 <= n; ++k) {
                    const double a = exact_cluster_prob(n, MallowsMeasure{q}, {n, l, k, {}});
                    const double b =
                        exact_cluster_prob(n, MallowsMeasure{q}, {n, l, n + 2 - k - l, {}});
                    REQUIRE(std::abs(a - b) <= 1e-12);
                }
            }
        }
    }
}

TEST_CASE("pattern probabilities partition the plain event") {
    for (const Measure m : {Measure(MallowsMeasure{0.5}), Measure(ShiftDistribution::power_law(2.0))}) {
        const int n = 5;
        for (int l = 2; l <= 3; ++l) {
            for (int k = 1; k + l - 1 <= n; ++k) {
                KahanSum sum;
                for_all_permutations(l, [&](const Permutation& tau) {
                    sum.add(exact_cluster_prob(n, m, {n, l, k, tau}));
                });
                const double plain = exact_cluster_prob(n, m, {n, l, k, {}});
                REQUIRE(std::abs(sum.value() - plain) <= 1e-12);
            }
        }
    }
}

TEST_CASE("cluster probability is non-increasing in n for the geometric law") {
    auto d = ShiftDistribution::geometric(0.5);
    for (auto [l, k] : std::vector<std::pair<int, int>>{{2, 1}, {2, 2}, {2, 3}, {3, 2}, {4, 2}}) {
        double prev = 1.0;
        for (int n = k + l - 1; n <= 9; ++n) {
            const double cur = (n == 1) ? 1.0 : exact_cluster_prob(n, Measure(d), {n, l, k, {}});
            REQUIRE(cur <= prev + 1e-13);
            prev = cur;
        }
    }
}

TEST_CASE("expected block count") {
    CHECK(exact_expected_Nl(5, MallowsMeasure{1.0}, 2) == Approx(1.6).epsilon(1e-13));
    for (int n : {3, 5, 6}) {
        CHECK(exact_expected_Nl(n, MallowsMeasure{0.7}, n) == Approx(1.0).epsilon(1e-12));
    }
    // linearity: single sweep equals the sum over block starts
    for (const Measure m : {Measure(MallowsMeasure{0.6}), Measure(ShiftDistribution::geometric(0.4))}) {
        for (int l = 2; l <= 4; ++l) {
            KahanSum sum;
            for (int k = 1; k + l - 1 <= 6; ++k) {
                sum.add(exact_cluster_prob(6, m, {6, l, k, {}}));
            }
            REQUIRE(exact_expected_Nl(6, m, l) == Approx(sum.value()).epsilon(1e-12));
        }
    }
}

TEST_CASE("block alignment by enumeration") {
    auto d = ShiftDistribution::geometric(0.5);
    // k = 1 forces a = 0 and certainty
    CHECK(exact_block_alignment(d, 3, 1, 0) == Approx(1.0).epsilon(1e-13));
    // against the two-factor closed form at k=2, l=2
    CHECK(exact_block_alignment(d, 2, 2, 0) == Approx(4.0 / 7.0).epsilon(1e-12));
    CHECK(exact_block_alignment(d, 2, 2, 1) == Approx(1.0 / 7.0).epsilon(1e-12));
    // disjoint decomposition of the clustered prefix event
    for (const auto& dd : {ShiftDistribution::geometric(0.3),
                           ShiftDistribution::finite_with_geometric_tail({0.5}, 0.5)}) {
        for (auto [l, k] : std::vector<std::pair<int, int>>{{2, 2}, {2, 4}, {3, 3}, {4, 2}}) {
            KahanSum sum;
            for (int a = 0; a <= k - 1; ++a) sum.add(exact_block_alignment(dd, l, k, a));
            const int n = k + l - 1;
            REQUIRE(sum.value() ==
                    Approx(exact_cluster_prob(n, Measure(dd), {n, l, k, {}})).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(exact_block_alignment(d, 2, 2, 2), ValidationError);
}

TEST_CASE("uniform N2 law at n=7 matches the frozen reference") {
    // reference law computed independently; reused by the Monte Carlo checks
    const std::map<int, double> expected = {
        {0, 0.12817460317460317}, {1, 0.31349206349206349}, {2, 0.33134920634920634},
        {3, 0.17619047619047619}, {4, 0.044841269841269841}, {5, 0.0055555555555555556},
        {6, 0.00039682539682539683}};
    for (const auto& [count, prob] : expected) {
        auto r = exact_event_prob(7, MallowsMeasure{1.0}, [&, c = count](auto perm) {
            return detail::count_clusters_values(perm, 2) == c;
        });
        REQUIRE(r.probability == Approx(prob).epsilon(1e-12));
    }
}

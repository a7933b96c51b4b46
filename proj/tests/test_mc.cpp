#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "permclust/mc.hpp"
#include "permclust/sampler.hpp"
#include "permclust/statistics.hpp"

using namespace permclust;
using doctest::Approx;

TEST_CASE("normal quantile and chi-square machinery") {
    CHECK(inverse_normal_cdf(0.995) == Approx(2.5758293035489008).epsilon(1e-12));
    CHECK(inverse_normal_cdf(0.975) == Approx(1.9599639845400545).epsilon(1e-12));
    CHECK(inverse_normal_cdf(0.5) == Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(inverse_normal_cdf(0.025) == Approx(-inverse_normal_cdf(0.975)).epsilon(1e-12));

    CHECK(chi_square_sf(0.0, 3) == Approx(1.0));
    CHECK(chi_square_sf(2.0, 2) == Approx(std::exp(-1.0)).epsilon(1e-12));
    for (double a : {0.5, 2.0, 7.5}) {
        for (double x : {0.1, 1.0, 10.0}) {
            CHECK(regularized_gamma_p(a, x) + regularized_gamma_q(a, x) ==
                  Approx(1.0).epsilon(1e-12));
        }
    }

    auto iv = wilson_interval(0, 100, 2.5758);
    CHECK(iv.low == 0.0);
    CHECK(iv.high > 0.0);
    auto iv2 = wilson_interval(50, 100, 1.96);
    CHECK(iv2.low < 0.5);
    CHECK(iv2.high > 0.5);
    CHECK_THROWS_AS(wilson_interval(5, 4, 2.0), ValidationError);
}

TEST_CASE("degenerate cluster query has zero variance") {
    McConfig cfg{2000, 7, 0.99, 1};
    auto rep = estimate_cluster_prob(MallowsMeasure{0.5}, 6, {6, 6, 1, {}}, cfg);
    CHECK(rep.estimate == 1.0);
    CHECK(rep.std_error == 0.0);
    CHECK(rep.ci_high == 1.0);
}

TEST_CASE("uniform estimate recovers the closed form") {
    McConfig cfg{200000, 11, 0.99, 1};
    auto rep = estimate_cluster_prob(MallowsMeasure{1.0}, 4, {4, 2, 1, {}}, cfg);
    CHECK(std::abs(rep.estimate - 0.5) <= 3.9 * rep.std_error);
    CHECK(rep.ci_low <= 0.5);
    CHECK(rep.ci_high >= 0.5);
}

TEST_CASE("shifted-law estimate matches enumeration at n=8") {
    McConfig cfg{100000, 21, 0.99, 1};
    ClusterQuery q{8, 2, 3, {}};
    const double exact = exact_cluster_prob(8, MallowsMeasure{0.5}, q);
    auto rep = estimate_cluster_prob(MallowsMeasure{0.5}, 8, q, cfg);
    CHECK(std::abs(rep.estimate - exact) <= 3.9 * rep.std_error);
}

TEST_CASE("duality handles q above one") {
    McConfig cfg{150000, 33, 0.99, 1};
    ClusterQuery q{6, 2, 2, {}};
    const double exact = exact_cluster_prob(6, MallowsMeasure{2.0}, q);
    auto rep = estimate_cluster_prob(MallowsMeasure{2.0}, 6, q, cfg);
    CHECK(std::abs(rep.estimate - exact) <= 3.9 * rep.std_error);

    // pattern events reverse correctly: tau on the reversed sample
    ClusterQuery inc{6, 2, 2, Permutation::parse("1 2")};
    const double exact_inc = exact_cluster_prob(6, MallowsMeasure{2.0}, inc);
    auto rep_inc = estimate_cluster_prob(MallowsMeasure{2.0}, 6, inc, cfg);
    CHECK(std::abs(rep_inc.estimate - exact_inc) <=
          3.9 * std::max(rep_inc.std_error, 1e-4));
}

TEST_CASE("estimates reproduce bit-for-bit across worker counts") {
    ClusterQuery q{12, 3, 4, {}};
    std::vector<EstimateReport> reps;
    for (int workers : {1, 4, 16}) {
        McConfig cfg{50000, 99, 0.99, workers};
        reps.push_back(estimate_cluster_prob(ShiftDistribution::geometric(0.6), 12, q, cfg));
    }
    for (std::size_t i = 1; i < reps.size(); ++i) {
        CHECK(reps[i].estimate == reps[0].estimate);
        CHECK(reps[i].std_error == reps[0].std_error);
        CHECK(reps[i].ci_low == reps[0].ci_low);
        CHECK(reps[i].ci_high == reps[0].ci_high);
    }
    McConfig cfg4{50000, 99, 0.99, 4};
    auto nl = estimate_expected_Nl(ShiftDistribution::geometric(0.6), 12, 2, cfg4);
    McConfig cfg1{50000, 99, 0.99, 1};
    auto nl1 = estimate_expected_Nl(ShiftDistribution::geometric(0.6), 12, 2, cfg1);
    CHECK(nl.estimate == nl1.estimate);
    CHECK(nl.std_error == nl1.std_error);
}

TEST_CASE("Wilson intervals cover the exact value at calibrated rate") {
    ClusterQuery q{6, 2, 2, {}};
    const double exact = exact_cluster_prob(6, MallowsMeasure{0.5}, q);
    int covered = 0;
    for (int rep = 0; rep < 200; ++rep) {
        McConfig cfg{2000, 1000 + static_cast<std::uint64_t>(rep), 0.99, 1};
        auto r = estimate_cluster_prob(MallowsMeasure{0.5}, 6, q, cfg);
        covered += (r.ci_low <= exact && exact <= r.ci_high);
    }
    CHECK(covered >= 190);
}

TEST_CASE("block-start duality holds at Monte Carlo level") {
    McConfig cfg{120000, 4242, 0.99, 1};
    for (auto [l, k] : std::vector<std::pair<int, int>>{{2, 2}, {3, 1}}) {
        const int n = 9;
        auto a = estimate_cluster_prob(MallowsMeasure{0.5}, n, {n, l, k, {}}, cfg);
        McConfig cfg2{120000, 8911, 0.99, 1};
        auto b = estimate_cluster_prob(MallowsMeasure{0.5}, n, {n, l, n + 2 - k - l, {}}, cfg2);
        const double joint_se = std::hypot(a.std_error, b.std_error);
        CHECK(std::abs(a.estimate - b.estimate) <= 3.9 * joint_se);
    }
}

TEST_CASE("expected block count estimate matches enumeration") {
    McConfig cfg{150000, 5150, 0.99, 1};
    const double exact = exact_expected_Nl(5, MallowsMeasure{1.0}, 2);
    auto rep = estimate_expected_Nl(MallowsMeasure{1.0}, 5, 2, cfg);
    CHECK(exact == Approx(1.6).epsilon(1e-12));
    CHECK(std::abs(rep.estimate - exact) <= 3.9 * rep.std_error);
    // l = n degenerates to the constant 1
    auto one = estimate_expected_Nl(MallowsMeasure{0.7}, 5, 5, cfg);
    CHECK(one.estimate == 1.0);
    CHECK(one.std_error == 0.0);
}

TEST_CASE("N2 law matches the enumeration reference at n=7") {
    const int n = 7;
    McConfig cfg{100000, 777, 0.99, 1};
    // empirical cell frequencies against the exact law, cell by cell
    std::vector<double> exact_law;
    for (int c = 0; c <= 6; ++c) {
        exact_law.push_back(exact_event_prob(n, MallowsMeasure{1.0}, [&](auto perm) {
                                return detail::count_clusters_values(perm, 2) == c;
                            }).probability);
    }
    std::vector<long long> hist(7, 0);
    for (long long i = 0; i < cfg.samples; ++i) {
        RngStream rng(cfg.seed, static_cast<std::uint64_t>(i));
        auto p = sample_uniform_perm(n, rng);
        ++hist[static_cast<std::size_t>(count_clusters(p, 2))];
    }
    for (int c = 0; c <= 6; ++c) {
        const double emp = static_cast<double>(hist[static_cast<std::size_t>(c)]) /
                           static_cast<double>(cfg.samples);
        const double se = std::sqrt(exact_law[static_cast<std::size_t>(c)] *
                                    (1 - exact_law[static_cast<std::size_t>(c)]) /
                                    static_cast<double>(cfg.samples));
        REQUIRE(std::abs(emp - exact_law[static_cast<std::size_t>(c)]) <=
                std::max(3.0 * se, 1e-4));
    }
}

TEST_CASE("Poisson(2) total variation shrinks with n") {
    McConfig cfg{4000, 31415, 0.99, 1};
    CHECK(n2_poisson_tv(200, cfg) <= 0.08);
}

TEST_CASE("inversion rate estimates") {
    McConfig cfg{500, 161, 0.99, 1};
    auto one = estimate_inversion_rate(ShiftDistribution::geometric(0.5), 1, cfg);
    CHECK(one.estimate == 0.0);

    auto rep = estimate_inversion_rate(ShiftDistribution::geometric(0.5), 2000, cfg);
    CHECK(std::abs(rep.estimate - 1.0) <= 0.1);

    // heavy tail: the rate grows without bound along n
    double prev = -1.0;
    for (int n : {100, 400, 1600}) {
        McConfig c{400, 202, 0.99, 1};
        auto r = estimate_inversion_rate(ShiftDistribution::power_law(1.5), n, c);
        CHECK(r.estimate > prev);
        prev = r.estimate;
    }
}

TEST_CASE("backward-rank goodness of fit") {
    McConfig cfg{1000000, 90210, 0.99, 1};
    auto d = ShiftDistribution::geometric(0.5);
    auto report = gof_backward_ranks(d, 10, 10, cfg);
    REQUIRE(report.per_level.size() == 9);
    for (const auto& cell : report.per_level) {
        CAPTURE(cell.j);
        REQUIRE(cell.p_value > 1e-3);
    }
    REQUIRE(report.independence_23.has_value());
    CHECK(report.independence_23->p_value > 1e-3);
    CHECK(report.independence_23->df == 2);

    // cell probabilities at j=2 sum to one
    CHECK(d.truncated_pmf(2, 0) + d.truncated_pmf(2, 1) == Approx(1.0).epsilon(1e-13));

    // power: testing q=0.5 samples against a q=0.7 null must fail decisively
    McConfig small{200000, 90210, 0.99, 1};
    auto wrong_null = ShiftDistribution::geometric(0.7);
    auto power = gof_backward_ranks(d, 10, 6, small, &wrong_null);
    for (const auto& cell : power.per_level) {
        REQUIRE(cell.p_value < 1e-6);
    }
}

#include "permclust/mc.hpp"

#include <array>
#include <cmath>
#include <functional>

#include "permclust/parallel.hpp"
#include "permclust/rng.hpp"
#include "permclust/sampler.hpp"
#include "permclust/statistics.hpp"

namespace permclust {

namespace {

constexpr long long kBlock = 4096;

void check_config(const McConfig& cfg) {
    if (cfg.samples < 1) throw ValidationError("sample count must be positive");
    if (!(cfg.confidence > 0.0 && cfg.confidence < 1.0)) {
        throw ValidationError("confidence must lie in (0,1)");
    }
    if (cfg.workers < 1) throw ValidationError("worker count must be positive");
}

double two_sided_z(double confidence) {
    return inverse_normal_cdf(0.5 + 0.5 * confidence);
}

// Prepared permutation source for one measure at fixed n.
class PermDrawer {
public:
    PermDrawer(const Measure& m, int n) : n_(n) {
        if (const auto* mm = std::get_if<MallowsMeasure>(&m)) {
            if (!(mm->q > 0.0)) throw ValidationError("Mallows parameter must be positive");
            if (mm->q == 1.0) {
                mode_ = Mode::uniform;
            } else if (mm->q < 1.0) {
                mode_ = Mode::shifted;
                plan_.emplace(ShiftDistribution::geometric(mm->q), n);
            } else {
                mode_ = Mode::dual_reversed;
                plan_.emplace(ShiftDistribution::geometric(1.0 / mm->q), n);
            }
        } else {
            mode_ = Mode::shifted;
            plan_.emplace(std::get<ShiftDistribution>(m), n);
        }
    }

    Permutation draw(RngStream& rng) const {
        switch (mode_) {
            case Mode::uniform:
                return sample_uniform_perm(n_, rng);
            case Mode::shifted:
                return detail::sample_perm_insertion_with(*plan_, n_,
                                                          [&rng] { return rng.next_unit(); });
            case Mode::dual_reversed:
            default:
                return reverse(detail::sample_perm_insertion_with(
                    *plan_, n_, [&rng] { return rng.next_unit(); }));
        }
    }

private:
    enum class Mode { uniform, shifted, dual_reversed };
    Mode mode_ = Mode::uniform;
    int n_;
    std::optional<TruncatedSampler> plan_;
};

struct Moments {
    long long sum = 0;
    long double sumsq = 0.0L;
};

// Sum and sum-of-squares of an integer statistic over cfg.samples draws.
// Sample i uses stream i; fixed-size blocks reduce in index order.
Moments mc_moments(const McConfig& cfg,
                   const std::function<long long(long long, RngStream&)>& stat) {
    const long long blocks = (cfg.samples + kBlock - 1) / kBlock;
    std::vector<Moments> partial(static_cast<std::size_t>(blocks));
    run_blocks(cfg.workers, blocks, [&](long long b) {
        Moments m;
        const long long lo = b * kBlock;
        const long long hi = std::min(cfg.samples, lo + kBlock);
        for (long long i = lo; i < hi; ++i) {
            RngStream rng(cfg.seed, static_cast<std::uint64_t>(i));
            const long long v = stat(i, rng);
            m.sum += v;
            m.sumsq += static_cast<long double>(v) * static_cast<long double>(v);
        }
        partial[static_cast<std::size_t>(b)] = m;
    });
    Moments total;
    for (const auto& m : partial) {
        total.sum += m.sum;
        total.sumsq += m.sumsq;
    }
    return total;
}

EstimateReport mean_report(const Moments& m, const McConfig& cfg, double denom) {
    // mean and normal interval of statistic/denom
    const auto N = static_cast<double>(cfg.samples);
    const double mean = static_cast<double>(m.sum) / N / denom;
    double var = 0.0;
    if (cfg.samples > 1) {
        const long double centered =
            m.sumsq - static_cast<long double>(m.sum) * static_cast<long double>(m.sum) /
                          static_cast<long double>(cfg.samples);
        var = std::max(0.0, static_cast<double>(centered)) /
              (static_cast<double>(cfg.samples - 1) * denom * denom);
    }
    EstimateReport rep;
    rep.samples = cfg.samples;
    rep.estimate = mean;
    rep.std_error = std::sqrt(var / N);
    const double z = two_sided_z(cfg.confidence);
    rep.ci_low = mean - z * rep.std_error;
    rep.ci_high = mean + z * rep.std_error;
    return rep;
}

}  // namespace

EstimateReport estimate_cluster_prob(const Measure& m, int n, const ClusterQuery& q,
                                     const McConfig& cfg) {
    check_config(cfg);
    q.validate();
    if (q.n != n) throw ValidationError("cluster query size does not match n");
    const PermDrawer drawer(m, n);
    const Permutation* pattern = q.pattern ? &*q.pattern : nullptr;
    const Moments mo = mc_moments(cfg, [&](long long, RngStream& rng) -> long long {
        const Permutation p = drawer.draw(rng);
        return detail::is_cluster_values(p.values(), q.l, q.k, pattern) ? 1 : 0;
    });

    EstimateReport rep;
    rep.samples = cfg.samples;
    const auto N = static_cast<double>(cfg.samples);
    const double phat = static_cast<double>(mo.sum) / N;
    rep.estimate = phat;
    rep.std_error = std::sqrt(phat * (1.0 - phat) / N);
    const auto iv = wilson_interval(mo.sum, cfg.samples, two_sided_z(cfg.confidence));
    rep.ci_low = iv.low;
    rep.ci_high = iv.high;
    return rep;
}

EstimateReport estimate_expected_Nl(const Measure& m, int n, int l, const McConfig& cfg) {
    check_config(cfg);
    if (l < 2 || l > n) throw ValidationError("expected_Nl requires 2 <= l <= n");
    const PermDrawer drawer(m, n);
    const Moments mo = mc_moments(cfg, [&](long long, RngStream& rng) -> long long {
        return detail::count_clusters_values(drawer.draw(rng).values(), l);
    });
    return mean_report(mo, cfg, 1.0);
}

double n2_poisson_tv(int n, const McConfig& cfg) {
    check_config(cfg);
    if (n < 2) throw ValidationError("N_2 needs n >= 2");
    const long long blocks = (cfg.samples + kBlock - 1) / kBlock;
    std::vector<std::vector<long long>> partial(static_cast<std::size_t>(blocks));
    run_blocks(cfg.workers, blocks, [&](long long b) {
        auto& hist = partial[static_cast<std::size_t>(b)];
        hist.assign(static_cast<std::size_t>(n), 0);
        const long long lo = b * kBlock;
        const long long hi = std::min(cfg.samples, lo + kBlock);
        for (long long i = lo; i < hi; ++i) {
            RngStream rng(cfg.seed, static_cast<std::uint64_t>(i));
            const auto p = sample_uniform_perm(n, rng);
            ++hist[static_cast<std::size_t>(detail::count_clusters_values(p.values(), 2))];
        }
    });
    std::vector<long long> hist(static_cast<std::size_t>(n), 0);
    for (const auto& part : partial) {
        for (std::size_t k = 0; k < part.size(); ++k) hist[k] += part[k];
    }

    // TV against Poisson(2), tail truncated where the pmf drops below 1e-9
    const auto N = static_cast<double>(cfg.samples);
    double tv = 0.0;
    double pois_covered = 0.0;
    double emp_covered = 0.0;
    double pmf = std::exp(-2.0);
    for (int k = 0; k < n; ++k) {
        if (k > 2 && pmf < 1e-9) break;
        const double emp = static_cast<double>(hist[static_cast<std::size_t>(k)]) / N;
        tv += std::abs(emp - pmf);
        pois_covered += pmf;
        emp_covered += emp;
        pmf *= 2.0 / (k + 1);
    }
    tv += (1.0 - pois_covered) + (1.0 - emp_covered);
    return 0.5 * tv;
}

EstimateReport estimate_inversion_rate(const ShiftDistribution& d, int n,
                                       const McConfig& cfg) {
    check_config(cfg);
    if (n < 1) throw ValidationError("inversion rate needs n >= 1");
    const PermDrawer drawer(Measure(d), n);
    const Moments mo = mc_moments(cfg, [&](long long, RngStream& rng) -> long long {
        return detail::inversions_values(drawer.draw(rng).values());
    });
    return mean_report(mo, cfg, static_cast<double>(n));
}

GofReport gof_backward_ranks(const ShiftDistribution& d, int n, int j_max,
                             const McConfig& cfg, const ShiftDistribution* null_d) {
    check_config(cfg);
    if (j_max < 2 || j_max > n) throw ValidationError("gof requires 2 <= j_max <= n");
    const ShiftDistribution& null_dist = null_d ? *null_d : d;

    // flat histogram layout: level j occupies offset[j-2] .. offset[j-2]+j-1
    std::vector<std::size_t> offset(static_cast<std::size_t>(j_max - 1));
    std::size_t total_cells = 0;
    for (int j = 2; j <= j_max; ++j) {
        offset[static_cast<std::size_t>(j - 2)] = total_cells;
        total_cells += static_cast<std::size_t>(j);
    }
    const bool joint = j_max >= 3;

    struct Acc {
        std::vector<long long> cells;
        std::array<long long, 6> pair{};  // (I2, I3) in row-major 2x3
    };
    const long long blocks = (cfg.samples + kBlock - 1) / kBlock;
    std::vector<Acc> partial(static_cast<std::size_t>(blocks));
    const TruncatedSampler plan(d, n);
    run_blocks(cfg.workers, blocks, [&](long long b) {
        auto& acc = partial[static_cast<std::size_t>(b)];
        acc.cells.assign(total_cells, 0);
        std::vector<std::int32_t> ranks;
        const long long lo = b * kBlock;
        const long long hi = std::min(cfg.samples, lo + kBlock);
        for (long long i = lo; i < hi; ++i) {
            RngStream rng(cfg.seed, static_cast<std::uint64_t>(i));
            const Permutation p = detail::sample_perm_insertion_with(
                plan, n, [&rng] { return rng.next_unit(); });
            detail::backward_ranks_values(p.values(), ranks);
            for (int j = 2; j <= j_max; ++j) {
                ++acc.cells[offset[static_cast<std::size_t>(j - 2)] +
                            static_cast<std::size_t>(ranks[static_cast<std::size_t>(j - 2)])];
            }
            if (joint) {
                ++acc.pair[static_cast<std::size_t>(ranks[0] * 3 + ranks[1])];
            }
        }
    });
    std::vector<long long> cells(total_cells, 0);
    std::array<long long, 6> pair{};
    for (const auto& acc : partial) {
        for (std::size_t c = 0; c < total_cells; ++c) cells[c] += acc.cells[c];
        for (std::size_t c = 0; c < 6; ++c) pair[c] += acc.pair[c];
    }

    GofReport report;
    const auto N = static_cast<double>(cfg.samples);
    for (int j = 2; j <= j_max; ++j) {
        // pool tail cells so every expected count is at least 5
        std::vector<double> expected;
        std::vector<double> observed;
        double exp_tail = 0.0;
        double obs_tail = 0.0;
        for (int i = j - 1; i >= 0; --i) {
            exp_tail += N * null_dist.truncated_pmf(j, i);
            obs_tail += static_cast<double>(
                cells[offset[static_cast<std::size_t>(j - 2)] + static_cast<std::size_t>(i)]);
            if (exp_tail >= 5.0 || i == 0) {
                expected.push_back(exp_tail);
                observed.push_back(obs_tail);
                exp_tail = 0.0;
                obs_tail = 0.0;
            }
        }
        if (expected.size() >= 2 && expected.back() < 5.0) {
            // fold a leftover small head cell into its neighbour
            expected[expected.size() - 2] += expected.back();
            observed[observed.size() - 2] += observed.back();
            expected.pop_back();
            observed.pop_back();
        }
        GofCell cell;
        cell.j = j;
        cell.df = static_cast<int>(expected.size()) - 1;
        for (std::size_t c = 0; c < expected.size(); ++c) {
            const double delta = observed[c] - expected[c];
            cell.chi2 += delta * delta / expected[c];
        }
        cell.p_value = cell.df >= 1 ? chi_square_sf(cell.chi2, cell.df) : 1.0;
        report.per_level.push_back(cell);
    }

    if (joint) {
        // 2x3 contingency test of independence
        double row[2] = {0, 0}, col[3] = {0, 0, 0};
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 3; ++c) {
                row[r] += static_cast<double>(pair[static_cast<std::size_t>(r * 3 + c)]);
                col[c] += static_cast<double>(pair[static_cast<std::size_t>(r * 3 + c)]);
            }
        }
        GofCell cell;
        cell.j = 0;
        cell.df = 2;
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 3; ++c) {
                const double expected = row[r] * col[c] / N;
                const double delta =
                    static_cast<double>(pair[static_cast<std::size_t>(r * 3 + c)]) - expected;
                if (expected > 0) cell.chi2 += delta * delta / expected;
            }
        }
        cell.p_value = chi_square_sf(cell.chi2, cell.df);
        report.independence_23 = cell;
    }
    return report;
}

}  // namespace permclust

#include "permclust/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "permclust/parallel.hpp"

namespace permclust {

TruncatedSampler::TruncatedSampler(const ShiftDistribution& d, int n) : n_(n) {
    if (n < 1) throw ValidationError("sampler needs n >= 1");
    cdf_.resize(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) cdf_[static_cast<std::size_t>(i)] = d.cdf(i);
    if (auto q = d.geometric_q()) {
        geometric_ = true;
        log_q_ = std::log(*q);
    }
}

std::int64_t TruncatedSampler::draw(int j, double u) const {
    // mirrors ShiftDistribution::truncated_sample exactly, against cached cdfs
    const double nj = cdf_[static_cast<std::size_t>(j)];
    auto above = [&](std::int64_t i) {
        return cdf_[static_cast<std::size_t>(i + 1)] / nj > u;
    };
    if (geometric_) {
        const double t = std::log1p(-u * nj) / log_q_;
        auto i = static_cast<std::int64_t>(std::ceil(t)) - 1;
        i = std::clamp<std::int64_t>(i, 0, j - 1);
        while (i > 0 && above(i - 1)) --i;
        while (i < j - 1 && !above(i)) ++i;
        return i;
    }
    std::int64_t lo = 0, hi = j - 1;
    while (lo < hi) {
        const auto mid = lo + (hi - lo) / 2;
        if (above(mid)) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    return lo;
}

std::int64_t PsiBuilder::push(std::int64_t m) {
    if (m < 1) throw ValidationError("rank into the unused values must be >= 1");
    // smallest c with c - #{used <= c} >= m; such c is always unused
    auto unused_below = [&](std::int64_t c) {
        const auto it = std::upper_bound(used_.begin(), used_.end(), c);
        return c - static_cast<std::int64_t>(it - used_.begin());
    };
    std::int64_t lo = m, hi = m + static_cast<std::int64_t>(used_.size());
    while (lo < hi) {
        const auto mid = lo + (hi - lo) / 2;
        if (unused_below(mid) >= m) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    used_.insert(std::upper_bound(used_.begin(), used_.end(), lo), lo);
    return lo;
}

Permutation sample_perm_insertion(const ShiftDistribution& d, int n, RngStream& rng) {
    TruncatedSampler ts(d, n);
    return detail::sample_perm_insertion_with(ts, n, [&rng] { return rng.next_unit(); });
}

std::vector<std::int64_t> sample_prefix_psi(const ShiftDistribution& d, int length,
                                            RngStream& rng) {
    if (length < 1) throw ValidationError("prefix length must be >= 1");
    PsiBuilder psi;
    std::vector<std::int64_t> prefix;
    prefix.reserve(static_cast<std::size_t>(length));
    for (int k = 0; k < length; ++k) {
        prefix.push_back(psi.push(d.sample(rng.next_unit())));
    }
    return prefix;
}

Permutation sample_projected_psi(const ShiftDistribution& d, int n, RngStream& rng) {
    if (n < 1) throw ValidationError("projection size must be >= 1");
    PsiBuilder psi;
    std::vector<std::int64_t> small;  // values <= n in appearance order
    small.reserve(static_cast<std::size_t>(n));
    constexpr long long kMaxSteps = 1LL << 30;
    for (long long step = 0; static_cast<int>(small.size()) < n; ++step) {
        if (step >= kMaxSteps) {
            throw CapacityError("projection did not close after 2^30 draws");
        }
        const auto v = psi.push(d.sample(rng.next_unit()));
        if (v <= n) small.push_back(v);
    }
    std::vector<std::int32_t> values(small.begin(), small.end());
    return Permutation(std::move(values));
}

Permutation sample_uniform_perm(int n, RngStream& rng) {
    if (n < 1) throw ValidationError("permutation size must be >= 1");
    std::vector<std::int32_t> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i + 1;
    for (int i = n - 1; i > 0; --i) {
        const auto j = rng.next_below(static_cast<std::uint64_t>(i) + 1);
        std::swap(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
    }
    return Permutation(std::move(v));
}

RenewalRecord renewal_scan(std::span<const std::int64_t> prefix) {
    {
        std::unordered_set<std::int64_t> seen;
        for (auto v : prefix) {
            if (v < 1 || !seen.insert(v).second) {
                throw ValidationError("prefix entries must be distinct positive integers");
            }
        }
    }
    RenewalRecord rec;
    std::int64_t running_max = 0;
    std::int64_t last = 0;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        running_max = std::max(running_max, prefix[i]);
        const auto pos = static_cast<std::int64_t>(i) + 1;
        if (running_max == pos) {
            rec.renewal_times.push_back(pos);
            rec.segments.push_back(
                reduce(prefix.subspan(static_cast<std::size_t>(last),
                                      static_cast<std::size_t>(pos - last))));
            last = pos;
        }
    }
    return rec;
}

RenewalStatistics renewal_statistics(const ShiftDistribution& d, long long num_prefixes,
                                     int prefix_length, const RngStream& base,
                                     int workers) {
    if (num_prefixes < 1 || prefix_length < 1) {
        throw ValidationError("renewal statistics need positive sizes");
    }

    struct Acc {
        std::vector<long long> renewals;  // at position n (index n-1)
        std::vector<long long> t1;        // first renewal at n
        long long censored = 0;
        long long gap_sum = 0;
        long long gap_sumsq = 0;
        long long gaps = 0;
    };

    constexpr long long kBlock = 1024;
    const long long num_blocks = (num_prefixes + kBlock - 1) / kBlock;
    std::vector<Acc> accs(static_cast<std::size_t>(num_blocks));

    run_blocks(workers, num_blocks, [&](long long b) {
        auto& acc = accs[static_cast<std::size_t>(b)];
        acc.renewals.assign(static_cast<std::size_t>(prefix_length), 0);
        acc.t1.assign(static_cast<std::size_t>(prefix_length), 0);
        const long long lo = b * kBlock;
        const long long hi = std::min(num_prefixes, lo + kBlock);
        for (long long i = lo; i < hi; ++i) {
            RngStream rng(base.seed(), base.stream_id() + static_cast<std::uint64_t>(i));
            PsiBuilder psi;
            std::int64_t running_max = 0;
            std::int64_t last = 0;
            bool first_seen = false;
            for (int pos = 1; pos <= prefix_length; ++pos) {
                running_max = std::max(running_max, psi.push(d.sample(rng.next_unit())));
                if (running_max == pos) {
                    ++acc.renewals[static_cast<std::size_t>(pos - 1)];
                    if (!first_seen) {
                        ++acc.t1[static_cast<std::size_t>(pos - 1)];
                        first_seen = true;
                    }
                    const long long gap = pos - last;
                    acc.gap_sum += gap;
                    acc.gap_sumsq += gap * gap;
                    ++acc.gaps;
                    last = pos;
                }
            }
            if (!first_seen) ++acc.censored;
        }
    });

    RenewalStatistics out;
    out.prefixes = num_prefixes;
    out.prefix_length = prefix_length;
    out.u_empirical.resize(static_cast<std::size_t>(prefix_length));
    out.u_std_error.resize(static_cast<std::size_t>(prefix_length));
    out.t1_pmf.resize(static_cast<std::size_t>(prefix_length));
    std::vector<long long> renewals(static_cast<std::size_t>(prefix_length), 0);
    std::vector<long long> t1(static_cast<std::size_t>(prefix_length), 0);
    long long censored = 0, gap_sum = 0, gap_sumsq = 0, gaps = 0;
    for (const auto& acc : accs) {
        for (int n = 0; n < prefix_length; ++n) {
            renewals[static_cast<std::size_t>(n)] += acc.renewals[static_cast<std::size_t>(n)];
            t1[static_cast<std::size_t>(n)] += acc.t1[static_cast<std::size_t>(n)];
        }
        censored += acc.censored;
        gap_sum += acc.gap_sum;
        gap_sumsq += acc.gap_sumsq;
        gaps += acc.gaps;
    }
    const auto R = static_cast<double>(num_prefixes);
    for (int n = 0; n < prefix_length; ++n) {
        const double p = static_cast<double>(renewals[static_cast<std::size_t>(n)]) / R;
        out.u_empirical[static_cast<std::size_t>(n)] = p;
        out.u_std_error[static_cast<std::size_t>(n)] = std::sqrt(p * (1.0 - p) / R);
        out.t1_pmf[static_cast<std::size_t>(n)] =
            static_cast<double>(t1[static_cast<std::size_t>(n)]) / R;
    }
    out.t1_censored_fraction = static_cast<double>(censored) / R;
    out.gap_count = gaps;
    if (gaps > 0) {
        const auto g = static_cast<double>(gaps);
        out.mean_gap = static_cast<double>(gap_sum) / g;
        if (gaps > 1) {
            const double var =
                (static_cast<double>(gap_sumsq) - g * out.mean_gap * out.mean_gap) / (g - 1.0);
            out.mean_gap_std_error = std::sqrt(std::max(0.0, var) / g);
        }
    }
    return out;
}

}  // namespace permclust

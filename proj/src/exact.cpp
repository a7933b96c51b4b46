#include "permclust/exact.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

#include "permclust/numeric.hpp"

namespace permclust {

namespace {

double log_q_integer(int k, double q) {
    // log of (1-q^k)/(1-q) = 1 + q + ... + q^{k-1}
    if (q == 1.0) return std::log(static_cast<double>(k));
    const double lq = std::log(q);
    if (q < 1.0) {
        return log1mexp(k * lq) - std::log1p(-q);
    }
    return k * lq + log1mexp(-k * lq) - std::log(q - 1.0);
}

unsigned long long factorial_u64(int n) {
    unsigned long long f = 1;
    for (int i = 2; i <= n; ++i) f *= static_cast<unsigned long long>(i);
    return f;
}

void check_cap(int n, const EnumerationOptions& opts) {
    if (n < 1) throw ValidationError("enumeration needs n >= 1");
    if (opts.cap > EnumerationOptions::kHardCap) {
        throw ValidationError("enumeration cap cannot exceed 12");
    }
    if (n > opts.cap) {
        throw CapacityError("enumeration over S_" + std::to_string(n) +
                            " refused: cap is " + std::to_string(opts.cap) +
                            " (hard limit 12)");
    }
}

// Probability of one permutation as a function of its inversion count
// (Mallows) or of its backward ranks (shifted law). Tables are sized for the
// fixed n of one enumeration.
struct PmfTables {
    // mallows: prob_by_inv[i] = q^i / Z_n(q)
    std::vector<double> prob_by_inv;
    // shifted: trunc[j-2][i] = P(X_j = i)
    std::vector<std::vector<double>> trunc;
    bool mallows = false;
};

PmfTables make_tables(int n, const Measure& m) {
    PmfTables t;
    if (const auto* mm = std::get_if<MallowsMeasure>(&m)) {
        if (!(mm->q > 0.0)) throw ValidationError("Mallows parameter must be positive");
        t.mallows = true;
        const double logz = log_mallows_normalizer(n, mm->q);
        const double lq = mm->q == 1.0 ? 0.0 : std::log(mm->q);
        const auto max_inv = static_cast<std::size_t>(n) * (n - 1) / 2;
        t.prob_by_inv.resize(max_inv + 1);
        for (std::size_t i = 0; i <= max_inv; ++i) {
            t.prob_by_inv[i] = std::exp(static_cast<double>(i) * lq - logz);
        }
    } else {
        const auto& d = std::get<ShiftDistribution>(m);
        t.trunc.resize(static_cast<std::size_t>(std::max(0, n - 1)));
        for (int j = 2; j <= n; ++j) {
            auto& row = t.trunc[static_cast<std::size_t>(j - 2)];
            row.resize(static_cast<std::size_t>(j));
            for (int i = 0; i < j; ++i) {
                row[static_cast<std::size_t>(i)] = d.truncated_pmf(j, i);
            }
        }
    }
    return t;
}

// Walks the block of S_n whose first symbol is `first` in lexicographic
// order. Each step advances the tail like std::next_permutation and updates
// the inversion count in O(1): swapping the pivot with its successor and
// reversing a decreasing suffix of length L changes the count by 1 - L(L-1)/2.
template <class Visit>
void enumerate_first_symbol_block(int n, int first, Visit&& visit) {
    std::vector<std::int32_t> a(static_cast<std::size_t>(n));
    a[0] = static_cast<std::int32_t>(first);
    for (int v = 1, idx = 1; v <= n; ++v) {
        if (v != first) a[static_cast<std::size_t>(idx++)] = static_cast<std::int32_t>(v);
    }
    long long inv = first - 1;
    for (;;) {
        visit(std::span<const std::int32_t>(a), inv);
        int i = n - 2;
        while (i >= 1 && a[static_cast<std::size_t>(i)] >= a[static_cast<std::size_t>(i + 1)]) --i;
        if (i < 1) return;
        const long long L = n - 1 - i;
        int j = n - 1;
        while (a[static_cast<std::size_t>(j)] <= a[static_cast<std::size_t>(i)]) --j;
        std::swap(a[static_cast<std::size_t>(i)], a[static_cast<std::size_t>(j)]);
        std::reverse(a.begin() + i + 1, a.end());
        inv += 1 - L * (L - 1) / 2;
    }
}

double weighted_sum(int n, const Measure& m,
                    const std::function<double(std::span<const std::int32_t>)>& stat,
                    const EnumerationOptions& opts) {
    const PmfTables tables = make_tables(n, m);

    auto block_sum = [&](int first) {
        KahanSum acc;
        std::vector<std::int32_t> ranks;
        enumerate_first_symbol_block(n, first, [&](std::span<const std::int32_t> perm,
                                                   long long inv) {
            const double s = stat(perm);
            if (s == 0.0) return;
            double prob;
            if (tables.mallows) {
                prob = tables.prob_by_inv[static_cast<std::size_t>(inv)];
            } else {
                detail::backward_ranks_values(perm, ranks);
                prob = 1.0;
                for (int j = 2; j <= n; ++j) {
                    prob *= tables.trunc[static_cast<std::size_t>(j - 2)]
                                        [static_cast<std::size_t>(ranks[static_cast<std::size_t>(j - 2)])];
                }
            }
            acc.add(prob * s);
        });
        return acc.value();
    };

    std::vector<double> block(static_cast<std::size_t>(n), 0.0);
    const int workers = std::max(1, std::min(opts.workers, n));
    if (workers == 1 || n == 1) {
        for (int first = 1; first <= n; ++first) {
            block[static_cast<std::size_t>(first - 1)] = block_sum(first);
        }
    } else {
        std::atomic<int> next{1};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const int first = next.fetch_add(1);
                    if (first > n) return;
                    block[static_cast<std::size_t>(first - 1)] = block_sum(first);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    KahanSum total;  // fixed reduction order keeps parallel runs bit-identical
    for (double b : block) total.add(b);
    return total.value();
}

}  // namespace

double log_mallows_normalizer(int n, double q) {
    if (n < 1) throw ValidationError("normalizer needs n >= 1");
    if (!(q > 0.0)) throw ValidationError("Mallows parameter must be positive");
    KahanSum acc;
    for (int k = 2; k <= n; ++k) acc.add(log_q_integer(k, q));
    return acc.value();
}

double mallows_normalizer(int n, double q) { return std::exp(log_mallows_normalizer(n, q)); }

double mallows_pmf(const Permutation& p, double q) {
    if (!(q > 0.0)) throw ValidationError("Mallows parameter must be positive");
    const double lq = q == 1.0 ? 0.0 : std::log(q);
    const auto inv = static_cast<double>(inversions(p));
    return std::exp(inv * lq - log_mallows_normalizer(p.size(), q));
}

double pshifted_pmf(const Permutation& p, const ShiftDistribution& d) {
    const auto r = backward_ranks(p);
    double prob = 1.0;
    for (int j = 2; j <= p.size(); ++j) {
        prob *= d.truncated_pmf(j, r.ranks[static_cast<std::size_t>(j - 2)]);
    }
    return prob;
}

double exact_expectation(int n, const Measure& m,
                         const std::function<double(std::span<const std::int32_t>)>& stat,
                         const EnumerationOptions& opts) {
    check_cap(n, opts);
    return weighted_sum(n, m, stat, opts);
}

ExactEventResult exact_event_prob(
    int n, const Measure& m,
    const std::function<bool(std::span<const std::int32_t>)>& event,
    const EnumerationOptions& opts) {
    check_cap(n, opts);
    ExactEventResult res;
    res.n = n;
    res.support_size = factorial_u64(n);
    res.method = ExactEventResult::Method::enumeration;
    res.probability = weighted_sum(
        n, m, [&](std::span<const std::int32_t> perm) { return event(perm) ? 1.0 : 0.0; },
        opts);
    return res;
}

double exact_cluster_prob(int n, const Measure& m, const ClusterQuery& q,
                          const EnumerationOptions& opts) {
    q.validate();
    if (q.n != n) throw ValidationError("cluster query size does not match n");
    const Permutation* pattern = q.pattern ? &*q.pattern : nullptr;
    return exact_event_prob(
               n, m,
               [&](std::span<const std::int32_t> perm) {
                   return detail::is_cluster_values(perm, q.l, q.k, pattern);
               },
               opts)
        .probability;
}

double exact_expected_Nl(int n, const Measure& m, int l, const EnumerationOptions& opts) {
    if (l < 2 || l > n) throw ValidationError("expected_Nl requires 2 <= l <= n");
    check_cap(n, opts);
    return weighted_sum(
        n, m,
        [&](std::span<const std::int32_t> perm) {
            return static_cast<double>(detail::count_clusters_values(perm, l));
        },
        opts);
}

double exact_block_alignment(const ShiftDistribution& d, int l, int k, int a,
                             const EnumerationOptions& opts) {
    if (l < 2 || k < 1) throw ValidationError("block alignment requires l >= 2, k >= 1");
    if (a < 0 || a > k - 1) throw ValidationError("alignment count must lie in 0..k-1");
    const int n = k + l - 1;
    check_cap(n, opts);
    return exact_event_prob(
               n, Measure(d),
               [&](std::span<const std::int32_t> perm) {
                   if (!detail::is_cluster_values(perm, l, k, nullptr)) return false;
                   // exactly a of 1..k-1 to the right of the (contiguous) block
                   int max_pos = -1;
                   for (int i = 0; i < n; ++i) {
                       if (perm[static_cast<std::size_t>(i)] >= k) max_pos = i;
                   }
                   return n - 1 - max_pos == a;
               },
               opts)
        .probability;
}

}  // namespace permclust

#include "permclust/permutation.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <deque>
#include <sstream>

namespace permclust {

namespace {

void check_bijection(const std::vector<std::int32_t>& values) {
    const auto n = values.size();
    if (n == 0) throw ValidationError("permutation must have size >= 1");
    std::vector<bool> seen(n + 1, false);
    for (auto v : values) {
        if (v < 1 || static_cast<std::size_t>(v) > n || seen[static_cast<std::size_t>(v)]) {
            throw ValidationError("values are not a bijection of {1..n}");
        }
        seen[static_cast<std::size_t>(v)] = true;
    }
}

// positions[v] = 0-based index of value v
void build_positions(std::span<const std::int32_t> values, std::vector<std::int32_t>& pos) {
    pos.resize(values.size() + 1);
    for (std::size_t i = 0; i < values.size(); ++i) {
        pos[static_cast<std::size_t>(values[i])] = static_cast<std::int32_t>(i);
    }
}

}  // namespace

Permutation::Permutation(std::vector<std::int32_t> values) : values_(std::move(values)) {
    check_bijection(values_);
}

Permutation Permutation::identity(int n) {
    if (n < 1) throw ValidationError("permutation must have size >= 1");
    std::vector<std::int32_t> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i + 1;
    return Permutation(std::move(v));
}

Permutation Permutation::parse(std::string_view one_line) {
    std::vector<std::int32_t> v;
    const char* it = one_line.data();
    const char* end = it + one_line.size();
    while (it != end) {
        while (it != end && (*it == ' ' || *it == '\t')) ++it;
        if (it == end) break;
        std::int32_t x = 0;
        auto [ptr, ec] = std::from_chars(it, end, x);
        if (ec != std::errc()) throw ValidationError("cannot parse permutation entry");
        v.push_back(x);
        it = ptr;
    }
    return Permutation(std::move(v));
}

std::string Permutation::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (i) out.push_back(' ');
        out += std::to_string(values_[i]);
    }
    return out;
}

void ClusterQuery::validate() const {
    if (l < 2 || l > n) throw ValidationError("cluster query requires 2 <= l <= n");
    if (k < 1 || k > n - l + 1) throw ValidationError("cluster query requires 1 <= k <= n-l+1");
    if (pattern && pattern->size() != l) {
        throw ValidationError("cluster pattern must be a permutation of size l");
    }
}

namespace detail {

long long inversions_values(std::span<const std::int32_t> values) {
    const auto n = values.size();
    if (n < 2) return 0;
    std::vector<std::int32_t> buf(values.begin(), values.end());
    std::vector<std::int32_t> tmp(n);
    long long count = 0;
    for (std::size_t width = 1; width < n; width *= 2) {
        for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
            const std::size_t mid = lo + width;
            const std::size_t hi = std::min(lo + 2 * width, n);
            std::size_t i = lo, j = mid, o = lo;
            while (i < mid && j < hi) {
                if (buf[i] <= buf[j]) {
                    tmp[o++] = buf[i++];
                } else {
                    count += static_cast<long long>(mid - i);
                    tmp[o++] = buf[j++];
                }
            }
            while (i < mid) tmp[o++] = buf[i++];
            while (j < hi) tmp[o++] = buf[j++];
            std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo),
                      tmp.begin() + static_cast<std::ptrdiff_t>(hi),
                      buf.begin() + static_cast<std::ptrdiff_t>(lo));
        }
    }
    return count;
}

bool is_cluster_values(std::span<const std::int32_t> values, int l, int k,
                       const Permutation* pattern) {
    thread_local std::vector<std::int32_t> pos;
    build_positions(values, pos);
    std::int32_t lo = pos[static_cast<std::size_t>(k)];
    std::int32_t hi = lo;
    for (int v = k + 1; v < k + l; ++v) {
        const auto p = pos[static_cast<std::size_t>(v)];
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    if (hi - lo != l - 1) return false;
    if (pattern) {
        for (int i = 0; i < l; ++i) {
            if (values[static_cast<std::size_t>(lo + i)] - (k - 1) != (*pattern)[i]) return false;
        }
    }
    return true;
}

int count_clusters_values(std::span<const std::int32_t> values, int l) {
    const int n = static_cast<int>(values.size());
    thread_local std::vector<std::int32_t> pos;
    build_positions(values, pos);
    // sliding min/max over pos[k..k+l-1] with monotonic deques
    std::deque<int> minq, maxq;
    int count = 0;
    for (int v = 1; v <= n; ++v) {
        const auto pv = pos[static_cast<std::size_t>(v)];
        while (!minq.empty() && pos[static_cast<std::size_t>(minq.back())] >= pv) minq.pop_back();
        minq.push_back(v);
        while (!maxq.empty() && pos[static_cast<std::size_t>(maxq.back())] <= pv) maxq.pop_back();
        maxq.push_back(v);
        const int k = v - l + 1;
        if (k >= 1) {
            if (minq.front() < k) minq.pop_front();
            if (maxq.front() < k) maxq.pop_front();
            const auto span = pos[static_cast<std::size_t>(maxq.front())] -
                              pos[static_cast<std::size_t>(minq.front())];
            if (span == l - 1) ++count;
        }
    }
    return count;
}

void backward_ranks_values(std::span<const std::int32_t> values,
                           std::vector<std::int32_t>& out) {
    const int n = static_cast<int>(values.size());
    out.assign(static_cast<std::size_t>(std::max(0, n - 1)), 0);
    if (n < 2) return;
    thread_local std::vector<std::int32_t> pos;
    build_positions(values, pos);
    if (n <= 64) {
        for (int j = 2; j <= n; ++j) {
            const auto pj = pos[static_cast<std::size_t>(j)];
            std::int32_t c = 0;
            for (int i = 1; i < j; ++i) c += pos[static_cast<std::size_t>(i)] > pj;
            out[static_cast<std::size_t>(j - 2)] = c;
        }
        return;
    }
    // Fenwick tree over positions: insert values in increasing order, count
    // already-inserted positions to the right of pos[j].
    std::vector<std::int32_t> tree(static_cast<std::size_t>(n) + 1, 0);
    auto update = [&](int i) {
        for (; i <= n; i += i & -i) ++tree[static_cast<std::size_t>(i)];
    };
    auto prefix = [&](int i) {
        std::int32_t s = 0;
        for (; i > 0; i -= i & -i) s += tree[static_cast<std::size_t>(i)];
        return s;
    };
    update(pos[1] + 1);
    for (int j = 2; j <= n; ++j) {
        const int pj = pos[static_cast<std::size_t>(j)] + 1;
        out[static_cast<std::size_t>(j - 2)] = static_cast<std::int32_t>(j - 1) - prefix(pj);
        update(pj);
    }
}

}  // namespace detail

long long inversions(const Permutation& p) { return detail::inversions_values(p.values()); }

Permutation reverse(const Permutation& p) {
    std::vector<std::int32_t> v(p.values().rbegin(), p.values().rend());
    return Permutation(std::move(v));
}

Permutation complement(const Permutation& p) {
    const auto n = static_cast<std::int32_t>(p.size());
    std::vector<std::int32_t> v(p.values().size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = n + 1 - p.values()[i];
    return Permutation(std::move(v));
}

Permutation reverse_complement(const Permutation& p) {
    const auto n = static_cast<std::int32_t>(p.size());
    std::vector<std::int32_t> v(p.values().size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = n + 1 - p.values()[v.size() - 1 - i];
    }
    return Permutation(std::move(v));
}

BackwardRanks backward_ranks(const Permutation& p) {
    BackwardRanks r;
    detail::backward_ranks_values(p.values(), r.ranks);
    return r;
}

Permutation from_backward_ranks(const BackwardRanks& r) {
    const int n = r.permutation_size();
    long long total_rank = 0;
    for (int j = 2; j <= n; ++j) {
        const auto rank = r.ranks[static_cast<std::size_t>(j - 2)];
        if (rank < 0 || rank > j - 1) {
            throw ValidationError("backward rank out of bounds: need 0 <= I_{<j} <= j-1");
        }
        total_rank += rank;
    }

    std::vector<std::int32_t> values;
    // Direct insertion costs O(n + sum of ranks); the free-slot Fenwick scan
    // costs O(n log n). Pick whichever is cheaper for this rank vector.
    const long long fenwick_cost = 2LL * n * (64 - __builtin_clzll(static_cast<unsigned long long>(n) | 1));
    if (n < 256 || total_rank < fenwick_cost) {
        values.reserve(static_cast<std::size_t>(n));
        values.push_back(1);
        for (int j = 2; j <= n; ++j) {
            const auto rank = r.ranks[static_cast<std::size_t>(j - 2)];
            values.insert(values.end() - rank, static_cast<std::int32_t>(j));
        }
    } else {
        // Among the positions of values 1..j, value j sits at index j - rank
        // (1-based). Assign values n..1 to free slots via Fenwick select.
        values.assign(static_cast<std::size_t>(n), 0);
        std::vector<std::int32_t> tree(static_cast<std::size_t>(n) + 1, 0);
        for (int i = 1; i <= n; ++i) tree[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(i & -i);
        int log2n = 0;
        while ((1 << (log2n + 1)) <= n) ++log2n;
        auto select_free = [&](std::int32_t target) {
            // smallest position with free-count prefix == target
            int idx = 0;
            for (int step = 1 << log2n; step > 0; step >>= 1) {
                const int next = idx + step;
                if (next <= n && tree[static_cast<std::size_t>(next)] < target) {
                    idx = next;
                    target -= tree[static_cast<std::size_t>(next)];
                }
            }
            return idx + 1;
        };
        auto remove_slot = [&](int i) {
            for (; i <= n; i += i & -i) --tree[static_cast<std::size_t>(i)];
        };
        for (int j = n; j >= 2; --j) {
            const auto rank = r.ranks[static_cast<std::size_t>(j - 2)];
            const int slot = select_free(static_cast<std::int32_t>(j - rank));
            values[static_cast<std::size_t>(slot - 1)] = static_cast<std::int32_t>(j);
            remove_slot(slot);
        }
        const int slot = select_free(1);
        values[static_cast<std::size_t>(slot - 1)] = 1;
    }
    return Permutation(std::move(values));
}

bool is_cluster(const Permutation& p, const ClusterQuery& q) {
    q.validate();
    if (q.n != p.size()) throw ValidationError("cluster query size does not match permutation");
    return detail::is_cluster_values(p.values(), q.l, q.k,
                                     q.pattern ? &*q.pattern : nullptr);
}

int count_clusters(const Permutation& p, int l) {
    if (l < 2 || l > p.size()) throw ValidationError("count_clusters requires 2 <= l <= n");
    return detail::count_clusters_values(p.values(), l);
}

Permutation project(std::span<const std::int64_t> prefix, int n) {
    if (n < 1) throw ValidationError("projection size must be >= 1");
    std::vector<std::int32_t> kept;
    kept.reserve(static_cast<std::size_t>(n));
    for (auto v : prefix) {
        if (v < 1) throw ValidationError("prefix entries must be positive");
        if (v <= n) kept.push_back(static_cast<std::int32_t>(v));
    }
    if (static_cast<int>(kept.size()) != n) {
        throw ValidationError("prefix does not contain every value of 1..n");
    }
    return Permutation(std::move(kept));  // constructor rejects duplicates
}

Permutation reduce(std::span<const std::int64_t> segment) {
    if (segment.empty()) throw ValidationError("segment must be non-empty");
    std::int64_t lo = segment[0];
    for (auto v : segment) lo = std::min(lo, v);
    const std::int64_t offset = lo - 1;
    std::vector<std::int32_t> v;
    v.reserve(segment.size());
    for (auto s : segment) {
        const auto shifted = s - offset;
        if (shifted < 1 || shifted > static_cast<std::int64_t>(segment.size())) {
            throw ValidationError("segment is not a permutation of a consecutive range");
        }
        v.push_back(static_cast<std::int32_t>(shifted));
    }
    return Permutation(std::move(v));  // constructor rejects duplicates
}

}  // namespace permclust

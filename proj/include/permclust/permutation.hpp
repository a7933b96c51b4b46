#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "permclust/errors.hpp"

namespace permclust {

/// A permutation of {1..n} in one-line notation. Validated on construction
/// and immutable afterwards, so every operation below may assume validity
/// and values can be shared freely across threads.
class Permutation {
public:
    explicit Permutation(std::vector<std::int32_t> values);

    static Permutation identity(int n);

    /// Parses space-separated one-line notation, e.g. "2 3 4 1".
    static Permutation parse(std::string_view one_line);

    int size() const { return static_cast<int>(values_.size()); }
    std::int32_t operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
    const std::vector<std::int32_t>& values() const { return values_; }

    /// Space-separated one-line notation.
    std::string to_string() const;

    friend bool operator==(const Permutation&, const Permutation&) = default;

private:
    std::vector<std::int32_t> values_;
};

/// Backward ranks (I_{<2}, ..., I_{<n}): ranks[j-2] counts the values smaller
/// than j placed to the right of j. 0 <= ranks[j-2] <= j-1, and the ranks sum
/// to the number of inversions of the permutation they encode.
struct BackwardRanks {
    std::vector<std::int32_t> ranks;

    int permutation_size() const { return static_cast<int>(ranks.size()) + 1; }
};

/// Identifies the event that the value block {k..k+l-1} occupies l consecutive
/// positions in a permutation of size n, optionally with a prescribed internal
/// order given by `pattern` (a permutation of size l).
struct ClusterQuery {
    int n = 0;
    int l = 0;
    int k = 0;
    std::optional<Permutation> pattern;

    /// Throws ValidationError unless 2 <= l <= n, 1 <= k <= n-l+1, and any
    /// pattern has size l.
    void validate() const;
};

/// Number of pairs i < j with p_i > p_j. O(n log n) merge count.
long long inversions(const Permutation& p);

Permutation reverse(const Permutation& p);
Permutation complement(const Permutation& p);

/// Reversal composed with complementation (order-independent). Preserves the
/// inversion count and maps the block event at k to the one at n+2-k-l.
Permutation reverse_complement(const Permutation& p);

BackwardRanks backward_ranks(const Permutation& p);

/// Inverse of backward_ranks: places 1, then inserts each j = 2..n with
/// exactly ranks[j-2] previously placed values to its right.
Permutation from_backward_ranks(const BackwardRanks& r);

/// True iff the positions of values {k..k+l-1} form an interval of length l,
/// and, when the query carries a pattern tau, the block read left to right
/// equals tau shifted by k-1.
bool is_cluster(const Permutation& p, const ClusterQuery& q);

/// Number of value blocks {k..k+l-1}, k = 1..n-l+1, forming clusters. l >= 2.
int count_clusters(const Permutation& p, int l);

/// Deletes the entries exceeding n from a prefix of distinct positive
/// integers; every value of 1..n must be present.
Permutation project(std::span<const std::int64_t> prefix, int n);

/// Maps a permutation of a consecutive range {a+1..a+m} onto S_m by
/// subtracting the offset a.
Permutation reduce(std::span<const std::int64_t> segment);

namespace detail {

// Unvalidated kernels shared with the enumeration and sampling hot paths.
bool is_cluster_values(std::span<const std::int32_t> values, int l, int k,
                       const Permutation* pattern);
long long inversions_values(std::span<const std::int32_t> values);
int count_clusters_values(std::span<const std::int32_t> values, int l);
void backward_ranks_values(std::span<const std::int32_t> values,
                           std::vector<std::int32_t>& out);

}  // namespace detail

}  // namespace permclust

#pragma once

#include <array>
#include <cstdint>

namespace permclust {

/// Counter-based pseudorandom stream (Philox2x64, 10 rounds).
///
/// Draw t of stream s under seed k is a pure function of (k, s, t), so
/// replicates can be partitioned across workers by stream id and reproduce
/// bit-for-bit regardless of scheduling. Distinct stream ids give
/// statistically independent streams.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_(stream_id) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }

    std::uint64_t next_u64() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        auto block = philox2x64(counter_++, stream_, seed_);
        spare_ = block[1];
        have_spare_ = true;
        return block[0];
    }

    /// Uniform double in [0,1) with 53 random bits.
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound). bound >= 1.
    std::uint64_t next_below(std::uint64_t bound) {
        auto v = static_cast<std::uint64_t>(next_unit() * static_cast<double>(bound));
        return v >= bound ? bound - 1 : v;
    }

    /// One 10-round Philox2x64 block: counter pair (ctr, stream) under key.
    static std::array<std::uint64_t, 2> philox2x64(std::uint64_t ctr,
                                                   std::uint64_t stream,
                                                   std::uint64_t key) {
        constexpr std::uint64_t kMul = 0xD2B74407B1CE6E93ULL;
        constexpr std::uint64_t kWeyl = 0x9E3779B97F4A7C15ULL;
        std::uint64_t x0 = ctr;
        std::uint64_t x1 = stream;
        std::uint64_t k = key;
        for (int round = 0; round < 10; ++round) {
            const auto prod = static_cast<unsigned __int128>(kMul) * x0;
            const auto hi = static_cast<std::uint64_t>(prod >> 64);
            const auto lo = static_cast<std::uint64_t>(prod);
            x0 = hi ^ k ^ x1;
            x1 = lo;
            k += kWeyl;
        }
        return {x0, x1};
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::uint64_t spare_ = 0;
    bool have_spare_ = false;
};

}  // namespace permclust

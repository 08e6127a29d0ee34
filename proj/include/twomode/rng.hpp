#pragma once

// Counter-based Philox4x32-10 generator. A draw is a pure function of
// (seed, stream, index), so results do not depend on thread scheduling.

#include <array>
#include <cstdint>
#include <limits>

namespace twomode {

class Philox {
public:
    using result_type = std::uint32_t;
    using Block = std::array<std::uint32_t, 4>;

    Philox(std::uint64_t seed, std::uint64_t stream) : key_{lo(seed), hi(seed)}, stream_(stream) {}

    static Block block(const Block& counter, const std::array<std::uint32_t, 2>& key);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Standard normal by Box-Muller.
    double normal();

    std::uint64_t stream() const { return stream_; }

private:
    static std::uint32_t lo(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
    static std::uint32_t hi(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t index_ = 0;
    Block buffer_{};
    int used_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Stream id for (run, purpose) so that different uses of one run never overlap.
inline std::uint64_t stream_id(std::uint64_t run, std::uint32_t purpose) { return (run << 8) | (purpose & 0xffu); }

}  // namespace twomode

#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace perhom {

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key) noexcept;

/// Per-path stream: key = master seed, counter = (path index, block index).
/// Streams for distinct path indices never overlap, so results do not depend on
/// how paths are scheduled. Models UniformRandomBitGenerator.
class PathStream {
public:
    using result_type = std::uint32_t;

    PathStream(std::uint64_t seed, std::uint64_t path) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (pos_ == 4) refill();
        return buffer_[pos_++];
    }

    /// Uniform on (0, 1), 53 random bits; never returns 0 or 1.
    double uniform() noexcept;
    /// Exp(1) by inversion.
    double exponential() noexcept;

    std::uint64_t blocks_used() const noexcept { return block_; }

private:
    void refill() noexcept;

    std::array<std::uint32_t, 2> key_;
    std::uint64_t path_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    unsigned pos_ = 4;
};

}  // namespace perhom

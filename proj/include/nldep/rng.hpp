#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nldep {

// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

// Counter-based generator "philox4x32-10/v1". The key is the 64-bit seed; the
// high half of the counter is the stream id, the low half counts blocks. Stream
// r of seed s is therefore an independent, platform-stable sequence, which is
// how per-replicate generators are derived.
//
// All variate transforms are implemented here (no <random> distributions) so
// outputs are identical across standard libraries.
class Rng {
public:
    static constexpr const char* kName = "philox4x32-10/v1";

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint32_t next_u32() {
        if (pos_ == 4) refill();
        return buf_[pos_++];
    }
    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }
    // Uniform on [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    // Uniform on the open interval (0,1).
    double uniform_open() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }
    // Uniform integer in [0, bound), bound >= 1, unbiased.
    std::uint64_t uniform_index(std::uint64_t bound);
    // Box-Muller standard normal.
    double normal();
    // Gamma(shape, 1) by Marsaglia-Tsang.
    double gamma(double shape);
    double chi_square(double dof);

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::span<T> v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }
    std::vector<std::size_t> permutation(std::size_t n);

private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace nldep

#pragma once

// Reproducible Gaussian increments.
//
// Each NoiseStream is a counter-based substream: the n-th normal variate of
// stream (seed, index) is a pure function of (seed, index, n), computed from
// one Philox4x32-10 block followed by Box-Muller. Two variates come out of
// every block, so position n reads block n/2, lane n%2. Results do not
// depend on the thread that consumes the stream or on how far it skipped.

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace stochmem {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Independent noise channels drawn for one realization.
enum class NoiseChannel : std::uint64_t { Xi = 0, Eta = 1, Phase = 2, Bootstrap = 3 };

/// Stream index for a given realization and channel.
constexpr std::uint64_t stream_index(std::uint64_t realization, NoiseChannel channel) {
    return realization * 4 + static_cast<std::uint64_t>(channel);
}

class NoiseStream {
public:
    NoiseStream(std::uint64_t base_seed, std::uint64_t stream_index, std::uint64_t position = 0);

    [[nodiscard]] std::uint64_t base_seed() const { return seed_; }
    [[nodiscard]] std::uint64_t stream_index() const { return index_; }
    [[nodiscard]] std::uint64_t position() const { return position_; }

    /// Next N(0, 1) variate.
    double next_standard();

    /// Next N(0, dt) increment.
    double next_increment(double sqrt_dt) { return sqrt_dt * next_standard(); }

    /// Advance without generating; O(1).
    void skip(std::uint64_t count);

    /// count independent N(0, dt) samples; advances the position by count.
    std::vector<double> gaussian_increments(std::size_t count, double dt);

    /// Uniform 64-bit word at the current position (consumes one position).
    std::uint64_t next_word();

    /// Uniform integer in [0, bound) (consumes one position).
    std::uint64_t next_below(std::uint64_t bound);

private:
    void load_block(std::uint64_t block);

    std::uint64_t seed_;
    std::uint64_t index_;
    std::uint64_t position_;
    std::uint64_t cached_block_ = ~std::uint64_t{0};
    std::array<double, 2> normals_{};
    std::array<std::uint64_t, 2> words_{};
};

/// increments_a[k] = c * xi[k] + sqrt(1 - c^2) * eta[k]; returns (xi, a).
std::pair<std::vector<double>, std::vector<double>> correlated_pair(NoiseStream& stream_xi,
                                                                    NoiseStream& stream_eta,
                                                                    double c, std::size_t count,
                                                                    double dt);

}  // namespace stochmem

#include "stochmem/noise.hpp"

#include <cmath>
#include <stdexcept>

#include "stochmem/core.hpp"

namespace stochmem {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(prod >> 32);
    lo = static_cast<std::uint32_t>(prod);
}

// 53-bit uniform in (0, 1]; never returns 0 so log() is safe.
inline double to_unit_open_closed(std::uint64_t w) {
    return (static_cast<double>(w >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
        mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return ctr;
}

NoiseStream::NoiseStream(std::uint64_t base_seed, std::uint64_t stream_index,
                         std::uint64_t position)
    : seed_(base_seed), index_(stream_index), position_(position) {}

void NoiseStream::load_block(std::uint64_t block) {
    const std::array<std::uint32_t, 4> ctr{
        static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
        static_cast<std::uint32_t>(index_), static_cast<std::uint32_t>(index_ >> 32)};
    const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed_),
                                           static_cast<std::uint32_t>(seed_ >> 32)};
    const auto out = philox4x32(ctr, key);
    words_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    words_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];

    // Box-Muller: both outputs of the pair are used.
    const double u1 = to_unit_open_closed(words_[0]);
    const double u2 = to_unit_open_closed(words_[1]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * kPi * u2;
    normals_[0] = radius * std::cos(angle);
    normals_[1] = radius * std::sin(angle);
    cached_block_ = block;
}

double NoiseStream::next_standard() {
    const std::uint64_t block = position_ >> 1;
    if (block != cached_block_) load_block(block);
    const double z = normals_[position_ & 1u];
    ++position_;
    return z;
}

std::uint64_t NoiseStream::next_word() {
    const std::uint64_t block = position_ >> 1;
    if (block != cached_block_) load_block(block);
    const std::uint64_t w = words_[position_ & 1u];
    ++position_;
    return w;
}

std::uint64_t NoiseStream::next_below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("next_below requires bound > 0");
    // Rejection keeps the result unbiased for any bound.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    for (;;) {
        const std::uint64_t w = next_word();
        if (w < limit) return w % bound;
    }
}

void NoiseStream::skip(std::uint64_t count) { position_ += count; }

std::vector<double> NoiseStream::gaussian_increments(std::size_t count, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("gaussian_increments requires dt > 0");
    const double s = std::sqrt(dt);
    std::vector<double> out(count);
    for (auto& v : out) v = next_increment(s);
    return out;
}

std::pair<std::vector<double>, std::vector<double>> correlated_pair(NoiseStream& stream_xi,
                                                                    NoiseStream& stream_eta,
                                                                    double c, std::size_t count,
                                                                    double dt) {
    if (!(c >= -1.0 && c <= 1.0)) throw std::domain_error("correlation c must lie in [-1, 1]");
    auto xi = stream_xi.gaussian_increments(count, dt);
    auto eta = stream_eta.gaussian_increments(count, dt);
    const double s = std::sqrt(1.0 - c * c);
    std::vector<double> additive(count);
    for (std::size_t k = 0; k < count; ++k) additive[k] = c * xi[k] + s * eta[k];
    return {std::move(xi), std::move(additive)};
}

}  // namespace stochmem

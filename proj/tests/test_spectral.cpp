#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "stochmem/noise.hpp"
#include "stochmem/spectral.hpp"

using namespace stochmem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> cosine(std::size_t n, double dt, double amp, double freq, double phase = 0.0) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::cos(kTwoPi * freq * i * dt + phase);
    return x;
}

std::vector<double> white(std::size_t n, double sd, std::uint64_t seed, std::uint64_t stream = 0) {
    NoiseStream s(seed, stream);
    std::vector<double> x(n);
    for (auto& v : x) v = sd * s.next_standard();
    return x;
}

double mean_square(const std::vector<double>& x) {
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / x.size();
}

PsdEstimate flat(std::size_t bins, double level, std::size_t peak, double peak_level) {
    PsdEstimate p;
    p.record_length = 64.0;
    p.sample_count = 2 * (bins - 1);
    for (std::size_t k = 0; k < bins; ++k) {
        p.frequency.push_back(k / p.record_length);
        p.power.push_back(k == peak ? peak_level : level);
    }
    return p;
}

}  // namespace

TEST_CASE("Parseval: integrated spectrum equals the record's mean square") {
    const double dt = 1.0 / 64;
    for (std::size_t n : {256u, 1024u, 4096u}) {
        auto x = white(n, 0.7, n);
        const auto c = cosine(n, dt, 1.3, 3.0, 0.4);
        for (std::size_t i = 0; i < n; ++i) x[i] += c[i] + 2.0;
        const PsdEstimate p = periodogram(x, dt);
        const double integral = std::accumulate(p.power.begin(), p.power.end(), 0.0) * p.bin_width();
        CHECK(integral == doctest::Approx(mean_square(x)).epsilon(1e-6));
        CHECK(p.size() == n / 2 + 1);
        CHECK(p.frequency[1] == doctest::Approx(1.0 / (n * dt)));
    }
}

TEST_CASE("bin-aligned cosine puts all power in one bin") {
    const double dt = 1.0 / 256, amp = 0.8;
    const std::size_t n = 64 * 256;
    const PsdEstimate p = periodogram(cosine(n, dt, amp, 1.0, 0.3), dt, 1.0);
    const double length = n * dt;
    const std::size_t k = bin_of(p, 1.0);
    CHECK(k == 64);
    CHECK(p.power[k] == doctest::Approx(amp * amp * length / 2).epsilon(1e-9));
    for (std::size_t i = 0; i < p.size(); ++i)
        if (i != k) CHECK(p.power[i] < 1e-10 * p.power[k]);
}

TEST_CASE("white noise gives a flat spectrum at the sample variance level") {
    const double dt = 1.0 / 16, v = 0.25;
    const std::size_t n = 1 << 14;
    const PsdEstimate p = periodogram(white(n, std::sqrt(v), 5), dt);
    const std::size_t bins = p.size();
    const double mean_bin = std::accumulate(p.power.begin() + 1, p.power.end() - 1, 0.0) / (bins - 2);
    // interior bins carry twice the two-sided density v dt
    CHECK(mean_bin == doctest::Approx(2.0 * v * dt).epsilon(0.05));
    CHECK(mean_bin * (bins - 1) * p.bin_width() == doctest::Approx(v).epsilon(0.05));
}

TEST_CASE("zero record gives an all-zero spectrum") {
    const std::vector<double> z(512, 0.0);
    const PsdEstimate p = periodogram(z, 1.0 / 64, 1.0);
    for (double v : p.power) CHECK(v == 0.0);
    const SnrResult s = snr(p, kTwoPi);
    CHECK(s.background_vanishes);
    CHECK_FALSE(s.snr_db.has_value());
}

TEST_CASE("record length must cover whole drive periods") {
    const double dt = 1.0 / 64;
    CHECK_THROWS_AS(periodogram(std::vector<double>(64, 1.0), dt, 1.0), SpectralError);
    CHECK_THROWS_AS(periodogram(std::vector<double>(160, 1.0), dt, 1.0), SpectralError);
    CHECK_NOTHROW(periodogram(std::vector<double>(128, 1.0), dt, 1.0));
    CHECK_THROWS_AS(periodogram(std::vector<double>(2, 1.0), dt), SpectralError);
}

TEST_CASE("averaging power spectra") {
    SUBCASE("mean of constants and identity") {
        const PsdEstimate a = flat(33, 2.0, 0, 2.0), b = flat(33, 4.0, 0, 4.0);
        const PsdEstimate avg = averaged_psd(std::vector{a, b});
        for (double v : avg.power) CHECK(v == 3.0);
        CHECK(avg.realization_count == 2);
        const PsdEstimate one = averaged_psd(std::vector{a});
        CHECK(one.power == a.power);
    }
    SUBCASE("grid mismatch is an error") {
        CHECK_THROWS_AS(averaged_psd(std::vector{flat(33, 1, 0, 1), flat(17, 1, 0, 1)}), SpectralError);
        PsdEstimate other = flat(33, 1, 0, 1);
        other.record_length = 32.0;
        for (std::size_t k = 0; k < other.size(); ++k) other.frequency[k] = k / 32.0;
        CHECK_THROWS_AS(averaged_psd(std::vector{flat(33, 1, 0, 1), other}), SpectralError);
        CHECK_THROWS_AS(averaged_psd(std::vector<PsdEstimate>{}), SpectralError);
    }
    SUBCASE("background variance falls as 1/N") {
        const double dt = 1.0 / 16;
        auto bin_variance = [](const PsdEstimate& p) {
            std::vector<double> v(p.power.begin() + 1, p.power.end() - 1);
            const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
            double s = 0.0;
            for (double x : v) s += (x - m) * (x - m);
            return s / (v.size() - 1);
        };
        const PsdEstimate single = periodogram(white(4096, 1.0, 1, 99), dt);
        std::vector<PsdEstimate> many;
        for (std::uint64_t r = 0; r < 16; ++r) many.push_back(periodogram(white(4096, 1.0, 1, r), dt));
        const double ratio = bin_variance(single) / bin_variance(averaged_psd(many));
        CHECK(ratio == doctest::Approx(16.0).epsilon(0.25));
    }
}

TEST_CASE("SNR of constructed spectra") {
    SnrResult s = snr(flat(513, 1.5, 64, 15.0), kTwoPi);
    REQUIRE(s.snr_db.has_value());
    CHECK(*s.snr_db == doctest::Approx(10.0));
    CHECK(s.peak_bin == 64);
    CHECK(s.peak == 15.0);
    CHECK(s.background == 1.5);
    CHECK(*s.snr_db == 10.0 * std::log10(s.peak / s.background));
    CHECK_FALSE(s.window_shrunk);
    // +-32 bins without the 2 x 2 neighbours; 2w = bin 128 lies outside
    CHECK(s.background_bins == 60);

    s = snr(flat(513, 1.5, 64, 1.5), kTwoPi);
    CHECK(*s.snr_db == doctest::Approx(0.0));
}

TEST_CASE("harmonics are excluded from the background window") {
    PsdEstimate p = flat(513, 1.0, 16, 100.0);
    p.power[32] = 1e6;  // 2w
    p.power[48] = 1e6;  // 3w
    const SnrResult s = snr(p, kTwoPi / 4.0);
    CHECK(s.peak_bin == 16);
    CHECK(s.background == 1.0);
    CHECK(s.window_shrunk);  // window reaches below bin 0
}

TEST_CASE("background window shrinks at the spectrum edge") {
    const SnrResult s = snr(flat(40, 2.0, 30, 20.0), kTwoPi * 30 / 64.0);
    CHECK(s.window_shrunk);
    CHECK(s.window_hi == 39);
    CHECK(*s.snr_db == doctest::Approx(10.0));
    CHECK(s.describe().find("shrunk") != std::string::npos);
}

TEST_CASE("SNR of a cosine in white noise matches the periodogram expectation") {
    const double dt = 1.0 / 32, amp = 0.1, sd = 0.5;
    const std::size_t n = 64 * 32;
    const double length = n * dt;
    std::vector<PsdEstimate> est;
    for (std::uint64_t r = 0; r < 128; ++r) {
        auto x = white(n, sd, 77, r);
        const auto c = cosine(n, dt, amp, 1.0);
        for (std::size_t i = 0; i < n; ++i) x[i] += c[i];
        est.push_back(periodogram(x, dt, 1.0));
    }
    const SnrResult s = snr(averaged_psd(est), kTwoPi);
    const double floor = 2.0 * sd * sd * dt;
    const double expected = 10.0 * std::log10((amp * amp * length / 2 + floor) / floor);
    REQUIRE(s.snr_db.has_value());
    CHECK(std::abs(*s.snr_db - expected) < 1.0);
}

TEST_CASE("SNR is invariant under scaling of the record") {
    const double dt = 1.0 / 32;
    auto x = white(2048, 1.0, 4);
    const auto c = cosine(2048, dt, 0.5, 1.0);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += c[i];
    const SnrResult base = snr(periodogram(x, dt, 1.0), kTwoPi);
    for (double scale : {1e-3, 0.5, 7.0, 1e4}) {
        std::vector<double> y(x);
        for (double& v : y) v *= scale;
        const SnrResult s = snr(periodogram(y, dt, 1.0), kTwoPi);
        CHECK(*s.snr_db == doctest::Approx(*base.snr_db).epsilon(1e-9));
    }
}

TEST_CASE("noise-free drive through a resistor flags a vanishing background") {
    const double dt = 1.0 / 256;
    const PsdEstimate p = periodogram(cosine(64 * 256, dt, 2.0, 1.0), dt, 1.0);
    const SnrResult s = snr(p, kTwoPi);
    CHECK(s.background_vanishes);
    CHECK_FALSE(s.snr_db.has_value());
    CHECK(s.peak > 0.0);
}

TEST_CASE("frequencies off the grid are rejected") {
    const PsdEstimate p = flat(513, 1.0, 64, 10.0);
    CHECK_THROWS_AS(bin_of(p, 1.01), SpectralError);
    CHECK_THROWS_AS(snr(p, 0.0), SpectralError);
}

TEST_CASE("autocorrelation estimator") {
    const auto x = white(4096, 1.5, 8);
    const auto r = autocorrelation(x, 256);
    REQUIRE(r.size() == 257);
    CHECK(r[0] == doctest::Approx(mean_square(x)).epsilon(1e-12));
    const double bound = 4.0 / std::sqrt(4096.0);
    for (std::size_t k = 1; k < r.size(); ++k) CHECK(std::abs(r[k] / r[0]) < bound);
    CHECK_THROWS_AS(autocorrelation(x, 1025), SpectralError);

    // whole-period cosine (zero mean): direct lag sums divided by the full length
    const double dt = 1.0 / 64;
    const auto c = cosine(4096, dt, 1.0, 1.0);
    const auto rc = autocorrelation(c, 100);
    for (std::size_t k = 0; k <= 100; k += 10) {
        double direct = 0.0;
        for (std::size_t i = 0; i + k < c.size(); ++i) direct += c[i] * c[i + k];
        CHECK(rc[k] == doctest::Approx(direct / 4096.0).epsilon(1e-9));
        CHECK(rc[k] == doctest::Approx(0.5 * std::cos(kTwoPi * k * dt)).epsilon(0.03 * k / 100.0 + 1e-9));
    }
}

TEST_CASE("circular lag products") {
    const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
    const auto r = circular_lag_products(x, 3);
    CHECK(r[0] == doctest::Approx(30.0 / 4));
    CHECK(r[1] == doctest::Approx((2.0 + 6.0 + 12.0 + 4.0) / 4));
    CHECK(r[2] == doctest::Approx((3.0 + 8.0 + 3.0 + 8.0) / 4));
    CHECK(r[3] == r[1]);
    CHECK_THROWS_AS(circular_lag_products(x, 4), SpectralError);
}

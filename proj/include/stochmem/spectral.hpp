#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stochmem {

/// One-sided power spectral density on the grid f_k = k / (N dt), k = 0..N/2.
///
/// Normalization: P_k = c_k dt / N |X_k|^2 with c_k = 2 for interior bins and
/// 1 for DC and Nyquist, so sum_k P_k * bin_width equals the mean square of
/// the (mean-removed) record. A bin-aligned cosine of amplitude A lands
/// entirely in one interior bin with P = A^2 L / 2, L = N dt.
struct PsdEstimate {
    std::vector<double> frequency;
    std::vector<double> power;
    double record_length = 0.0;  // L = N dt
    std::size_t sample_count = 0;
    std::size_t realization_count = 1;
    std::string window = "rectangular";

    [[nodiscard]] double bin_width() const { return 1.0 / record_length; }
    [[nodiscard]] std::size_t size() const { return power.size(); }
};

class SpectralError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Rectangular-window periodogram of a record sampled every dt_sample, with
/// its mean removed first. When drive_period is given the record must span a
/// whole number (>= 2) of periods.
PsdEstimate periodogram(std::span<const double> record, double dt_sample,
                        std::optional<double> drive_period = std::nullopt);

/// Pointwise mean over estimates sharing one frequency grid.
PsdEstimate averaged_psd(std::span<const PsdEstimate> estimates);

struct SnrOptions {
    std::size_t half_window = 32;  // background bins on each side of the peak
    std::size_t exclusion = 2;     // bins next to the peak left out of the background
    std::size_t harmonics = 3;     // exclude 2w .. harmonics*w from the window
    double vanishing_ratio = 1e-20;  // background / peak below this counts as zero
};

struct SnrResult {
    std::optional<double> snr_db;  // empty when the background vanishes
    double peak = 0.0;
    double background = 0.0;
    std::size_t peak_bin = 0;
    // Background estimation descriptor.
    std::size_t window_lo = 0;
    std::size_t window_hi = 0;
    std::size_t background_bins = 0;
    std::size_t exclusion = 0;
    bool window_shrunk = false;
    bool background_vanishes = false;

    [[nodiscard]] std::string describe() const;
};

/// SNR = 10 log10(P_peak / P_background). The peak is the bin at omega / 2 pi;
/// the background is the median of the bins within +-half_window of it, minus
/// the exclusion zone and any harmonic bins.
SnrResult snr(const PsdEstimate& psd, double omega, const SnrOptions& options = {});

/// Index of the bin holding frequency f; throws if f is not on the grid.
std::size_t bin_of(const PsdEstimate& psd, double frequency);

/// Biased autocovariance r_k = (1/L) sum_{n<L-k} x_n x_{n+k} of the
/// mean-removed record, k = 0..max_lag.
std::vector<double> autocorrelation(std::span<const double> record, std::size_t max_lag);

/// Circular (periodic) lag products (1/L) sum_n x_n x_{(n+k) mod L}, k = 0..max_lag,
/// without removing the mean.
std::vector<double> circular_lag_products(std::span<const double> record, std::size_t max_lag);

}  // namespace stochmem

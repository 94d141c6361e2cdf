#include "stochmem/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <sstream>

namespace stochmem {

namespace {

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

class RealFft {
public:
    explicit RealFft(std::size_t n) : n_(n) {
        in_ = fftw_alloc_real(n);
        out_ = fftw_alloc_complex(n / 2 + 1);
        std::lock_guard lock(planner_mutex());
        forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
        backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), out_, in_, FFTW_ESTIMATE);
    }
    ~RealFft() {
        {
            std::lock_guard lock(planner_mutex());
            fftw_destroy_plan(forward_);
            fftw_destroy_plan(backward_);
        }
        fftw_free(in_);
        fftw_free(out_);
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    double* input() { return in_; }
    fftw_complex* spectrum() { return out_; }
    void forward() { fftw_execute(forward_); }
    void backward() { fftw_execute(backward_); }  // overwrites input()

private:
    std::size_t n_;
    double* in_;
    fftw_complex* out_;
    fftw_plan forward_;
    fftw_plan backward_;
};

double mean_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

std::size_t next_pow2(std::size_t n) {
    std::size_t m = 1;
    while (m < n) m <<= 1;
    return m;
}

double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    std::sort(v.begin(), v.end());
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

PsdEstimate periodogram(std::span<const double> record, double dt_sample,
                        std::optional<double> drive_period) {
    const std::size_t n = record.size();
    if (!(dt_sample > 0.0)) throw SpectralError("periodogram requires dt_sample > 0");
    if (n < 4) throw SpectralError("periodogram requires at least 4 samples");
    const double length = static_cast<double>(n) * dt_sample;
    if (drive_period) {
        const double periods = length / *drive_period;
        const double whole = std::round(periods);
        if (whole < 2.0) throw SpectralError("record must span at least 2 drive periods");
        if (std::abs(periods - whole) > 1e-9 * whole)
            throw SpectralError("record must span a whole number of drive periods");
    }

    RealFft fft(n);
    const double mu = mean_of(record);
    for (std::size_t i = 0; i < n; ++i) fft.input()[i] = record[i] - mu;
    fft.forward();

    PsdEstimate psd;
    const std::size_t bins = n / 2 + 1;
    psd.frequency.resize(bins);
    psd.power.resize(bins);
    psd.record_length = length;
    psd.sample_count = n;
    const double scale = dt_sample / static_cast<double>(n);
    for (std::size_t k = 0; k < bins; ++k) {
        const double re = fft.spectrum()[k][0];
        const double im = fft.spectrum()[k][1];
        const bool edge = (k == 0) || (n % 2 == 0 && k == n / 2);
        psd.frequency[k] = static_cast<double>(k) / length;
        psd.power[k] = (edge ? 1.0 : 2.0) * scale * (re * re + im * im);
    }
    return psd;
}

PsdEstimate averaged_psd(std::span<const PsdEstimate> estimates) {
    if (estimates.empty()) throw SpectralError("averaged_psd requires at least one estimate");
    const PsdEstimate& first = estimates.front();
    PsdEstimate out = first;
    std::fill(out.power.begin(), out.power.end(), 0.0);
    std::size_t realizations = 0;
    for (const auto& e : estimates) {
        if (e.frequency != first.frequency || e.sample_count != first.sample_count)
            throw SpectralError("averaged_psd requires identical frequency grids");
        for (std::size_t k = 0; k < out.power.size(); ++k) out.power[k] += e.power[k];
        realizations += e.realization_count;
    }
    const double inv = 1.0 / static_cast<double>(estimates.size());
    for (auto& p : out.power) p *= inv;
    out.realization_count = realizations;
    return out;
}

std::size_t bin_of(const PsdEstimate& psd, double frequency) {
    const double k = frequency * psd.record_length;
    const double nearest = std::round(k);
    if (std::abs(k - nearest) > 1e-6 || nearest < 0.0 ||
        nearest >= static_cast<double>(psd.size()))
        throw SpectralError("frequency does not fall on the spectrum grid");
    return static_cast<std::size_t>(nearest);
}

SnrResult snr(const PsdEstimate& psd, double omega, const SnrOptions& options) {
    SnrResult r;
    const std::size_t peak = bin_of(psd, omega / (2.0 * std::numbers::pi));
    if (peak == 0) throw SpectralError("signal frequency maps to the DC bin");
    r.peak_bin = peak;
    r.exclusion = options.exclusion;
    r.peak = psd.power[peak];

    const std::size_t last = psd.size() - 1;
    std::size_t lo = peak > options.half_window ? peak - options.half_window : 1;
    if (lo < 1) lo = 1;
    std::size_t hi = std::min(last, peak + options.half_window);
    r.window_shrunk = (peak < options.half_window + 1) || (peak + options.half_window > last);
    r.window_lo = lo;
    r.window_hi = hi;

    auto excluded = [&](std::size_t k) {
        for (std::size_t h = 1; h <= std::max<std::size_t>(1, options.harmonics); ++h) {
            const std::size_t centre = h * peak;
            const std::size_t d = k > centre ? k - centre : centre - k;
            if (d <= options.exclusion) return true;
        }
        return false;
    };
    std::vector<double> background;
    for (std::size_t k = lo; k <= hi; ++k)
        if (!excluded(k)) background.push_back(psd.power[k]);
    if (background.empty()) throw SpectralError("no background bins left around the peak");
    r.background_bins = background.size();
    r.background = median_of(std::move(background));

    r.background_vanishes = !(r.background > options.vanishing_ratio * r.peak) || r.background <= 0.0;
    if (!r.background_vanishes) r.snr_db = 10.0 * std::log10(r.peak / r.background);
    return r;
}

std::string SnrResult::describe() const {
    std::ostringstream os;
    os << "median of bins [" << window_lo << ", " << window_hi << "] excluding peak +-" << exclusion
       << " and harmonics (" << background_bins << " bins)" << (window_shrunk ? ", window shrunk at spectrum edge" : "")
       << (background_vanishes ? ", background vanishes" : "");
    return os.str();
}

std::vector<double> autocorrelation(std::span<const double> record, std::size_t max_lag) {
    const std::size_t n = record.size();
    if (n == 0) throw SpectralError("autocorrelation of an empty record");
    if (max_lag > n / 4) throw SpectralError("max_lag must not exceed a quarter of the record length");
    const std::size_t m = next_pow2(2 * n);
    RealFft fft(m);
    const double mu = mean_of(record);
    for (std::size_t i = 0; i < m; ++i) fft.input()[i] = i < n ? record[i] - mu : 0.0;
    fft.forward();
    for (std::size_t k = 0; k < m / 2 + 1; ++k) {
        const double re = fft.spectrum()[k][0], im = fft.spectrum()[k][1];
        fft.spectrum()[k][0] = re * re + im * im;
        fft.spectrum()[k][1] = 0.0;
    }
    fft.backward();
    std::vector<double> out(max_lag + 1);
    const double scale = 1.0 / (static_cast<double>(m) * static_cast<double>(n));
    for (std::size_t k = 0; k <= max_lag; ++k) out[k] = fft.input()[k] * scale;
    return out;
}

std::vector<double> circular_lag_products(std::span<const double> record, std::size_t max_lag) {
    const std::size_t n = record.size();
    if (n == 0) throw SpectralError("lag products of an empty record");
    if (max_lag >= n) throw SpectralError("max_lag must be smaller than the record length");
    std::vector<double> out(max_lag + 1, 0.0);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t j = i + k;
            if (j >= n) j -= n;
            s += record[i] * record[j];
        }
        out[k] = s / static_cast<double>(n);
    }
    return out;
}

}  // namespace stochmem

#pragma once

// Independent realizations and their aggregates.
//
// Realization k always draws its noise from stream_index(k, channel) under
// the base seed, and aggregates are reduced over fixed blocks of
// realizations in index order. Results are therefore bit-identical for any
// worker count.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "stochmem/core.hpp"
#include "stochmem/integrate.hpp"
#include "stochmem/spectral.hpp"

namespace stochmem {

/// How each realization's drive phase is chosen.
///   Fixed: the model's own phase for every realization.
///   Random: phi = 2 pi j / N with j uniform in [0, N), N samples per period,
///           so pinch points stay on the sample grid.
enum class PhaseMode { Fixed, Random };

PhaseMode default_phase_mode(const ModelSpec& model);

class BlowUpError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EnsembleOptions {
    IntegrationOptions integration;
    std::size_t realizations = 1;
    std::uint64_t base_seed = 0;
    std::optional<PhaseMode> phase;  // family default when empty
    std::size_t workers = 1;
    double transient_periods = 20.0;
    bool retain_trajectories = false;
};

struct RealizationRecord {
    std::size_t index = 0;
    SeedRecord seed;
    std::uint64_t phase_index = 0;  // j in phi = 2 pi j / N
    std::uint64_t phase_steps = 1;  // N
    double phi = 0.0;
    std::optional<double> blow_up_time;
};

/// Model and record for realization k (drive phase resolved).
std::pair<ModelSpec, RealizationRecord> realization_setup(const ModelSpec& model,
                                                          const EnsembleOptions& options,
                                                          std::size_t k);

/// Post-transient statistics pooled over time and realizations.
struct StationarySummary {
    std::size_t first_sample = 0;
    std::size_t samples_per_realization = 0;
    double mean = 0.0;
    double mean_stderr = 0.0;  // from the spread of per-realization time means
    double variance = 0.0;     // pooled over time and realizations
    double negative_fraction = 0.0;
    std::vector<double> realization_means;
    std::vector<double> realization_variances;
};

struct EnsembleResult {
    std::size_t realization_count = 0;  // realizations that completed
    std::size_t aborted_count = 0;
    std::uint64_t base_seed = 0;
    double sample_dt = 0.0;
    std::vector<double> mean;
    std::vector<double> variance;  // unbiased across realizations, 0 for one realization
    std::vector<double> stderr_mean;
    StationarySummary stationary;
    std::vector<RealizationRecord> records;
    std::vector<Trajectory> trajectories;  // only with retain_trajectories

    [[nodiscard]] double time(std::size_t i) const { return static_cast<double>(i) * sample_dt; }
};

/// Throws BlowUpError when every realization aborted.
EnsembleResult run_ensemble(const ModelSpec& model, const EnsembleOptions& options);

/// How realizations are combined into one spectrum.
///   PowerSpectra: mean of the per-realization periodograms.
///   Trajectories: periodogram of the realization-averaged current, which
///                 keeps only the part of I(t) phase-locked to the drive.
enum class SpectrumAveraging { PowerSpectra, Trajectories };

/// Trajectories for the double well (fixed phase), PowerSpectra otherwise.
SpectrumAveraging default_spectrum_averaging(const ModelSpec& model);

struct SpectrumOptions {
    EnsembleOptions ensemble;  // integration.t_end is derived from the period counts
    std::size_t record_periods = 64;
    std::optional<SpectrumAveraging> averaging;  // family default when empty
    SnrOptions snr;
    std::size_t bootstrap_resamples = 0;
};

struct SpectrumResult {
    PsdEstimate psd;  // combined over completed realizations
    SpectrumAveraging averaging = SpectrumAveraging::PowerSpectra;
    SnrResult snr;
    std::optional<double> snr_bootstrap_sd;
    std::size_t realization_count = 0;
    std::size_t aborted_count = 0;
    double negative_fraction = 0.0;  // recorded samples with G < 0
    std::vector<RealizationRecord> records;
};

/// Spectrum of the current I(t) over record_periods periods that follow the
/// transient, combined over realizations, and its SNR at the drive frequency.
SpectrumResult run_spectrum(const ModelSpec& model, const SpectrumOptions& options);

struct AutocorrelationResult {
    std::vector<double> lag;
    std::vector<double> acf;  // realization average of the biased estimator
    std::size_t realization_count = 0;
    std::size_t aborted_count = 0;
};

/// Ensemble-averaged autocovariance of G over record_periods periods after the transient.
AutocorrelationResult run_autocorrelation(const ModelSpec& model, const EnsembleOptions& options,
                                          std::size_t record_periods, std::size_t max_lag);

}  // namespace stochmem

#include "stochmem/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stochmem/parallel.hpp"

namespace stochmem {

namespace {

constexpr std::size_t kBlock = 16;

std::size_t block_count(std::size_t n) { return (n + kBlock - 1) / kBlock; }

std::size_t transient_samples(const ModelSpec& model, const EnsembleOptions& options) {
    if (!(options.transient_periods >= 0.0))
        throw std::invalid_argument("transient_periods must be >= 0");
    const std::size_t per = samples_per_period(model.drive().period(), options.integration.dt,
                                               options.integration.stride);
    return static_cast<std::size_t>(std::llround(options.transient_periods * static_cast<double>(per)));
}

struct Welford {
    double n = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        n += 1.0;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    void merge(const Welford& o) {
        if (o.n == 0.0) return;
        if (n == 0.0) {
            *this = o;
            return;
        }
        const double total = n + o.n;
        const double d = o.mean - mean;
        mean += d * o.n / total;
        m2 += o.m2 + d * d * n * o.n / total;
        n = total;
    }
};

struct BlockAggregate {
    std::vector<Welford> per_time;
    std::vector<RealizationRecord> records;
    std::vector<double> time_means;
    std::vector<double> time_variances;
    std::vector<Trajectory> trajectories;
    std::size_t negatives = 0;
    std::size_t stationary_samples = 0;
};

}  // namespace

PhaseMode default_phase_mode(const ModelSpec& model) {
    switch (model.family()) {
        case ModelFamily::CorrelatedLinear:
        case ModelFamily::MonostablePower: return PhaseMode::Random;
        default: return PhaseMode::Fixed;
    }
}

std::pair<ModelSpec, RealizationRecord> realization_setup(const ModelSpec& model,
                                                          const EnsembleOptions& options,
                                                          std::size_t k) {
    RealizationRecord rec;
    rec.index = k;
    rec.seed = {options.base_seed, stream_index(k, NoiseChannel::Xi),
                stream_index(k, NoiseChannel::Eta)};
    const PhaseMode mode = options.phase.value_or(default_phase_mode(model));
    if (mode == PhaseMode::Fixed) {
        rec.phi = model.drive().phi();
        return {model, rec};
    }
    const std::size_t per = samples_per_period(model.drive().period(), options.integration.dt,
                                               options.integration.stride);
    NoiseStream phase_stream(options.base_seed, stream_index(k, NoiseChannel::Phase));
    rec.phase_steps = per;
    rec.phase_index = phase_stream.next_below(per);
    const DriveSignal& d = model.drive();
    const DriveSignal drive = DriveSignal::with_phase_fraction(
        d.amplitude(), d.omega(), static_cast<long>(rec.phase_index), static_cast<long>(per));
    rec.phi = drive.phi();
    return {model.with_drive(drive), rec};
}

EnsembleResult run_ensemble(const ModelSpec& model, const EnsembleOptions& options) {
    if (options.realizations == 0) throw std::invalid_argument("realizations must be >= 1");
    check_integration_options(model, options.integration);
    const std::size_t steps = step_count(options.integration.t_end, options.integration.dt);
    const std::size_t n_samples = steps / options.integration.stride + 1;
    const std::size_t first = transient_samples(model, options);

    std::vector<BlockAggregate> blocks(block_count(options.realizations));
    parallel_for(blocks.size(), options.workers, [&](std::size_t b) {
        BlockAggregate& agg = blocks[b];
        agg.per_time.resize(n_samples);
        const std::size_t lo = b * kBlock;
        const std::size_t hi = std::min(options.realizations, lo + kBlock);
        std::vector<double> buffer(n_samples);
        for (std::size_t k = lo; k < hi; ++k) {
            auto [m, rec] = realization_setup(model, options, k);
            NoiseStream xi(options.base_seed, rec.seed.xi_stream);
            NoiseStream eta(options.base_seed, rec.seed.eta_stream);
            IntegrationOptions io = options.integration;
            io.require_valid = false;  // checked once above
            rec.blow_up_time = integrate_observed(
                m, io, xi, eta, [&](std::size_t i, double, double g) { buffer[i] = g; });
            agg.records.push_back(rec);
            if (rec.blow_up_time) continue;
            for (std::size_t i = 0; i < n_samples; ++i) agg.per_time[i].add(buffer[i]);
            Welford tw;
            for (std::size_t i = first; i < n_samples; ++i) {
                tw.add(buffer[i]);
                if (buffer[i] < 0.0) ++agg.negatives;
            }
            agg.stationary_samples += n_samples > first ? n_samples - first : 0;
            agg.time_means.push_back(tw.mean);
            agg.time_variances.push_back(tw.n > 0.0 ? tw.m2 / tw.n : 0.0);
            if (options.retain_trajectories) {
                Trajectory t;
                t.model = m;
                t.dt = io.dt;
                t.stride = io.stride;
                t.seed = rec.seed;
                t.samples = buffer;
                agg.trajectories.push_back(std::move(t));
            }
        }
    });

    EnsembleResult r;
    r.base_seed = options.base_seed;
    r.sample_dt = options.integration.dt * static_cast<double>(options.integration.stride);
    std::vector<Welford> per_time(n_samples);
    std::size_t negatives = 0, stationary_samples = 0;
    for (auto& agg : blocks) {
        for (std::size_t i = 0; i < n_samples; ++i) per_time[i].merge(agg.per_time[i]);
        for (auto& rec : agg.records) {
            if (rec.blow_up_time) ++r.aborted_count;
            r.records.push_back(rec);
        }
        r.stationary.realization_means.insert(r.stationary.realization_means.end(),
                                              agg.time_means.begin(), agg.time_means.end());
        r.stationary.realization_variances.insert(r.stationary.realization_variances.end(),
                                                  agg.time_variances.begin(),
                                                  agg.time_variances.end());
        for (auto& t : agg.trajectories) r.trajectories.push_back(std::move(t));
        negatives += agg.negatives;
        stationary_samples += agg.stationary_samples;
    }
    r.realization_count = options.realizations - r.aborted_count;
    if (r.realization_count == 0) throw BlowUpError("every realization blew up");

    r.mean.resize(n_samples);
    r.variance.resize(n_samples);
    r.stderr_mean.resize(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const Welford& w = per_time[i];
        r.mean[i] = w.mean;
        r.variance[i] = w.n > 1.0 ? w.m2 / (w.n - 1.0) : 0.0;
        r.stderr_mean[i] = std::sqrt(r.variance[i] / w.n);
    }

    StationarySummary& st = r.stationary;
    st.first_sample = first;
    st.samples_per_realization = n_samples > first ? n_samples - first : 0;
    if (st.samples_per_realization > 0) {
        Welford between;
        for (double m : st.realization_means) between.add(m);
        double within = 0.0;
        for (double v : st.realization_variances) within += v;
        within /= static_cast<double>(st.realization_variances.size());
        st.mean = between.mean;
        st.mean_stderr = between.n > 1.0 ? std::sqrt(between.m2 / (between.n - 1.0) / between.n) : 0.0;
        st.variance = within + between.m2 / between.n;
        st.negative_fraction = static_cast<double>(negatives) / static_cast<double>(stationary_samples);
    } else {
        st.mean = st.mean_stderr = st.variance = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

SpectrumAveraging default_spectrum_averaging(const ModelSpec& model) {
    return model.family() == ModelFamily::DoubleWell ? SpectrumAveraging::Trajectories
                                                     : SpectrumAveraging::PowerSpectra;
}

SpectrumResult run_spectrum(const ModelSpec& model, const SpectrumOptions& options) {
    const EnsembleOptions& eo = options.ensemble;
    if (eo.realizations == 0) throw std::invalid_argument("realizations must be >= 1");
    if (options.record_periods < 2) throw SpectralError("record must span at least 2 drive periods");
    const SpectrumAveraging averaging = options.averaging.value_or(default_spectrum_averaging(model));
    const bool keep_currents = averaging == SpectrumAveraging::Trajectories;
    const double period = model.drive().period();
    const double omega = model.drive().omega();
    IntegrationOptions io = eo.integration;
    const std::size_t per = samples_per_period(period, io.dt, io.stride);
    const std::size_t first = transient_samples(model, eo);
    const std::size_t record = options.record_periods * per;
    // Integrate just far enough to cover the record.
    io.t_end = static_cast<double>((first + record) * io.stride) * io.dt;
    check_integration_options(model, io);
    io.require_valid = false;
    const double sample_dt = io.dt * static_cast<double>(io.stride);

    std::vector<std::optional<PsdEstimate>> psds(eo.realizations);
    std::vector<std::vector<double>> kept(keep_currents ? eo.realizations : 0);
    std::vector<RealizationRecord> records(eo.realizations);
    std::vector<std::size_t> negatives(eo.realizations, 0);
    parallel_for(block_count(eo.realizations), eo.workers, [&](std::size_t b) {
        const std::size_t lo = b * kBlock;
        const std::size_t hi = std::min(eo.realizations, lo + kBlock);
        std::vector<double> currents(record);
        for (std::size_t k = lo; k < hi; ++k) {
            auto [m, rec] = realization_setup(model, eo, k);
            NoiseStream xi(eo.base_seed, rec.seed.xi_stream);
            NoiseStream eta(eo.base_seed, rec.seed.eta_stream);
            const DriveSignal& drive = m.drive();
            std::size_t neg = 0;
            rec.blow_up_time = integrate_observed(m, io, xi, eta, [&](std::size_t i, double t, double g) {
                if (i < first || i >= first + record) return;
                currents[i - first] = current(g, t, drive);
                if (g < 0.0) ++neg;
            });
            records[k] = rec;
            negatives[k] = neg;
            if (rec.blow_up_time) continue;
            if (keep_currents) kept[k] = currents;
            else psds[k] = periodogram(currents, sample_dt, period);
        }
    });

    SpectrumResult r;
    r.averaging = averaging;
    r.records = records;
    std::vector<std::size_t> completed;
    std::size_t neg_total = 0;
    for (std::size_t k = 0; k < eo.realizations; ++k) {
        if (records[k].blow_up_time) {
            ++r.aborted_count;
            continue;
        }
        completed.push_back(k);
        neg_total += negatives[k];
    }
    r.realization_count = completed.size();
    if (completed.empty()) throw BlowUpError("every realization blew up");
    r.negative_fraction =
        static_cast<double>(neg_total) / static_cast<double>(completed.size() * record);

    // Spectrum from a multiset of completed realizations, given by position in `completed`.
    std::vector<double> mean_current(keep_currents ? record : 0);
    auto trajectory_psd = [&](auto&& pick) {
        std::fill(mean_current.begin(), mean_current.end(), 0.0);
        for (std::size_t s = 0; s < completed.size(); ++s) {
            const auto& c = kept[completed[pick(s)]];
            for (std::size_t i = 0; i < record; ++i) mean_current[i] += c[i];
        }
        const double inv = 1.0 / static_cast<double>(completed.size());
        for (auto& v : mean_current) v *= inv;
        PsdEstimate p = periodogram(mean_current, sample_dt, period);
        p.realization_count = completed.size();
        return p;
    };

    std::vector<PsdEstimate> spectra;
    if (keep_currents) {
        r.psd = trajectory_psd([](std::size_t s) { return s; });
    } else {
        for (std::size_t k : completed) spectra.push_back(std::move(*psds[k]));
        r.psd = averaged_psd(spectra);
    }
    r.snr = snr(r.psd, omega, options.snr);

    if (options.bootstrap_resamples > 1 && completed.size() > 1) {
        NoiseStream picker(eo.base_seed, stream_index(0, NoiseChannel::Bootstrap));
        Welford spread;
        // Power-spectrum mode: only the bins around the peak matter for the SNR.
        const std::size_t peak = r.snr.peak_bin;
        const std::size_t reach = options.snr.half_window + options.snr.exclusion + 1;
        const std::size_t lo = peak > reach ? peak - reach : 0;
        const std::size_t hi = std::min(r.psd.size() - 1, peak + reach);
        PsdEstimate shell = r.psd;
        std::vector<std::size_t> draw(completed.size());
        const double inv = 1.0 / static_cast<double>(completed.size());
        for (std::size_t b = 0; b < options.bootstrap_resamples; ++b) {
            for (auto& d : draw) d = picker.next_below(completed.size());
            SnrResult s;
            if (keep_currents) {
                s = snr(trajectory_psd([&](std::size_t i) { return draw[i]; }), omega, options.snr);
            } else {
                std::fill(shell.power.begin() + lo, shell.power.begin() + hi + 1, 0.0);
                for (std::size_t d : draw)
                    for (std::size_t k = lo; k <= hi; ++k) shell.power[k] += spectra[d].power[k];
                for (std::size_t k = lo; k <= hi; ++k) shell.power[k] *= inv;
                s = snr(shell, omega, options.snr);
            }
            if (s.snr_db) spread.add(*s.snr_db);
        }
        if (spread.n > 1.0) r.snr_bootstrap_sd = std::sqrt(spread.m2 / (spread.n - 1.0));
    }
    return r;
}

AutocorrelationResult run_autocorrelation(const ModelSpec& model, const EnsembleOptions& options,
                                          std::size_t record_periods, std::size_t max_lag) {
    if (options.realizations == 0) throw std::invalid_argument("realizations must be >= 1");
    IntegrationOptions io = options.integration;
    const std::size_t per = samples_per_period(model.drive().period(), io.dt, io.stride);
    const std::size_t first = transient_samples(model, options);
    const std::size_t record = record_periods * per;
    io.t_end = static_cast<double>((first + record) * io.stride) * io.dt;
    check_integration_options(model, io);
    io.require_valid = false;

    std::vector<std::optional<std::vector<double>>> acfs(options.realizations);
    parallel_for(block_count(options.realizations), options.workers, [&](std::size_t b) {
        const std::size_t lo = b * kBlock;
        const std::size_t hi = std::min(options.realizations, lo + kBlock);
        std::vector<double> g_record(record);
        for (std::size_t k = lo; k < hi; ++k) {
            auto [m, rec] = realization_setup(model, options, k);
            NoiseStream xi(options.base_seed, rec.seed.xi_stream);
            NoiseStream eta(options.base_seed, rec.seed.eta_stream);
            const auto blow = integrate_observed(m, io, xi, eta, [&](std::size_t i, double, double g) {
                if (i >= first && i < first + record) g_record[i - first] = g;
            });
            if (!blow) acfs[k] = autocorrelation(g_record, max_lag);
        }
    });

    AutocorrelationResult r;
    r.acf.assign(max_lag + 1, 0.0);
    for (const auto& a : acfs) {
        if (!a) {
            ++r.aborted_count;
            continue;
        }
        ++r.realization_count;
        for (std::size_t k = 0; k <= max_lag; ++k) r.acf[k] += (*a)[k];
    }
    if (r.realization_count == 0) throw BlowUpError("every realization blew up");
    for (auto& v : r.acf) v /= static_cast<double>(r.realization_count);
    const double h = io.dt * static_cast<double>(io.stride);
    r.lag.resize(max_lag + 1);
    for (std::size_t k = 0; k <= max_lag; ++k) r.lag[k] = static_cast<double>(k) * h;
    return r;
}

}  // namespace stochmem

#include "stochmem/commands.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "stochmem/analysis.hpp"
#include "stochmem/csv.hpp"
#include "stochmem/ensemble.hpp"
#include "stochmem/oracle.hpp"
#include "stochmem/parallel.hpp"
#include "stochmem/spectral.hpp"

namespace stochmem {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Metadata base_metadata(std::string_view command, const ExperimentConfig& cfg) {
    Metadata meta{{"command", std::string(command)}, {"generated_by", "stochmem"}};
    const std::string copy = cfg.to_text();
    std::size_t start = 0;
    while (start < copy.size()) {
        const auto end = copy.find('\n', start);
        const std::string line = copy.substr(start, end - start);
        const auto eq = line.find(" = ");
        if (eq != std::string::npos) meta.emplace_back(line.substr(0, eq), line.substr(eq + 3));
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return meta;
}

std::filesystem::path emit(CommandOutput& out, const ExperimentConfig& cfg,
                           const std::string& name, const CsvWriter& csv, const Metadata& meta) {
    const std::filesystem::path path = std::filesystem::path(cfg.out_dir) / name;
    csv.save(path);
    write_text(path.string() + ".meta", format_metadata(meta));
    out.files.push_back(path);
    return path;
}

std::string fmt(double v) { return format_number(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }
std::string fmt(const std::optional<double>& v) { return v ? format_number(*v) : "none"; }

std::size_t transient_samples(const ExperimentConfig& cfg, const ModelSpec& model) {
    const std::size_t per = samples_per_period(model.drive().period(), cfg.dt, cfg.stride);
    return static_cast<std::size_t>(std::llround(cfg.transient_periods * static_cast<double>(per)));
}

/// Single realization cfg.realization, identical to the one an ensemble run would produce.
std::pair<Trajectory, RealizationRecord> single_realization(const ExperimentConfig& cfg) {
    const ModelSpec model = cfg.model.build();
    EnsembleOptions eo = cfg.ensemble(1);
    eo.realizations = cfg.realization + 1;
    auto [m, rec] = realization_setup(model, eo, cfg.realization);
    NoiseStream xi(cfg.seed, rec.seed.xi_stream);
    NoiseStream eta(cfg.seed, rec.seed.eta_stream);
    Trajectory traj = integrate(m, eo.integration, xi, eta);
    rec.blow_up_time = traj.blow_up_time;
    return {std::move(traj), rec};
}

void add_record(Metadata& meta, const RealizationRecord& rec) {
    meta.emplace_back("result.realization", fmt(rec.index));
    meta.emplace_back("result.xi_stream", std::to_string(rec.seed.xi_stream));
    meta.emplace_back("result.eta_stream", std::to_string(rec.seed.eta_stream));
    meta.emplace_back("result.phase_index", std::to_string(rec.phase_index));
    meta.emplace_back("result.phase_steps", std::to_string(rec.phase_steps));
    meta.emplace_back("result.phi", fmt(rec.phi));
    meta.emplace_back("result.blow_up_time", fmt(rec.blow_up_time));
}

SpectrumOptions spectrum_options(const ExperimentConfig& cfg, const CommandContext& ctx) {
    SpectrumOptions so;
    so.ensemble = cfg.ensemble(ctx.workers);
    so.record_periods = cfg.record_periods;
    so.bootstrap_resamples = cfg.bootstrap;
    so.averaging = cfg.averaging;
    return so;
}

double snr_value(const SnrResult& s) {
    if (s.snr_db) return *s.snr_db;
    return s.background_vanishes ? std::numeric_limits<double>::infinity() : kNaN;
}

void require_valid(const ModelSpec& model, const std::string& where) {
    const ValidityReport report = validate(model);
    if (!report.ok()) throw ValidityError(where + report.summary());
}

template <typename F>
double or_nan(F&& f) {
    try {
        return f();
    } catch (const std::domain_error&) {
        return kNaN;
    } catch (const ModelError&) {
        return kNaN;
    }
}

std::vector<std::pair<std::string, double>> oracle_row(const ModelSpec& model) {
    std::vector<std::pair<std::string, double>> row;
    const ValidityReport report = validate(model);
    if (const auto* m = model.get_if<TimeDelayModel>()) {
        const auto r = timedelay_response(*m);
        row = {{"offset", r.offset}, {"amplitude", r.amplitude}, {"delay", r.delay}};
    } else if (const auto* m = model.get_if<CorrelatedLinearModel>()) {
        CorrelatedLinearModel undriven = *m;
        undriven.drive = m->drive.with_amplitude(0.0);
        const auto terms = [&]() -> std::optional<CorrelationTerms> {
            try {
                return correlation_terms(*m);
            } catch (const std::domain_error&) {
                return std::nullopt;
            }
        }();
        row = {{"g_infinity", or_nan([&] { return g_infinity(undriven); })},
               {"asymptotic_variance", or_nan([&] { return asymptotic_variance(undriven); })},
               {"resonance_q", or_nan([&] { return resonance_q(*m); })},
               {"variance_minimizing_q", or_nan([&] { return variance_minimizing_q(*m); })},
               {"oscillatory_amplitude", terms ? terms->oscillatory_amplitude : kNaN},
               {"decay_amplitude", terms ? terms->decay_amplitude : kNaN},
               {"decay_rate", terms ? terms->decay_rate : kNaN}};
    } else if (const auto* m = model.get_if<MonostablePowerModel>()) {
        row = {{"resonance_q", or_nan([&] { return resonance_q(*m); })}};
    } else if (const auto* m = model.get_if<DoubleWellModel>()) {
        const auto& sp = double_well::stationary_points();
        const auto bh = double_well::barrier_heights();
        row = {{"left_minimum", sp.left_min},
               {"barrier", sp.barrier},
               {"right_minimum", sp.right_min},
               {"barrier_height_left", bh.left},
               {"barrier_height_right", bh.right},
               {"kramers_dwell_ratio", m->sigma > 0.0 ? kramers_dwell_ratio(m->sigma) : kNaN}};
    }
    row.emplace_back("mean_exists", report.mean_exists ? 1.0 : 0.0);
    row.emplace_back("variance_exists", report.variance_exists ? 1.0 : 0.0);
    row.emplace_back("nonneg_drive_ok", report.nonneg_drive_ok ? 1.0 : 0.0);
    return row;
}

std::string file_tag(double v) {
    std::string s = format_number(v);
    for (char& ch : s)
        if (ch == '/' || ch == ' ') ch = '_';
    return s;
}

}  // namespace

CommandOutput cmd_simulate(const ExperimentConfig& cfg, const CommandContext&) {
    CommandOutput out;
    auto [traj, rec] = single_realization(cfg);
    const DriveSignal& drive = traj.model.drive();
    CsvWriter csv({"t", "G", "V", "I"});
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const double t = traj.time(i);
        const double g = traj.samples[i];
        csv.row({t, g, drive.voltage(t), current(g, t, drive)});
    }
    Metadata meta = base_metadata("simulate", cfg);
    add_record(meta, rec);
    emit(out, cfg, "trajectory.csv", csv, meta);
    out.summary.push_back("samples = " + fmt(traj.samples.size()));
    if (traj.aborted()) {
        out.summary.push_back("blow-up at t = " + fmt(*traj.blow_up_time));
        out.exit_code = kExitBlowUp;
    }
    return out;
}

CommandOutput cmd_ensemble(const ExperimentConfig& cfg, const CommandContext& ctx) {
    CommandOutput out;
    const EnsembleResult r = run_ensemble(cfg.model.build(), cfg.ensemble(ctx.workers));
    CsvWriter csv({"t", "mean_G", "var_G", "stderr"});
    for (std::size_t i = 0; i < r.mean.size(); ++i)
        csv.row({r.time(i), r.mean[i], r.variance[i], r.stderr_mean[i]});
    Metadata meta = base_metadata("ensemble", cfg);
    const auto& st = r.stationary;
    meta.emplace_back("result.realizations_completed", fmt(r.realization_count));
    meta.emplace_back("result.realizations_aborted", fmt(r.aborted_count));
    meta.emplace_back("result.stationary_first_sample", fmt(st.first_sample));
    meta.emplace_back("result.stationary_mean", fmt(st.mean));
    meta.emplace_back("result.stationary_mean_stderr", fmt(st.mean_stderr));
    meta.emplace_back("result.stationary_variance", fmt(st.variance));
    meta.emplace_back("result.negative_fraction", fmt(st.negative_fraction));
    emit(out, cfg, "stats.csv", csv, meta);
    out.summary.push_back("stationary mean = " + fmt(st.mean) + " +- " + fmt(st.mean_stderr) +
                          ", variance = " + fmt(st.variance) + ", aborted = " + fmt(r.aborted_count));
    return out;
}

CommandOutput cmd_spectrum(const ExperimentConfig& cfg, const CommandContext& ctx) {
    CommandOutput out;
    const SpectrumResult r = run_spectrum(cfg.model.build(), spectrum_options(cfg, ctx));
    CsvWriter csv({"freq", "power"});
    for (std::size_t k = 0; k < r.psd.size(); ++k) csv.row({r.psd.frequency[k], r.psd.power[k]});
    Metadata meta = base_metadata("spectrum", cfg);
    meta.emplace_back("result.averaging",
                      r.averaging == SpectrumAveraging::Trajectories ? "trajectories" : "spectra");
    meta.emplace_back("result.snr_db", fmt(snr_value(r.snr)));
    meta.emplace_back("result.peak", fmt(r.snr.peak));
    meta.emplace_back("result.background", fmt(r.snr.background));
    meta.emplace_back("result.peak_bin", fmt(r.snr.peak_bin));
    meta.emplace_back("result.background_estimator", r.snr.describe());
    meta.emplace_back("result.snr_bootstrap_sd", fmt(r.snr_bootstrap_sd));
    meta.emplace_back("result.realizations_completed", fmt(r.realization_count));
    meta.emplace_back("result.realizations_aborted", fmt(r.aborted_count));
    meta.emplace_back("result.negative_fraction", fmt(r.negative_fraction));
    emit(out, cfg, "psd.csv", csv, meta);
    out.summary.push_back("snr_db = " + fmt(snr_value(r.snr)) + " peak = " + fmt(r.snr.peak) +
                          " background = " + fmt(r.snr.background) + " (" + r.snr.describe() + ")");
    return out;
}

CommandOutput cmd_hysteresis(const ExperimentConfig& cfg, const CommandContext&) {
    CommandOutput out;
    auto [traj, rec] = single_realization(cfg);
    if (traj.aborted()) throw BlowUpError("realization blew up at t = " + fmt(*traj.blow_up_time));
    const DriveSignal& drive = traj.model.drive();
    const std::size_t skip = transient_samples(cfg, traj.model);
    if (skip >= traj.samples.size())
        throw ConfigError("run.t_end leaves no samples after the " + fmt(cfg.transient_periods) +
                          " transient periods");
    const Trajectory tail = traj.tail(skip);
    const HysteresisLoop loop = extract_loops(tail, drive);

    Metadata meta = base_metadata("hysteresis", cfg);
    add_record(meta, rec);

    CsvWriter loops({"period", "V", "I"});
    CsvWriter areas({"period", "area", "lobes"});
    for (std::size_t k = 0; k < loop.period_count; ++k) {
        const double period = static_cast<double>(loop.first_period + k);
        const auto v = loop.period_voltage(k);
        const auto i = loop.period_current(k);
        for (std::size_t s = 0; s < v.size(); ++s) loops.row({period, v[s], i[s]});
        std::string lobes;
        for (std::size_t j = 0; j < loop.lobe_areas[k].size(); ++j) {
            if (j) lobes += ';';
            lobes += fmt(loop.lobe_areas[k][j]);
        }
        areas.row(std::vector<std::string>{fmt(loop.first_period + k), fmt(loop.period_area[k]), lobes});
    }
    emit(out, cfg, "loop.csv", loops, meta);
    emit(out, cfg, "area.csv", areas, meta);
    out.summary.push_back("periods = " + fmt(loop.period_count));

    if (cfg.model.family == ModelFamily::DoubleWell) {
        const DwellStats d = dwell_times(tail, DwellOptions{cfg.deadband});
        CsvWriter dwell({"well", "duration"});
        for (double x : d.left_dwells) dwell.row(std::vector<std::string>{"left", fmt(x)});
        for (double x : d.right_dwells) dwell.row(std::vector<std::string>{"right", fmt(x)});
        Metadata dmeta = meta;
        dmeta.emplace_back("result.lower_threshold", fmt(d.lower_threshold));
        dmeta.emplace_back("result.upper_threshold", fmt(d.upper_threshold));
        dmeta.emplace_back("result.mean_left", fmt(d.mean_left));
        dmeta.emplace_back("result.mean_right", fmt(d.mean_right));
        dmeta.emplace_back("result.no_crossings", fmt(d.no_crossings));
        dmeta.emplace_back("result.final_dwell_censored", fmt(d.final_dwell_censored));
        if (cfg.model.sigma > 0.0)
            dmeta.emplace_back("result.kramers_dwell_ratio", fmt(kramers_dwell_ratio(cfg.model.sigma)));
        emit(out, cfg, "dwell.csv", dwell, dmeta);
        out.summary.push_back("dwells: left = " + fmt(d.left_dwells.size()) +
                              ", right = " + fmt(d.right_dwells.size()));
    }
    return out;
}

CommandOutput cmd_sweep(const ExperimentConfig& cfg, const CommandContext& ctx) {
    if (!cfg.sweep.active()) throw ConfigError("sweep requires sweep.parameter and sweep.values");
    CommandOutput out;
    const bool nested = !cfg.sweep.outer_parameter.empty();
    const std::vector<double> outer = nested ? cfg.sweep.outer_values : std::vector<double>{kNaN};

    // Validate every grid point before running any of them.
    for (double o : outer) {
        for (double v : cfg.sweep.values) {
            ExperimentConfig point = cfg;
            if (nested) point.model.set(cfg.sweep.outer_parameter, o);
            point.model.set(cfg.sweep.parameter, v);
            require_valid(point.model.build(), "sweep point " + cfg.sweep.parameter + " = " + fmt(v) + ": ");
        }
    }

    for (double o : outer) {
        ExperimentConfig base = cfg;
        if (nested) base.model.set(cfg.sweep.outer_parameter, o);
        CsvWriter csv({cfg.sweep.parameter, "snr_db", "peak", "background", "aborted",
                       "snr_bootstrap_sd", "negative_fraction"});
        for (double v : cfg.sweep.values) {
            ExperimentConfig point = base;
            point.model.set(cfg.sweep.parameter, v);
            const SpectrumResult r = run_spectrum(point.model.build(), spectrum_options(point, ctx));
            csv.row({v, snr_value(r.snr), r.snr.peak, r.snr.background,
                     static_cast<double>(r.aborted_count), r.snr_bootstrap_sd.value_or(kNaN),
                     r.negative_fraction});
            out.summary.push_back((nested ? cfg.sweep.outer_parameter + " = " + fmt(o) + ", " : std::string()) +
                                  cfg.sweep.parameter + " = " + fmt(v) + ": snr_db = " + fmt(snr_value(r.snr)));
        }
        Metadata meta = base_metadata("sweep", cfg);
        std::string name = "sweep.csv";
        if (nested) {
            meta.emplace_back("result.outer_value", fmt(o));
            name = "sweep_" + cfg.sweep.outer_parameter + "_" + file_tag(o) + ".csv";
        }
        emit(out, cfg, name, csv, meta);
    }
    return out;
}

CommandOutput cmd_oracle(const ExperimentConfig& cfg, const CommandContext&) {
    CommandOutput out;
    std::vector<double> values = cfg.sweep.active() ? cfg.sweep.values : std::vector<double>{kNaN};
    std::optional<CsvWriter> csv;
    for (double v : values) {
        ModelParameters params = cfg.model;
        if (cfg.sweep.active()) params.set(cfg.sweep.parameter, v);
        const auto row = oracle_row(params.build());
        if (!csv) {
            std::vector<std::string> header;
            if (cfg.sweep.active()) header.push_back(cfg.sweep.parameter);
            for (const auto& [k, x] : row) header.push_back(k);
            csv.emplace(header);
        }
        std::vector<double> cells;
        if (cfg.sweep.active()) cells.push_back(v);
        for (const auto& [k, x] : row) cells.push_back(x);
        csv->row(cells);
    }
    emit(out, cfg, "oracle.csv", *csv, base_metadata("oracle", cfg));
    out.summary.push_back("rows = " + fmt(values.size()));
    return out;
}

CommandOutput cmd_validate(const ExperimentConfig& cfg, const CommandContext&) {
    CommandOutput out;
    const ValidityReport report = validate(cfg.model.build());
    out.summary.push_back(std::string("mean_exists = ") + fmt(report.mean_exists));
    out.summary.push_back(std::string("variance_exists = ") + fmt(report.variance_exists));
    out.summary.push_back(std::string("nonneg_drive_ok = ") + fmt(report.nonneg_drive_ok));
    for (const auto& m : report.messages) out.summary.push_back(m);
    out.summary.push_back(report.ok() ? "valid" : "invalid");
    out.exit_code = report.ok() ? kExitOk : kExitValidity;
    return out;
}

int run_command(const Invocation& inv, std::ostream& out, std::ostream& err) {
    try {
        ExperimentConfig cfg = inv.config.empty() ? ExperimentConfig{} : load_config(inv.config);
        if (inv.seed) cfg.seed = *inv.seed;
        if (inv.out_dir) cfg.out_dir = *inv.out_dir;
        CommandContext ctx;
        ctx.workers = inv.workers.value_or(default_workers());
        if (ctx.workers == 0) throw ConfigError("--workers must be >= 1");

        const std::string& c = inv.command;
        if (c != "validate" && c != "oracle" && c != "sweep") require_valid(cfg.model.build(), "");

        CommandOutput result;
        if (c == "simulate") result = cmd_simulate(cfg, ctx);
        else if (c == "ensemble") result = cmd_ensemble(cfg, ctx);
        else if (c == "spectrum") result = cmd_spectrum(cfg, ctx);
        else if (c == "hysteresis") result = cmd_hysteresis(cfg, ctx);
        else if (c == "sweep") result = cmd_sweep(cfg, ctx);
        else if (c == "oracle") result = cmd_oracle(cfg, ctx);
        else if (c == "validate") result = cmd_validate(cfg, ctx);
        else throw ConfigError("unknown command '" + c + "'");

        for (const auto& line : result.summary) out << line << "\n";
        for (const auto& f : result.files) out << "wrote " << f.string() << "\n";
        return result.exit_code;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ValidityError& e) {
        err << "validity error: " << e.what() << "\n";
        return kExitValidity;
    } catch (const BlowUpError& e) {
        err << "blow-up: " << e.what() << "\n";
        return kExitBlowUp;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace stochmem

#include "stochmem/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "stochmem/csv.hpp"
#include "stochmem/oracle.hpp"

namespace stochmem {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_factor(std::string_view f) {
    if (f == "pi") return kPi;
    if (f == "-pi") return -kPi;
    // "2pi" shorthand
    if (f.size() > 2 && f.substr(f.size() - 2) == "pi") return parse_factor(f.substr(0, f.size() - 2)) * kPi;
    double v = 0.0;
    const char* begin = f.data();
    const char* end = f.data() + f.size();
    if (!f.empty() && *begin == '+') ++begin;
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end || f.empty())
        throw ConfigError("invalid number '" + std::string(f) + "'");
    return v;
}

std::uint64_t parse_unsigned(std::string_view text) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty())
        throw ConfigError("invalid non-negative integer '" + std::string(text) + "'");
    return v;
}

// Clean values generated by a range so 0.05 * 3 prints as 0.15.
double tidy(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return parse_factor(buf);
}

std::vector<double> parse_values(std::string_view text) {
    const auto colon = split(text, ':');
    if (colon.size() == 3) {
        const double start = parse_number(colon[0]);
        const double stop = parse_number(colon[1]);
        const double step = parse_number(colon[2]);
        if (!(step > 0.0) || stop < start) throw ConfigError("range must be start:stop:step with step > 0");
        const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        std::vector<double> out;
        for (std::size_t i = 0; i < count; ++i) out.push_back(tidy(start + static_cast<double>(i) * step));
        return out;
    }
    std::vector<double> out;
    for (auto part : split(text, ',')) {
        if (part.empty()) continue;
        out.push_back(parse_number(part));
    }
    if (out.empty()) throw ConfigError("empty value list");
    return out;
}

std::string join_values(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += format_number(v[i]);
    }
    return s;
}

struct KeyValue {
    std::string key;
    std::string value;
    std::size_t line;
};

void apply(ExperimentConfig& cfg, const KeyValue& kv) {
    const std::string_view key = kv.key;
    const std::string_view value = kv.value;
    auto& m = cfg.model;
    if (key == "model.family") {
        try {
            m.family = parse_family(value);
        } catch (const ModelError& e) {
            throw ConfigError(e.what());
        }
    } else if (key == "model.q" && value == "resonance" && m.has_field("q")) {
        m.q_at_resonance = true;
    } else if (key.starts_with("model.")) {
        const auto field = key.substr(6);
        static constexpr std::string_view known[] = {"a", "v0", "v1", "omega", "phi", "p", "q", "c", "sigma", "n"};
        if (std::find(std::begin(known), std::end(known), field) == std::end(known))
            throw ConfigError("unknown model field '" + std::string(field) + "'");
        if (!m.has_field(field))
            throw ConfigError("field '" + std::string(field) + "' does not apply to the " +
                              std::string(family_name(m.family)) + " model");
        if (field == "q") m.q_at_resonance = false;
        if (field == "n") {
            m.n = static_cast<int>(parse_unsigned(value));
        } else {
            m.set(field, parse_number(value));
        }
    } else if (key == "run.scheme") {
        try {
            cfg.scheme = parse_scheme(value);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    } else if (key == "run.dt") {
        cfg.dt = parse_number(value);
    } else if (key == "run.stride") {
        cfg.stride = parse_unsigned(value);
    } else if (key == "run.t_end") {
        cfg.t_end = parse_number(value);
    } else if (key == "run.transient_periods") {
        cfg.transient_periods = parse_number(value);
    } else if (key == "run.record_periods") {
        cfg.record_periods = parse_unsigned(value);
    } else if (key == "run.realizations") {
        cfg.realizations = parse_unsigned(value);
    } else if (key == "run.seed") {
        cfg.seed = parse_unsigned(value);
    } else if (key == "run.phase") {
        if (value == "fixed") cfg.phase = PhaseMode::Fixed;
        else if (value == "random") cfg.phase = PhaseMode::Random;
        else throw ConfigError("run.phase must be fixed or random");
    } else if (key == "run.averaging") {
        if (value == "spectra") cfg.averaging = SpectrumAveraging::PowerSpectra;
        else if (value == "trajectories") cfg.averaging = SpectrumAveraging::Trajectories;
        else throw ConfigError("run.averaging must be spectra or trajectories");
    } else if (key == "run.realization") {
        cfg.realization = parse_unsigned(value);
    } else if (key == "run.bootstrap") {
        cfg.bootstrap = parse_unsigned(value);
    } else if (key == "run.deadband") {
        cfg.deadband = parse_number(value);
    } else if (key == "sweep.parameter") {
        cfg.sweep.parameter = std::string(value);
    } else if (key == "sweep.values") {
        cfg.sweep.values = parse_values(value);
    } else if (key == "sweep.outer_parameter") {
        cfg.sweep.outer_parameter = std::string(value);
    } else if (key == "sweep.outer_values") {
        cfg.sweep.outer_values = parse_values(value);
    } else if (key == "out.dir") {
        cfg.out_dir = std::string(value);
    } else {
        throw ConfigError("unknown key '" + std::string(key) + "'");
    }
}

void check(const ExperimentConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw ConfigError("run.dt must be > 0");
    if (cfg.stride == 0) throw ConfigError("run.stride must be >= 1");
    if (cfg.realizations == 0) throw ConfigError("run.realizations must be >= 1");
    if (cfg.t_end && !(*cfg.t_end > 0.0)) throw ConfigError("run.t_end must be > 0");
    if (!(cfg.transient_periods >= 0.0)) throw ConfigError("run.transient_periods must be >= 0");
    auto check_param = [&](const std::string& name, const std::vector<double>& values, const char* what) {
        if (!cfg.model.has_field(name))
            throw ConfigError(std::string(what) + " '" + name + "' is not a field of the " +
                              std::string(family_name(cfg.model.family)) + " model");
        if (values.empty()) throw ConfigError(std::string(what) + " has no values");
    };
    if (cfg.sweep.active()) check_param(cfg.sweep.parameter, cfg.sweep.values, "sweep.parameter");
    if (!cfg.sweep.outer_parameter.empty())
        check_param(cfg.sweep.outer_parameter, cfg.sweep.outer_values, "sweep.outer_parameter");
}

std::vector<KeyValue> tokenize(std::string_view text, bool sidecar) {
    std::vector<KeyValue> out;
    std::size_t line_no = 0;
    for (auto raw : split(text, '\n')) {
        ++line_no;
        std::string_view line = raw;
        if (sidecar) {
            if (!line.starts_with("#")) continue;
            line = trim(line.substr(1));
        } else {
            const auto hash = line.find('#');
            if (hash != std::string_view::npos) line = trim(line.substr(0, hash));
        }
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            if (sidecar) continue;
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (sidecar && !(key.starts_with("model.") || key.starts_with("run.") ||
                         key.starts_with("sweep.") || key.starts_with("out.")))
            continue;
        out.push_back({std::string(key), std::string(value), line_no});
    }
    return out;
}

ExperimentConfig parse_tokens(const std::vector<KeyValue>& kvs) {
    ExperimentConfig cfg;
    // Family first, so field checks do not depend on key order.
    for (const auto& kv : kvs)
        if (kv.key == "model.family") apply(cfg, kv);
    for (const auto& kv : kvs) {
        if (kv.key == "model.family") continue;
        try {
            apply(cfg, kv);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(kv.line) + ": " + e.what());
        }
    }
    check(cfg);
    return cfg;
}

}  // namespace

double parse_number(std::string_view text) {
    text = trim(text);
    if (text.empty()) throw ConfigError("empty number");
    double result = 1.0;
    char op = '*';
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == '*' || text[i] == '/') {
            const double f = parse_factor(trim(text.substr(start, i - start)));
            if (op == '*') result *= f;
            else {
                if (f == 0.0) throw ConfigError("division by zero in '" + std::string(text) + "'");
                result /= f;
            }
            if (i < text.size()) op = text[i];
            start = i + 1;
        }
    }
    return result;
}

std::vector<std::string_view> ModelParameters::fields() const {
    switch (family) {
        case ModelFamily::TimeDelay: return {"a", "v0", "v1", "omega", "phi"};
        case ModelFamily::DoubleWell: return {"v1", "omega", "phi", "sigma"};
        case ModelFamily::CorrelatedLinear: return {"a", "v0", "p", "q", "c", "v1", "omega", "phi"};
        case ModelFamily::MonostablePower: return {"a", "v0", "p", "q", "c", "n", "v1", "omega", "phi"};
    }
    return {};
}

bool ModelParameters::has_field(std::string_view name) const {
    const auto f = fields();
    return std::find(f.begin(), f.end(), name) != f.end();
}

void ModelParameters::set(std::string_view name, double value) {
    if (name == "a") a = value;
    else if (name == "v0") v0 = value;
    else if (name == "v1") v1 = value;
    else if (name == "omega") omega = value;
    else if (name == "phi") phi = value;
    else if (name == "p") p = value;
    else if (name == "q") {
        q = value;
        q_at_resonance = false;
    } else if (name == "c") c = value;
    else if (name == "sigma") sigma = value;
    else if (name == "n") {
        if (value != std::floor(value)) throw ConfigError("n must be an integer");
        n = static_cast<int>(value);
    } else throw ConfigError("unknown model field '" + std::string(name) + "'");
}

double ModelParameters::get(std::string_view name) const {
    if (name == "a") return a;
    if (name == "v0") return v0;
    if (name == "v1") return v1;
    if (name == "omega") return omega;
    if (name == "phi") return phi;
    if (name == "p") return p;
    if (name == "q") return q;
    if (name == "c") return c;
    if (name == "sigma") return sigma;
    if (name == "n") return n;
    throw ConfigError("unknown model field '" + std::string(name) + "'");
}

ModelSpec ModelParameters::build() const {
    const DriveSignal drive(v1, omega, phi);
    auto resolved_q = [&]() {
        if (!q_at_resonance) return q;
        try {
            return resonance_q(CorrelatedLinearModel{a, v0, p, 0.0, c, drive});
        } catch (const OracleDomainError& e) {
            throw ConfigError(std::string("model.q = resonance: ") + e.what());
        }
    };
    switch (family) {
        case ModelFamily::TimeDelay: return ModelSpec(TimeDelayModel{a, v0, drive});
        case ModelFamily::DoubleWell: return ModelSpec(DoubleWellModel{drive, sigma});
        case ModelFamily::CorrelatedLinear:
            return ModelSpec(CorrelatedLinearModel{a, v0, p, resolved_q(), c, drive});
        case ModelFamily::MonostablePower:
            return ModelSpec(MonostablePowerModel{a, v0, p, resolved_q(), c, n, drive});
    }
    throw ConfigError("unknown model family");
}

double ExperimentConfig::resolved_t_end() const {
    if (t_end) return *t_end;
    const double period = 2.0 * kPi / model.omega;
    return (transient_periods + static_cast<double>(record_periods)) * period;
}

IntegrationOptions ExperimentConfig::integration() const {
    IntegrationOptions io;
    io.scheme = scheme;
    io.dt = dt;
    io.stride = stride;
    io.t_end = resolved_t_end();
    return io;
}

EnsembleOptions ExperimentConfig::ensemble(std::size_t workers) const {
    EnsembleOptions eo;
    eo.integration = integration();
    eo.realizations = realizations;
    eo.base_seed = seed;
    eo.phase = phase;
    eo.workers = workers;
    eo.transient_periods = transient_periods;
    return eo;
}

std::string ExperimentConfig::to_text() const {
    std::ostringstream os;
    os << "model.family = " << family_name(model.family) << "\n";
    for (auto f : model.fields()) {
        os << "model." << f << " = ";
        if (f == "q" && model.q_at_resonance) os << "resonance";
        else if (f == "n") os << model.n;
        else os << format_number(model.get(f));
        os << "\n";
    }
    os << "run.scheme = " << scheme_name(scheme) << "\n";
    os << "run.dt = " << format_number(dt) << "\n";
    os << "run.stride = " << stride << "\n";
    if (t_end) os << "run.t_end = " << format_number(*t_end) << "\n";
    os << "run.transient_periods = " << format_number(transient_periods) << "\n";
    os << "run.record_periods = " << record_periods << "\n";
    os << "run.realizations = " << realizations << "\n";
    os << "run.seed = " << seed << "\n";
    if (phase) os << "run.phase = " << (*phase == PhaseMode::Fixed ? "fixed" : "random") << "\n";
    if (averaging)
        os << "run.averaging = " << (*averaging == SpectrumAveraging::Trajectories ? "trajectories" : "spectra")
           << "\n";
    os << "run.realization = " << realization << "\n";
    os << "run.bootstrap = " << bootstrap << "\n";
    os << "run.deadband = " << format_number(deadband) << "\n";
    if (sweep.active()) {
        os << "sweep.parameter = " << sweep.parameter << "\n";
        os << "sweep.values = " << join_values(sweep.values) << "\n";
        if (!sweep.outer_parameter.empty()) {
            os << "sweep.outer_parameter = " << sweep.outer_parameter << "\n";
            os << "sweep.outer_values = " << join_values(sweep.outer_values) << "\n";
        }
    }
    os << "out.dir = " << out_dir << "\n";
    return os.str();
}

ExperimentConfig parse_config(std::string_view text) { return parse_tokens(tokenize(text, false)); }

ExperimentConfig parse_sidecar(std::string_view text) { return parse_tokens(tokenize(text, true)); }

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read config " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return path.extension() == ".meta" ? parse_sidecar(ss.str()) : parse_config(ss.str());
}

}  // namespace stochmem

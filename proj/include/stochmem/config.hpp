#pragma once

// Experiment configuration: flat `key = value` lines under the model., run.,
// sweep. and out. namespaces. `#` starts a comment. Numeric values accept
// products and quotients of numbers and `pi`, e.g. `2*pi`, `1/256`.
//
// Metadata sidecars (*.meta) written next to every CSV carry the same keys
// behind a `# ` prefix and load back through load_config().

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stochmem/core.hpp"
#include "stochmem/ensemble.hpp"
#include "stochmem/integrate.hpp"

namespace stochmem {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses a numeric expression: factors (numbers or `pi`) joined by * and /.
double parse_number(std::string_view text);

struct ModelParameters {
    ModelFamily family = ModelFamily::DoubleWell;
    double a = 1.0;
    double v0 = 1.0;
    double v1 = 0.0;
    double omega = 2.0 * kPi;
    double phi = 0.0;
    double p = 0.0;
    double q = 0.0;
    bool q_at_resonance = false;  // q = V0 p / (a c)
    double c = 0.0;
    double sigma = 0.0;
    int n = 2;

    /// Field names accepted by the family, e.g. {"v1", "omega", "phi", "sigma"}.
    [[nodiscard]] std::vector<std::string_view> fields() const;
    [[nodiscard]] bool has_field(std::string_view name) const;
    void set(std::string_view name, double value);
    [[nodiscard]] double get(std::string_view name) const;

    [[nodiscard]] ModelSpec build() const;
};

struct SweepSpec {
    std::string parameter;
    std::vector<double> values;
    std::string outer_parameter;  // optional: one CSV per outer value
    std::vector<double> outer_values;

    [[nodiscard]] bool active() const { return !parameter.empty(); }
};

struct ExperimentConfig {
    ModelParameters model;
    Scheme scheme = Scheme::HeunStratonovich;
    double dt = kDefaultDt;
    std::size_t stride = 1;
    std::optional<double> t_end;  // default: (transient + record) periods
    double transient_periods = 20.0;
    std::size_t record_periods = 64;
    std::size_t realizations = 1;
    std::uint64_t seed = 1;
    std::optional<PhaseMode> phase;
    std::optional<SpectrumAveraging> averaging;
    std::size_t realization = 0;  // index used by simulate / hysteresis
    std::size_t bootstrap = 0;
    double deadband = 0.1;
    SweepSpec sweep;
    std::string out_dir = ".";

    [[nodiscard]] double resolved_t_end() const;
    [[nodiscard]] IntegrationOptions integration() const;
    [[nodiscard]] EnsembleOptions ensemble(std::size_t workers) const;

    /// Canonical `key = value` text that parses back to an equal config.
    [[nodiscard]] std::string to_text() const;
};

ExperimentConfig parse_config(std::string_view text);

/// Reads a config file; files ending in `.meta` are read as sidecars.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Sidecar form: every line prefixed with "# ".
ExperimentConfig parse_sidecar(std::string_view text);

}  // namespace stochmem

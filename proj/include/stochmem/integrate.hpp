#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "stochmem/core.hpp"
#include "stochmem/noise.hpp"

namespace stochmem {

/// Time-stepping conventions for multiplicative noise.
///
/// EulerMaruyama reads the written equation as Ito. The other two integrate
/// the Stratonovich reading, under which the closed-form moments of the
/// correlated linear model hold.
enum class Scheme { EulerMaruyama, HeunStratonovich, EulerMaruyamaDriftCorrected };

std::string_view scheme_name(Scheme scheme);
Scheme parse_scheme(std::string_view name);
bool is_stratonovich(Scheme scheme);

inline constexpr double kDefaultDt = 1.0 / 256.0;

class ValidityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct IntegrationOptions {
    Scheme scheme = Scheme::HeunStratonovich;
    double dt = kDefaultDt;
    double t_end = 1.0;
    std::size_t stride = 1;
    std::optional<double> initial_state;  // model default when empty
    bool require_valid = true;             // run oracle validation first
};

/// Number of steps covering [0, t_end]: ceil(t_end / dt), tolerant to round-off.
std::size_t step_count(double t_end, double dt);

/// Throws std::invalid_argument unless dt * stride divides the drive period.
std::size_t samples_per_period(double period, double dt, std::size_t stride);

struct SeedRecord {
    std::uint64_t base_seed = 0;
    std::uint64_t xi_stream = 0;
    std::uint64_t eta_stream = 0;
};

/// Uniformly sampled memductance record.
struct Trajectory {
    double t0 = 0.0;
    double dt = kDefaultDt;
    std::size_t stride = 1;
    std::vector<double> samples;
    ModelSpec model{TimeDelayModel{}};
    SeedRecord seed;
    std::optional<double> blow_up_time;  // set when the run was aborted

    [[nodiscard]] double sample_dt() const { return dt * static_cast<double>(stride); }
    [[nodiscard]] double time(std::size_t i) const {
        return t0 + static_cast<double>(i) * static_cast<double>(stride) * dt;
    }
    [[nodiscard]] bool aborted() const { return blow_up_time.has_value(); }

    /// Samples [first, end) as a new trajectory starting at time(first).
    [[nodiscard]] Trajectory tail(std::size_t first) const;
};

/// State increment of one time step. Templated on anything exposing
/// drift(G, t), diffusion(G) and diffusion_xi_slope(G); ModelAdapter wraps
/// the free functions.
template <typename Dynamics>
double increment(Scheme scheme, const Dynamics& dyn, double g, double t, double dw_xi,
                 double dw_eta, double dt) {
    const double f = dyn.drift(g, t);
    const Diffusion b = dyn.diffusion(g);
    switch (scheme) {
        case Scheme::EulerMaruyama: return f * dt + b.xi * dw_xi + b.eta * dw_eta;
        case Scheme::EulerMaruyamaDriftCorrected: {
            const double correction = 0.5 * b.xi * dyn.diffusion_xi_slope(g);
            return (f + correction) * dt + b.xi * dw_xi + b.eta * dw_eta;
        }
        case Scheme::HeunStratonovich: {
            const double predictor = g + (f * dt + b.xi * dw_xi + b.eta * dw_eta);
            const double f2 = dyn.drift(predictor, t + dt);
            const Diffusion b2 = dyn.diffusion(predictor);
            return 0.5 * (f + f2) * dt + 0.5 * (b.xi + b2.xi) * dw_xi + 0.5 * (b.eta + b2.eta) * dw_eta;
        }
    }
    return 0.0;
}

template <typename Dynamics>
double step(Scheme scheme, const Dynamics& dyn, double g, double t, double dw_xi, double dw_eta,
            double dt) {
    return g + increment(scheme, dyn, g, t, dw_xi, dw_eta, dt);
}

template <typename Model>
struct ModelAdapter {
    const Model& m;
    double drift(double g, double t) const { return stochmem::drift(m, g, t); }
    Diffusion diffusion(double g) const { return stochmem::diffusion(m, g); }
    double diffusion_xi_slope(double g) const { return stochmem::diffusion_xi_slope(m, g); }
};

double step(Scheme scheme, const ModelSpec& model, double g, double t, double dw_xi,
            double dw_eta, double dt);

/// Drives a dynamics object over step_count(t_end, dt) steps, reporting
/// every stride-th state to observer(sample_index, t, G). Increments are
/// accumulated with Kahan compensation, so increments below half an ulp of G
/// still move the state and exact fixed points are reached. Returns the blow-up
/// time when a non-finite state appears (the run stops there). Exactly
/// step_count increments are consumed from each stream, even after a blow-up
/// and even for channels the model never reads.
template <typename Dynamics, typename Observer>
std::optional<double> integrate_dynamics(const Dynamics& dyn, Scheme scheme, double g0,
                                         std::size_t steps, double dt, std::size_t stride,
                                         NoiseStream& xi, NoiseStream& eta, bool draw_xi,
                                         bool draw_eta, Observer&& observer) {
    const double sqrt_dt = std::sqrt(dt);
    const std::uint64_t xi_end = xi.position() + steps;
    const std::uint64_t eta_end = eta.position() + steps;
    double g = g0;
    double carry = 0.0;
    std::optional<double> blow_up;
    observer(std::size_t{0}, 0.0, g);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const double dw_xi = draw_xi ? xi.next_increment(sqrt_dt) : (xi.skip(1), 0.0);
        const double dw_eta = draw_eta ? eta.next_increment(sqrt_dt) : (eta.skip(1), 0.0);
        const double y = increment(scheme, dyn, g, t, dw_xi, dw_eta, dt) - carry;
        const double next = g + y;
        carry = (next - g) - y;
        g = next;
        if (!std::isfinite(g) || !std::isfinite(carry)) {
            blow_up = static_cast<double>(k + 1) * dt;
            break;
        }
        if ((k + 1) % stride == 0) {
            observer((k + 1) / stride, static_cast<double>(k + 1) * dt, g);
        }
    }
    xi.skip(xi_end - xi.position());
    eta.skip(eta_end - eta.position());
    return blow_up;
}

/// Full trajectory from the configured initial condition.
Trajectory integrate(const ModelSpec& model, const IntegrationOptions& options, NoiseStream& xi,
                     NoiseStream& eta);

/// Same as integrate() but streams samples to a callback instead of storing them.
template <typename Observer>
std::optional<double> integrate_observed(const ModelSpec& model, const IntegrationOptions& options,
                                         NoiseStream& xi, NoiseStream& eta, Observer&& observer);

void check_integration_options(const ModelSpec& model, const IntegrationOptions& options);

template <typename Observer>
std::optional<double> integrate_observed(const ModelSpec& model, const IntegrationOptions& options,
                                         NoiseStream& xi, NoiseStream& eta, Observer&& observer) {
    check_integration_options(model, options);
    const std::size_t steps = step_count(options.t_end, options.dt);
    const double g0 = options.initial_state.value_or(initial_state(model));
    const bool draw_xi = uses_xi(model);
    const bool draw_eta = uses_eta(model);
    return std::visit(
        [&](const auto& m) {
            ModelAdapter<std::decay_t<decltype(m)>> dyn{m};
            return integrate_dynamics(dyn, options.scheme, g0, steps, options.dt, options.stride,
                                      xi, eta, draw_xi, draw_eta, observer);
        },
        model.variant());
}

}  // namespace stochmem

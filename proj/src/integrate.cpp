#include "stochmem/integrate.hpp"

#include <cmath>
#include <sstream>

#include "stochmem/oracle.hpp"

namespace stochmem {

std::string_view scheme_name(Scheme scheme) {
    switch (scheme) {
        case Scheme::EulerMaruyama: return "euler_maruyama";
        case Scheme::HeunStratonovich: return "heun";
        case Scheme::EulerMaruyamaDriftCorrected: return "euler_maruyama_corrected";
    }
    return "unknown";
}

Scheme parse_scheme(std::string_view name) {
    if (name == "euler_maruyama" || name == "em" || name == "ito") return Scheme::EulerMaruyama;
    if (name == "heun" || name == "heun_stratonovich" || name == "stratonovich")
        return Scheme::HeunStratonovich;
    if (name == "euler_maruyama_corrected" || name == "em_corrected")
        return Scheme::EulerMaruyamaDriftCorrected;
    throw std::invalid_argument("unknown integrator scheme '" + std::string(name) + "'");
}

bool is_stratonovich(Scheme scheme) { return scheme != Scheme::EulerMaruyama; }

std::size_t step_count(double t_end, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be > 0");
    const double ratio = t_end / dt;
    const double nearest = std::round(ratio);
    if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, nearest))
        return static_cast<std::size_t>(nearest);
    return static_cast<std::size_t>(std::ceil(ratio));
}

std::size_t samples_per_period(double period, double dt, std::size_t stride) {
    if (stride == 0) throw std::invalid_argument("stride must be >= 1");
    const double sample = dt * static_cast<double>(stride);
    const double ratio = period / sample;
    const double nearest = std::round(ratio);
    if (nearest < 1.0 || std::abs(ratio - nearest) > 1e-9 * nearest) {
        std::ostringstream os;
        os << "dt*stride = " << sample << " does not divide the drive period " << period;
        throw std::invalid_argument(os.str());
    }
    return static_cast<std::size_t>(nearest);
}

Trajectory Trajectory::tail(std::size_t first) const {
    Trajectory out = *this;
    out.samples.clear();
    if (first < samples.size()) out.samples.assign(samples.begin() + first, samples.end());
    out.t0 = time(first);
    return out;
}

double step(Scheme scheme, const ModelSpec& model, double g, double t, double dw_xi,
            double dw_eta, double dt) {
    return std::visit(
        [&](const auto& m) {
            ModelAdapter<std::decay_t<decltype(m)>> dyn{m};
            return step(scheme, dyn, g, t, dw_xi, dw_eta, dt);
        },
        model.variant());
}

void check_integration_options(const ModelSpec& model, const IntegrationOptions& options) {
    if (!(options.dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    if (!(options.t_end > 0.0)) throw std::invalid_argument("t_end must be > 0");
    samples_per_period(model.drive().period(), options.dt, options.stride);
    if (options.require_valid) {
        const ValidityReport report = validate(model);
        if (!report.ok()) throw ValidityError("model rejected before integration: " + report.summary());
    }
}

Trajectory integrate(const ModelSpec& model, const IntegrationOptions& options, NoiseStream& xi,
                     NoiseStream& eta) {
    Trajectory traj;
    traj.model = model;
    traj.dt = options.dt;
    traj.stride = options.stride;
    traj.seed = {xi.base_seed(), xi.stream_index(), eta.stream_index()};
    const std::size_t steps = step_count(options.t_end, options.dt);
    traj.samples.reserve(steps / options.stride + 1);
    traj.blow_up_time = integrate_observed(
        model, options, xi, eta, [&](std::size_t, double, double g) { traj.samples.push_back(g); });
    return traj;
}

}  // namespace stochmem

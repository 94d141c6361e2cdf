#include "stochmem/oracle.hpp"

#include <cmath>
#include <sstream>

namespace stochmem {

namespace {

using Extended = long double;

// Refuse to divide by quantities within the guard band of zero.
constexpr Extended kGuardBand = 1e-9L;

void require_margin(Extended value, Extended scale, const char* what) {
    if (!(value > kGuardBand * scale)) {
        std::ostringstream os;
        os << what << " (value " << static_cast<double>(value) << ")";
        throw OracleDomainError(os.str());
    }
}

bool nonneg_bound_holds(double a, double v0, const DriveSignal& drive) {
    const double ratio = drive.omega() / a;
    return drive.amplitude() < v0 * std::sqrt(1.0 + ratio * ratio);
}

}  // namespace

std::string ValidityReport::summary() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < messages.size(); ++i) {
        if (i) os << "; ";
        os << messages[i];
    }
    if (messages.empty()) os << "ok";
    return os.str();
}

ValidityReport validate(const ModelSpec& model) {
    ValidityReport r;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, TimeDelayModel>) {
                r.nonneg_drive_ok = nonneg_bound_holds(m.a, m.v0, m.drive);
                if (!r.nonneg_drive_ok)
                    r.messages.push_back("V1 >= V0 sqrt(1 + (omega/a)^2): memductance turns negative");
            } else if constexpr (std::is_same_v<T, DoubleWellModel>) {
                (void)m;
            } else {
                const double mean_margin = m.a - 0.5 * m.p * m.p;
                const double var_margin = m.a - m.p * m.p;
                r.mean_exists = mean_margin > 0.0;
                r.variance_exists = var_margin > 0.0;
                if (!r.mean_exists) r.messages.push_back("a - p^2/2 <= 0: no stationary mean");
                if (!r.variance_exists) r.messages.push_back("a - p^2 <= 0: no stationary variance");
                if constexpr (std::is_same_v<T, CorrelatedLinearModel>) {
                    if (m.a > 0.0) {
                        r.nonneg_drive_ok = nonneg_bound_holds(m.a, m.v0, m.drive);
                        if (!r.nonneg_drive_ok)
                            r.messages.push_back(
                                "V1 >= V0 sqrt(1 + (omega/a)^2): noise-free memductance turns negative");
                    } else {
                        r.nonneg_drive_ok = false;
                        r.messages.push_back("a <= 0: no relaxation");
                    }
                }
            }
        },
        model.variant());
    return r;
}

TimeDelayResponse timedelay_response(const TimeDelayModel& m) {
    validate_parameters(m);
    const double w = m.drive.omega();
    return {m.v0 / m.a, m.drive.amplitude() / std::sqrt(m.a * m.a + w * w), std::atan(w / m.a) / w};
}

double timedelay_solution(const TimeDelayModel& m, double t) {
    const auto r = timedelay_response(m);
    // cos(omega (t - T) + phi) with the drive's own phase.
    const double w = m.drive.omega();
    return r.offset + r.amplitude * std::cos(w * (t - r.delay) + m.drive.phi());
}

double g_infinity(const CorrelatedLinearModel& m) {
    const Extended a = m.a, p = m.p, q = m.q, c = m.c, v0 = m.v0;
    const Extended denom = a - p * p / 2;
    require_margin(denom, std::abs(a) + p * p, "mean does not exist: a - p^2/2 <= 0");
    return static_cast<double>((v0 - c * p * q / 2) / denom);
}

double asymptotic_variance(const CorrelatedLinearModel& m) {
    const Extended a = m.a, p = m.p, q = m.q, c = m.c, v0 = m.v0;
    const Extended p2 = p * p;
    const Extended var_margin = a - p2;
    require_margin(var_margin, std::abs(a) + p2, "variance does not exist: a - p^2 <= 0");
    const Extended s = 1 - c * c;
    const Extended numerator = 4 * v0 * v0 * p2 - 8 * a * v0 * c * p * q +
                               (4 * a * a - 4 * a * s * p2 + s * p2 * p2) * q * q;
    const Extended w = p2 - 2 * a;
    const Extended denominator = 2 * var_margin * w * w;
    const Extended d = numerator / denominator;
    // The numerator is a sum of squares in disguise; clip cancellation residue.
    return static_cast<double>(d < 0 ? Extended{0} : d);
}

CorrelationTerms correlation_terms(const CorrelatedLinearModel& m) {
    const Extended a = m.a, p = m.p;
    const Extended p2 = p * p;
    require_margin(a - p2, std::abs(a) + p2, "variance does not exist: a - p^2 <= 0");
    const Extended v1 = m.drive.amplitude(), w = m.drive.omega();
    const Extended lambda = a - p2 / 2;
    const Extended spectral = lambda * lambda + w * w;
    const Extended osc = v1 * v1 / (2 * spectral);
    const Extended decay = v1 * v1 * p2 / (4 * (a - p2) * spectral) +
                           static_cast<Extended>(asymptotic_variance(m));
    return {static_cast<double>(osc), static_cast<double>(decay), static_cast<double>(lambda)};
}

double correlation_fn(const CorrelatedLinearModel& m, double tau) {
    if (!(tau >= 0.0)) throw OracleDomainError("correlation lag must be >= 0");
    const auto t = correlation_terms(m);
    return t.oscillatory_amplitude * std::cos(m.drive.omega() * tau) +
           t.decay_amplitude * std::exp(-t.decay_rate * tau);
}

namespace {

double resonance_q_impl(double a, double v0, double p, double c) {
    if (c == 0.0)
        throw OracleDomainError("no resonance for uncorrelated noises (c = 0)");
    if (a == 0.0) throw OracleDomainError("resonance requires a != 0");
    return v0 * p / (a * c);
}

}  // namespace

double resonance_q(const CorrelatedLinearModel& m) { return resonance_q_impl(m.a, m.v0, m.p, m.c); }
double resonance_q(const MonostablePowerModel& m) { return resonance_q_impl(m.a, m.v0, m.p, m.c); }

double variance_minimizing_q(const CorrelatedLinearModel& m) {
    const Extended a = m.a, v0 = m.v0, p = m.p, c = m.c;
    const Extended p2 = p * p;
    require_margin(a - p2, std::abs(a) + p2, "variance does not exist: a - p^2 <= 0");
    const Extended curvature = 4 * a * a - (1 - c * c) * p2 * (4 * a - p2);
    return static_cast<double>(4 * a * c * v0 * p / curvature);
}

}  // namespace stochmem

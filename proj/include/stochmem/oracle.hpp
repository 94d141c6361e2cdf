#pragma once

// Closed-form reference values for the time-delay and correlated-noise
// linear models. Moments hold under the Stratonovich reading of the noise.

#include <stdexcept>
#include <string>
#include <vector>

#include "stochmem/core.hpp"

namespace stochmem {

class OracleDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct ValidityReport {
    bool mean_exists = true;      // a - p^2/2 > 0
    bool variance_exists = true;  // a - p^2 > 0
    bool nonneg_drive_ok = true;  // V1 < V0 sqrt(1 + (omega/a)^2)
    std::vector<std::string> messages;

    [[nodiscard]] bool ok() const { return mean_exists && variance_exists && nonneg_drive_ok; }
    [[nodiscard]] std::string summary() const;
};

ValidityReport validate(const ModelSpec& model);

/// Asymptotic time-delay response G(t) = offset + amplitude cos(omega (t - delay)).
struct TimeDelayResponse {
    double offset;     // V0 / a
    double amplitude;  // V1 / sqrt(a^2 + omega^2)
    double delay;      // arctan(omega / a) / omega
};

TimeDelayResponse timedelay_response(const TimeDelayModel& m);
double timedelay_solution(const TimeDelayModel& m, double t);

/// Long-time mean with V1 = 0: (V0 - c p q / 2) / (a - p^2 / 2).
double g_infinity(const CorrelatedLinearModel& m);

/// Long-time variance with V1 = 0.
double asymptotic_variance(const CorrelatedLinearModel& m);

/// Phase-averaged stationary autocovariance
///   C(tau) = A cos(omega tau) + B exp(-lambda tau)
struct CorrelationTerms {
    double oscillatory_amplitude;  // A = V1^2 / (2 [(a - p^2/2)^2 + omega^2])
    double decay_amplitude;        // B = V1^2 p^2 / (4 (a - p^2) [...]) + D
    double decay_rate;             // lambda = a - p^2 / 2
};

CorrelationTerms correlation_terms(const CorrelatedLinearModel& m);
double correlation_fn(const CorrelatedLinearModel& m, double tau);

/// Additive-noise intensity q* = V0 p / (a c) at which the variance is minimal.
double resonance_q(const CorrelatedLinearModel& m);
double resonance_q(const MonostablePowerModel& m);

/// Vertex of D(q): 4 a c V0 p / (4a^2 - (1-c^2) p^2 (4a - p^2)).
/// Coincides with resonance_q only for c = +-1.
double variance_minimizing_q(const CorrelatedLinearModel& m);

}  // namespace stochmem

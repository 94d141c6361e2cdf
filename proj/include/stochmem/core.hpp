#pragma once

// Model families for a scalar memristive state G (the memductance).
//
// Every model is an SDE of the form
//
//   dG = f(G, t) dt + g_xi(G) dW_xi + g_eta(G) dW_eta
//
// where f carries the deterministic relaxation plus the periodic drive and
// (W_xi, W_eta) are independent Wiener processes. The transmitted current is
// always I = G * V(t).

#include <array>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace stochmem {

inline constexpr double kPi = std::numbers::pi;
inline constexpr int kMaxWellOrder = 6;

class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// cos(pi * x) with exact zeros at half-integers and exact +-1 at integers.
double cos_half_turns(double x);

/// V(t) = V1 cos(omega t + phi).
///
/// The phase is stored in half-turns (phi / pi) so that drives sampled on a
/// grid commensurate with the period hit V = 0 exactly at the pinch points.
class DriveSignal {
public:
    DriveSignal() = default;
    DriveSignal(double amplitude, double omega, double phi = 0.0);

    /// phi = 2 pi * numerator / denominator, represented exactly.
    static DriveSignal with_phase_fraction(double amplitude, double omega,
                                           long numerator, long denominator);

    [[nodiscard]] double amplitude() const { return amplitude_; }
    [[nodiscard]] double omega() const { return omega_; }
    [[nodiscard]] double phi() const { return phi_; }
    [[nodiscard]] double period() const { return 2.0 * kPi / omega_; }

    [[nodiscard]] double voltage(double t) const;
    [[nodiscard]] double unit_voltage(double t) const;  // cos(omega t + phi)

    [[nodiscard]] DriveSignal with_amplitude(double amplitude) const;

private:
    double amplitude_ = 0.0;
    double omega_ = 2.0 * kPi;
    double phi_ = 0.0;
    double omega_half_turns_ = 2.0;  // omega / pi
    double phi_half_turns_ = 0.0;    // phi / pi
};

/// dG/dt = -a G + V0 + V1 cos(omega t + phi)
struct TimeDelayModel {
    double a = 1.0;
    double v0 = 1.0;
    DriveSignal drive;
};

/// dG/dt = -V'(G) + V1 cos(omega t + phi) + sigma xi(t),
/// V(G) = (G-2)^4/4 - (G-2)^2/2 - (G-2)/8
struct DoubleWellModel {
    DriveSignal drive;
    double sigma = 0.0;
};

/// dG/dt = -(a + p xi) G + V0 + q xi_a + V1 cos(omega t + phi),
/// <xi xi_a> = c delta.
struct CorrelatedLinearModel {
    double a = 1.0;
    double v0 = 1.0;
    double p = 0.0;
    double q = 0.0;
    double c = 0.0;
    DriveSignal drive;
};

/// Same noise structure as CorrelatedLinearModel with the relaxation term
/// replaced by -(a + p xi) G^(2n-1), i.e. relaxation in a G^(2n)/(2n) well.
struct MonostablePowerModel {
    double a = 1.0;
    double v0 = 1.0;
    double p = 0.0;
    double q = 0.0;
    double c = 0.0;
    int n = 2;
    DriveSignal drive;
};

enum class ModelFamily { TimeDelay, DoubleWell, CorrelatedLinear, MonostablePower };

std::string_view family_name(ModelFamily family);
ModelFamily parse_family(std::string_view name);

void validate_parameters(const TimeDelayModel& m);
void validate_parameters(const DoubleWellModel& m);
void validate_parameters(const CorrelatedLinearModel& m);
void validate_parameters(const MonostablePowerModel& m);

/// Tagged union over the four families. Construction validates the
/// parameter invariants; instances are immutable afterwards.
class ModelSpec {
public:
    using Variant = std::variant<TimeDelayModel, DoubleWellModel, CorrelatedLinearModel,
                                 MonostablePowerModel>;

    ModelSpec(TimeDelayModel m);
    ModelSpec(DoubleWellModel m);
    ModelSpec(CorrelatedLinearModel m);
    ModelSpec(MonostablePowerModel m);

    [[nodiscard]] ModelFamily family() const;
    [[nodiscard]] const Variant& variant() const { return model_; }
    [[nodiscard]] const DriveSignal& drive() const;
    [[nodiscard]] ModelSpec with_drive(const DriveSignal& drive) const;

    template <typename T>
    [[nodiscard]] const T* get_if() const {
        return std::get_if<T>(&model_);
    }

private:
    Variant model_;
};

struct Diffusion {
    double xi = 0.0;   // coefficient of dW_xi
    double eta = 0.0;  // coefficient of dW_eta
};

// Deterministic part of dG/dt, drive included, noise excluded.
double drift(const TimeDelayModel& m, double g, double t);
double drift(const DoubleWellModel& m, double g, double t);
double drift(const CorrelatedLinearModel& m, double g, double t);
double drift(const MonostablePowerModel& m, double g, double t);
double drift(const ModelSpec& model, double g, double t);

// Noise coefficients after splitting the additive noise into c xi + sqrt(1-c^2) eta.
Diffusion diffusion(const TimeDelayModel& m, double g);
Diffusion diffusion(const DoubleWellModel& m, double g);
Diffusion diffusion(const CorrelatedLinearModel& m, double g);
Diffusion diffusion(const MonostablePowerModel& m, double g);
Diffusion diffusion(const ModelSpec& model, double g);

// d g_xi / dG; g_eta never depends on G.
double diffusion_xi_slope(const TimeDelayModel& m, double g);
double diffusion_xi_slope(const DoubleWellModel& m, double g);
double diffusion_xi_slope(const CorrelatedLinearModel& m, double g);
double diffusion_xi_slope(const MonostablePowerModel& m, double g);
double diffusion_xi_slope(const ModelSpec& model, double g);

/// True when the model can never draw on the given noise channel.
bool uses_xi(const ModelSpec& model);
bool uses_eta(const ModelSpec& model);

/// Default initial memductance: left minimum for the double well, 0 otherwise.
double initial_state(const ModelSpec& model);

/// I = G * V1 cos(omega t + phi). Returns +0.0 whenever V(t) == 0.
double current(double g, double t, const DriveSignal& drive);

/// Correlated-linear model rewritten around its deterministic equilibrium
/// V0/a, valid when V0 p = a c q:
///   dG/dt = -(a + p xi)(G - V0/a) + q sqrt(1-c^2) eta + V1 cos(omega t + phi)
class ResonantShiftedForm {
public:
    /// Throws ModelError unless c != 0 and |V0 p - a c q| is at round-off level.
    explicit ResonantShiftedForm(const CorrelatedLinearModel& m);

    [[nodiscard]] double drift(double g, double t) const;
    [[nodiscard]] Diffusion diffusion(double g) const;
    [[nodiscard]] double diffusion_xi_slope(double g) const;
    [[nodiscard]] const CorrelatedLinearModel& model() const { return model_; }

private:
    CorrelatedLinearModel model_;
    double equilibrium_;
    double eta_coefficient_;
};

namespace double_well {

/// V(G) = (G-2)^4/4 - (G-2)^2/2 - (G-2)/8
double potential(double g);
double potential_slope(double g);      // dV/dG
double potential_curvature(double g);  // d2V/dG2

struct StationaryPoints {
    double left_min;
    double barrier;
    double right_min;
};

/// Roots of dV/dG in ascending order, each with |dV/dG| < 1e-12.
const StationaryPoints& stationary_points();

/// Barrier height seen from each minimum: V(barrier) - V(minimum).
struct BarrierHeights {
    double left;
    double right;
};
BarrierHeights barrier_heights();

}  // namespace double_well

/// W(y) = sum_{l=0}^{2(n-1)} C(2n-1, l+1) y^l (V0/a)^(1 - (l+1)/(2n-1)).
/// Satisfies y W(y) = (y + r)^(2n-1) - r^(2n-1), r = (V0/a)^(1/(2n-1)).
double w_polynomial(int n, double v0, double a, double y);

}  // namespace stochmem

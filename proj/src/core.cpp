#include "stochmem/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stochmem {

double cos_half_turns(double x) {
    double r = std::fmod(x, 2.0);
    if (r < 0.0) r += 2.0;
    if (r == 0.5 || r == 1.5) return 0.0;
    if (r == 0.0) return 1.0;
    if (r == 1.0) return -1.0;
    return std::cos(kPi * r);
}

DriveSignal::DriveSignal(double amplitude, double omega, double phi)
    : amplitude_(amplitude), omega_(omega), phi_(phi) {
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
        throw ModelError("drive amplitude V1 must be finite and >= 0");
    if (!(omega > 0.0) || !std::isfinite(omega)) throw ModelError("drive omega must be > 0");
    if (!(phi >= 0.0 && phi < 2.0 * kPi)) throw ModelError("drive phase must lie in [0, 2pi)");
    omega_half_turns_ = omega / kPi;
    phi_half_turns_ = phi / kPi;
}

DriveSignal DriveSignal::with_phase_fraction(double amplitude, double omega, long numerator,
                                             long denominator) {
    if (denominator <= 0 || numerator < 0 || numerator >= denominator)
        throw ModelError("phase fraction must satisfy 0 <= num < den");
    const double fraction = static_cast<double>(numerator) / static_cast<double>(denominator);
    DriveSignal d(amplitude, omega, 0.0);
    d.phi_ = 2.0 * kPi * fraction;
    if (d.phi_ >= 2.0 * kPi) d.phi_ = std::nextafter(2.0 * kPi, 0.0);
    d.phi_half_turns_ = 2.0 * fraction;
    return d;
}

double DriveSignal::unit_voltage(double t) const {
    return cos_half_turns(omega_half_turns_ * t + phi_half_turns_);
}

double DriveSignal::voltage(double t) const { return amplitude_ * unit_voltage(t); }

DriveSignal DriveSignal::with_amplitude(double amplitude) const {
    DriveSignal d = *this;
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
        throw ModelError("drive amplitude V1 must be finite and >= 0");
    d.amplitude_ = amplitude;
    return d;
}

std::string_view family_name(ModelFamily family) {
    switch (family) {
        case ModelFamily::TimeDelay: return "time_delay";
        case ModelFamily::DoubleWell: return "double_well";
        case ModelFamily::CorrelatedLinear: return "correlated_linear";
        case ModelFamily::MonostablePower: return "monostable_power";
    }
    return "unknown";
}

ModelFamily parse_family(std::string_view name) {
    if (name == "time_delay") return ModelFamily::TimeDelay;
    if (name == "double_well") return ModelFamily::DoubleWell;
    if (name == "correlated_linear") return ModelFamily::CorrelatedLinear;
    if (name == "monostable_power") return ModelFamily::MonostablePower;
    throw ModelError("unknown model family '" + std::string(name) + "'");
}

namespace {

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) throw ModelError(std::string(name) + " must be finite");
}

void validate_noise_block(double a, double v0, double p, double q, double c) {
    require_finite(a, "a");
    require_finite(v0, "V0");
    if (!(p >= 0.0) || !std::isfinite(p)) throw ModelError("p must be finite and >= 0");
    if (!(q >= 0.0) || !std::isfinite(q)) throw ModelError("q must be finite and >= 0");
    if (!(c >= -1.0 && c <= 1.0)) throw ModelError("c must lie in [-1, 1]");
}

}  // namespace

void validate_parameters(const TimeDelayModel& m) {
    require_finite(m.v0, "V0");
    if (!(m.a > 0.0) || !std::isfinite(m.a)) throw ModelError("time-delay model requires a > 0");
}

void validate_parameters(const DoubleWellModel& m) {
    if (!(m.sigma >= 0.0) || !std::isfinite(m.sigma))
        throw ModelError("sigma must be finite and >= 0");
}

void validate_parameters(const CorrelatedLinearModel& m) {
    validate_noise_block(m.a, m.v0, m.p, m.q, m.c);
}

void validate_parameters(const MonostablePowerModel& m) {
    validate_noise_block(m.a, m.v0, m.p, m.q, m.c);
    if (m.n < 2) throw ModelError("well order n must be >= 2 (n = 1 is the correlated linear model)");
    if (m.n > kMaxWellOrder) {
        std::ostringstream os;
        os << "well order n must be <= " << kMaxWellOrder;
        throw ModelError(os.str());
    }
}

ModelSpec::ModelSpec(TimeDelayModel m) : model_(m) { validate_parameters(m); }
ModelSpec::ModelSpec(DoubleWellModel m) : model_(m) { validate_parameters(m); }
ModelSpec::ModelSpec(CorrelatedLinearModel m) : model_(m) { validate_parameters(m); }
ModelSpec::ModelSpec(MonostablePowerModel m) : model_(m) { validate_parameters(m); }

ModelFamily ModelSpec::family() const { return static_cast<ModelFamily>(model_.index()); }

const DriveSignal& ModelSpec::drive() const {
    return std::visit([](const auto& m) -> const DriveSignal& { return m.drive; }, model_);
}

ModelSpec ModelSpec::with_drive(const DriveSignal& drive) const {
    return std::visit(
        [&](auto m) {
            m.drive = drive;
            return ModelSpec(m);
        },
        model_);
}

namespace {

double odd_power(double g, int n) {
    // g^(2n-1)
    const double g2 = g * g;
    double r = g;
    for (int k = 1; k < n; ++k) r *= g2;
    return r;
}

}  // namespace

double drift(const TimeDelayModel& m, double g, double t) {
    return -m.a * g + m.v0 + m.drive.voltage(t);
}

double drift(const DoubleWellModel& m, double g, double t) {
    return -double_well::potential_slope(g) + m.drive.voltage(t);
}

double drift(const CorrelatedLinearModel& m, double g, double t) {
    return -m.a * g + m.v0 + m.drive.voltage(t);
}

double drift(const MonostablePowerModel& m, double g, double t) {
    return -m.a * odd_power(g, m.n) + m.v0 + m.drive.voltage(t);
}

double drift(const ModelSpec& model, double g, double t) {
    return std::visit([&](const auto& m) { return drift(m, g, t); }, model.variant());
}

Diffusion diffusion(const TimeDelayModel&, double) { return {}; }

Diffusion diffusion(const DoubleWellModel& m, double) { return {m.sigma, 0.0}; }

Diffusion diffusion(const CorrelatedLinearModel& m, double g) {
    return {-m.p * g + m.q * m.c, m.q * std::sqrt(1.0 - m.c * m.c)};
}

Diffusion diffusion(const MonostablePowerModel& m, double g) {
    return {-m.p * odd_power(g, m.n) + m.q * m.c, m.q * std::sqrt(1.0 - m.c * m.c)};
}

Diffusion diffusion(const ModelSpec& model, double g) {
    return std::visit([&](const auto& m) { return diffusion(m, g); }, model.variant());
}

double diffusion_xi_slope(const TimeDelayModel&, double) { return 0.0; }
double diffusion_xi_slope(const DoubleWellModel&, double) { return 0.0; }
double diffusion_xi_slope(const CorrelatedLinearModel& m, double) { return -m.p; }

double diffusion_xi_slope(const MonostablePowerModel& m, double g) {
    // d/dG (-p G^(2n-1)) = -(2n-1) p G^(2n-2)
    const double g2 = g * g;
    double r = 1.0;
    for (int k = 1; k < m.n; ++k) r *= g2;
    return -(2.0 * m.n - 1.0) * m.p * r;
}

double diffusion_xi_slope(const ModelSpec& model, double g) {
    return std::visit([&](const auto& m) { return diffusion_xi_slope(m, g); }, model.variant());
}

bool uses_xi(const ModelSpec& model) {
    return std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, TimeDelayModel>) return false;
            else if constexpr (std::is_same_v<T, DoubleWellModel>) return m.sigma != 0.0;
            else return m.p != 0.0 || m.q * m.c != 0.0;
        },
        model.variant());
}

bool uses_eta(const ModelSpec& model) {
    return std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, TimeDelayModel> || std::is_same_v<T, DoubleWellModel>)
                return false;
            else return m.q != 0.0 && std::abs(m.c) != 1.0;
        },
        model.variant());
}

double initial_state(const ModelSpec& model) {
    if (model.family() == ModelFamily::DoubleWell) return double_well::stationary_points().left_min;
    return 0.0;
}

double current(double g, double t, const DriveSignal& drive) {
    // + 0.0 folds a -0.0 product (negative G at a pinch point) onto +0.0.
    return g * drive.voltage(t) + 0.0;
}

ResonantShiftedForm::ResonantShiftedForm(const CorrelatedLinearModel& m) : model_(m) {
    validate_parameters(m);
    if (m.c == 0.0) throw ModelError("shifted resonant form requires c != 0");
    if (!(m.a > 0.0)) throw ModelError("shifted resonant form requires a > 0");
    const double residual = m.v0 * m.p - m.a * m.c * m.q;
    const double scale = std::abs(m.v0 * m.p) + std::abs(m.a * m.c * m.q);
    if (std::abs(residual) > 1e-12 * std::max(scale, 1e-300))
        throw ModelError("shifted resonant form requires V0 p = a c q");
    equilibrium_ = m.v0 / m.a;
    eta_coefficient_ = m.q * std::sqrt(1.0 - m.c * m.c);
}

double ResonantShiftedForm::drift(double g, double t) const {
    return -model_.a * (g - equilibrium_) + model_.drive.voltage(t);
}

Diffusion ResonantShiftedForm::diffusion(double g) const {
    return {-model_.p * (g - equilibrium_), eta_coefficient_};
}

double ResonantShiftedForm::diffusion_xi_slope(double) const { return -model_.p; }

namespace double_well {

double potential(double g) {
    const double x = g - 2.0;
    const double x2 = x * x;
    return 0.25 * x2 * x2 - 0.5 * x2 - 0.125 * x;
}

double potential_slope(double g) {
    const double x = g - 2.0;
    return x * x * x - x - 0.125;
}

double potential_curvature(double g) {
    const double x = g - 2.0;
    return 3.0 * x * x - 1.0;
}

namespace {

// Bisection on a sign-changing bracket, then Newton polish.
double bracketed_root(double lo, double hi) {
    double flo = potential_slope(lo);
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = potential_slope(mid);
        if (fmid == 0.0) return mid;
        if ((fmid < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    double root = 0.5 * (lo + hi);
    for (int it = 0; it < 3; ++it) {
        const double d = potential_curvature(root);
        if (d == 0.0) break;
        root -= potential_slope(root) / d;
    }
    if (!(std::abs(potential_slope(root)) < 1e-12))
        throw std::logic_error("double-well stationary point search did not converge");
    return root;
}

StationaryPoints compute_stationary_points() {
    // Critical points of x^3 - x - 1/8 separate the three roots.
    const double k = 1.0 / std::sqrt(3.0);
    StationaryPoints sp{bracketed_root(2.0 - 3.0, 2.0 - k), bracketed_root(2.0 - k, 2.0 + k),
                        bracketed_root(2.0 + k, 2.0 + 3.0)};
    if (!(potential_curvature(sp.left_min) > 0.0 && potential_curvature(sp.barrier) < 0.0 &&
          potential_curvature(sp.right_min) > 0.0))
        throw std::logic_error("double-well stationary points do not alternate min/max/min");
    return sp;
}

}  // namespace

const StationaryPoints& stationary_points() {
    static const StationaryPoints points = compute_stationary_points();
    return points;
}

BarrierHeights barrier_heights() {
    const auto& sp = stationary_points();
    const double top = potential(sp.barrier);
    return {top - potential(sp.left_min), top - potential(sp.right_min)};
}

}  // namespace double_well

double w_polynomial(int n, double v0, double a, double y) {
    if (n < 2 || n > kMaxWellOrder) throw ModelError("w_polynomial requires 2 <= n <= 6");
    if (!(a > 0.0)) throw std::domain_error("w_polynomial requires a > 0");
    const double ratio = v0 / a;
    if (!(ratio > 0.0)) throw std::domain_error("w_polynomial requires V0/a > 0");
    const int m = 2 * n - 1;
    double sum = 0.0;
    double binom = m;  // C(m, 1)
    double ypow = 1.0;
    for (int l = 0; l <= 2 * (n - 1); ++l) {
        const double exponent = 1.0 - static_cast<double>(l + 1) / m;
        sum += binom * ypow * std::pow(ratio, exponent);
        // C(m, l+2) = C(m, l+1) * (m - l - 1) / (l + 2)
        binom = binom * (m - l - 1) / (l + 2);
        ypow *= y;
    }
    return sum;
}

}  // namespace stochmem

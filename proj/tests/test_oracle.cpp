#include <doctest.h>

#include <cmath>
#include <numbers>

#include "stochmem/oracle.hpp"

using namespace stochmem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

CorrelatedLinearModel linear(double p, double q, double c, double v1 = 0.0, double a = 1.0,
                             double v0 = 1.0) {
    CorrelatedLinearModel m;
    m.a = a;
    m.v0 = v0;
    m.p = p;
    m.q = q;
    m.c = c;
    m.drive = DriveSignal(v1, kTwoPi);
    return m;
}

// Stationary moments from the Ito form of the Stratonovich equation:
//   dG = [-(a - p^2/2) G + V0 - c p q / 2] dt + (-p G + q c) dW + q sqrt(1-c^2) dW'
// First moment: m = beta / alpha. Second: 0 = 2(beta m - alpha M2) + E[(-pG + qc)^2] + q^2 (1-c^2).
struct Moments {
    double mean;
    double variance;
};

Moments moment_equations(const CorrelatedLinearModel& m) {
    const double alpha = m.a - 0.5 * m.p * m.p;
    const double beta = m.v0 - 0.5 * m.c * m.p * m.q;
    const double mean = beta / alpha;
    const double m2 = (2.0 * beta * mean - 2.0 * m.p * m.q * m.c * mean + m.q * m.q) /
                      (2.0 * alpha - m.p * m.p);
    return {mean, m2 - mean * mean};
}

}  // namespace

TEST_CASE("time-delay closed form") {
    TimeDelayModel m;
    m.drive = DriveSignal(0.0, kTwoPi);
    for (double t : {0.0, 0.3, 7.1}) CHECK(timedelay_solution(m, t) == doctest::Approx(1.0));

    m.drive = DriveSignal(0.2, kTwoPi);
    const TimeDelayResponse r = timedelay_response(m);
    CHECK(r.offset == 1.0);
    CHECK(r.amplitude == doctest::Approx(0.2 / std::sqrt(1.0 + kTwoPi * kTwoPi)));
    CHECK(r.delay == doctest::Approx(std::atan(kTwoPi) / kTwoPi));
    CHECK(timedelay_solution(m, r.delay) == doctest::Approx(1.031437).epsilon(1e-6));
    CHECK(timedelay_solution(m, r.delay + 1.0) == doctest::Approx(1.031437).epsilon(1e-6));
}

TEST_CASE("time-delay minimum is positive exactly when the drive bound holds") {
    for (double v1 : {0.5, 4.0, 6.0, 6.3, 6.4, 8.0}) {
        TimeDelayModel m;
        m.drive = DriveSignal(v1, kTwoPi);
        double lowest = 1e300;
        for (int i = 0; i < 20000; ++i) lowest = std::min(lowest, timedelay_solution(m, i / 20000.0));
        CAPTURE(v1);
        CHECK((lowest > 0.0) == validate(ModelSpec{m}).nonneg_drive_ok);
    }
    TimeDelayModel fig;
    fig.drive = DriveSignal(4.0, kTwoPi);
    CHECK(std::sqrt(1.0 + kTwoPi * kTwoPi) == doctest::Approx(6.3623).epsilon(1e-4));
    CHECK(validate(ModelSpec{fig}).ok());
}

TEST_CASE("long-time mean") {
    CHECK(g_infinity(linear(0.0, 0.4, 0.3, 0.0, 2.0, 3.0)) == doctest::Approx(1.5));
    CHECK(g_infinity(linear(0.25, 0.25, 1.0)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g_infinity(linear(0.2, 0.5, 0.0)) == doctest::Approx(1.020408).epsilon(1e-6));
    for (double c : {1.0, 0.7, 0.3, -0.4}) {
        for (double p : {0.05, 0.15, 0.6}) {
            CorrelatedLinearModel m = linear(p, 0.0, c, 0.0, 1.3, 0.8);
            const double q = resonance_q(m);
            if (q < 0.0) continue;
            m.q = q;
            CHECK(g_infinity(m) == doctest::Approx(0.8 / 1.3).epsilon(1e-14));
        }
    }
    CHECK_THROWS_AS(g_infinity(linear(1.5, 0.1, 0.0)), OracleDomainError);
}

TEST_CASE("asymptotic variance") {
    CHECK(asymptotic_variance(linear(0.0, 0.25, 0.0)) == doctest::Approx(0.03125));
    CHECK(asymptotic_variance(linear(0.0, 0.25, 0.0, 0.0, 2.0)) == doctest::Approx(0.25 * 0.25 / 4));
    CHECK(asymptotic_variance(linear(0.5, 0.0, 0.0)) == doctest::Approx(0.217687).epsilon(1e-5));
    CHECK(asymptotic_variance(linear(0.2, 0.3, 0.0)) == doctest::Approx(0.068567).epsilon(1e-4));
    CHECK(std::abs(asymptotic_variance(linear(0.15, 0.15, 1.0))) < 1e-15);
    CHECK_THROWS_AS(asymptotic_variance(linear(1.0, 0.1, 0.0)), OracleDomainError);
}

TEST_CASE("variance formula agrees with the moment equations") {
    for (double a : {0.5, 1.0, 2.0})
        for (double v0 : {0.3, 1.0})
            for (double p : {0.0, 0.1, 0.3, 0.6})
                for (double q : {0.0, 0.2, 0.7})
                    for (double c : {-1.0, -0.3, 0.0, 0.5, 1.0}) {
                        if (a - p * p <= 0.05) continue;
                        const CorrelatedLinearModel m = linear(p, q, c, 0.0, a, v0);
                        const Moments ref = moment_equations(m);
                        CHECK(g_infinity(m) == doctest::Approx(ref.mean).epsilon(1e-12));
                        CHECK(asymptotic_variance(m) ==
                              doctest::Approx(ref.variance).epsilon(1e-9).scale(1e-12));
                    }
}

TEST_CASE("variance is nonnegative over the valid region") {
    for (double p = 0.0; p < 1.0; p += 0.05)
        for (double q = 0.0; q <= 2.0; q += 0.1)
            for (double c = -1.0; c <= 1.0001; c += 0.1) {
                const double v = asymptotic_variance(linear(p, q, std::clamp(c, -1.0, 1.0)));
                REQUIRE(v >= -1e-14);
            }
}

TEST_CASE("variance minimum over the additive intensity") {
    for (double c : {1.0, 0.75, 0.5, 0.25})
        for (double p : {0.1, 0.15, 0.25, 0.4}) {
            CorrelatedLinearModel m = linear(p, 0.0, c);
            const double vertex = variance_minimizing_q(m);
            const double h = (3.0 * vertex + 0.1) / 40000;
            double best_q = 0.0, best = 1e300;
            for (int i = 0; i <= 40000; ++i) {
                m.q = i * h;
                const double d = asymptotic_variance(m);
                if (d < best) {
                    best = d;
                    best_q = m.q;
                }
            }
            CAPTURE(c);
            CAPTURE(p);
            CHECK(std::abs(best_q - vertex) <= 1.5 * h);
            if (c == 1.0) {
                CHECK(vertex == doctest::Approx(resonance_q(m)).epsilon(1e-14));
            } else {
                CHECK(resonance_q(m) > vertex);
            }
        }
    CHECK(variance_minimizing_q(linear(0.3, 0.0, -1.0)) ==
          doctest::Approx(resonance_q(linear(0.3, 0.0, -1.0))).epsilon(1e-14));
    CHECK(variance_minimizing_q(linear(0.3, 0.0, 0.0)) == 0.0);
}

TEST_CASE("resonance intensity") {
    CHECK(resonance_q(linear(0.15, 0.0, 1.0)) == doctest::Approx(0.15));
    CHECK(resonance_q(linear(0.25, 0.0, 1.0)) == doctest::Approx(0.25));
    CHECK(resonance_q(linear(0.15, 0.0, 0.5)) == doctest::Approx(0.30));
    CHECK_THROWS_AS(resonance_q(linear(0.15, 0.0, 0.0)), OracleDomainError);

    MonostablePowerModel mp;
    mp.p = 0.15;
    mp.c = 1.0;
    CHECK(resonance_q(mp) == doctest::Approx(0.15));
    mp.c = 0.0;
    CHECK_THROWS_AS(resonance_q(mp), OracleDomainError);
}

TEST_CASE("correlation function") {
    SUBCASE("zero lag without drive is the variance") {
        for (double c : {0.0, 0.5, 1.0}) {
            const CorrelatedLinearModel m = linear(0.3, 0.4, c);
            CHECK(correlation_fn(m, 0.0) == asymptotic_variance(m));
        }
    }
    SUBCASE("resonant example") {
        const CorrelatedLinearModel m = linear(0.15, 0.15, 1.0, 4.0);
        const CorrelationTerms t = correlation_terms(m);
        const double lambda = 1.0 - 0.15 * 0.15 / 2;
        const double denom = lambda * lambda + kTwoPi * kTwoPi;
        CHECK(t.decay_rate == doctest::Approx(lambda));
        CHECK(t.oscillatory_amplitude == doctest::Approx(16.0 / (2.0 * denom)));
        CHECK(t.decay_amplitude == doctest::Approx(16.0 * 0.0225 / (4.0 * (1.0 - 0.0225) * denom)));
        CHECK(t.oscillatory_amplitude == doctest::Approx(0.197746).epsilon(1e-5));
        CHECK(t.decay_amplitude == doctest::Approx(0.002276).epsilon(1e-3));
        CHECK(correlation_fn(m, 0.0) == doctest::Approx(0.2000220).epsilon(1e-6));
    }
    SUBCASE("long lags keep only the oscillation") {
        const CorrelatedLinearModel m = linear(0.3, 0.2, 0.5, 2.0);
        const CorrelationTerms t = correlation_terms(m);
        for (double tau : {40.0, 40.25, 40.5})
            CHECK(correlation_fn(m, tau) ==
                  doctest::Approx(t.oscillatory_amplitude * std::cos(kTwoPi * tau)).epsilon(1e-9).scale(1e-9));
        CHECK_THROWS_AS(correlation_fn(m, -1.0), OracleDomainError);
    }
}

TEST_CASE("validity report") {
    const ValidityReport fast = validate(ModelSpec{linear(1.2, 0.1, 0.0)});
    CHECK(fast.mean_exists);
    CHECK_FALSE(fast.variance_exists);
    CHECK_FALSE(fast.ok());
    CHECK(fast.summary().find("variance") != std::string::npos);

    const ValidityReport none = validate(ModelSpec{linear(1.5, 0.1, 0.0)});
    CHECK_FALSE(none.mean_exists);
    CHECK_FALSE(none.variance_exists);

    const ValidityReport good = validate(ModelSpec{linear(0.5, 0.1, 0.0)});
    CHECK(good.ok());
    CHECK(good.summary() == "ok");

    // variance_exists implies mean_exists
    for (double p = 0.0; p < 2.0; p += 0.01) {
        const ValidityReport r = validate(ModelSpec{linear(p, 0.1, 0.0)});
        if (r.variance_exists) CHECK(r.mean_exists);
    }

    DoubleWellModel dw;
    dw.drive = DriveSignal(0.2, kTwoPi);
    dw.sigma = 1.0;
    CHECK(validate(ModelSpec{dw}).ok());
}

TEST_CASE("denominators near zero are refused") {
    // a - p^2 one part in 1e12 above zero
    const double p = std::sqrt(1.0 - 1e-12);
    CHECK_THROWS_AS(asymptotic_variance(linear(p, 0.1, 0.0)), OracleDomainError);
}

#include "stochmem/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stochmem/spectral.hpp"

namespace stochmem {

std::span<const double> HysteresisLoop::period_voltage(std::size_t k) const {
    return std::span<const double>(voltage).subspan(k * samples_per_period, samples_per_period);
}

std::span<const double> HysteresisLoop::period_current(std::size_t k) const {
    return std::span<const double>(current).subspan(k * samples_per_period, samples_per_period);
}

double polygon_area(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size()) throw std::invalid_argument("polygon_area: size mismatch");
    if (n < 3) return 0.0;
    double twice = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + 1 == n ? 0 : i + 1;
        twice += x[i] * y[j] - x[j] * y[i];
    }
    return 0.5 * twice;
}

HysteresisLoop extract_loops(const Trajectory& trajectory, const DriveSignal& drive) {
    const std::size_t per = samples_per_period(drive.period(), trajectory.dt, trajectory.stride);
    const std::size_t periods = trajectory.samples.size() / per;
    if (periods == 0) throw std::invalid_argument("trajectory is shorter than one drive period");

    HysteresisLoop loop;
    loop.samples_per_period = per;
    loop.period_count = periods;
    loop.first_period = static_cast<std::size_t>(std::llround(trajectory.t0 / drive.period()));
    loop.voltage.resize(periods * per);
    loop.current.resize(periods * per);
    for (std::size_t i = 0; i < periods * per; ++i) {
        const double t = trajectory.time(i);
        const double g = trajectory.samples[i];
        loop.voltage[i] = drive.voltage(t);
        loop.current[i] = current(g, t, drive);
    }

    loop.period_area.reserve(periods);
    loop.lobe_areas.resize(periods);
    for (std::size_t k = 0; k < periods; ++k) {
        const auto v = loop.period_voltage(k);
        const auto c = loop.period_current(k);
        loop.period_area.push_back(polygon_area(v, c));

        std::vector<std::size_t> zeros;
        for (std::size_t i = 0; i < per; ++i)
            if (v[i] == 0.0) zeros.push_back(i);
        if (zeros.size() < 2) continue;
        // Lobes between consecutive pinch samples, wrapping around the period.
        std::vector<double> lx, ly;
        for (std::size_t z = 0; z < zeros.size(); ++z) {
            const std::size_t from = zeros[z];
            const std::size_t to = zeros[(z + 1) % zeros.size()] + (z + 1 == zeros.size() ? per : 0);
            lx.clear();
            ly.clear();
            for (std::size_t i = from; i <= to; ++i) {
                lx.push_back(v[i % per]);
                ly.push_back(c[i % per]);
            }
            loop.lobe_areas[k].push_back(polygon_area(lx, ly));
        }
    }
    return loop;
}

DwellStats dwell_times(const Trajectory& trajectory, const DwellOptions& options) {
    if (!(options.deadband >= 0.0)) throw std::invalid_argument("deadband must be >= 0");
    const double barrier = double_well::stationary_points().barrier;
    DwellStats st;
    st.lower_threshold = barrier - options.deadband;
    st.upper_threshold = barrier + options.deadband;
    const auto& g = trajectory.samples;
    const double h = trajectory.sample_dt();

    WellSide state = WellSide::Band;
    std::size_t started = 0;
    auto close = [&](std::size_t end) {
        if (end <= started) return;
        const double duration = static_cast<double>(end - started) * h;
        (state == WellSide::Left ? st.left_dwells : st.right_dwells).push_back(duration);
    };
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g[i];
        const WellSide raw = x < st.lower_threshold   ? WellSide::Left
                             : x > st.upper_threshold ? WellSide::Right
                                                      : WellSide::Band;
        switch (raw) {
            case WellSide::Left: ++st.left_samples; break;
            case WellSide::Right: ++st.right_samples; break;
            case WellSide::Band: ++st.band_samples; break;
        }
        if (raw == WellSide::Band || raw == state) continue;
        if (state != WellSide::Band) {
            close(i);
            st.no_crossings = false;
        }
        state = raw;
        started = i;
    }
    if (state != WellSide::Band && !g.empty()) {
        // The record end truncates the last dwell; it is still counted.
        const std::size_t before = st.left_dwells.size() + st.right_dwells.size();
        close(g.size() - 1);
        st.final_dwell_censored = st.left_dwells.size() + st.right_dwells.size() > before;
    }
    auto mean = [](const std::vector<double>& v) -> std::optional<double> {
        if (v.empty()) return std::nullopt;
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    st.mean_left = mean(st.left_dwells);
    st.mean_right = mean(st.right_dwells);
    return st;
}

double kramers_dwell_ratio(double sigma) {
    if (!(sigma > 0.0)) throw std::domain_error("kramers_dwell_ratio requires sigma > 0");
    const auto heights = double_well::barrier_heights();
    return std::exp((heights.right - heights.left) / sigma);
}

PlateauDecomposition plateau_decomposition(std::span<const double> record, std::size_t max_lag) {
    if (record.empty()) throw std::invalid_argument("plateau_decomposition of an empty record");
    PlateauDecomposition out;
    double s = 0.0;
    for (double x : record) s += x;
    out.mean_offset = s / static_cast<double>(record.size());

    std::vector<double> gamma(record.begin(), record.end());
    for (auto& x : gamma) x -= out.mean_offset;
    out.centered_acf = circular_lag_products(gamma, max_lag);
    out.raw_lag_products = circular_lag_products(record, max_lag);

    const double offset2 = out.mean_offset * out.mean_offset;
    for (std::size_t k = 0; k <= max_lag; ++k) {
        const double err = std::abs(out.raw_lag_products[k] - (out.centered_acf[k] + offset2));
        out.reconstruction_error = std::max(out.reconstruction_error, err);
    }
    return out;
}

}  // namespace stochmem

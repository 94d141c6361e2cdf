#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "stochmem/core.hpp"
#include "stochmem/integrate.hpp"

namespace stochmem {

/// (V, I) samples of whole drive periods and the signed area of each.
///
/// Areas are positive for counterclockwise traversal. A pinched loop is a
/// figure eight whose lobes carry opposite signs, so lobe_areas splits every
/// period at its exact V = 0 samples; each lobe starts and ends at the origin.
struct HysteresisLoop {
    std::vector<double> voltage;
    std::vector<double> current;
    std::size_t samples_per_period = 0;
    std::size_t first_period = 0;  // index of the first period in the source trajectory
    std::size_t period_count = 0;
    std::vector<double> period_area;
    std::vector<std::vector<double>> lobe_areas;

    [[nodiscard]] std::span<const double> period_voltage(std::size_t k) const;
    [[nodiscard]] std::span<const double> period_current(std::size_t k) const;
};

/// Shoelace area of the closed polygon through (x_i, y_i).
double polygon_area(std::span<const double> x, std::span<const double> y);

/// Loops over every whole period contained in the trajectory, counted from
/// its first sample.
HysteresisLoop extract_loops(const Trajectory& trajectory, const DriveSignal& drive);

struct DwellOptions {
    double deadband = 0.1;  // half-width of the excluded band around the barrier
};

enum class WellSide { Left, Band, Right };

struct DwellStats {
    std::vector<double> left_dwells;
    std::vector<double> right_dwells;
    double lower_threshold = 0.0;  // barrier - deadband
    double upper_threshold = 0.0;  // barrier + deadband
    std::optional<double> mean_left;
    std::optional<double> mean_right;
    // Per-sample attribution by raw position.
    std::size_t left_samples = 0;
    std::size_t band_samples = 0;
    std::size_t right_samples = 0;
    bool no_crossings = true;
    bool final_dwell_censored = false;  // last dwell truncated by the record end
};

/// Double-well residence intervals with two-threshold (hysteretic) counting:
/// a dwell ends only when the opposite threshold is crossed.
DwellStats dwell_times(const Trajectory& trajectory, const DwellOptions& options = {});

/// Kramers-type dwell ratio exp((U_R - U_L) / sigma) with the barrier heights
/// measured from each minimum.
double kramers_dwell_ratio(double sigma);

struct PlateauDecomposition {
    double mean_offset = 0.0;              // time average of G
    std::vector<double> centered_acf;      // lag products of G - mean_offset
    std::vector<double> raw_lag_products;  // lag products of G itself
    double reconstruction_error = 0.0;     // max |raw - (centered + mean^2)|
};

/// Splits G(t) = gamma(t) + mean into zero-mean fluctuation and offset and
/// checks <G G'> = <gamma gamma'> + mean^2 on circular lag products.
PlateauDecomposition plateau_decomposition(std::span<const double> record, std::size_t max_lag);

}  // namespace stochmem

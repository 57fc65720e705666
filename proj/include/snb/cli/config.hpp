#pragma once

// Run configuration for snb-lab. All quantities are SI; the switching period
// may be given as `T` [s] or as `f_s_hz` [Hz].
//
//   [converter]  v_s R L C R_c T|f_s_hz V_m v_r
//   [control]    scheme = "state_feedback" (k_i, k_v) | "cmc"
//                | "vmc" (gc_num, gc_den) | "custom" (f_num, f_den, dc_offset_gain)
//   [analysis]   series_terms, duty_grid
//   [plot]       D_min, D_max, points
//   [sweep]      v_s_min, v_s_max, steps, settle_cycles, direction, jump_threshold
//   [simulate]   cycles, samples_per_cycle, record_cycles, x0
//   [boundary]   x, x_min, x_max, x_points, y, y_min, y_max, y_points
//
// Polynomial coefficients are listed in ascending powers of s.

#include "snb/cli/toml_lite.hpp"
#include "snb/critical.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace snb::cli {

struct PlotConfig {
    double D_min = 0.0;
    double D_max = 1.0;
    std::optional<int> points;  ///< defaults to the analysis duty grid
};

struct SweepConfig {
    std::optional<double> v_s_min;
    std::optional<double> v_s_max;
    int steps = 50;
    int settle_cycles = 400;
    std::string direction = "both";  ///< "up", "down" or "both"
    double jump_threshold = 0.25;
};

struct SimulateConfig {
    int cycles = 200;
    int samples_per_cycle = 100;
    /// Trailing cycles written to the time series; all when empty.
    std::optional<int> record_cycles;
    /// Initial state (i_L, v_C[, compensator]); rest when empty.
    std::optional<std::vector<double>> x0;
};

struct BoundaryConfig {
    std::optional<SweepAxis> x;
    std::optional<SweepAxis> y;
};

struct RunConfig {
    ConverterSpec converter;
    long series_terms = kDefaultSeriesTerms;
    int duty_grid = kDefaultDutyGrid;
    PlotConfig plot;
    SweepConfig sweep;
    SimulateConfig simulate;
    BoundaryConfig boundary;
};

/// Strict schema check: unknown tables or keys, wrong types and missing
/// required keys raise Error(config) naming the key.
[[nodiscard]] RunConfig parse_config(const Document& doc);
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

} // namespace snb::cli

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "irbfn/clothoid.hpp"
#include "irbfn/optimizer.hpp"

namespace irbfn {

// One grid dimension: `count` points min, min + step, ...
struct GridAxis {
  double min = 0.0;
  double step = 1.0;
  std::uint64_t count = 1;

  double value(std::uint64_t i) const { return min + static_cast<double>(i) * step; }
  double last() const { return value(count - 1); }

  friend bool operator==(const GridAxis&, const GridAxis&) = default;
};

// Goal grid over (x, y, theta), enumerated row-major with theta fastest.
struct GridSpec {
  std::array<GridAxis, 3> axes;

  // count = floor((max - min) / step) + 1 per dimension. max == min yields a
  // single point. Throws ConfigError for max < min or step <= 0.
  static GridSpec from_bounds(double x_min, double x_max, double x_step, double y_min,
                              double y_max, double y_step, double theta_min, double theta_max,
                              double theta_step);

  std::uint64_t size() const { return axes[0].count * axes[1].count * axes[2].count; }
  std::uint64_t index(std::uint64_t ix, std::uint64_t iy, std::uint64_t it) const {
    return (ix * axes[1].count + iy) * axes[2].count + it;
  }
  GoalState goal(std::uint64_t flat_index) const;

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

// x 2..6 step 0.5, y -2..2 step 0.5, theta -0.3..0.3 step 0.1 (567 goals).
GridSpec desk_scale_grid();

// x 1..10, y -6..6, theta -pi/2..pi/2, all at 0.1 resolution.
GridSpec full_scale_grid();

struct LutRecord {
  ClothoidParams params;
  bool valid = false;

  friend bool operator==(const LutRecord&, const LutRecord&) = default;
};

struct LookupTable {
  GridSpec spec;
  std::vector<LutRecord> records;

  std::size_t valid_count() const;

  friend bool operator==(const LookupTable&, const LookupTable&) = default;
};

std::vector<GoalState> enumerate_goals(const GridSpec& spec);

// One Newton solve per goal, split across `workers` threads. Records are
// written by grid index, so the table does not depend on the worker count.
LookupTable generate(const GridSpec& spec, const SolveOptions& opts = {}, unsigned workers = 1);

void save_table(const LookupTable& table, const std::filesystem::path& path);
LookupTable load_table(const std::filesystem::path& path);

// Record at the per-dimension nearest grid index (ties go to the lower
// index). Throws DomainError outside the grid box and LookupMissError when the
// record is invalid.
ClothoidParams nearest(const LookupTable& table, const GoalState& g);

}  // namespace irbfn

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "irbfn/lut.hpp"
#include "irbfn/network.hpp"

namespace irbfn {

// Inputs to the uniform interpolation error bound.
struct BoundInputs {
  double n_samples = 1.0;      // N
  double hoelder_order = 1.0;  // alpha in (0, 1]
  double hoelder_const = 0.0;  // L
  double spacing = 0.0;        // s
  double sup_norm_model = 0.0;
  double sup_norm_target = 0.0;
};

// (1 / N^a) [L 2^(a/2 + 1) s^a + 2^(a/2) s^a |Phi|_inf + |f|_inf]
// Throws InvalidParameterError when the inputs leave their ranges.
double interpolation_bound(const BoundInputs& b);

struct HoelderEstimate {
  double constant = 0.0;
  double order = 1.0;
};

// Largest ||q_i - q_j|| / ||g_i - g_j|| over pairs of valid records that are
// neighbours along one grid axis. Needs at least two valid records.
HoelderEstimate estimate_hoelder(const LookupTable& table);

struct SupNorms {
  double model = 0.0;   // max ||forward(g)|| over valid grid goals
  double target = 0.0;  // max ||q|| over valid records
};

SupNorms estimate_sup_norms(const IrbfnModel& model, const LookupTable& table);

// Largest step among the axes that have more than one point.
double grid_spacing(const GridSpec& spec);

struct ErrorReport {
  double mean_err_x = 0.0;
  double mean_err_y = 0.0;
  double mean_err_theta = 0.0;
  std::size_t samples = 0;
};

using ParamSource = std::function<ClothoidParams(const GoalState&)>;

// Mean absolute endpoint error of integrate(source(g)) against g. Predicted
// arc lengths are floored at 1 mm before integration. Throws
// InvalidParameterError on an empty goal set.
ErrorReport endpoint_errors(const ParamSource& source, std::span<const GoalState> goals,
                            int intervals = kDefaultQuadratureIntervals);

ErrorReport endpoint_errors(const IrbfnModel& model, std::span<const GoalState> goals,
                            int intervals = kDefaultQuadratureIntervals);

// First-order endpoint bound |J| * param_bound with J the 3x5 quadrature
// sensitivity at q.
std::array<double, 3> propagate_bound(const std::array<double, 5>& param_bound,
                                      const ClothoidParams& q,
                                      int intervals = kDefaultQuadratureIntervals);

// Goals drawn uniformly from the box [lower, upper].
std::vector<GoalState> random_goals(const Orthotope& box, std::size_t count, std::uint64_t seed);

struct ThroughputReport {
  std::size_t goal_count = 0;
  std::size_t repeats = 0;
  double irbfn_hz = 0.0;   // full batches (inference + integration) per second
  double newton_hz = 0.0;  // full batches of sequential Newton solves per second
  double speedup = 0.0;
};

// Times both pipelines on `goal_count` goals from `box`, re-perturbing the
// goals on every repeat.
ThroughputReport bench_throughput(const IrbfnModel& model, const Orthotope& box,
                                  std::size_t goal_count, std::size_t repeats,
                                  std::uint64_t seed, const SolveOptions& opts = {});

// Fields of a JSON analysis report; absent optionals are omitted.
struct AnalysisReport {
  std::optional<ErrorReport> errors;
  std::optional<ThroughputReport> throughput;
  std::optional<BoundInputs> bound_inputs;
  std::optional<double> bound_value;
};

std::string to_json(const AnalysisReport& report);

}  // namespace irbfn

#include "irbfn/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "irbfn/errors.hpp"

namespace irbfn {
namespace {

constexpr double kMinArcLength = 1e-3;
// Per-repeat goal noise, as a fraction of the box extent.
constexpr double kNoiseFraction = 0.01;

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double param_distance(const ClothoidParams& a, const ClothoidParams& b) {
  const auto va = a.to_array();
  const auto vb = b.to_array();
  double sum = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) sum += (va[i] - vb[i]) * (va[i] - vb[i]);
  return std::sqrt(sum);
}

double goal_distance(const GoalState& a, const GoalState& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
                   (a.theta - b.theta) * (a.theta - b.theta));
}

double norm(const std::array<double, 5>& v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

double interpolation_bound(const BoundInputs& b) {
  if (!(b.n_samples >= 1.0)) throw InvalidParameterError("bound needs N >= 1");
  if (!(b.hoelder_order > 0.0 && b.hoelder_order <= 1.0)) {
    throw InvalidParameterError("Hoelder order must lie in (0, 1]");
  }
  if (!(b.hoelder_const >= 0.0) || !(b.spacing >= 0.0) || !(b.sup_norm_model >= 0.0) ||
      !(b.sup_norm_target >= 0.0)) {
    throw InvalidParameterError("bound inputs L, s and the sup norms must be non-negative");
  }
  const double a = b.hoelder_order;
  const double s_pow = std::pow(b.spacing, a);
  const double bracket = b.hoelder_const * std::pow(2.0, a / 2.0 + 1.0) * s_pow +
                         std::pow(2.0, a / 2.0) * s_pow * b.sup_norm_model + b.sup_norm_target;
  return bracket / std::pow(b.n_samples, a);
}

HoelderEstimate estimate_hoelder(const LookupTable& table) {
  if (table.valid_count() < 2) {
    throw InvalidParameterError("Lipschitz estimate needs at least two valid records");
  }
  const GridSpec& spec = table.spec;
  double best = 0.0;
  bool any_pair = false;
  for (std::uint64_t ix = 0; ix < spec.axes[0].count; ++ix) {
    for (std::uint64_t iy = 0; iy < spec.axes[1].count; ++iy) {
      for (std::uint64_t it = 0; it < spec.axes[2].count; ++it) {
        const std::uint64_t here = spec.index(ix, iy, it);
        const LutRecord& a = table.records[here];
        if (!a.valid) continue;
        const std::array<std::uint64_t, 3> next = {
            ix + 1 < spec.axes[0].count ? spec.index(ix + 1, iy, it) : here,
            iy + 1 < spec.axes[1].count ? spec.index(ix, iy + 1, it) : here,
            it + 1 < spec.axes[2].count ? spec.index(ix, iy, it + 1) : here};
        for (std::uint64_t other : next) {
          if (other == here) continue;
          const LutRecord& b = table.records[other];
          if (!b.valid) continue;
          const double dg = goal_distance(spec.goal(here), spec.goal(other));
          best = std::max(best, param_distance(a.params, b.params) / dg);
          any_pair = true;
        }
      }
    }
  }
  if (!any_pair) throw InvalidParameterError("no pair of grid-adjacent valid records");
  return {best, 1.0};
}

SupNorms estimate_sup_norms(const IrbfnModel& model, const LookupTable& table) {
  SupNorms out;
  for (std::uint64_t i = 0; i < table.records.size(); ++i) {
    const LutRecord& rec = table.records[i];
    if (!rec.valid) continue;
    out.target = std::max(out.target, norm(rec.params.to_array()));
    out.model = std::max(out.model, norm(evaluate(model, to_input(table.spec.goal(i)))));
  }
  return out;
}

double grid_spacing(const GridSpec& spec) {
  double s = 0.0;
  for (const GridAxis& axis : spec.axes) {
    if (axis.count > 1) s = std::max(s, axis.step);
  }
  return s;
}

ErrorReport endpoint_errors(const ParamSource& source, std::span<const GoalState> goals,
                            int intervals) {
  if (goals.empty()) throw InvalidParameterError("endpoint error needs at least one goal");
  ErrorReport report;
  for (const GoalState& g : goals) {
    ClothoidParams q = source(g);
    q.s_f = std::max(q.s_f, kMinArcLength);
    const Pose p = integrate_pose(q, intervals);
    report.mean_err_x += std::abs(p.x - g.x);
    report.mean_err_y += std::abs(p.y - g.y);
    report.mean_err_theta += std::abs(p.theta - g.theta);
  }
  const double n = static_cast<double>(goals.size());
  report.mean_err_x /= n;
  report.mean_err_y /= n;
  report.mean_err_theta /= n;
  report.samples = goals.size();
  return report;
}

ErrorReport endpoint_errors(const IrbfnModel& model, std::span<const GoalState> goals,
                            int intervals) {
  return endpoint_errors([&model](const GoalState& g) { return forward(model, g); }, goals,
                         intervals);
}

std::array<double, 3> propagate_bound(const std::array<double, 5>& param_bound,
                                      const ClothoidParams& q, int intervals) {
  for (double b : param_bound) {
    if (!(b >= 0.0)) throw InvalidParameterError("parameter bounds must be non-negative");
  }
  const EndpointJacobian jac = residual_jacobian(q, GoalState{}, intervals);
  std::array<double, 3> out{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 5; ++c) {
      out[static_cast<std::size_t>(r)] += std::abs(jac(r, c)) * param_bound[static_cast<std::size_t>(c)];
    }
  }
  return out;
}

std::vector<GoalState> random_goals(const Orthotope& box, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<GoalState> goals(count);
  for (GoalState& g : goals) {
    g.x = box.lower[0] + unit_uniform(rng) * (box.upper[0] - box.lower[0]);
    g.y = box.lower[1] + unit_uniform(rng) * (box.upper[1] - box.lower[1]);
    g.theta = box.lower[2] + unit_uniform(rng) * (box.upper[2] - box.lower[2]);
  }
  return goals;
}

ThroughputReport bench_throughput(const IrbfnModel& model, const Orthotope& box,
                                  std::size_t goal_count, std::size_t repeats,
                                  std::uint64_t seed, const SolveOptions& opts) {
  if (goal_count < 1) throw InvalidParameterError("benchmark needs at least one goal");
  repeats = std::max<std::size_t>(repeats, 1);
  const std::vector<GoalState> base = random_goals(box, goal_count, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);

  std::vector<std::vector<GoalState>> batches(repeats, base);
  for (auto& batch : batches) {
    for (GoalState& g : batch) {
      auto jitter = [&](double v, std::size_t m) {
        const double extent = box.upper[m] - box.lower[m];
        const double noisy = v + (2.0 * unit_uniform(rng) - 1.0) * kNoiseFraction * extent;
        return std::clamp(noisy, box.lower[m], box.upper[m]);
      };
      g.x = jitter(g.x, 0);
      g.y = jitter(g.y, 1);
      g.theta = jitter(g.theta, 2);
    }
  }

  double sink = 0.0;
  auto start = Clock::now();
  for (const auto& batch : batches) {
    const std::vector<ClothoidParams> params = forward(model, batch);
    for (ClothoidParams q : params) {
      q.s_f = std::max(q.s_f, kMinArcLength);
      sink += integrate_pose(q, opts.quadrature_n).x;
    }
  }
  const double irbfn_seconds = seconds_since(start);

  start = Clock::now();
  for (const auto& batch : batches) {
    for (const GoalState& g : batch) sink += solve_newton(g, opts).params.s_f;
  }
  const double newton_seconds = seconds_since(start);
  // Keeps both loops observable.
  volatile double keep = sink;
  (void)keep;

  ThroughputReport report;
  report.goal_count = goal_count;
  report.repeats = repeats;
  report.irbfn_hz = static_cast<double>(repeats) / std::max(irbfn_seconds, 1e-12);
  report.newton_hz = static_cast<double>(repeats) / std::max(newton_seconds, 1e-12);
  report.speedup = report.irbfn_hz / report.newton_hz;
  return report;
}

std::string to_json(const AnalysisReport& report) {
  nlohmann::ordered_json j;
  if (report.errors) {
    j["mean_err_x_m"] = report.errors->mean_err_x;
    j["mean_err_y_m"] = report.errors->mean_err_y;
    j["mean_err_theta_rad"] = report.errors->mean_err_theta;
    j["error_samples"] = report.errors->samples;
  }
  if (report.throughput) {
    j["irbfn_hz"] = report.throughput->irbfn_hz;
    j["newton_hz"] = report.throughput->newton_hz;
    j["speedup"] = report.throughput->speedup;
    j["goal_count"] = report.throughput->goal_count;
    j["repeats"] = report.throughput->repeats;
  }
  if (report.bound_inputs) {
    const BoundInputs& b = *report.bound_inputs;
    j["bound_inputs"] = {{"n_samples", b.n_samples},         {"hoelder_order", b.hoelder_order},
                         {"hoelder_const", b.hoelder_const}, {"spacing", b.spacing},
                         {"sup_norm_model", b.sup_norm_model}, {"sup_norm_target", b.sup_norm_target}};
  }
  if (report.bound_value) j["bound_value"] = *report.bound_value;
  return j.dump(2);
}

}  // namespace irbfn

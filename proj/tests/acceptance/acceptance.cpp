// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "irbfn/analysis.hpp"
#include "irbfn/clothoid.hpp"
#include "irbfn/errors.hpp"
#include "irbfn/lut.hpp"
#include "irbfn/network.hpp"
#include "irbfn/optimizer.hpp"
#include "irbfn/presets.hpp"
#include "irbfn/training.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

namespace {

using namespace irbfn;
using irbfn::testing::Gen;
using irbfn::testing::TempDir;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), pattern, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Artifacts of the desk-scale run, shared by the later criteria.
struct DeskRun {
  LookupTable table;
  IrbfnModel model;
  TrainHistory history;
  double seconds = 0.0;
};

DeskRun* g_desk = nullptr;

Outcome straight_line() {
  const auto t0 = Clock::now();
  const SolveResult r = solve_newton({5, 0, 0, 0});
  const double dt = seconds_since(t0);
  const double obj = objective(r.params, {5, 0, 0, 0});
  const bool pass = obj <= 1e-12 && std::abs(r.params.s_f - 5.0) <= 1e-6 && dt < 1.0;
  return {pass, fmt("objective %.3g, s_f %.12g, %.4f s", obj, r.params.s_f, dt)};
}

Outcome arc_inversion() {
  Gen gen(2);
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double k = gen.uniform(-0.3, 0.3);
    const double s_f = gen.uniform(2.0, 8.0);
    const Pose p = integrate_pose(ClothoidParams{k, k, k, k, s_f}, kDefaultQuadratureIntervals);
    const GoalState g{p.x, p.y, p.theta, p.kappa};
    const Pose e = integrate_pose(solve_newton(g).params, kDefaultQuadratureIntervals);
    worst = std::max({worst, std::abs(e.x - g.x), std::abs(e.y - g.y), std::abs(e.theta - g.theta)});
  }
  const double dt = seconds_since(t0);
  return {worst <= 1e-4 && dt < 10.0, fmt("worst per-axis error %.3g over 20 arcs, %.3f s", worst, dt)};
}

Outcome quadrature_order() {
  Gen gen(3);
  const int ns[] = {8, 16, 32, 64};
  double worst_fit = std::numeric_limits<double>::infinity();
  double worst_pair = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 10; ++trial) {
    const ClothoidParams q = gen.params(0.5, 2.0, 8.0);
    const SpiralCoefficients c = spiral_coeffs(q);
    const auto ref = irbfn::testing::reference_pose(c, q.s_f);
    double lx[4], ly[4];
    for (int i = 0; i < 4; ++i) {
      const Pose p = integrate_pose(c, q.s_f, ns[i]);
      lx[i] = std::log(static_cast<double>(ns[i]));
      ly[i] = std::log(std::hypot(p.x - ref.x, p.y - ref.y));
      if (i > 0) worst_pair = std::min(worst_pair, (ly[i - 1] - ly[i]) / std::log(2.0));
    }
    // Least-squares slope of log error against log n.
    double mx = 0, my = 0;
    for (int i = 0; i < 4; ++i) {
      mx += lx[i] / 4;
      my += ly[i] / 4;
    }
    double sxy = 0, sxx = 0;
    for (int i = 0; i < 4; ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    worst_fit = std::min(worst_fit, -sxy / sxx);
  }
  return {worst_fit >= 3.5,
          fmt("lowest fitted order %.3f, lowest pairwise order %.3f over 10 spirals", worst_fit,
              worst_pair)};
}

Outcome partition_of_unity() {
  const InputVector zeta{15, 15, 100};
  const Orthotope domain{{1, -6, -std::numbers::pi / 2}, {10, 6, std::numbers::pi / 2}};
  const auto regions = partition(domain, {1.0, 1.6, 0.39});
  IrbfnModel model;
  model.zeta = zeta;
  model.domain = domain;
  for (const Orthotope& r : regions) model.regions.push_back({r, {}});

  Orthotope interior = domain;
  for (std::size_t m = 0; m < kInputDim; ++m) {
    interior.lower[m] += 3.0 / zeta[m];
    interior.upper[m] -= 3.0 / zeta[m];
  }
  Gen gen(4);
  double worst_sum = 0.0;
  for (int i = 0; i < 10'000; ++i) {
    InputVector x{};
    for (std::size_t m = 0; m < kInputDim; ++m) x[m] = gen.uniform(interior.lower[m], interior.upper[m]);
    worst_sum = std::max(worst_sum, std::abs(indicator_sum(model, x) - 1.0));
  }

  // Every interior face shared by two full-size regions, checked at its midpoint.
  double worst_face = 0.0;
  std::size_t faces = 0;
  auto full_size = [&](const Orthotope& r) {
    const InputVector sizes{1.0, 1.6, 0.39};
    for (std::size_t m = 0; m < kInputDim; ++m) {
      if (std::abs((r.upper[m] - r.lower[m]) - sizes[m]) > 1e-9) return false;
    }
    return true;
  };
  for (const Orthotope& a : regions) {
    if (!full_size(a)) continue;
    for (const Orthotope& b : regions) {
      if (!full_size(b)) continue;
      for (std::size_t m = 0; m < kInputDim; ++m) {
        bool neighbours = a.upper[m] == b.lower[m];
        for (std::size_t d = 0; d < kInputDim && neighbours; ++d) {
          if (d != m) neighbours = a.lower[d] == b.lower[d];
        }
        if (!neighbours) continue;
        InputVector mid{};
        for (std::size_t d = 0; d < kInputDim; ++d) mid[d] = 0.5 * (a.lower[d] + a.upper[d]);
        mid[m] = a.upper[m];
        worst_face = std::max({worst_face, std::abs(indicator(mid, a, zeta) - 0.5),
                               std::abs(indicator(mid, b, zeta) - 0.5)});
        ++faces;
      }
    }
  }
  return {worst_sum <= 0.02 && worst_face <= 1e-6 && faces > 0,
          fmt("%zu regions, max |sum - 1| %.3g over 1e4 interior points, max face deviation %.3g "
              "over %zu faces",
              regions.size(), worst_sum, worst_face, faces)};
}

IrbfnModel random_model(Gen& gen) {
  IrbfnModel model = make_model(Orthotope{{1.5, -2.5, -0.4}, {6.5, 2.5, 0.4}}, {2.5, 2.5, 0.4},
                                {15, 15, 100}, 6, gen.engine()());
  for (Region& r : model.regions) {
    for (OutputVector& w : r.net.weights) {
      for (std::size_t k = 0; k < 4; ++k) w[k] = gen.uniform(-0.1, 0.1);
      w[4] = gen.uniform(2.0, 3.0);
    }
  }
  return model;
}

InputVector desk_point(Gen& gen) {
  return {gen.uniform(2, 6), gen.uniform(-2, 2), gen.uniform(-0.3, 0.3)};
}

Outcome gradient_fidelity() {
  Gen gen(5);
  double worst_fwd = 0.0, worst_grad = 0.0, worst_end = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const IrbfnModel model = random_model(gen);
    const InputVector x = desk_point(gen);
    const GoalState g{x[0], x[1], x[2], 0};

    const double h = 1e-5;
    const ForwardJacobian jf = forward_jacobian(model, g);
    const GoalEndpointJacobian jc = endpoint_jacobian(model, g);
    const GoalEndpointJacobian ja =
        endpoint_jacobian(model, g, kDefaultQuadratureIntervals, JacobianMethod::kAnalytic);
    for (std::size_t m = 0; m < kInputDim; ++m) {
      InputVector plus = x, minus = x;
      plus[m] += h;
      minus[m] -= h;
      const auto fp = evaluate(model, plus);
      const auto fm = evaluate(model, minus);
      for (std::size_t k = 0; k < kOutputDim; ++k) {
        const double fd = (fp[k] - fm[k]) / (2 * h);
        if (std::abs(fd) > 1e-6) {
          worst_fwd = std::max(worst_fwd, std::abs(jf(static_cast<int>(k), static_cast<int>(m)) - fd) / std::abs(fd));
        }
      }
      const Pose pp = integrate_pose(forward(model, GoalState{plus[0], plus[1], plus[2], 0}),
                                     kDefaultQuadratureIntervals);
      const Pose pm = integrate_pose(forward(model, GoalState{minus[0], minus[1], minus[2], 0}),
                                     kDefaultQuadratureIntervals);
      const double fd[4] = {(pp.x - pm.x) / (2 * h), (pp.y - pm.y) / (2 * h),
                            (pp.theta - pm.theta) / (2 * h), (pp.kappa - pm.kappa) / (2 * h)};
      for (int r = 0; r < 4; ++r) {
        if (std::abs(fd[r]) > 1e-6) {
          for (const GoalEndpointJacobian* je : {&jc, &ja}) {
            worst_end = std::max(worst_end, std::abs((*je)(r, static_cast<int>(m)) - fd[r]) / std::abs(fd[r]));
          }
        }
      }
    }

    // Parameter gradient along a random direction.
    std::vector<TrainingSample> batch(8);
    for (TrainingSample& s : batch) {
      s.input = desk_point(gen);
      for (double& v : s.target) v = gen.uniform(-1, 1);
    }
    const std::vector<double> grad = compute_gradients(model, batch);
    const std::vector<double> base = flatten_parameters(model);
    std::vector<double> dir(base.size());
    for (double& d : dir) d = gen.uniform(-1, 1);
    IrbfnModel probe = model;
    auto loss_at = [&](double step) {
      std::vector<double> p = base;
      for (std::size_t i = 0; i < p.size(); ++i) p[i] += step * dir[i];
      assign_parameters(probe, p);
      return dataset_loss(probe, batch);
    };
    const double fd = (loss_at(1e-6) - loss_at(-1e-6)) / 2e-6;
    double analytic = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) analytic += grad[i] * dir[i];
    worst_grad = std::max(worst_grad, std::abs(fd - analytic) / std::abs(fd));
  }
  return {worst_fwd <= 1e-4 && worst_grad <= 1e-4 && worst_end <= 1e-3,
          fmt("worst relative error: forward %.3g, parameter gradient %.3g, endpoint %.3g", worst_fwd,
              worst_grad, worst_end)};
}

Outcome desk_end_to_end() {
  const auto t0 = Clock::now();
  g_desk = new DeskRun;
  g_desk->table = generate(desk_scale_grid());
  auto [model, history] = train(g_desk->table, make_model(desk_scale_grid(), desk_scale_model_config(), 0),
                                desk_scale_train_config());
  g_desk->model = std::move(model);
  g_desk->history = std::move(history);
  const auto goals = random_goals(grid_box(desk_scale_grid()), 500, 6);
  const ErrorReport e = endpoint_errors(g_desk->model, goals);
  g_desk->seconds = seconds_since(t0);
  const double loss = g_desk->history.loss.back();
  const bool pass = loss <= 0.05 && e.mean_err_x <= 0.1 && e.mean_err_y <= 0.1 &&
                    e.mean_err_theta <= 0.05 && g_desk->seconds <= 15 * 60;
  return {pass, fmt("%zu/%zu valid records, final loss %.4g, mean errors x %.4f m y %.4f m "
                    "theta %.4f rad, %.1f s",
                    g_desk->table.valid_count(), g_desk->table.records.size(), loss, e.mean_err_x,
                    e.mean_err_y, e.mean_err_theta, g_desk->seconds)};
}

Outcome speedup() {
  if (!g_desk) return {false, "desk-scale model unavailable"};
  const ThroughputReport t = bench_throughput(g_desk->model, grid_box(desk_scale_grid()), 500, 5, 7);
  return {t.speedup >= 10.0, fmt("irbfn %.1f Hz, newton %.2f Hz, speedup %.1fx (500 goals, %zu repeats)",
                                 t.irbfn_hz, t.newton_hz, t.speedup, t.repeats)};
}

Outcome bound_structure() {
  Gen gen(8);
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const BoundInputs b{static_cast<double>(gen.integer(1, 100000)), gen.uniform(0.05, 1.0),
                        gen.uniform(0, 10), gen.uniform(0, 2), gen.uniform(0, 20), gen.uniform(0, 20)};
    const double base = interpolation_bound(b);
    const double bump = gen.uniform(0.0, 5.0);
    BoundInputs v = b;
    v.n_samples += 1 + std::floor(bump);
    violations += interpolation_bound(v) > base;
    for (double BoundInputs::*field : {&BoundInputs::hoelder_const, &BoundInputs::spacing,
                                       &BoundInputs::sup_norm_model, &BoundInputs::sup_norm_target}) {
      v = b;
      v.*field += bump;
      violations += interpolation_bound(v) < base;
    }
  }
  const double hand = interpolation_bound({2, 1, 1, 1, 0, 0});

  if (!g_desk) return {false, "desk-scale artifacts unavailable"};
  TempDir dir;
  save_table(g_desk->table, dir / "lut.bin");
  save_model(g_desk->model, dir / "model.bin");
  std::ostringstream out, err;
  const int code = irbfn::cli::run({"irbfn", "check-bound", "--out", dir.path().string()}, out, err);
  double bound = std::nan("");
  std::istringstream lines(out.str());
  for (std::string line; std::getline(lines, line);) {
    if (line.rfind("parameter bound: ", 0) == 0) bound = std::stod(line.substr(17));
  }
  const bool pipeline = code == 0 && std::isfinite(bound) && out.str().find("measured") != std::string::npos;
  return {violations == 0 && std::abs(hand - std::sqrt(2.0)) <= 1e-15 && pipeline,
          fmt("%d monotonicity violations in 1000 draws, hand example %.15f, check-bound exit %d "
              "with bound %.4g",
              violations, hand, code, bound)};
}

Outcome persistence() {
  if (!g_desk) return {false, "desk-scale artifacts unavailable"};
  TempDir dir;
  std::vector<std::string> notes;
  bool pass = true;

  save_table(g_desk->table, dir / "lut.bin");
  save_model(g_desk->model, dir / "model.bin");
  const auto lut_bytes = irbfn::testing::read_bytes(dir / "lut.bin");
  const auto model_bytes = irbfn::testing::read_bytes(dir / "model.bin");
  save_table(load_table(dir / "lut.bin"), dir / "lut2.bin");
  save_model(load_model(dir / "model.bin"), dir / "model2.bin");
  const bool round_trip = irbfn::testing::read_bytes(dir / "lut2.bin") == lut_bytes &&
                          irbfn::testing::read_bytes(dir / "model2.bin") == model_bytes &&
                          load_table(dir / "lut.bin") == g_desk->table &&
                          load_model(dir / "model.bin") == g_desk->model;
  pass = pass && round_trip;
  notes.push_back(round_trip ? "round trips bitwise" : "round trip mismatch");

  auto expect_format_error = [&](const std::vector<char>& bytes, const std::string& name,
                                 const std::string& needle, bool model) {
    irbfn::testing::write_bytes(dir / name, bytes);
    try {
      if (model) {
        load_model(dir / name);
      } else {
        load_table(dir / name);
      }
    } catch (const FormatError& e) {
      return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
  };
  auto bad = lut_bytes;
  bad[0] = 'X';
  const bool lut_magic = expect_format_error(bad, "bad_magic.bin", "magic", false);
  bad = lut_bytes;
  bad.resize(lut_bytes.size() / 2);
  const bool lut_trunc = expect_format_error(bad, "trunc.bin", "byte offset", false);
  bad = model_bytes;
  bad[25] = 0x40;
  const bool model_count = expect_format_error(bad, "bad_count.bin", "region count", true);
  bad = model_bytes;
  bad.resize(model_bytes.size() - 9);
  const bool model_trunc = expect_format_error(bad, "trunc_model.bin", "truncated", true);
  const bool corrupt = lut_magic && lut_trunc && model_count && model_trunc;
  pass = pass && corrupt;
  if (corrupt) {
    notes.push_back("corruptions named");
  } else {
    notes.push_back(fmt("unnamed corruption (lut magic %d, lut truncation %d, model region count "
                        "%d, model truncation %d)",
                        lut_magic, lut_trunc, model_count, model_trunc));
  }

  const LookupTable parallel = generate(desk_scale_grid(), {}, 4);
  save_table(parallel, dir / "lut4.bin");
  const bool workers = irbfn::testing::read_bytes(dir / "lut4.bin") == lut_bytes;
  pass = pass && workers;
  notes.push_back(workers ? "1 and 4 workers identical" : "worker count changes the table");

  std::string detail;
  for (const auto& n : notes) detail += (detail.empty() ? "" : ", ") + n;
  return {pass, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"straight-line oracle", straight_line},
      {"arc inversion", arc_inversion},
      {"quadrature order", quadrature_order},
      {"partition of unity", partition_of_unity},
      {"gradient fidelity", gradient_fidelity},
      {"desk-scale end to end", desk_end_to_end},
      {"speedup", speedup},
      {"bound structure", bound_structure},
      {"persistence", persistence},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s  %zu  %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failures),
              criteria.size());
  delete g_desk;
  return failures == 0 ? 0 : 1;
}

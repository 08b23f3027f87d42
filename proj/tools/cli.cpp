#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "irbfn/analysis.hpp"
#include "irbfn/errors.hpp"
#include "irbfn/lut.hpp"
#include "irbfn/network.hpp"
#include "irbfn/optimizer.hpp"
#include "irbfn/presets.hpp"
#include "irbfn/training.hpp"

namespace irbfn::cli {
namespace {

namespace fs = std::filesystem;

// Bad flags, missing inputs, malformed goal files: exit 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonFlags {
  std::uint64_t seed = 0;
  std::string out = ".";
  std::string config;
};

struct GridFlags {
  double x_min = 2.0, x_max = 6.0, x_step = 0.5;
  double y_min = -2.0, y_max = 2.0, y_step = 0.5;
  double theta_min = -0.3, theta_max = 0.3, theta_step = 0.1;

  GridSpec spec() const {
    return GridSpec::from_bounds(x_min, x_max, x_step, y_min, y_max, y_step, theta_min,
                                 theta_max, theta_step);
  }
};

struct GenLutFlags {
  CommonFlags common;
  GridFlags grid;
  SolveOptions solve;
  unsigned workers = 1;
  std::string lut;
};

struct TrainFlags {
  CommonFlags common;
  std::string lut;
  std::string model;
  std::string history;
  TrainConfig train = desk_scale_train_config();
  ModelConfig arch = desk_scale_model_config();
};

struct InferFlags {
  CommonFlags common;
  std::string model;
  std::vector<std::string> goals;
  std::string goals_csv;
  int samples = 101;
  int quadrature_n = kDefaultQuadratureIntervals;
  bool svg = false;
};

struct BenchFlags {
  CommonFlags common;
  std::string model;
  std::string lut;
  std::size_t goals = 500;
  std::size_t repeats = 20;
  int quadrature_n = kDefaultQuadratureIntervals;
};

struct CheckBoundFlags {
  CommonFlags common;
  std::string lut;
  std::string model;
  std::optional<double> lipschitz;
  std::size_t eval_goals = 500;
  int quadrature_n = kDefaultQuadratureIntervals;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--seed", flags.seed, "Seed for every randomised step")->capture_default_str();
  cmd->add_option("--out", flags.out, "Output directory")->capture_default_str();
  cmd->add_option("--config", flags.config, "key=value file; explicit flags take precedence");
}

void add_solve(CLI::App* cmd, SolveOptions& solve) {
  cmd->add_option("--max-iters", solve.max_iters, "Newton iteration limit")->capture_default_str();
  cmd->add_option("--tol", solve.tol_objective, "Objective threshold (m^2)")->capture_default_str();
  cmd->add_option("--damping", solve.damping, "Initial Newton step scale")->capture_default_str();
  cmd->add_option("--quadrature-n", solve.quadrature_n, "Simpson interval count")
      ->capture_default_str();
  cmd->add_option("--kappa-max", solve.limits.kappa_max, "Curvature limit (1/m)")
      ->capture_default_str();
  cmd->add_option("--wheelbase", solve.limits.wheelbase, "Wheelbase (m)")->capture_default_str();
  cmd->add_option("--length-slack", solve.length_slack, "Validity slack on s_f")
      ->capture_default_str();
}

fs::path resolve(const std::string& explicit_path, const CommonFlags& common,
                 const char* default_name) {
  if (!explicit_path.empty()) return explicit_path;
  return fs::path(common.out) / default_name;
}

void require_file(const fs::path& path, const char* what) {
  if (!fs::is_regular_file(path)) {
    throw UsageError(std::string(what) + " '" + path.string() + "' does not exist");
  }
}

void ensure_out_dir(const CommonFlags& common) {
  std::error_code ec;
  fs::create_directories(common.out, ec);
  if (!fs::is_directory(common.out)) {
    throw UsageError("output directory '" + common.out + "' cannot be created");
  }
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Splices `key=value` lines from the --config file into the argument list
// for every key not already given on the command line.
std::vector<std::string> apply_config_file(std::vector<std::string> args) {
  std::string config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
  }
  if (config_path.empty()) return args;
  std::ifstream in(config_path);
  if (!in) throw UsageError("config file '" + config_path + "' cannot be read");

  auto given = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };

  std::vector<std::string> extra;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config file '" + config_path + "' line " + std::to_string(line_no) +
                       ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.rfind("--", 0) != 0) key = "--" + key;
    if (key == "--config" || given(key)) continue;
    if (value == "true") {
      extra.push_back(key);
    } else if (value != "false") {
      extra.push_back(key);
      extra.push_back(value);
    }
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

GoalState parse_goal(const std::string& text, const std::string& where) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    field = trim(field);
    try {
      std::size_t used = 0;
      values.push_back(std::stod(field, &used));
      if (used != field.size()) throw std::invalid_argument(field);
    } catch (const std::exception&) {
      throw UsageError(where + ": '" + field + "' is not a number");
    }
  }
  if (values.size() != 3 && values.size() != 4) {
    throw UsageError(where + ": expected x,y,theta[,kappa], got " + std::to_string(values.size()) +
                     " fields");
  }
  return {values[0], values[1], values[2], values.size() == 4 ? values[3] : 0.0};
}

std::vector<GoalState> read_goal_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("goal file '" + path.string() + "' cannot be read");
  std::vector<GoalState> goals;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    // Optional header row.
    if (line_no == 1 && std::isalpha(static_cast<unsigned char>(line[0]))) continue;
    goals.push_back(parse_goal(line, path.string() + " line " + std::to_string(line_no)));
  }
  return goals;
}

std::string format_goal(const GoalState& g) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "(%.6g, %.6g, %.6g)", g.x, g.y, g.theta);
  return buf;
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int cmd_gen_lut(const GenLutFlags& f, std::ostream& out) {
  const GridSpec spec = f.grid.spec();
  ensure_out_dir(f.common);
  const fs::path path = resolve(f.lut, f.common, "lut.bin");
  const auto start = std::chrono::steady_clock::now();
  const LookupTable table = generate(spec, f.solve, f.workers);
  const double seconds = elapsed_seconds(start);
  ensure_parent(path);
  save_table(table, path);
  const double fraction =
      static_cast<double>(table.valid_count()) / static_cast<double>(table.records.size());
  out << "goals: " << table.records.size() << "\n"
      << "valid: " << table.valid_count() << " (" << fraction * 100.0 << "%)\n"
      << "wall time: " << seconds << " s\n"
      << "wrote " << path.string() << "\n";
  return kExitOk;
}

int cmd_train(const TrainFlags& f, std::ostream& out) {
  const fs::path lut_path = resolve(f.lut, f.common, "lut.bin");
  require_file(lut_path, "LUT file");
  ensure_out_dir(f.common);
  const LookupTable table = load_table(lut_path);
  TrainConfig cfg = f.train;
  cfg.seed = f.common.seed;
  IrbfnModel model = make_model(table.spec, f.arch, f.common.seed);
  auto [trained, history] = train(table, std::move(model), cfg);

  const fs::path model_path = resolve(f.model, f.common, "model.bin");
  const fs::path history_path = resolve(f.history, f.common, "history.csv");
  ensure_parent(model_path);
  ensure_parent(history_path);
  save_model(trained, model_path);
  std::ofstream hist(history_path);
  if (!hist) throw Error("cannot write '" + history_path.string() + "'");
  write_history_csv(hist, history);

  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", history.loss.back());
  out << "regions: " << trained.regions.size() << "\n"
      << "training samples: " << table.valid_count() << "\n"
      << "final loss: " << buf << "\n"
      << "wrote " << model_path.string() << " and " << history_path.string() << "\n";
  return kExitOk;
}

int cmd_infer(const InferFlags& f, std::ostream& out) {
  const fs::path model_path = resolve(f.model, f.common, "model.bin");
  require_file(model_path, "model file");
  std::vector<GoalState> goals;
  for (std::size_t i = 0; i < f.goals.size(); ++i) {
    goals.push_back(parse_goal(f.goals[i], "--goal #" + std::to_string(i + 1)));
  }
  if (!f.goals_csv.empty()) {
    const auto from_file = read_goal_csv(f.goals_csv);
    goals.insert(goals.end(), from_file.begin(), from_file.end());
  }
  if (goals.empty()) throw UsageError("no goals given (use --goal x,y,theta or --goals file.csv)");
  if (f.samples < 2) throw UsageError("--samples must be >= 2");
  ensure_out_dir(f.common);

  const IrbfnModel model = load_model(model_path);
  std::vector<std::vector<TrajectorySample>> trajectories;
  std::vector<std::string> errors;
  for (std::size_t i = 0; i < goals.size(); ++i) {
    const GoalState& g = goals[i];
    try {
      ClothoidParams q = forward(model, g);
      q.s_f = std::max(q.s_f, 1e-3);
      auto samples = sample_trajectory(spiral_coeffs(q), q.s_f, f.samples, f.quadrature_n);
      const fs::path csv = fs::path(f.common.out) / ("trajectory_" + std::to_string(i) + ".csv");
      std::ofstream file(csv);
      if (!file) throw Error("cannot write '" + csv.string() + "'");
      write_trajectory_csv(file, samples);
      const Pose& end = samples.back().pose;
      char buf[160];
      std::snprintf(buf, sizeof(buf), "goal %zu %s -> end (%.6g, %.6g, %.6g) s_f=%.6g", i,
                    format_goal(g).c_str(), end.x, end.y, end.theta, q.s_f);
      out << buf << "  " << csv.string() << "\n";
      trajectories.push_back(std::move(samples));
    } catch (const Error& e) {
      errors.push_back("goal " + std::to_string(i) + " " + format_goal(g) + ": " + e.what());
    }
  }
  if (f.svg && !trajectories.empty()) {
    const fs::path svg = fs::path(f.common.out) / "trajectories.svg";
    std::ofstream file(svg);
    if (!file) throw Error("cannot write '" + svg.string() + "'");
    file << render_svg(trajectories);
    out << "wrote " << svg.string() << "\n";
  }
  if (!errors.empty()) {
    out << "errors:\n";
    for (const auto& e : errors) out << "  " << e << "\n";
  }
  return trajectories.empty() ? kExitFailure : kExitOk;
}

Orthotope bench_box(const BenchFlags& f, const IrbfnModel& model) {
  if (!f.lut.empty()) {
    require_file(f.lut, "LUT file");
    return grid_box(load_table(f.lut).spec);
  }
  // Without a table, stay 10% inside the model domain on each side.
  Orthotope box = model.domain;
  for (std::size_t m = 0; m < kInputDim; ++m) {
    const double margin = 0.1 * (box.upper[m] - box.lower[m]);
    box.lower[m] += margin;
    box.upper[m] -= margin;
  }
  return box;
}

int cmd_bench(const BenchFlags& f, std::ostream& out) {
  const fs::path model_path = resolve(f.model, f.common, "model.bin");
  require_file(model_path, "model file");
  if (f.goals < 1) throw UsageError("--goals must be >= 1");
  ensure_out_dir(f.common);
  const IrbfnModel model = load_model(model_path);
  SolveOptions opts;
  opts.quadrature_n = f.quadrature_n;
  const ThroughputReport t =
      bench_throughput(model, bench_box(f, model), f.goals, f.repeats, f.common.seed, opts);
  AnalysisReport report;
  report.throughput = t;
  const fs::path json = fs::path(f.common.out) / "bench.json";
  std::ofstream file(json);
  if (!file) throw Error("cannot write '" + json.string() + "'");
  file << to_json(report) << "\n";
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "goals: %zu  repeats: %zu\nirbfn: %.2f Hz\nnewton: %.2f Hz\nspeedup: %.1fx\n",
                t.goal_count, t.repeats, t.irbfn_hz, t.newton_hz, t.speedup);
  out << buf << "wrote " << json.string() << "\n";
  return kExitOk;
}

int cmd_check_bound(const CheckBoundFlags& f, std::ostream& out) {
  const fs::path lut_path = resolve(f.lut, f.common, "lut.bin");
  const fs::path model_path = resolve(f.model, f.common, "model.bin");
  require_file(lut_path, "LUT file");
  require_file(model_path, "model file");
  if (f.eval_goals < 1) throw UsageError("--eval-goals must be >= 1");
  if (f.lipschitz && !(*f.lipschitz >= 0.0)) throw UsageError("--lipschitz must be >= 0");
  ensure_out_dir(f.common);

  const LookupTable table = load_table(lut_path);
  const IrbfnModel model = load_model(model_path);
  BoundInputs b;
  b.n_samples = static_cast<double>(table.valid_count());
  b.hoelder_order = 1.0;
  b.hoelder_const = f.lipschitz ? *f.lipschitz : estimate_hoelder(table).constant;
  b.spacing = grid_spacing(table.spec);
  const SupNorms norms = estimate_sup_norms(model, table);
  b.sup_norm_model = norms.model;
  b.sup_norm_target = norms.target;
  const double bound = interpolation_bound(b);

  const std::vector<GoalState> goals =
      random_goals(grid_box(table.spec), f.eval_goals, f.common.seed);
  const ErrorReport errors = endpoint_errors(model, goals, f.quadrature_n);
  std::array<double, 3> propagated{};
  const std::array<double, 5> param_bound = {bound, bound, bound, bound, bound};
  for (const GoalState& g : goals) {
    ClothoidParams q = forward(model, g);
    q.s_f = std::max(q.s_f, 1e-3);
    const auto p = propagate_bound(param_bound, q, f.quadrature_n);
    for (std::size_t i = 0; i < 3; ++i) propagated[i] = std::max(propagated[i], p[i]);
  }

  AnalysisReport report;
  report.errors = errors;
  report.bound_inputs = b;
  report.bound_value = bound;
  const fs::path json = fs::path(f.common.out) / "bound.json";
  std::ofstream file(json);
  if (!file) throw Error("cannot write '" + json.string() + "'");
  file << to_json(report) << "\n";

  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "bound inputs: N=%.0f alpha=%.3g L=%.6g%s s=%.6g |Phi|=%.6g |f|=%.6g\n"
                "parameter bound: %.6g\n"
                "%-10s %-14s %-14s\n"
                "%-10s %-14.6g %-14.6g\n%-10s %-14.6g %-14.6g\n%-10s %-14.6g %-14.6g\n",
                b.n_samples, b.hoelder_order, b.hoelder_const, f.lipschitz ? " (override)" : "",
                b.spacing, b.sup_norm_model, b.sup_norm_target, bound, "axis", "measured",
                "propagated", "x (m)", errors.mean_err_x, propagated[0], "y (m)",
                errors.mean_err_y, propagated[1], "theta", errors.mean_err_theta, propagated[2]);
  out << buf << "wrote " << json.string() << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Clothoid trajectory generation with interpolating RBF networks", "irbfn"};
  app.require_subcommand(1);

  GenLutFlags gen;
  TrainFlags tr;
  InferFlags inf;
  BenchFlags bench;
  CheckBoundFlags chk;

  auto* gen_cmd = app.add_subcommand("gen-lut", "Solve a goal grid and write the lookup table");
  add_common(gen_cmd, gen.common);
  gen_cmd->add_option("--x-min", gen.grid.x_min)->capture_default_str();
  gen_cmd->add_option("--x-max", gen.grid.x_max)->capture_default_str();
  gen_cmd->add_option("--x-step", gen.grid.x_step)->capture_default_str();
  gen_cmd->add_option("--y-min", gen.grid.y_min)->capture_default_str();
  gen_cmd->add_option("--y-max", gen.grid.y_max)->capture_default_str();
  gen_cmd->add_option("--y-step", gen.grid.y_step)->capture_default_str();
  gen_cmd->add_option("--theta-min", gen.grid.theta_min)->capture_default_str();
  gen_cmd->add_option("--theta-max", gen.grid.theta_max)->capture_default_str();
  gen_cmd->add_option("--theta-step", gen.grid.theta_step)->capture_default_str();
  gen_cmd->add_option("--workers", gen.workers, "Solver threads")->capture_default_str();
  gen_cmd->add_option("--lut", gen.lut, "Output table (default <out>/lut.bin)");
  add_solve(gen_cmd, gen.solve);

  auto* train_cmd = app.add_subcommand("train", "Fit a model to a lookup table");
  add_common(train_cmd, tr.common);
  train_cmd->add_option("--lut", tr.lut, "Input table (default <out>/lut.bin)");
  train_cmd->add_option("--model", tr.model, "Output model (default <out>/model.bin)");
  train_cmd->add_option("--history", tr.history, "Loss CSV (default <out>/history.csv)");
  train_cmd->add_option("--epochs", tr.train.epochs)->capture_default_str();
  train_cmd->add_option("--batch-size", tr.train.batch_size)->capture_default_str();
  train_cmd->add_option("--lr", tr.train.learning_rate)->capture_default_str();
  train_cmd->add_option("--beta1", tr.train.beta1)->capture_default_str();
  train_cmd->add_option("--beta2", tr.train.beta2)->capture_default_str();
  train_cmd->add_option("--epsilon", tr.train.epsilon)->capture_default_str();
  train_cmd->add_option("--centers", tr.arch.centers_per_region)->capture_default_str();
  train_cmd->add_option("--region-x", tr.arch.region_sizes[0])->capture_default_str();
  train_cmd->add_option("--region-y", tr.arch.region_sizes[1])->capture_default_str();
  train_cmd->add_option("--region-theta", tr.arch.region_sizes[2])->capture_default_str();
  train_cmd->add_option("--zeta-x", tr.arch.zeta[0])->capture_default_str();
  train_cmd->add_option("--zeta-y", tr.arch.zeta[1])->capture_default_str();
  train_cmd->add_option("--zeta-theta", tr.arch.zeta[2])->capture_default_str();
  train_cmd->add_option("--pad-x", tr.arch.domain_pad[0])->capture_default_str();
  train_cmd->add_option("--pad-y", tr.arch.domain_pad[1])->capture_default_str();
  train_cmd->add_option("--pad-theta", tr.arch.domain_pad[2])->capture_default_str();

  auto* infer_cmd = app.add_subcommand("infer", "Generate trajectories for goals");
  add_common(infer_cmd, inf.common);
  infer_cmd->add_option("--model", inf.model, "Model file (default <out>/model.bin)");
  infer_cmd->add_option("--goal", inf.goals, "Goal x,y,theta[,kappa] (repeatable)");
  infer_cmd->add_option("--goals", inf.goals_csv, "CSV file of goals");
  infer_cmd->add_option("--samples", inf.samples, "Poses per trajectory")->capture_default_str();
  infer_cmd->add_option("--quadrature-n", inf.quadrature_n)->capture_default_str();
  infer_cmd->add_flag("--svg", inf.svg, "Also write <out>/trajectories.svg");

  auto* bench_cmd = app.add_subcommand("bench", "Time batched inference against Newton solves");
  add_common(bench_cmd, bench.common);
  bench_cmd->add_option("--model", bench.model, "Model file (default <out>/model.bin)");
  bench_cmd->add_option("--lut", bench.lut, "Draw goals from this table's box");
  bench_cmd->add_option("--goals", bench.goals)->capture_default_str();
  bench_cmd->add_option("--repeats", bench.repeats)->capture_default_str();
  bench_cmd->add_option("--quadrature-n", bench.quadrature_n)->capture_default_str();

  auto* bound_cmd =
      app.add_subcommand("check-bound", "Evaluate the interpolation bound against measured error");
  add_common(bound_cmd, chk.common);
  bound_cmd->add_option("--lut", chk.lut, "Table file (default <out>/lut.bin)");
  bound_cmd->add_option("--model", chk.model, "Model file (default <out>/model.bin)");
  bound_cmd->add_option("--lipschitz", chk.lipschitz, "Override the estimated Lipschitz constant");
  bound_cmd->add_option("--eval-goals", chk.eval_goals)->capture_default_str();
  bound_cmd->add_option("--quadrature-n", chk.quadrature_n)->capture_default_str();

  try {
    std::vector<std::string> args = apply_config_file(raw_args);
    // CLI11 consumes arguments in reverse order.
    std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(reversed.begin(), reversed.end());
    app.parse(reversed);

    if (gen_cmd->parsed()) return cmd_gen_lut(gen, out);
    if (train_cmd->parsed()) return cmd_train(tr, out);
    if (infer_cmd->parsed()) return cmd_infer(inf, out);
    if (bench_cmd->parsed()) return cmd_bench(bench, out);
    if (bound_cmd->parsed()) return cmd_check_bound(chk, out);
    return kExitUsage;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace irbfn::cli

#include "irbfn/lut.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <thread>

#include "binary_io.hpp"
#include "irbfn/errors.hpp"

namespace irbfn {
namespace {

constexpr char kLutMagic[] = "IRBFNLUT";
constexpr std::uint32_t kLutVersion = 1;
constexpr std::uint64_t kRecordBytes = 5 * 8 + 1;
constexpr const char* kAxisNames[3] = {"x", "y", "theta"};

GridAxis make_axis(const char* name, double min, double max, double step) {
  if (!std::isfinite(min) || !std::isfinite(max) || !std::isfinite(step)) {
    throw ConfigError(std::string("grid bounds for ") + name + " must be finite");
  }
  if (!(step > 0.0)) throw ConfigError(std::string("grid step for ") + name + " must be > 0");
  if (max < min) {
    throw ConfigError(std::string("grid range for ") + name + " is empty (max " +
                      std::to_string(max) + " < min " + std::to_string(min) + ")");
  }
  // The small bias absorbs representation error, e.g. (1.2 - 1.0) / 0.1.
  const double spans = std::floor((max - min) / step + 1e-9);
  return {min, step, static_cast<std::uint64_t>(spans) + 1};
}

// Index of the nearest grid point; exact halves round down.
std::uint64_t nearest_index(const GridAxis& axis, double v, const char* name) {
  const double tolerance = 1e-9 * axis.step;
  if (!(v >= axis.min - tolerance && v <= axis.last() + tolerance)) {
    throw DomainError(std::string("goal ") + name + " = " + std::to_string(v) +
                      " lies outside the table range [" + std::to_string(axis.min) + ", " +
                      std::to_string(axis.last()) + "]");
  }
  const double t = (v - axis.min) / axis.step;
  const double rounded = std::ceil(t - 0.5);
  const double clamped = std::clamp(rounded, 0.0, static_cast<double>(axis.count - 1));
  return static_cast<std::uint64_t>(clamped);
}

}  // namespace

GridSpec GridSpec::from_bounds(double x_min, double x_max, double x_step, double y_min,
                               double y_max, double y_step, double theta_min, double theta_max,
                               double theta_step) {
  return {{make_axis("x", x_min, x_max, x_step), make_axis("y", y_min, y_max, y_step),
           make_axis("theta", theta_min, theta_max, theta_step)}};
}

GoalState GridSpec::goal(std::uint64_t flat_index) const {
  const std::uint64_t it = flat_index % axes[2].count;
  const std::uint64_t rest = flat_index / axes[2].count;
  const std::uint64_t iy = rest % axes[1].count;
  const std::uint64_t ix = rest / axes[1].count;
  return {axes[0].value(ix), axes[1].value(iy), axes[2].value(it), 0.0};
}

GridSpec desk_scale_grid() { return GridSpec::from_bounds(2.0, 6.0, 0.5, -2.0, 2.0, 0.5, -0.3, 0.3, 0.1); }

GridSpec full_scale_grid() {
  const double half_pi = std::numbers::pi / 2.0;
  return GridSpec::from_bounds(1.0, 10.0, 0.1, -6.0, 6.0, 0.1, -half_pi, half_pi, 0.1);
}

std::size_t LookupTable::valid_count() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const LutRecord& r) { return r.valid; }));
}

std::vector<GoalState> enumerate_goals(const GridSpec& spec) {
  for (std::size_t m = 0; m < 3; ++m) {
    const GridAxis& a = spec.axes[m];
    if (!(a.step > 0.0) || a.count == 0 || !std::isfinite(a.min)) {
      throw ConfigError(std::string("invalid grid axis ") + kAxisNames[m]);
    }
  }
  std::vector<GoalState> goals;
  goals.reserve(spec.size());
  for (std::uint64_t i = 0; i < spec.size(); ++i) goals.push_back(spec.goal(i));
  return goals;
}

LookupTable generate(const GridSpec& spec, const SolveOptions& opts, unsigned workers) {
  const std::vector<GoalState> goals = enumerate_goals(spec);
  LookupTable table;
  table.spec = spec;
  table.records.resize(goals.size());

  auto solve_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      LutRecord& rec = table.records[i];
      try {
        const SolveResult r = solve_newton(goals[i], opts);
        rec.params = r.params;
        rec.valid = r.valid;
      } catch (const Error&) {
        rec = LutRecord{};
      }
    }
  };

  workers = std::max(1u, workers);
  if (workers == 1 || goals.size() < 2) {
    solve_range(0, goals.size());
    return table;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (goals.size() + workers - 1) / workers;
  for (std::size_t begin = 0; begin < goals.size(); begin += chunk) {
    pool.emplace_back(solve_range, begin, std::min(goals.size(), begin + chunk));
  }
  pool.clear();
  return table;
}

void save_table(const LookupTable& table, const std::filesystem::path& path) {
  if (table.records.size() != table.spec.size()) {
    throw InvalidParameterError("table record count does not match its grid");
  }
  detail::ByteWriter w;
  w.bytes(std::string_view(kLutMagic, 8));
  w.u32(kLutVersion);
  for (const GridAxis& axis : table.spec.axes) {
    w.f64(axis.min);
    w.f64(axis.step);
    w.u64(axis.count);
  }
  for (const LutRecord& rec : table.records) {
    for (double v : rec.params.to_array()) w.f64(v);
    w.u8(rec.valid ? 1 : 0);
  }
  w.write_file(path);
}

LookupTable load_table(const std::filesystem::path& path) {
  auto r = detail::ByteReader::from_file(path, "LUT file '" + path.string() + "'");
  r.expect_magic(std::string_view(kLutMagic, 8));
  const std::uint32_t version = r.u32("version");
  if (version != kLutVersion) {
    throw UnsupportedVersionError("LUT file '" + path.string() + "': unsupported version " +
                                  std::to_string(version));
  }
  LookupTable table;
  std::uint64_t total = 1;
  for (std::size_t m = 0; m < 3; ++m) {
    GridAxis& axis = table.spec.axes[m];
    axis.min = r.f64("axis min");
    axis.step = r.f64("axis step");
    axis.count = r.u64("axis count");
    if (!std::isfinite(axis.min) || !(axis.step > 0.0) || !std::isfinite(axis.step)) {
      r.fail(std::string("invalid bounds for axis ") + kAxisNames[m]);
    }
    if (axis.count == 0 || axis.count > r.remaining()) {
      r.fail(std::string("implausible point count for axis ") + kAxisNames[m]);
    }
    total *= axis.count;
  }
  if (total > r.remaining() / kRecordBytes) {
    throw FormatError("LUT file '" + path.string() + "': truncated records: header declares " +
                      std::to_string(total) + " records (" + std::to_string(total * kRecordBytes) +
                      " bytes) but only " + std::to_string(r.remaining()) +
                      " bytes follow byte offset " + std::to_string(r.offset()));
  }
  table.records.resize(total);
  for (LutRecord& rec : table.records) {
    std::array<double, 5> v{};
    for (double& x : v) x = r.f64("record");
    rec.params = ClothoidParams::from_array(v);
    const std::uint8_t flag = r.u8("validity flag");
    if (flag > 1) r.fail("validity flag must be 0 or 1");
    rec.valid = flag == 1;
  }
  r.expect_end();
  return table;
}

ClothoidParams nearest(const LookupTable& table, const GoalState& g) {
  const auto& axes = table.spec.axes;
  const std::uint64_t ix = nearest_index(axes[0], g.x, "x");
  const std::uint64_t iy = nearest_index(axes[1], g.y, "y");
  const std::uint64_t it = nearest_index(axes[2], g.theta, "theta");
  const LutRecord& rec = table.records.at(table.spec.index(ix, iy, it));
  if (!rec.valid) {
    throw LookupMissError("nearest table record (" + std::to_string(ix) + ", " +
                          std::to_string(iy) + ", " + std::to_string(it) + ") is invalid");
  }
  return rec.params;
}

}  // namespace irbfn

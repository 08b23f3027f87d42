#include "irbfn/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "binary_io.hpp"
#include "irbfn/errors.hpp"

namespace irbfn {
namespace {

constexpr char kModelMagic[] = "IRBFNNET";
constexpr std::uint32_t kModelVersion = 1;

// Neumaier-compensated accumulator; keeps the blended sum independent of
// region order to within rounding of the final add.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }

  double value() const { return sum + carry; }
};

// (tanh(z) + 1) / 2 and its derivative with respect to z.
struct HalfTanh {
  double value;
  double slope;
};

HalfTanh half_tanh(double z) {
  const double t = std::tanh(z);
  return {0.5 * (t + 1.0), 0.5 * (1.0 - t * t)};
}

struct IndicatorWithGradient {
  double value = 1.0;
  InputVector grad{};
};

IndicatorWithGradient indicator_with_gradient(const InputVector& x, const Orthotope& r,
                                              const InputVector& zeta) {
  std::array<double, kInputDim> factor{};
  std::array<double, kInputDim> dfactor{};
  for (std::size_t m = 0; m < kInputDim; ++m) {
    const HalfTanh up = half_tanh(zeta[m] * (r.upper[m] - x[m]));
    const HalfTanh lo = half_tanh(zeta[m] * (x[m] - r.lower[m]));
    factor[m] = up.value * lo.value;
    dfactor[m] = zeta[m] * (up.value * lo.slope - up.slope * lo.value);
  }
  IndicatorWithGradient out;
  out.value = factor[0] * factor[1] * factor[2];
  out.grad = {dfactor[0] * factor[1] * factor[2], factor[0] * dfactor[1] * factor[2],
              factor[0] * factor[1] * dfactor[2]};
  return out;
}

double squared_distance(const InputVector& a, const InputVector& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dt = a[2] - b[2];
  return dx * dx + dy * dy + dt * dt;
}

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void require_domain(const IrbfnModel& model, const GoalState& g) {
  if (!model.domain.contains_strict(to_input(g))) {
    throw DomainError("goal (" + std::to_string(g.x) + ", " + std::to_string(g.y) + ", " +
                      std::to_string(g.theta) + ") lies outside the model domain");
  }
}

void write_box(detail::ByteWriter& w, const Orthotope& box) {
  for (double v : box.lower) w.f64(v);
  for (double v : box.upper) w.f64(v);
}

Orthotope read_box(detail::ByteReader& r, const char* field) {
  Orthotope box;
  for (double& v : box.lower) v = r.f64(field);
  for (double& v : box.upper) v = r.f64(field);
  for (std::size_t m = 0; m < kInputDim; ++m) {
    if (!std::isfinite(box.lower[m]) || !std::isfinite(box.upper[m]) ||
        !(box.upper[m] > box.lower[m])) {
      r.fail(std::string("degenerate ") + field);
    }
  }
  return box;
}

}  // namespace

bool Orthotope::contains(const InputVector& x) const {
  for (std::size_t m = 0; m < kInputDim; ++m) {
    if (!(x[m] >= lower[m] && x[m] <= upper[m])) return false;
  }
  return true;
}

bool Orthotope::contains_strict(const InputVector& x) const {
  for (std::size_t m = 0; m < kInputDim; ++m) {
    if (!(x[m] > lower[m] && x[m] < upper[m])) return false;
  }
  return true;
}

std::size_t IrbfnModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& region : regions) n += region.net.centers.size() * (kInputDim + kOutputDim);
  return n;
}

std::vector<Orthotope> partition(const Orthotope& domain, const InputVector& sizes) {
  std::array<std::size_t, kInputDim> counts{};
  for (std::size_t m = 0; m < kInputDim; ++m) {
    if (!(sizes[m] > 0.0) || !std::isfinite(sizes[m])) {
      throw ConfigError("partition size must be positive in dimension " + std::to_string(m));
    }
    const double extent = domain.upper[m] - domain.lower[m];
    if (!(extent > 0.0)) {
      throw ConfigError("partition domain is empty in dimension " + std::to_string(m));
    }
    counts[m] = static_cast<std::size_t>(std::ceil(extent / sizes[m] - 1e-9));
    counts[m] = std::max<std::size_t>(counts[m], 1);
  }

  auto interval = [&](std::size_t m, std::size_t i) {
    const double lo = domain.lower[m] + static_cast<double>(i) * sizes[m];
    const double hi = (i + 1 == counts[m])
                          ? domain.upper[m]
                          : std::min(domain.lower[m] + static_cast<double>(i + 1) * sizes[m],
                                     domain.upper[m]);
    return std::pair{lo, hi};
  };

  std::vector<Orthotope> out;
  out.reserve(counts[0] * counts[1] * counts[2]);
  for (std::size_t i = 0; i < counts[0]; ++i) {
    for (std::size_t j = 0; j < counts[1]; ++j) {
      for (std::size_t k = 0; k < counts[2]; ++k) {
        Orthotope box;
        std::tie(box.lower[0], box.upper[0]) = interval(0, i);
        std::tie(box.lower[1], box.upper[1]) = interval(1, j);
        std::tie(box.lower[2], box.upper[2]) = interval(2, k);
        out.push_back(box);
      }
    }
  }
  return out;
}

double indicator(const InputVector& x, const Orthotope& region, const InputVector& zeta) {
  double value = 1.0;
  for (std::size_t m = 0; m < kInputDim; ++m) {
    value *= 0.5 * (std::tanh(zeta[m] * (region.upper[m] - x[m])) + 1.0);
    value *= 0.5 * (std::tanh(zeta[m] * (x[m] - region.lower[m])) + 1.0);
  }
  return value;
}

double indicator_sum(const IrbfnModel& model, const InputVector& x) {
  CompensatedSum total;
  for (const auto& region : model.regions) total.add(indicator(x, region.bounds, model.zeta));
  return total.value();
}

IrbfnModel make_model(const Orthotope& domain, const InputVector& region_sizes,
                      const InputVector& zeta, std::size_t centers_per_region,
                      std::uint64_t seed) {
  if (centers_per_region == 0) throw ConfigError("each region needs at least one center");
  for (double z : zeta) {
    if (!(z > 0.0) || !std::isfinite(z)) throw ConfigError("indicator sharpness must be positive");
  }
  IrbfnModel model;
  model.zeta = zeta;
  model.domain = domain;
  std::mt19937_64 rng(seed);
  for (const Orthotope& box : partition(domain, region_sizes)) {
    Region region;
    region.bounds = box;
    region.net.centers.resize(centers_per_region);
    region.net.weights.assign(centers_per_region, OutputVector{});
    for (auto& c : region.net.centers) {
      for (std::size_t m = 0; m < kInputDim; ++m) {
        c[m] = box.lower[m] + unit_uniform(rng) * (box.upper[m] - box.lower[m]);
      }
    }
    model.regions.push_back(std::move(region));
  }
  return model;
}

OutputVector evaluate(const IrbfnModel& model, const InputVector& x) {
  std::array<CompensatedSum, kOutputDim> total{};
  for (const auto& region : model.regions) {
    const double gamma = indicator(x, region.bounds, model.zeta);
    OutputVector local{};
    const auto& centers = region.net.centers;
    const auto& weights = region.net.weights;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      const double rho = inverse_quadratic(squared_distance(x, centers[i]));
      for (std::size_t j = 0; j < kOutputDim; ++j) local[j] += weights[i][j] * rho;
    }
    for (std::size_t j = 0; j < kOutputDim; ++j) total[j].add(gamma * local[j]);
  }
  OutputVector out{};
  for (std::size_t j = 0; j < kOutputDim; ++j) out[j] = total[j].value();
  return out;
}

ClothoidParams forward(const IrbfnModel& model, const GoalState& goal) {
  require_domain(model, goal);
  return ClothoidParams::from_array(evaluate(model, to_input(goal)));
}

std::vector<ClothoidParams> forward(const IrbfnModel& model, std::span<const GoalState> goals) {
  std::vector<ClothoidParams> out;
  out.reserve(goals.size());
  for (const auto& g : goals) out.push_back(forward(model, g));
  return out;
}

ForwardJacobian forward_jacobian(const IrbfnModel& model, const GoalState& g) {
  require_domain(model, g);
  const InputVector x = to_input(g);
  ForwardJacobian jac = ForwardJacobian::Zero();
  for (const auto& region : model.regions) {
    const IndicatorWithGradient gamma = indicator_with_gradient(x, region.bounds, model.zeta);
    OutputVector local{};
    Eigen::Matrix<double, 5, 3> dlocal = Eigen::Matrix<double, 5, 3>::Zero();
    const auto& centers = region.net.centers;
    const auto& weights = region.net.weights;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      const double rho = inverse_quadratic(squared_distance(x, centers[i]));
      // d rho / d x_m = -2 (x_m - c_m) rho^2; zero at the center itself.
      std::array<double, kInputDim> drho{};
      for (std::size_t m = 0; m < kInputDim; ++m) drho[m] = -2.0 * (x[m] - centers[i][m]) * rho * rho;
      for (std::size_t j = 0; j < kOutputDim; ++j) {
        local[j] += weights[i][j] * rho;
        for (std::size_t m = 0; m < kInputDim; ++m) {
          dlocal(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(m)) += weights[i][j] * drho[m];
        }
      }
    }
    for (std::size_t j = 0; j < kOutputDim; ++j) {
      for (std::size_t m = 0; m < kInputDim; ++m) {
        const auto jj = static_cast<Eigen::Index>(j);
        const auto mm = static_cast<Eigen::Index>(m);
        jac(jj, mm) += gamma.grad[m] * local[j] + gamma.value * dlocal(jj, mm);
      }
    }
  }
  return jac;
}

GoalEndpointJacobian endpoint_jacobian(const IrbfnModel& model, const GoalState& g,
                                       int intervals, JacobianMethod method) {
  const ClothoidParams q = forward(model, g);
  const ForwardJacobian dq = forward_jacobian(model, g);
  if (dq.isZero(0.0)) return GoalEndpointJacobian::Zero();

  Eigen::Matrix<double, 4, 5> dpose;
  dpose.topRows<3>() = residual_jacobian(q, g, intervals, method);
  // kappa(s_f) reproduces kappa3 identically.
  dpose.row(3) << 0.0, 0.0, 0.0, 1.0, 0.0;
  return dpose * dq;
}

void save_model(const IrbfnModel& model, const std::filesystem::path& path) {
  detail::ByteWriter w;
  w.bytes(std::string_view(kModelMagic, 8));
  w.u32(kModelVersion);
  w.u32(static_cast<std::uint32_t>(kInputDim));
  w.u32(static_cast<std::uint32_t>(kOutputDim));
  w.u64(model.regions.size());
  for (double z : model.zeta) w.f64(z);
  write_box(w, model.domain);
  for (const auto& region : model.regions) {
    if (region.net.weights.size() != region.net.centers.size()) {
      throw InvalidParameterError("region has mismatched center and weight counts");
    }
    write_box(w, region.bounds);
    w.u64(region.net.centers.size());
    for (const auto& c : region.net.centers) {
      for (double v : c) w.f64(v);
    }
    for (const auto& k : region.net.weights) {
      for (double v : k) w.f64(v);
    }
  }
  w.write_file(path);
}

IrbfnModel load_model(const std::filesystem::path& path) {
  auto r = detail::ByteReader::from_file(path, "model file '" + path.string() + "'");
  r.expect_magic(std::string_view(kModelMagic, 8));
  const std::uint32_t version = r.u32("version");
  if (version != kModelVersion) {
    throw UnsupportedVersionError("model file '" + path.string() + "': unsupported version " +
                                  std::to_string(version) + " (reader supports " +
                                  std::to_string(kModelVersion) + ")");
  }
  const std::uint32_t input_dim = r.u32("input_dim");
  const std::uint32_t output_dim = r.u32("output_dim");
  if (input_dim != kInputDim || output_dim != kOutputDim) {
    r.fail("shape mismatch: expected " + std::to_string(kInputDim) + "->" +
           std::to_string(kOutputDim) + ", found " + std::to_string(input_dim) + "->" +
           std::to_string(output_dim));
  }
  const std::uint64_t region_count = r.u64("region count");
  // Smallest region record: bounds + center count with no centers.
  constexpr std::uint64_t kMinRegionBytes = 6 * 8 + 8;
  if (region_count == 0 || region_count > r.remaining() / kMinRegionBytes) {
    r.fail("implausible region count " + std::to_string(region_count));
  }

  IrbfnModel model;
  for (double& z : model.zeta) {
    z = r.f64("zeta");
    if (!(z > 0.0) || !std::isfinite(z)) r.fail("non-positive zeta");
  }
  model.domain = read_box(r, "domain");
  model.regions.resize(region_count);
  for (auto& region : model.regions) {
    region.bounds = read_box(r, "region bounds");
    const std::uint64_t count = r.u64("center count");
    constexpr std::uint64_t kCenterBytes = (kInputDim + kOutputDim) * 8;
    if (count == 0) r.fail("region has no centers");
    if (count > r.remaining() / kCenterBytes) {
      r.fail("truncated: region declares " + std::to_string(count) + " centers but only " +
             std::to_string(r.remaining()) + " bytes remain");
    }
    region.net.centers.resize(count);
    region.net.weights.resize(count);
    for (auto& c : region.net.centers) {
      for (double& v : c) v = r.f64("centers");
    }
    for (auto& k : region.net.weights) {
      for (double& v : k) v = r.f64("weights");
    }
  }
  r.expect_end();
  return model;
}

}  // namespace irbfn

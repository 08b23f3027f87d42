#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "irbfn/clothoid.hpp"
#include "irbfn/optimizer.hpp"

namespace irbfn {

inline constexpr std::size_t kInputDim = 3;   // (x, y, theta)
inline constexpr std::size_t kOutputDim = 5;  // (kappa0..kappa3, s_f)

using InputVector = std::array<double, kInputDim>;
using OutputVector = std::array<double, kOutputDim>;

inline InputVector to_input(const GoalState& g) { return {g.x, g.y, g.theta}; }

// Axis-aligned box [lower, upper] in goal space.
struct Orthotope {
  InputVector lower{};
  InputVector upper{};

  bool contains(const InputVector& x) const;
  bool contains_strict(const InputVector& x) const;

  friend bool operator==(const Orthotope&, const Orthotope&) = default;
};

// Inverse-quadratic RBF layer followed by a linear map to the five outputs.
struct RegionNetwork {
  std::vector<InputVector> centers;
  std::vector<OutputVector> weights;  // one row per center

  friend bool operator==(const RegionNetwork&, const RegionNetwork&) = default;
};

struct Region {
  Orthotope bounds;
  RegionNetwork net;

  friend bool operator==(const Region&, const Region&) = default;
};

struct IrbfnModel {
  std::vector<Region> regions;
  InputVector zeta{15.0, 15.0, 100.0};
  Orthotope domain;

  std::size_t parameter_count() const;

  friend bool operator==(const IrbfnModel&, const IrbfnModel&) = default;
};

// rho(z) = 1 / (1 + z^2), taking z^2 directly.
inline double inverse_quadratic(double squared_distance) { return 1.0 / (1.0 + squared_distance); }

// Grid-aligned tiling of `domain` in row-major (x, y, theta) order. A region
// that would overrun the domain edge is truncated to it. Throws ConfigError for
// non-positive sizes or an empty domain.
std::vector<Orthotope> partition(const Orthotope& domain, const InputVector& sizes);

// Smooth box membership in [0, 1]; exactly 1/2 (times the opposite-face
// factor) on each face.
double indicator(const InputVector& x, const Orthotope& region, const InputVector& zeta);

// Sum of all region indicators at x. Close to 1 inside the domain.
double indicator_sum(const IrbfnModel& model, const InputVector& x);

// New model over `domain` with `centers_per_region` centers drawn uniformly in
// each region (seeded) and zero linear weights.
IrbfnModel make_model(const Orthotope& domain, const InputVector& region_sizes,
                      const InputVector& zeta, std::size_t centers_per_region,
                      std::uint64_t seed);

// Raw network output at a single point; no domain check.
OutputVector evaluate(const IrbfnModel& model, const InputVector& x);

// Batched inference. Throws DomainError for goals outside the open domain.
std::vector<ClothoidParams> forward(const IrbfnModel& model, std::span<const GoalState> goals);

ClothoidParams forward(const IrbfnModel& model, const GoalState& goal);

using ForwardJacobian = Eigen::Matrix<double, 5, 3>;   // d(params) / d(goal)
using GoalEndpointJacobian = Eigen::Matrix<double, 4, 3>;  // d(x, y, theta, kappa) / d(goal)

ForwardJacobian forward_jacobian(const IrbfnModel& model, const GoalState& g);

// Chain of the quadrature sensitivities with forward_jacobian.
GoalEndpointJacobian endpoint_jacobian(const IrbfnModel& model, const GoalState& g,
                                       int intervals = kDefaultQuadratureIntervals,
                                       JacobianMethod method = JacobianMethod::kCentralDifference);

void save_model(const IrbfnModel& model, const std::filesystem::path& path);
IrbfnModel load_model(const std::filesystem::path& path);

}  // namespace irbfn

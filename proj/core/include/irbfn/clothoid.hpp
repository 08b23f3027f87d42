#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace irbfn {

inline constexpr int kDefaultQuadratureIntervals = 100;

// Trajectory parameters: curvature at s = 0, s_f/3, 2s_f/3, s_f, and the
// total arc length s_f. The trajectory always starts at the vehicle origin.
struct ClothoidParams {
  double kappa0 = 0.0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double kappa3 = 0.0;
  double s_f = 1.0;

  std::array<double, 5> to_array() const { return {kappa0, kappa1, kappa2, kappa3, s_f}; }
  static ClothoidParams from_array(const std::array<double, 5>& v) {
    return {v[0], v[1], v[2], v[3], v[4]};
  }

  friend bool operator==(const ClothoidParams&, const ClothoidParams&) = default;
};

// kappa(s) = a + b s + c s^2 + d s^3
struct SpiralCoefficients {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  friend bool operator==(const SpiralCoefficients&, const SpiralCoefficients&) = default;
};

// Heading is the raw integral of curvature and is never wrapped.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double kappa = 0.0;

  friend bool operator==(const Pose&, const Pose&) = default;
};

struct VehicleLimits {
  double kappa_max = 1.5;  // 1/m
  double wheelbase = 0.33; // m, carried for completeness
};

struct TrajectorySample {
  double s = 0.0;
  Pose pose;
};

// Rows are (x, y, theta) at s_f, columns are (kappa0..kappa3, s_f).
using EndpointJacobian = Eigen::Matrix<double, 3, 5>;

// Throws InvalidParameterError if q.s_f <= 0.
SpiralCoefficients spiral_coeffs(const ClothoidParams& q);

double curvature_at(const SpiralCoefficients& c, double s);

double heading_at(const SpiralCoefficients& c, double s);

// Composite Simpson quadrature of cos/sin(theta(s)) over [0, s_f] with
// `intervals` sub-intervals (must be even and >= 2).
Pose integrate_pose(const SpiralCoefficients& c, double s_f,
                    int intervals = kDefaultQuadratureIntervals);

Pose integrate_pose(const ClothoidParams& q, int intervals = kDefaultQuadratureIntervals);

// `count` poses at equally spaced arc lengths in [0, s_f]. Samples that land on
// even quadrature nodes reuse the running Simpson sum, so the last sample is
// identical to integrate_pose whenever (count - 1) divides `intervals`.
std::vector<TrajectorySample> sample_trajectory(const SpiralCoefficients& c, double s_f,
                                                int count,
                                                int intervals = kDefaultQuadratureIntervals);

// Saturates the four station curvatures to [-kappa_max, kappa_max].
ClothoidParams clip_params(const ClothoidParams& q, const VehicleLimits& limits);

// Exact derivative of the discrete Simpson endpoint with respect to q.
// Differentiates the same node set integrate_pose uses, so the result is the
// Jacobian of the quadrature itself rather than of the continuous integral.
EndpointJacobian integrate_pose_jacobian(const ClothoidParams& q,
                                         int intervals = kDefaultQuadratureIntervals);

// CSV with header `s,x,y,theta,kappa` and 17 significant digits.
void write_trajectory_csv(std::ostream& out, std::span<const TrajectorySample> samples);

}  // namespace irbfn

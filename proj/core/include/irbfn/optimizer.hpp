#pragma once

#include "irbfn/clothoid.hpp"

namespace irbfn {

// Local goal in the vehicle frame.
struct GoalState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double kappa = 0.0;

  friend bool operator==(const GoalState&, const GoalState&) = default;
};

enum class JacobianMethod {
  kCentralDifference,  // h = 1e-6 per coordinate
  kAnalytic,           // exact derivative of the Simpson sum
};

struct SolveOptions {
  int max_iters = 100;
  double tol_objective = 1e-8;
  // Initial step scale for each Gauss-Newton / gradient step; halved on failure.
  double damping = 1.0;
  int quadrature_n = kDefaultQuadratureIntervals;
  VehicleLimits limits;
  JacobianMethod jacobian = JacobianMethod::kCentralDifference;
  // Upper slack C in d <= s_f <= C (d + |theta_g| d) for the validity check.
  double length_slack = 2.5;
};

struct SolveResult {
  ClothoidParams params;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  bool valid = false;
  // Set when a singular normal system forced at least one gradient step.
  bool gradient_fallback = false;
};

// |x(s_f)-x_g|^2 + |y(s_f)-y_g|^2 + |theta(s_f)-theta_g|^2. Goal curvature is
// not part of the objective.
double objective(const ClothoidParams& q, const GoalState& g,
                 int intervals = kDefaultQuadratureIntervals);

// d(x, y, theta)(s_f) / d(kappa0..kappa3, s_f). The goal does not enter the
// derivative; it is accepted to mirror the residual it differentiates.
EndpointJacobian residual_jacobian(const ClothoidParams& q, const GoalState& g,
                                   int intervals = kDefaultQuadratureIntervals,
                                   JacobianMethod method = JacobianMethod::kCentralDifference);

// Straight-ish start: zero curvature except the goal curvature at the end,
// s_f = d (1 + theta_g^2 / 5) floored at 0.1 m. Throws DomainError when the
// goal sits at the origin.
ClothoidParams initial_guess(const GoalState& g);

// Damped Gauss-Newton (minimum-norm step through the 3x5 Jacobian).
SolveResult solve_newton(const GoalState& g, const SolveOptions& opts = {});

// Derivative-free Powell direction-set search.
SolveResult solve_powell(const GoalState& g, const SolveOptions& opts = {});

// Converged, plausible length d <= s_f <= C (d + |theta_g| d), and the cubic
// curvature stays within kappa_max along the whole path.
bool is_valid(const SolveResult& r, const GoalState& g, const SolveOptions& opts = {});

}  // namespace irbfn

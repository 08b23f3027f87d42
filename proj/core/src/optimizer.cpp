#include "irbfn/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "irbfn/errors.hpp"

namespace irbfn {
namespace {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Vec3 = Eigen::Vector3d;

constexpr double kFiniteDifferenceStep = 1e-6;
constexpr int kMaxHalvings = 20;
constexpr double kMinArcLength = 1e-3;
constexpr int kValiditySamples = 200;

Vec5 to_vec(const ClothoidParams& q) {
  Vec5 v;
  v << q.kappa0, q.kappa1, q.kappa2, q.kappa3, q.s_f;
  return v;
}

ClothoidParams from_vec(const Vec5& v) { return {v(0), v(1), v(2), v(3), v(4)}; }

Vec3 residual(const ClothoidParams& q, const GoalState& g, int intervals) {
  const Pose p = integrate_pose(q, intervals);
  return {p.x - g.x, p.y - g.y, p.theta - g.theta};
}

bool all_finite(const Vec5& v) { return v.allFinite(); }

// Objective for a candidate that may have left the feasible set.
double guarded_objective(const ClothoidParams& q, const GoalState& g, int intervals) {
  if (!(q.s_f > kMinArcLength) || !all_finite(to_vec(q))) {
    return std::numeric_limits<double>::infinity();
  }
  return objective(q, g, intervals);
}

void require_options(const SolveOptions& opts) {
  if (opts.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!(opts.tol_objective > 0.0)) throw ConfigError("tol_objective must be > 0");
  if (!(opts.damping > 0.0)) throw ConfigError("damping must be > 0");
}

SolveResult finish(ClothoidParams q, double f, int iterations, bool fallback, const GoalState& g,
                   const SolveOptions& opts) {
  SolveResult r;
  r.params = q;
  r.objective = f;
  r.iterations = iterations;
  r.converged = f <= opts.tol_objective;
  r.gradient_fallback = fallback;
  r.valid = is_valid(r, g, opts);
  return r;
}

// Brent's line minimisation of phi(t) = f(origin + t dir) on a bracket found by
// golden-ratio expansion from [0, initial_step].
class LineSearch {
 public:
  template <typename Fn>
  static double minimise(Fn&& phi, double f0, double initial_step, double& f_min) {
    constexpr double kGold = 1.618033988749895;
    constexpr int kMaxExpand = 50;
    double a = 0.0;
    double fa = f0;
    double b = initial_step;
    double fb = phi(b);
    if (fb > fa) {
      // Try the other direction before shrinking.
      const double bn = -initial_step;
      const double fbn = phi(bn);
      if (fbn < fa) {
        b = bn;
        fb = fbn;
      } else {
        // Minimum lies inside (-step, step).
        return brent(phi, -initial_step, 0.0, initial_step, fa, f_min);
      }
    }
    double c = b + kGold * (b - a);
    double fc = phi(c);
    int expand = 0;
    while (fc < fb && expand++ < kMaxExpand) {
      a = b;
      fa = fb;
      b = c;
      fb = fc;
      c = b + kGold * (b - a);
      fc = phi(c);
    }
    return brent(phi, std::min(a, c), b, std::max(a, c), fb, f_min);
  }

 private:
  template <typename Fn>
  static double brent(Fn&& phi, double lo, double x, double hi, double fx, double& f_min) {
    constexpr double kCGold = 0.3819660112501051;
    constexpr double kTol = 1e-10;
    constexpr double kTiny = 1e-18;
    constexpr int kMaxIter = 200;
    double w = x, v = x, fw = fx, fv = fx;
    double d = 0.0, e = 0.0;
    for (int iter = 0; iter < kMaxIter; ++iter) {
      const double xm = 0.5 * (lo + hi);
      const double tol1 = kTol * std::abs(x) + kTiny;
      const double tol2 = 2.0 * tol1;
      if (std::abs(x - xm) <= (tol2 - 0.5 * (hi - lo))) break;
      bool golden = true;
      if (std::abs(e) > tol1) {
        const double r = (x - w) * (fx - fv);
        double q = (x - v) * (fx - fw);
        double p = (x - v) * q - (x - w) * r;
        q = 2.0 * (q - r);
        if (q > 0.0) p = -p;
        q = std::abs(q);
        const double etemp = e;
        e = d;
        if (!(std::abs(p) >= std::abs(0.5 * q * etemp) || p <= q * (lo - x) || p >= q * (hi - x))) {
          d = p / q;
          const double u = x + d;
          if (u - lo < tol2 || hi - u < tol2) d = (xm - x) >= 0.0 ? tol1 : -tol1;
          golden = false;
        }
      }
      if (golden) {
        e = (x >= xm) ? lo - x : hi - x;
        d = kCGold * e;
      }
      const double u = (std::abs(d) >= tol1) ? x + d : x + (d >= 0.0 ? tol1 : -tol1);
      const double fu = phi(u);
      if (fu <= fx) {
        if (u >= x) lo = x; else hi = x;
        v = w; fv = fw;
        w = x; fw = fx;
        x = u; fx = fu;
      } else {
        if (u < x) lo = u; else hi = u;
        if (fu <= fw || w == x) {
          v = w; fv = fw;
          w = u; fw = fu;
        } else if (fu <= fv || v == x || v == w) {
          v = u; fv = fu;
        }
      }
    }
    f_min = fx;
    return x;
  }
};

}  // namespace

double objective(const ClothoidParams& q, const GoalState& g, int intervals) {
  return residual(q, g, intervals).squaredNorm();
}

EndpointJacobian residual_jacobian(const ClothoidParams& q, const GoalState& /*g*/,
                                   int intervals, JacobianMethod method) {
  if (method == JacobianMethod::kAnalytic) return integrate_pose_jacobian(q, intervals);

  EndpointJacobian jac;
  const Vec5 base = to_vec(q);
  for (int i = 0; i < 5; ++i) {
    Vec5 plus = base;
    Vec5 minus = base;
    plus(i) += kFiniteDifferenceStep;
    minus(i) -= kFiniteDifferenceStep;
    const Pose pp = integrate_pose(from_vec(plus), intervals);
    const Pose pm = integrate_pose(from_vec(minus), intervals);
    const double span = plus(i) - minus(i);
    jac(0, i) = (pp.x - pm.x) / span;
    jac(1, i) = (pp.y - pm.y) / span;
    jac(2, i) = (pp.theta - pm.theta) / span;
  }
  return jac;
}

ClothoidParams initial_guess(const GoalState& g) {
  const double d = std::hypot(g.x, g.y);
  if (!(d > 0.0)) throw DomainError("goal coincides with the vehicle origin");
  ClothoidParams q;
  q.kappa3 = g.kappa;
  q.s_f = std::max(d * (1.0 + g.theta * g.theta / 5.0), 0.1);
  return q;
}

SolveResult solve_newton(const GoalState& g, const SolveOptions& opts) {
  require_options(opts);
  const int n = opts.quadrature_n;
  ClothoidParams q = clip_params(initial_guess(g), opts.limits);
  double f = objective(q, g, n);
  bool fallback = false;
  int iterations = 0;

  while (iterations < opts.max_iters && f > opts.tol_objective) {
    const Vec3 r = residual(q, g, n);
    const EndpointJacobian jac = residual_jacobian(q, g, n, opts.jacobian);

    // Minimum-norm Gauss-Newton step: dq = -J^T (J J^T)^-1 r.
    const Eigen::Matrix3d normal = jac * jac.transpose();
    Eigen::FullPivLU<Eigen::Matrix3d> lu(normal);
    lu.setThreshold(1e-12);
    Vec5 direction;
    if (lu.isInvertible()) {
      direction = -jac.transpose() * lu.solve(r);
    } else {
      direction = -jac.transpose() * r;
      fallback = true;
    }
    if (!all_finite(direction)) {
      throw DivergenceError("non-finite Gauss-Newton direction at iteration " +
                            std::to_string(iterations));
    }

    const Vec5 base = to_vec(q);
    double step = opts.damping;
    bool accepted = false;
    for (int halving = 0; halving <= kMaxHalvings; ++halving, step *= 0.5) {
      const ClothoidParams candidate = clip_params(from_vec(base + step * direction), opts.limits);
      const double fc = guarded_objective(candidate, g, n);
      if (fc < f) {
        q = candidate;
        f = fc;
        accepted = true;
        break;
      }
    }
    ++iterations;
    if (!accepted) break;
    if (!std::isfinite(f)) throw DivergenceError("objective became non-finite");
  }
  return finish(q, f, iterations, fallback, g, opts);
}

SolveResult solve_powell(const GoalState& g, const SolveOptions& opts) {
  require_options(opts);
  const int n = opts.quadrature_n;
  auto eval = [&](const Vec5& v) {
    return guarded_objective(clip_params(from_vec(v), opts.limits), g, n);
  };

  Vec5 point = to_vec(clip_params(initial_guess(g), opts.limits));
  double f = eval(point);
  // Initial direction set: coordinate axes, curvature axes scaled to 1/m steps.
  std::array<Vec5, 5> directions;
  for (int i = 0; i < 5; ++i) {
    directions[static_cast<std::size_t>(i)] = Vec5::Zero();
    directions[static_cast<std::size_t>(i)](i) = (i < 4) ? 0.1 : 0.5;
  }

  int iterations = 0;
  while (iterations < opts.max_iters && f > opts.tol_objective) {
    ++iterations;
    const Vec5 start = point;
    const double f_start = f;
    double biggest_drop = 0.0;
    std::size_t biggest_index = 0;
    for (std::size_t i = 0; i < directions.size(); ++i) {
      const Vec5 dir = directions[i];
      const Vec5 origin = point;
      double f_line = f;
      const double t = LineSearch::minimise(
          [&](double s) { return eval(origin + s * dir); }, f, 1.0, f_line);
      if (f_line < f) {
        const double drop = f - f_line;
        point = origin + t * dir;
        // Store the clipped point so the iterate stays feasible.
        point = to_vec(clip_params(from_vec(point), opts.limits));
        f = eval(point);
        if (drop > biggest_drop) {
          biggest_drop = drop;
          biggest_index = i;
        }
      }
    }
    if (!std::isfinite(f)) throw DivergenceError("objective became non-finite");
    if (!(f < f_start)) break;

    // Powell's direction replacement with the extrapolation test.
    const Vec5 shift = point - start;
    const double f_extrap = eval(point + shift);
    if (f_extrap < f_start) {
      const double lhs = 2.0 * (f_start - 2.0 * f + f_extrap) *
                         std::pow(f_start - f - biggest_drop, 2);
      const double rhs = biggest_drop * std::pow(f_start - f_extrap, 2);
      if (lhs < rhs && shift.norm() > 0.0) {
        const Vec5 origin = point;
        double f_line = f;
        const double t = LineSearch::minimise(
            [&](double s) { return eval(origin + s * shift); }, f, 1.0, f_line);
        if (f_line < f) {
          point = to_vec(clip_params(from_vec(origin + t * shift), opts.limits));
          f = eval(point);
        }
        directions[biggest_index] = directions.back();
        directions.back() = shift;
      }
    }
  }
  return finish(clip_params(from_vec(point), opts.limits), f, iterations, false, g, opts);
}

bool is_valid(const SolveResult& r, const GoalState& g, const SolveOptions& opts) {
  if (!r.converged) return false;
  const double d = std::hypot(g.x, g.y);
  const double s_f = r.params.s_f;
  // A converged endpoint may miss the goal by up to sqrt(tol), so the chord
  // lower bound gets that much slack.
  const double chord_slack = std::sqrt(opts.tol_objective);
  if (!(s_f >= d - chord_slack) || !(s_f <= opts.length_slack * (d + std::abs(g.theta) * d))) {
    return false;
  }
  const SpiralCoefficients c = spiral_coeffs(r.params);
  for (int i = 0; i <= kValiditySamples; ++i) {
    const double s = s_f * static_cast<double>(i) / kValiditySamples;
    if (std::abs(curvature_at(c, s)) > opts.limits.kappa_max) return false;
  }
  return true;
}

}  // namespace irbfn

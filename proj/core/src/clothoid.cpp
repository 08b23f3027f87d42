#include "irbfn/clothoid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "irbfn/errors.hpp"

namespace irbfn {
namespace {

void require_positive_length(double s_f) {
  if (!(s_f > 0.0) || !std::isfinite(s_f)) {
    throw InvalidParameterError("arc length s_f must be finite and positive, got " +
                                std::to_string(s_f));
  }
}

void require_even_intervals(int intervals) {
  if (intervals < 2 || intervals % 2 != 0) {
    throw InvalidParameterError("Simpson interval count must be even and >= 2, got " +
                                std::to_string(intervals));
  }
}

struct Planar {
  double x = 0.0;
  double y = 0.0;
};

// Walks the composite Simpson rule one panel (two intervals) at a time and
// reports the running (x, y) at every even node. Both integrate_pose and
// sample_trajectory go through here so their sums are bitwise identical.
template <typename OnEvenNode>
Planar simpson_walk(const SpiralCoefficients& c, double s_f, int intervals,
                    OnEvenNode&& on_even_node) {
  const double h = s_f / intervals;
  const double third = h / 3.0;
  Planar acc;
  double theta0 = heading_at(c, 0.0);
  double cos0 = std::cos(theta0);
  double sin0 = std::sin(theta0);
  on_even_node(0, acc);
  for (int j = 0; j < intervals; j += 2) {
    const double s1 = (j + 1) * h;
    const double s2 = (j + 2 == intervals) ? s_f : (j + 2) * h;
    const double theta1 = heading_at(c, s1);
    const double theta2 = heading_at(c, s2);
    const double cos2 = std::cos(theta2);
    const double sin2 = std::sin(theta2);
    acc.x += third * (cos0 + 4.0 * std::cos(theta1) + cos2);
    acc.y += third * (sin0 + 4.0 * std::sin(theta1) + sin2);
    on_even_node(j + 2, acc);
    cos0 = cos2;
    sin0 = sin2;
  }
  return acc;
}

// Two-interval Simpson over [s0, s1].
Planar simpson_panel(const SpiralCoefficients& c, double s0, double s1) {
  const double mid = 0.5 * (s0 + s1);
  const double t0 = heading_at(c, s0);
  const double tm = heading_at(c, mid);
  const double t1 = heading_at(c, s1);
  const double w = (s1 - s0) / 6.0;
  return {w * (std::cos(t0) + 4.0 * std::cos(tm) + std::cos(t1)),
          w * (std::sin(t0) + 4.0 * std::sin(tm) + std::sin(t1))};
}

}  // namespace

SpiralCoefficients spiral_coeffs(const ClothoidParams& q) {
  require_positive_length(q.s_f);
  const double k0 = q.kappa0;
  const double k1 = q.kappa1;
  const double k2 = q.kappa2;
  const double k3 = q.kappa3;
  const double s = q.s_f;
  SpiralCoefficients c;
  c.a = k0;
  c.b = -0.5 * (-2.0 * k3 + 11.0 * k0 - 18.0 * k1 + 9.0 * k2) / s;
  c.c = 4.5 * (-k3 + 2.0 * k0 - 5.0 * k1 + 4.0 * k2) / (s * s);
  c.d = -4.5 * (-k3 + k0 - 3.0 * k1 + 3.0 * k2) / (s * s * s);
  return c;
}

double curvature_at(const SpiralCoefficients& c, double s) {
  return c.a + s * (c.b + s * (c.c + s * c.d));
}

double heading_at(const SpiralCoefficients& c, double s) {
  return s * (c.a + s * (c.b / 2.0 + s * (c.c / 3.0 + s * (c.d / 4.0))));
}

Pose integrate_pose(const SpiralCoefficients& c, double s_f, int intervals) {
  require_positive_length(s_f);
  require_even_intervals(intervals);
  const Planar xy = simpson_walk(c, s_f, intervals, [](int, const Planar&) {});
  return {xy.x, xy.y, heading_at(c, s_f), curvature_at(c, s_f)};
}

Pose integrate_pose(const ClothoidParams& q, int intervals) {
  return integrate_pose(spiral_coeffs(q), q.s_f, intervals);
}

std::vector<TrajectorySample> sample_trajectory(const SpiralCoefficients& c, double s_f,
                                                int count, int intervals) {
  require_positive_length(s_f);
  require_even_intervals(intervals);
  if (count < 2) {
    throw InvalidParameterError("trajectory sample count must be >= 2, got " +
                                std::to_string(count));
  }

  std::vector<Planar> even_nodes(static_cast<std::size_t>(intervals / 2 + 1));
  simpson_walk(c, s_f, intervals,
               [&](int j, const Planar& acc) { even_nodes[static_cast<std::size_t>(j / 2)] = acc; });

  const double h = s_f / intervals;
  const long long segments = count - 1;
  std::vector<TrajectorySample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long long k = 0; k < count; ++k) {
    const double s = (k == segments) ? s_f : s_f * static_cast<double>(k) / static_cast<double>(segments);
    const long long scaled = k * intervals;
    long long node = scaled / segments;
    const bool on_node = scaled % segments == 0;
    Planar xy;
    if (on_node && node % 2 == 0) {
      xy = even_nodes[static_cast<std::size_t>(node / 2)];
    } else {
      node -= node % 2;
      xy = even_nodes[static_cast<std::size_t>(node / 2)];
      const Planar tail = simpson_panel(c, node * h, s);
      xy.x += tail.x;
      xy.y += tail.y;
    }
    out.push_back({s, {xy.x, xy.y, heading_at(c, s), curvature_at(c, s)}});
  }
  return out;
}

ClothoidParams clip_params(const ClothoidParams& q, const VehicleLimits& limits) {
  const double k = std::max(limits.kappa_max, 0.0);
  auto clip = [k](double v) { return std::min(std::max(v, -k), k); };
  return {clip(q.kappa0), clip(q.kappa1), clip(q.kappa2), clip(q.kappa3), q.s_f};
}

EndpointJacobian integrate_pose_jacobian(const ClothoidParams& q, int intervals) {
  require_even_intervals(intervals);
  const SpiralCoefficients c = spiral_coeffs(q);
  const double sf = q.s_f;

  // d(a, b, c, d) / d(kappa0..kappa3) at fixed s_f.
  const std::array<std::array<double, 4>, 4> dcoef = {{
      {1.0, 0.0, 0.0, 0.0},
      {-0.5 * 11.0 / sf, -0.5 * -18.0 / sf, -0.5 * 9.0 / sf, -0.5 * -2.0 / sf},
      {4.5 * 2.0 / (sf * sf), 4.5 * -5.0 / (sf * sf), 4.5 * 4.0 / (sf * sf),
       4.5 * -1.0 / (sf * sf)},
      {-4.5 * 1.0 / (sf * sf * sf), -4.5 * -3.0 / (sf * sf * sf), -4.5 * 3.0 / (sf * sf * sf),
       -4.5 * -1.0 / (sf * sf * sf)},
  }};

  // Node s_j = j s_f / n moves with s_f, and b, c, d scale as s_f^-1, -2, -3.
  auto dtheta = [&](double s, std::array<double, 5>& out) {
    const std::array<double, 4> powers = {s, s * s / 2.0, s * s * s / 3.0, s * s * s * s / 4.0};
    for (int i = 0; i < 4; ++i) {
      double v = 0.0;
      for (int k = 0; k < 4; ++k) v += dcoef[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] *
                                        powers[static_cast<std::size_t>(k)];
      out[static_cast<std::size_t>(i)] = v;
    }
    const double explicit_part =
        -(c.b * powers[1] + 2.0 * c.c * powers[2] + 3.0 * c.d * powers[3]) / sf;
    out[4] = curvature_at(c, s) * (s / sf) + explicit_part;
  };

  const double h = sf / intervals;
  double x = 0.0;
  Eigen::Matrix<double, 1, 5> dx = Eigen::Matrix<double, 1, 5>::Zero();
  Eigen::Matrix<double, 1, 5> dy = Eigen::Matrix<double, 1, 5>::Zero();
  double y = 0.0;
  std::array<double, 5> dt{};
  for (int j = 0; j <= intervals; ++j) {
    const double w = (j == 0 || j == intervals) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
    const double s = (j == intervals) ? sf : j * h;
    const double theta = heading_at(c, s);
    const double cs = std::cos(theta);
    const double sn = std::sin(theta);
    dtheta(s, dt);
    x += w * cs;
    y += w * sn;
    for (int i = 0; i < 5; ++i) {
      dx(i) -= w * sn * dt[static_cast<std::size_t>(i)];
      dy(i) += w * cs * dt[static_cast<std::size_t>(i)];
    }
  }
  const double third = h / 3.0;
  x *= third;
  y *= third;
  dx *= third;
  dy *= third;
  // h itself depends on s_f.
  dx(4) += x / sf;
  dy(4) += y / sf;

  EndpointJacobian jac;
  jac.row(0) = dx;
  jac.row(1) = dy;
  dtheta(sf, dt);
  for (int i = 0; i < 5; ++i) jac(2, i) = dt[static_cast<std::size_t>(i)];
  return jac;
}

void write_trajectory_csv(std::ostream& out, std::span<const TrajectorySample> samples) {
  out << "s,x,y,theta,kappa\n";
  char line[160];
  for (const auto& sample : samples) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,%.17g\n", sample.s, sample.pose.x,
                  sample.pose.y, sample.pose.theta, sample.pose.kappa);
    out << line;
  }
}

}  // namespace irbfn

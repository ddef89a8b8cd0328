#ifndef XHINGE_GEOMETRY_HPP
#define XHINGE_GEOMETRY_HPP

#include "xhinge/error.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xhinge {

using Vec2 = Eigen::Vector2d;

inline constexpr std::size_t kNumDesignVars = 13;

/// Non-dimensional description of a generalized cross-hinge.
///
/// Angle coefficients follow the hierarchical cubic of `angle_profile`; the
/// remaining ratios fix lengths, slendernesses, widths and the base offset of
/// the second flexure relative to the first.
struct DesignVector {
  std::array<double, 4> theta1{}; // flexure 1: theta0..theta3
  std::array<double, 4> theta2{}; // flexure 2: theta0..theta3
  double alpha = 1.0;             // l2 / l1
  double beta1 = 10.0;            // l1 / h1
  double beta2 = 10.0;            // l2 / h2
  double gamma = 1.0;             // w2 / w1
  double delta = 0.5;             // X0_2 / l1

  std::array<double, kNumDesignVars> to_array() const {
    return {theta1[0], theta1[1], theta1[2], theta1[3], theta2[0], theta2[1], theta2[2],
            theta2[3], alpha,     beta1,     beta2,     gamma,     delta};
  }

  static DesignVector from_array(std::span<const double> v) {
    if (v.size() != kNumDesignVars)
      throw Error(ErrorCode::DegenerateInput,
                  "design vector needs 13 values, got " + std::to_string(v.size()));
    DesignVector d;
    for (std::size_t i = 0; i < 4; ++i) {
      d.theta1[i] = v[i];
      d.theta2[i] = v[4 + i];
    }
    d.alpha = v[8];
    d.beta1 = v[9];
    d.beta2 = v[10];
    d.gamma = v[11];
    d.delta = v[12];
    return d;
  }

  const std::array<double, 4>& coeffs(int flexure) const { return flexure == 0 ? theta1 : theta2; }

  friend bool operator==(const DesignVector&, const DesignVector&) = default;
};

/// CSV column names, in storage order.
inline constexpr std::array<std::string_view, kNumDesignVars> kDesignColumns = {
    "theta0_1", "theta1_1", "theta2_1", "theta3_1", "theta0_2", "theta1_2", "theta2_2",
    "theta3_2", "alpha",    "beta1",    "beta2",    "gamma",    "delta"};

/// Closed box of admissible design values.
struct DesignBounds {
  std::array<double, kNumDesignVars> lower;
  std::array<double, kNumDesignVars> upper;

  static DesignBounds standard() {
    constexpr double pi = std::numbers::pi;
    return {{0.0, -pi, -pi, -pi, 0.0, -pi, -pi, -pi, 0.5, 5.0, 5.0, 0.5, 0.0},
            {pi, pi, pi, pi, pi, pi, pi, pi, 2.0, 20.0, 20.0, 2.0, 1.0}};
  }

  double range(std::size_t i) const { return upper[i] - lower[i]; }

  bool contains(std::span<const double> v) const {
    for (std::size_t i = 0; i < kNumDesignVars; ++i)
      if (!(v[i] >= lower[i] && v[i] <= upper[i])) return false;
    return true;
  }
};

/// Throws OutOfRange naming the first violated bound.
inline void require_in_bounds(const DesignVector& d,
                              const DesignBounds& bounds = DesignBounds::standard()) {
  const auto v = d.to_array();
  for (std::size_t i = 0; i < kNumDesignVars; ++i) {
    if (!(v[i] >= bounds.lower[i] && v[i] <= bounds.upper[i])) {
      throw Error(ErrorCode::OutOfRange, std::string(kDesignColumns[i]) + " = " +
                                             std::to_string(v[i]) + " outside [" +
                                             std::to_string(bounds.lower[i]) + ", " +
                                             std::to_string(bounds.upper[i]) + "]");
    }
  }
}

/// Cross-section angle along a flexure at normalized arc length s.
inline double angle_profile(const std::array<double, 4>& c, double s) {
  const double bubble = 4.0 * s * (1.0 - s);
  return (1.0 - s) * c[0] + s * c[1] + bubble * c[2] + bubble * (2.0 * s - 1.0) * c[3];
}

/// d(angle)/ds, i.e. the reference curvature times the flexure length.
inline double angle_profile_slope(const std::array<double, 4>& c, double s) {
  // d/ds [4s(1-s)] = 4 - 8s;  d/ds [4s(1-s)(2s-1)] = -24s^2 + 24s - 4
  return c[1] - c[0] + (4.0 - 8.0 * s) * c[2] + (-24.0 * s * s + 24.0 * s - 4.0) * c[3];
}

struct CenterlinePoint {
  double s = 0.0; // normalized arc length
  Vec2 position = Vec2::Zero();
  double angle = 0.0;
};

namespace detail {

// 4-point Gauss-Legendre on [-1, 1].
inline constexpr std::array<double, 4> kGauss4Points = {
    -0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
inline constexpr std::array<double, 4> kGauss4Weights = {
    0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};

inline Vec2 integrate_tangent(const std::array<double, 4>& c, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  Vec2 acc = Vec2::Zero();
  for (std::size_t g = 0; g < 4; ++g) {
    const double th = angle_profile(c, mid + half * kGauss4Points[g]);
    acc += kGauss4Weights[g] * Vec2(std::cos(th), std::sin(th));
  }
  return half * acc;
}

} // namespace detail

/// Integrates the unit tangent of a flexure at `s_values` (ascending, starting
/// at 0). Each subinterval uses composite 4-point Gauss-Legendre with
/// `sub_panels` panels.
inline std::vector<CenterlinePoint> centerline_at(const std::array<double, 4>& coeffs, double length,
                                                  const Vec2& base, std::span<const double> s_values,
                                                  int sub_panels = 1) {
  std::vector<CenterlinePoint> out;
  out.reserve(s_values.size());
  Vec2 pos = base;
  double s_prev = 0.0;
  for (double s : s_values) {
    const double h = (s - s_prev) / sub_panels;
    for (int p = 0; p < sub_panels; ++p)
      pos += length * detail::integrate_tangent(coeffs, s_prev + p * h, s_prev + (p + 1) * h);
    out.push_back({s, pos, angle_profile(coeffs, s)});
    s_prev = s;
  }
  return out;
}

/// Centerline sampled at `n_samples` equally spaced arc-length stations.
inline std::vector<CenterlinePoint> centerline(const std::array<double, 4>& coeffs, double length,
                                               const Vec2& base, std::size_t n_samples) {
  if (n_samples < 2) throw Error(ErrorCode::DegenerateInput, "centerline needs >= 2 samples");
  std::vector<double> s(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k)
    s[k] = static_cast<double>(k) / static_cast<double>(n_samples - 1);
  s.back() = 1.0;
  return centerline_at(coeffs, length, base, s);
}

/// Physical reference quantities. Objectives do not depend on them; they only
/// exist so that dimensional scaling can be exercised.
struct PhysicalScale {
  double length = 1.0;  // l1
  double width = 1.0;   // w1
  double youngs = 1.0;  // E
};

struct Flexure {
  std::array<double, 4> coeffs{};
  double length = 1.0;
  double height = 0.1;
  double width = 1.0;
  Vec2 base = Vec2::Zero();
  std::vector<CenterlinePoint> samples;
};

struct HingeGeometry {
  DesignVector design;
  PhysicalScale scale;
  std::array<Flexure, 2> flexures;
  double youngs = 1.0;
  double poisson = 0.49;
};

inline constexpr std::size_t kDefaultFeasibilitySegments = 80;

inline HingeGeometry build_hinge(const DesignVector& d, const PhysicalScale& scale = {},
                                 std::size_t n_samples = kDefaultFeasibilitySegments + 1) {
  require_in_bounds(d);
  HingeGeometry g;
  g.design = d;
  g.scale = scale;
  g.youngs = scale.youngs;
  g.poisson = 0.49;

  const double l1 = scale.length;
  Flexure& f1 = g.flexures[0];
  f1.coeffs = d.theta1;
  f1.length = l1;
  f1.height = l1 / d.beta1;
  f1.width = scale.width;
  f1.base = Vec2::Zero();

  Flexure& f2 = g.flexures[1];
  f2.coeffs = d.theta2;
  f2.length = d.alpha * l1;
  f2.height = f2.length / d.beta2;
  f2.width = d.gamma * scale.width;
  f2.base = Vec2(d.delta * l1, 0.0);

  for (auto& f : g.flexures) f.samples = centerline(f.coeffs, f.length, f.base, n_samples);
  return g;
}

/// Recovers the non-dimensional design from a realized geometry.
inline DesignVector read_back(const HingeGeometry& g) {
  DesignVector d;
  const auto& f1 = g.flexures[0];
  const auto& f2 = g.flexures[1];
  d.theta1 = f1.coeffs;
  d.theta2 = f2.coeffs;
  d.alpha = f2.length / f1.length;
  d.beta1 = f1.length / f1.height;
  d.beta2 = f2.length / f2.height;
  d.gamma = f2.width / f1.width;
  d.delta = f2.base.x() / f1.length;
  return d;
}

namespace detail {

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

inline bool on_segment(const Vec2& p, const Vec2& q, const Vec2& r) {
  return std::min(p.x(), r.x()) <= q.x() && q.x() <= std::max(p.x(), r.x()) &&
         std::min(p.y(), r.y()) <= q.y() && q.y() <= std::max(p.y(), r.y());
}

inline int orientation(const Vec2& p, const Vec2& q, const Vec2& r) {
  const double v = cross(q - p, r - p);
  if (v > 0) return 1;
  if (v < 0) return -1;
  return 0;
}

} // namespace detail

/// Closed-segment intersection test (touching counts).
inline bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  using detail::on_segment;
  using detail::orientation;
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, q1, p2)) return true;
  if (o2 == 0 && on_segment(p1, q2, p2)) return true;
  if (o3 == 0 && on_segment(q1, p1, q2)) return true;
  if (o4 == 0 && on_segment(q1, p2, q2)) return true;
  return false;
}

/// True if any two non-adjacent segments of the polyline meet.
inline bool polyline_self_intersects(std::span<const Vec2> pts) {
  const std::size_t n = pts.size();
  if (n < 4) return false;
  const std::size_t segs = n - 1;
  for (std::size_t i = 0; i < segs; ++i) {
    const Vec2 lo_i = pts[i].cwiseMin(pts[i + 1]);
    const Vec2 hi_i = pts[i].cwiseMax(pts[i + 1]);
    for (std::size_t j = i + 2; j < segs; ++j) {
      const Vec2 lo_j = pts[j].cwiseMin(pts[j + 1]);
      const Vec2 hi_j = pts[j].cwiseMax(pts[j + 1]);
      if ((lo_i.array() > hi_j.array()).any() || (lo_j.array() > hi_i.array()).any()) continue;
      if (segments_intersect(pts[i], pts[i + 1], pts[j], pts[j + 1])) return true;
    }
  }
  return false;
}

inline bool polylines_intersect(std::span<const Vec2> a, std::span<const Vec2> b) {
  for (std::size_t i = 0; i + 1 < a.size(); ++i)
    for (std::size_t j = 0; j + 1 < b.size(); ++j)
      if (segments_intersect(a[i], a[i + 1], b[j], b[j + 1])) return true;
  return false;
}

struct FeasibilityReport {
  bool feasible = true;
  std::string reason;
};

inline std::vector<Vec2> positions(const std::vector<CenterlinePoint>& samples) {
  std::vector<Vec2> out;
  out.reserve(samples.size());
  for (const auto& p : samples) out.push_back(p.position);
  return out;
}

/// Rejects flexures whose undeformed centerline crosses itself. With
/// `strict`, the two flexures must not meet each other either.
inline FeasibilityReport check_feasibility(const HingeGeometry& g, bool strict = false) {
  std::array<std::vector<Vec2>, 2> lines = {positions(g.flexures[0].samples),
                                            positions(g.flexures[1].samples)};
  for (int i = 0; i < 2; ++i) {
    if (polyline_self_intersects(lines[i]))
      return {false, "flexure " + std::to_string(i + 1) + " centerline self-intersects"};
  }
  if (strict && polylines_intersect(lines[0], lines[1]))
    return {false, "flexure centerlines intersect each other"};
  return {};
}

/// Uniform independent draw inside `bounds`; deterministic per seed.
inline DesignVector sample_random(std::uint64_t seed,
                                  const DesignBounds& bounds = DesignBounds::standard()) {
  std::mt19937_64 rng(seed);
  std::array<double, kNumDesignVars> v{};
  for (std::size_t i = 0; i < kNumDesignVars; ++i) {
    std::uniform_real_distribution<double> u(bounds.lower[i], bounds.upper[i]);
    v[i] = u(rng);
  }
  return DesignVector::from_array(v);
}

/// The textbook cross-hinge: two straight flexures at 45 and 135 degrees
/// crossing at mid-length.
inline DesignVector classical_cross_hinge(double slenderness = 20.0) {
  constexpr double pi = std::numbers::pi;
  DesignVector d;
  d.theta1 = {pi / 4, pi / 4, 0, 0};
  d.theta2 = {3 * pi / 4, 3 * pi / 4, 0, 0};
  d.alpha = 1.0;
  d.beta1 = slenderness;
  d.beta2 = slenderness;
  d.gamma = 1.0;
  d.delta = std::sqrt(2.0) / 2.0;
  return d;
}

} // namespace xhinge

#endif

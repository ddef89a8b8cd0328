#ifndef XHINGE_KINETOSTATICS_HPP
#define XHINGE_KINETOSTATICS_HPP

#include "xhinge/beam_fem.hpp"
#include "xhinge/error.hpp"
#include "xhinge/geometry.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <array>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace xhinge {

/// Instantaneous centers of rotation, one per sweep increment.
struct Centrode {
  std::vector<Vec2> points;
};

/// x_c = mean(x_A) + e_z x (dx_A / dphi) for each pair of consecutive tip
/// positions; averaging the pair makes the estimate second order in dphi.
inline Centrode centrode(std::span<const Vec2> tips, double dphi) {
  if (tips.size() < 2) throw Error(ErrorCode::DegenerateInput, "centrode needs >= 2 tip positions");
  if (!(dphi > 0.0)) throw Error(ErrorCode::DegenerateInput, "centrode needs a positive step");
  Centrode c;
  c.points.reserve(tips.size() - 1);
  for (std::size_t k = 0; k + 1 < tips.size(); ++k) {
    const Vec2 rate = (tips[k + 1] - tips[k]) / dphi;
    c.points.push_back(0.5 * (tips[k] + tips[k + 1]) + Vec2(-rate.y(), rate.x()));
  }
  return c;
}

struct Circle {
  Vec2 center = Vec2::Zero();
  double radius = 0.0;

  bool contains(const Vec2& p, double rel_tol = 1e-12) const {
    return (p - center).norm() <= radius * (1.0 + rel_tol) + 1e-300;
  }
};

namespace detail {

inline Circle circle_from(const Vec2& a, const Vec2& b) { return {0.5 * (a + b), 0.5 * (a - b).norm()}; }

inline Circle circle_from(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Vec2 ab = b - a, ac = c - a;
  const double d = 2.0 * (ab.x() * ac.y() - ab.y() * ac.x());
  const double scale = std::max(ab.squaredNorm(), ac.squaredNorm());
  if (std::abs(d) <= 1e-14 * scale) {
    // collinear: the farthest pair spans the circle
    Circle best = circle_from(a, b);
    for (const Circle& cand : {circle_from(a, c), circle_from(b, c)})
      if (cand.radius > best.radius) best = cand;
    return best;
  }
  const double ab2 = ab.squaredNorm(), ac2 = ac.squaredNorm();
  const Vec2 off((ac.y() * ab2 - ab.y() * ac2) / d, (ab.x() * ac2 - ac.x() * ab2) / d);
  return {a + off, off.norm()};
}

} // namespace detail

/// Smallest enclosing circle (Welzl, move-to-front form). The random
/// permutation is seeded from the point count, so results are reproducible.
inline Circle min_enclosing_circle(std::span<const Vec2> input) {
  if (input.empty()) throw Error(ErrorCode::DegenerateInput, "enclosing circle of an empty set");
  std::vector<Vec2> p(input.begin(), input.end());
  std::mt19937_64 rng(0x9E3779B97F4A7C15ull ^ p.size());
  std::shuffle(p.begin(), p.end(), rng);

  Circle c{p[0], 0.0};
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (c.contains(p[i])) continue;
    c = {p[i], 0.0};
    for (std::size_t j = 0; j < i; ++j) {
      if (c.contains(p[j])) continue;
      c = detail::circle_from(p[i], p[j]);
      for (std::size_t k = 0; k < j; ++k) {
        if (c.contains(p[k])) continue;
        c = detail::circle_from(p[i], p[j], p[k]);
      }
    }
  }
  return c;
}

/// Inverse eigenvalues of a symmetric positive definite 2x2 stiffness,
/// ascending.
inline std::pair<double, double> principal_compliances(const fem::Mat2& K) {
  const fem::Mat2 sym = 0.5 * (K + K.transpose());
  Eigen::SelfAdjointEigenSolver<fem::Mat2> es(sym, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()[0];
  const double hi = es.eigenvalues()[1];
  if (!(lo > 0.0) || !std::isfinite(hi))
    throw Error(ErrorCode::NotPositiveDefinite, "translational stiffness is not positive definite");
  return {1.0 / hi, 1.0 / lo};
}

/// Difference quotients dM/dphi at the step midpoints.
inline std::vector<double> rotational_stiffness_profile(std::span<const double> moments, double dphi) {
  if (moments.size() < 2) throw Error(ErrorCode::DegenerateInput, "need >= 2 moment samples");
  std::vector<double> k(moments.size() - 1);
  for (std::size_t i = 0; i + 1 < moments.size(); ++i) k[i] = (moments[i + 1] - moments[i]) / dphi;
  return k;
}

/// Non-dimensional objectives of one design plus its feasibility verdict.
struct ObjectiveVector {
  double r_bar = std::numeric_limits<double>::quiet_NaN();
  double c_bar = std::numeric_limits<double>::quiet_NaN();
  double k_bar = std::numeric_limits<double>::quiet_NaN();
  bool feasible = false;
  double violation = 0.0;
  std::string reason;

  std::array<double, 3> values() const { return {r_bar, c_bar, k_bar}; }
};

struct EvaluationOptions {
  fem::ModelOptions model;
  fem::SweepSettings sweep;
  PhysicalScale scale;
  bool strict_intersection = false;
  std::size_t feasibility_segments = kDefaultFeasibilitySegments;
};

/// Everything computed along the way; the CLI uses it for traces.
struct EvaluationDetail {
  ObjectiveVector objectives;
  HingeGeometry geometry;
  std::optional<fem::BeamModel> model;
  fem::SweepResult sweep;
  Centrode centrode;
  Circle circle;
  std::vector<double> rotational_stiffness;
  std::vector<std::pair<double, double>> compliances;
};

inline EvaluationDetail evaluate_detailed(const DesignVector& d, const EvaluationOptions& opt = {}) {
  EvaluationDetail out;
  ObjectiveVector& obj = out.objectives;
  out.geometry = build_hinge(d, opt.scale, opt.feasibility_segments + 1);

  const FeasibilityReport feas = check_feasibility(out.geometry, opt.strict_intersection);
  if (!feas.feasible) {
    obj.violation = 1.0;
    obj.reason = feas.reason;
    return out;
  }

  out.model = fem::assemble_model(out.geometry, opt.model);
  out.sweep = fem::run_sweep(*out.model, opt.sweep);
  const auto& recs = out.sweep.records;
  const int planned = opt.sweep.steps;
  const auto unreached = [&](std::size_t reached_records) {
    const double reached_steps = reached_records > 0 ? static_cast<double>(reached_records - 1) : 0.0;
    return 1.0 - reached_steps / planned;
  };

  switch (out.sweep.failure) {
  case fem::SweepFailure::None: break;
  case fem::SweepFailure::StrainLimit:
    obj.violation = out.sweep.max_strain - opt.sweep.strain_limit;
    obj.reason = "bending strain " + std::to_string(out.sweep.max_strain) + " exceeds limit";
    return out;
  case fem::SweepFailure::NonConverged:
    obj.violation = 1.0 + unreached(recs.size());
    obj.reason = "equilibrium iterations did not converge";
    return out;
  case fem::SweepFailure::SingularTangent:
    obj.violation = 1.0 + unreached(recs.size());
    obj.reason = "singular tangent stiffness";
    return out;
  }

  double c_max = 0.0;
  for (std::size_t k = 0; k < recs.size(); ++k) {
    try {
      const auto c = principal_compliances(recs[k].stiffness);
      out.compliances.push_back(c);
      c_max = std::max({c_max, c.first, c.second});
    } catch (const Error&) {
      obj.violation = 1.0 + unreached(k);
      obj.reason = "translational stiffness not positive definite";
      return out;
    }
  }

  const double dphi = opt.sweep.total_rotation / planned;
  std::vector<Vec2> tips;
  std::vector<double> moments;
  for (const auto& r : recs) {
    tips.push_back(r.tip);
    moments.push_back(r.moment);
  }
  out.centrode = centrode(tips, dphi);
  out.circle = min_enclosing_circle(out.centrode.points);
  out.rotational_stiffness = rotational_stiffness_profile(moments, dphi);
  const double k_max = *std::max_element(out.rotational_stiffness.begin(), out.rotational_stiffness.end());

  const double l1 = opt.scale.length;
  const double force_ref = opt.scale.youngs * l1 * opt.scale.width;
  obj.r_bar = out.circle.radius / l1;
  obj.c_bar = c_max * force_ref / l1;
  obj.k_bar = k_max / (force_ref * l1);
  obj.feasible = true;
  obj.violation = 0.0;
  return out;
}

/// Full pipeline: geometry, feasibility, sweep, objectives. Never throws for
/// in-range designs; failures are encoded in the returned vector.
inline ObjectiveVector evaluate_objectives(const DesignVector& d, const EvaluationOptions& opt = {}) {
  return evaluate_detailed(d, opt).objectives;
}

} // namespace xhinge

#endif

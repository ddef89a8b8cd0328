// Independent reference implementations used only by the tests.
#ifndef XHINGE_TESTS_ORACLES_HPP
#define XHINGE_TESTS_ORACLES_HPP

#include "xhinge/geometry.hpp"
#include "xhinge/moo.hpp"
#include "xhinge/pareto.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace oracle {

using xhinge::Vec2;

// Adaptive Simpson quadrature with Richardson correction.
inline double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                      double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-14) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50);
}

inline Vec2 centerline_point(const std::array<double, 4>& c, double length, const Vec2& base, double s) {
  const auto th = [&](double t) { return xhinge::angle_profile(c, t); };
  return base + length * Vec2(integrate([&](double t) { return std::cos(th(t)); }, 0.0, s),
                              integrate([&](double t) { return std::sin(th(t)); }, 0.0, s));
}

// Parametric segment intersection, independent of the orientation predicate.
inline bool segments_meet(const Vec2& p, const Vec2& p2, const Vec2& q, const Vec2& q2) {
  const Vec2 r = p2 - p, s = q2 - q, qp = q - p;
  const double denom = r.x() * s.y() - r.y() * s.x();
  const double qpxr = qp.x() * r.y() - qp.y() * r.x();
  if (denom == 0.0) {
    if (qpxr != 0.0) return false; // parallel, not collinear
    const double rr = r.dot(r);
    if (rr == 0.0) return (q - p).norm() == 0.0 || (q2 - p).norm() == 0.0;
    const double t0 = qp.dot(r) / rr;
    const double t1 = t0 + s.dot(r) / rr;
    return std::max(std::min(t0, t1), 0.0) <= std::min(std::max(t0, t1), 1.0);
  }
  const double t = (qp.x() * s.y() - qp.y() * s.x()) / denom;
  const double u = qpxr / denom;
  return t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0;
}

inline bool self_intersects(std::span<const Vec2> pts) {
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    for (std::size_t j = i + 2; j + 1 < pts.size(); ++j)
      if (segments_meet(pts[i], pts[i + 1], pts[j], pts[j + 1])) return true;
  return false;
}

// Smallest enclosing circle by enumeration of all 2- and 3-point circles.
inline double enclosing_radius(std::span<const Vec2> p) {
  if (p.size() == 1) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const auto covers = [&](const Vec2& c, double r) {
    for (const auto& q : p)
      if ((q - c).norm() > r * (1.0 + 1e-12) + 1e-15) return false;
    return true;
  };
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      const Vec2 c = 0.5 * (p[i] + p[j]);
      const double r = 0.5 * (p[i] - p[j]).norm();
      if (r < best && covers(c, r)) best = r;
      for (std::size_t k = j + 1; k < p.size(); ++k) {
        // circumcircle via perpendicular bisector solve
        Eigen::Matrix2d A;
        A << 2 * (p[j] - p[i]).transpose(), 2 * (p[k] - p[i]).transpose();
        const Eigen::Vector2d rhs(p[j].squaredNorm() - p[i].squaredNorm(), p[k].squaredNorm() - p[i].squaredNorm());
        if (std::abs(A.determinant()) < 1e-300) continue;
        const Vec2 cc = A.fullPivLu().solve(rhs);
        const double rc = (cc - p[i]).norm();
        if (rc < best && covers(cc, rc)) best = rc;
      }
    }
  return best;
}

inline std::vector<std::size_t> nondominated_indices(const std::vector<std::vector<double>>& ys) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < ys.size() && !dominated; ++j) {
      bool le = true, lt = false;
      for (std::size_t k = 0; k < ys[i].size(); ++k) {
        le = le && ys[j][k] <= ys[i][k];
        lt = lt || ys[j][k] < ys[i][k];
      }
      dominated = le && lt;
    }
    if (!dominated) out.push_back(i);
  }
  return out;
}

inline double monte_carlo_hypervolume(const std::vector<std::vector<double>>& pts, const std::vector<double>& ref,
                                      std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t hits = 0;
  std::vector<double> z(ref.size());
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < ref.size(); ++i) z[i] = u(rng) * ref[i];
    for (const auto& p : pts) {
      bool dom = true;
      for (std::size_t i = 0; i < ref.size() && dom; ++i) dom = p[i] <= z[i];
      if (dom) {
        ++hits;
        break;
      }
    }
  }
  double box = 1.0;
  for (double r : ref) box *= r;
  return box * static_cast<double>(hits) / static_cast<double>(samples);
}

inline xhinge::moo::Problem zdt1(std::size_t n = 30) {
  xhinge::moo::Problem p;
  p.num_objectives = 2;
  p.lower.assign(n, 0.0);
  p.upper.assign(n, 1.0);
  p.evaluate = [n](std::span<const double> x) {
    double g = 0.0;
    for (std::size_t i = 1; i < n; ++i) g += x[i];
    g = 1.0 + 9.0 * g / static_cast<double>(n - 1);
    const double f1 = x[0];
    return xhinge::moo::Evaluation{{f1, g * (1.0 - std::sqrt(f1 / g))}, true, 0.0};
  };
  return p;
}

// Mean distance from each front point to the true ZDT1 front f2 = 1 - sqrt(f1).
inline double zdt1_generational_distance(const xhinge::ParetoArchive& a) {
  double total = 0.0;
  for (const auto& e : a.entries) {
    double best = std::numeric_limits<double>::infinity();
    // dense scan then local refinement
    const int n = 2000;
    int arg = 0;
    for (int k = 0; k <= n; ++k) {
      const double t = static_cast<double>(k) / n;
      const double d = std::hypot(e.y[0] - t, e.y[1] - (1.0 - std::sqrt(t)));
      if (d < best) best = d, arg = k;
    }
    double lo = std::max(0.0, (arg - 1.0) / n), hi = std::min(1.0, (arg + 1.0) / n);
    for (int it = 0; it < 100; ++it) {
      const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
      const auto d = [&](double t) { return std::hypot(e.y[0] - t, e.y[1] - (1.0 - std::sqrt(t))); };
      if (d(m1) < d(m2)) hi = m2;
      else lo = m1;
    }
    const double t = 0.5 * (lo + hi);
    best = std::min(best, std::hypot(e.y[0] - t, e.y[1] - (1.0 - std::sqrt(t))));
    total += best;
  }
  return a.empty() ? std::numeric_limits<double>::infinity() : total / static_cast<double>(a.size());
}

} // namespace oracle

#endif

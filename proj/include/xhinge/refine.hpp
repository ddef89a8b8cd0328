#ifndef XHINGE_REFINE_HPP
#define XHINGE_REFINE_HPP

#include "xhinge/error.hpp"
#include "xhinge/kinetostatics.hpp"
#include "xhinge/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace xhinge {

/// Weights proportional to the reciprocal normalized objectives of the start
/// design, so each objective contributes equally there.
inline std::vector<double> inverse_normalization_weights(std::span<const double> normalized) {
  std::vector<double> w(normalized.size());
  double total = 0.0;
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    if (!(normalized[i] > 0.0))
      throw Error(ErrorCode::DegenerateObjective, "normalized objective " + std::to_string(i) + " is not positive");
    w[i] = 1.0 / normalized[i];
    total += w[i];
  }
  for (double& v : w) v /= total;
  return w;
}

inline double scalarize(std::span<const double> normalized, std::span<const double> weights) {
  double s = 0.0;
  for (std::size_t i = 0; i < normalized.size(); ++i) s += weights[i] * normalized[i];
  return s;
}

struct ScalarValue {
  double value = 0.0;
  bool feasible = true;
  double violation = 0.0;
};

using ScalarObjective = std::function<ScalarValue(std::span<const double>)>;

/// Weighted sum of normalized objectives with normalization frozen at
/// construction.
struct ScalarizedProblem {
  std::vector<double> weights;
  std::vector<double> ideal;
  std::vector<double> nadir;
  EvaluationOptions options;

  ScalarizedProblem(std::vector<double> w, std::vector<double> ideal_, std::vector<double> nadir_,
                    EvaluationOptions opt = {})
      : weights(std::move(w)), ideal(std::move(ideal_)), nadir(std::move(nadir_)), options(std::move(opt)) {
    double total = 0.0;
    for (double v : weights) {
      if (v < 0.0) throw Error(ErrorCode::DegenerateInput, "weights must be non-negative");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::DegenerateInput, "weights must sum to 1");
  }

  double scalar_of(const ObjectiveVector& o) const {
    const auto y = o.values();
    return scalarize(normalize(y, ideal, nadir), weights);
  }

  ScalarValue operator()(std::span<const double> x) const {
    const ObjectiveVector o = evaluate_objectives(DesignVector::from_array(x), options);
    if (!o.feasible) return {0.0, false, o.violation};
    return {scalar_of(o), true, 0.0};
  }
};

struct NelderMeadSettings {
  int max_iterations = 200;
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  double initial_step = 0.05; // fraction of each variable's range
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  double initial_value = 0.0;
  int iterations = 0;
  int evaluations = 0;
};

/// Bounded Nelder-Mead. Trial points are clipped to the box; infeasible
/// points score (best feasible value so far) + violation. Returns the best
/// feasible point ever evaluated.
inline NelderMeadResult nelder_mead(const ScalarObjective& objective, std::span<const double> x0,
                                    std::span<const double> lower, std::span<const double> upper,
                                    const NelderMeadSettings& cfg = {}) {
  const std::size_t n = x0.size();
  NelderMeadResult out;
  const auto clip = [&](std::vector<double> x) {
    for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
    return x;
  };

  double best_feasible = std::numeric_limits<double>::infinity();
  const auto f = [&](const std::vector<double>& x) {
    ++out.evaluations;
    const ScalarValue v = objective(x);
    if (v.feasible) {
      if (v.value < best_feasible) {
        best_feasible = v.value;
        out.x = x;
        out.value = v.value;
      }
      return v.value;
    }
    return best_feasible + v.violation;
  };

  std::vector<std::vector<double>> simplex;
  std::vector<double> fv;
  simplex.push_back(clip({x0.begin(), x0.end()}));
  const ScalarValue start = objective(simplex[0]);
  ++out.evaluations;
  if (!start.feasible) throw Error(ErrorCode::InfeasibleStart, "refinement start point is infeasible");
  best_feasible = start.value;
  out.x = simplex[0];
  out.value = out.initial_value = start.value;
  fv.push_back(start.value);

  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v = simplex[0];
    const double step = cfg.initial_step * (upper[i] - lower[i]);
    v[i] = v[i] + step <= upper[i] ? v[i] + step : v[i] - step;
    v = clip(std::move(v));
    fv.push_back(f(v));
    simplex.push_back(std::move(v));
  }

  const auto affine = [&](const std::vector<double>& a, const std::vector<double>& b, double t) {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = a[i] + t * (b[i] - a[i]);
    return clip(std::move(r));
  };

  std::vector<std::size_t> order(n + 1);
  for (int it = 0; it < cfg.max_iterations; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
    out.iterations = it + 1;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[order[k]][i] / static_cast<double>(n);

    // x = centroid + t * (centroid - worst)
    const auto along = [&](double t) { return affine(centroid, simplex[worst], -t); };
    std::vector<double> xr = along(cfg.reflection);
    const double fr = f(xr);
    if (fr < fv[best]) {
      std::vector<double> xe = along(cfg.reflection * cfg.expansion);
      const double fe = f(xe);
      if (fe < fr) {
        simplex[worst] = std::move(xe);
        fv[worst] = fe;
      } else {
        simplex[worst] = std::move(xr);
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      simplex[worst] = std::move(xr);
      fv[worst] = fr;
      continue;
    }
    if (fr < fv[worst]) {
      std::vector<double> xc = along(cfg.reflection * cfg.contraction);
      const double fc = f(xc);
      if (fc <= fr) {
        simplex[worst] = std::move(xc);
        fv[worst] = fc;
        continue;
      }
    } else {
      std::vector<double> xcc = along(-cfg.contraction);
      const double fcc = f(xcc);
      if (fcc < fv[worst]) {
        simplex[worst] = std::move(xcc);
        fv[worst] = fcc;
        continue;
      }
    }
    for (std::size_t k = 1; k <= n; ++k) {
      const std::size_t idx = order[k];
      simplex[idx] = affine(simplex[best], simplex[idx], cfg.shrink);
      fv[idx] = f(simplex[idx]);
    }
  }
  return out;
}

} // namespace xhinge

#endif

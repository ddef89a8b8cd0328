#ifndef XHINGE_PARETO_HPP
#define XHINGE_PARETO_HPP

#include "xhinge/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace xhinge {

/// y dominates y' (minimization): no worse everywhere, strictly better once.
inline bool dominates(std::span<const double> y, std::span<const double> y2) {
  bool strict = false;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] > y2[i]) return false;
    if (y[i] < y2[i]) strict = true;
  }
  return strict;
}

struct ArchiveEntry {
  std::vector<double> x; // decision variables
  std::vector<double> y; // objectives
};

/// Mutually non-dominated (x, y) pairs with ideal/nadir metadata.
struct ParetoArchive {
  std::vector<ArchiveEntry> entries;
  std::vector<double> ideal;
  std::vector<double> nadir;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }

  void recompute_bounds() {
    ideal.clear();
    nadir.clear();
    if (entries.empty()) return;
    const std::size_t m = entries.front().y.size();
    ideal.assign(m, std::numeric_limits<double>::infinity());
    nadir.assign(m, -std::numeric_limits<double>::infinity());
    for (const auto& e : entries) {
      for (std::size_t i = 0; i < m; ++i) {
        ideal[i] = std::min(ideal[i], e.y[i]);
        nadir[i] = std::max(nadir[i], e.y[i]);
      }
    }
  }

  /// Adds `e` unless it is dominated or an objective-space duplicate with a
  /// lexicographically larger x; evicts entries it dominates. Bounds are not
  /// refreshed. Returns whether the entry was kept.
  bool insert(const ArchiveEntry& e) {
    for (auto& old : entries) {
      if (dominates(old.y, e.y)) return false;
      if (old.y == e.y) {
        if (e.x < old.x) {
          old = e;
          return true;
        }
        return false;
      }
    }
    std::erase_if(entries, [&](const ArchiveEntry& old) { return dominates(e.y, old.y); });
    entries.push_back(e);
    return true;
  }
};

/// Exactly the non-dominated subset, in input order. Objective-space
/// duplicates keep the entry with the lexicographically smallest x.
inline ParetoArchive nondominated_filter(std::span<const ArchiveEntry> input) {
  ParetoArchive out;
  const std::size_t n = input.size();
  std::vector<char> keep(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n && keep[i]; ++j) {
      if (i == j) continue;
      if (dominates(input[j].y, input[i].y)) keep[i] = 0;
      else if (input[j].y == input[i].y &&
               (input[j].x < input[i].x || (input[j].x == input[i].x && j < i)))
        keep[i] = 0;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (keep[i]) out.entries.push_back(input[i]);
  out.recompute_bounds();
  return out;
}

/// (y - ideal) / (nadir - ideal); degenerate coordinates map to 0.
inline std::vector<double> normalize(std::span<const double> y, std::span<const double> ideal,
                                     std::span<const double> nadir) {
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double span = nadir[i] - ideal[i];
    out[i] = span > 0.0 ? (y[i] - ideal[i]) / span : 0.0;
  }
  return out;
}

struct NormalizedFront {
  std::vector<std::vector<double>> values;
  std::vector<bool> degenerate; // per objective: nadir == ideal
  bool any_degenerate() const { return std::find(degenerate.begin(), degenerate.end(), true) != degenerate.end(); }
};

/// Normalizes every archive entry with the archive's stored ideal/nadir.
inline NormalizedFront normalize_front(const ParetoArchive& archive) {
  if (archive.empty()) throw Error(ErrorCode::EmptyArchive, "cannot normalize an empty archive");
  NormalizedFront out;
  for (std::size_t i = 0; i < archive.ideal.size(); ++i)
    out.degenerate.push_back(!(archive.nadir[i] > archive.ideal[i]));
  for (const auto& e : archive.entries) out.values.push_back(normalize(e.y, archive.ideal, archive.nadir));
  return out;
}

/// Relative distance to the nadir point, normalized to sum to one.
inline std::vector<double> pseudo_weights(std::span<const double> normalized) {
  std::vector<double> w(normalized.size());
  double total = 0.0;
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    w[i] = 1.0 - normalized[i];
    total += w[i];
  }
  if (!(total > 0.0)) throw Error(ErrorCode::DegenerateInput, "pseudo-weights undefined at the nadir point");
  for (double& v : w) v /= total;
  return w;
}

/// Index of the entry whose pseudo-weights are L1-closest to `target`;
/// ties go to the lowest index.
inline std::size_t select_by_target(const ParetoArchive& archive, std::span<const double> target) {
  if (archive.empty()) throw Error(ErrorCode::EmptyArchive, "cannot select from an empty archive");
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < archive.size(); ++k) {
    const auto yn = normalize(archive.entries[k].y, archive.ideal, archive.nadir);
    double dist = 0.0;
    try {
      const auto w = pseudo_weights(yn);
      for (std::size_t i = 0; i < w.size(); ++i) dist += std::abs(w[i] - target[i]);
    } catch (const Error&) {
      continue; // sits on the nadir point
    }
    if (dist < best_dist) {
      best_dist = dist;
      best = k;
    }
  }
  return best;
}

namespace detail {

inline double hypervolume_2d(std::vector<std::vector<double>> pts, std::span<const double> ref) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
  });
  double volume = 0.0;
  double y_bound = ref[1];
  for (const auto& p : pts) {
    if (p[1] < y_bound) {
      volume += (ref[0] - p[0]) * (y_bound - p[1]);
      y_bound = p[1];
    }
  }
  return volume;
}

// Slices along the last objective and recurses.
inline double hypervolume_rec(std::vector<std::vector<double>> pts, std::span<const double> ref) {
  const std::size_t d = ref.size();
  if (pts.empty()) return 0.0;
  if (d == 1) {
    double lo = ref[0];
    for (const auto& p : pts) lo = std::min(lo, p[0]);
    return ref[0] - lo;
  }
  if (d == 2) return hypervolume_2d(std::move(pts), ref);
  std::sort(pts.begin(), pts.end(), [d](const auto& a, const auto& b) { return a[d - 1] < b[d - 1]; });
  double volume = 0.0;
  std::vector<std::vector<double>> slice;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    slice.emplace_back(pts[i].begin(), pts[i].end() - 1);
    const double top = i + 1 < pts.size() ? pts[i + 1][d - 1] : ref[d - 1];
    const double depth = top - pts[i][d - 1];
    if (depth > 0.0) volume += depth * hypervolume_rec(slice, ref.first(d - 1));
  }
  return volume;
}

} // namespace detail

/// Lebesgue measure of the region dominated by `points` and bounded by `ref`.
/// Points not strictly better than `ref` in every objective contribute nothing.
inline double hypervolume(std::span<const std::vector<double>> points, std::span<const double> ref) {
  std::vector<std::vector<double>> pts;
  for (const auto& p : points) {
    bool inside = true;
    for (std::size_t i = 0; i < ref.size(); ++i) inside = inside && p[i] < ref[i];
    if (inside) pts.push_back(p);
  }
  return detail::hypervolume_rec(std::move(pts), ref);
}

} // namespace xhinge

#endif

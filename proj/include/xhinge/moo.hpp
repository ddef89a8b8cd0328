#ifndef XHINGE_MOO_HPP
#define XHINGE_MOO_HPP

// Real-coded multi-objective evolutionary optimizers (NSGA-II, SPEA2) with
// constraint-domination, SBX crossover and polynomial mutation. Evaluations of
// one generation run on a worker pool and are reduced in index order, so the
// outcome only depends on the seed.

#include "xhinge/error.hpp"
#include "xhinge/pareto.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

namespace xhinge::moo {

enum class Algorithm { Nsga2, Spea2 };

inline const char* to_string(Algorithm a) { return a == Algorithm::Nsga2 ? "nsga2" : "spea2"; }

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "nsga2" || s == "NSGA2" || s == "nsga-ii") return Algorithm::Nsga2;
  if (s == "spea2" || s == "SPEA2") return Algorithm::Spea2;
  throw Error(ErrorCode::ConfigError, "unknown algorithm '" + s + "'");
}

struct MooConfig {
  Algorithm algorithm = Algorithm::Nsga2;
  std::size_t population = 500;
  std::size_t generations = 1000;
  std::uint64_t seed = 1;
  double crossover_probability = 0.9;
  double crossover_eta = 15.0;
  double mutation_probability = -1.0; // < 0: 1 / number of variables
  double mutation_eta = 20.0;
  std::size_t archive_size = 0;       // SPEA2; 0: same as population
  std::size_t workers = 1;

  void validate() const {
    if (population < 4 || population % 2 != 0)
      throw Error(ErrorCode::ConfigError, "population must be even and >= 4");
    if (crossover_probability < 0.0 || crossover_probability > 1.0)
      throw Error(ErrorCode::ConfigError, "crossover probability outside [0, 1]");
    if (mutation_probability > 1.0)
      throw Error(ErrorCode::ConfigError, "mutation probability above 1");
    if (!(crossover_eta > 0.0) || !(mutation_eta > 0.0))
      throw Error(ErrorCode::ConfigError, "distribution indices must be positive");
    if (workers == 0) throw Error(ErrorCode::ConfigError, "need at least one worker");
  }

  double mutation_rate(std::size_t num_variables) const {
    return mutation_probability < 0.0 ? 1.0 / static_cast<double>(num_variables) : mutation_probability;
  }
  std::size_t spea2_archive_size() const { return archive_size == 0 ? population : archive_size; }
};

/// Result of one objective evaluation. Infeasible results need no objectives.
struct Evaluation {
  std::vector<double> objectives;
  bool feasible = true;
  double violation = 0.0;
};

struct Problem {
  std::size_t num_objectives = 0;
  std::vector<double> lower;
  std::vector<double> upper;
  std::function<Evaluation(std::span<const double>)> evaluate;

  std::size_t num_variables() const { return lower.size(); }
};

/// Constraint-domination: feasibility first, then violation, then Pareto.
inline bool constrained_dominates(const Evaluation& a, const Evaluation& b) {
  if (a.feasible != b.feasible) return a.feasible;
  if (!a.feasible) return a.violation < b.violation;
  return dominates(a.objectives, b.objectives);
}

struct Individual {
  std::vector<double> x;
  Evaluation eval;
  int rank = 0;          // NSGA-II front index
  double crowding = 0.0; // NSGA-II
  double fitness = 0.0;  // SPEA2 raw fitness + density
};

using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

/// Bounded SBX on one variable; always crosses. Returns the two children
/// ordered like the parents before the random swap.
inline std::pair<double, double> sbx_pair(double p1, double p2, double lo, double hi, double eta, Rng& rng) {
  if (std::abs(p1 - p2) <= 1e-14) return {p1, p2};
  const double y1 = std::min(p1, p2), y2 = std::max(p1, p2);
  const double rand = uniform01(rng);
  const auto spread = [&](double beta) {
    const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
    if (rand <= 1.0 / alpha) return std::pow(rand * alpha, 1.0 / (eta + 1.0));
    return std::pow(1.0 / (2.0 - rand * alpha), 1.0 / (eta + 1.0));
  };
  const double bq1 = spread(1.0 + 2.0 * (y1 - lo) / (y2 - y1));
  const double c1 = 0.5 * ((y1 + y2) - bq1 * (y2 - y1));
  const double bq2 = spread(1.0 + 2.0 * (hi - y2) / (y2 - y1));
  const double c2 = 0.5 * ((y1 + y2) + bq2 * (y2 - y1));
  return {std::clamp(c1, lo, hi), std::clamp(c2, lo, hi)};
}

/// Bounded polynomial mutation of one variable.
inline double polynomial_mutation(double y, double lo, double hi, double eta, Rng& rng) {
  const double range = hi - lo;
  if (!(range > 0.0)) return y;
  const double d1 = (y - lo) / range, d2 = (hi - y) / range;
  const double rnd = uniform01(rng);
  const double power = 1.0 / (eta + 1.0);
  double dq;
  if (rnd <= 0.5) {
    const double val = 2.0 * rnd + (1.0 - 2.0 * rnd) * std::pow(1.0 - d1, eta + 1.0);
    dq = std::pow(val, power) - 1.0;
  } else {
    const double val = 2.0 * (1.0 - rnd) + 2.0 * (rnd - 0.5) * std::pow(1.0 - d2, eta + 1.0);
    dq = 1.0 - std::pow(val, power);
  }
  return std::clamp(y + dq * range, lo, hi);
}

/// SBX on consecutive parent pairs followed by polynomial mutation. Children
/// are clipped to the problem bounds.
inline std::vector<std::vector<double>> variation(const std::vector<std::vector<double>>& parents,
                                                  const MooConfig& cfg, std::span<const double> lower,
                                                  std::span<const double> upper, Rng& rng) {
  const std::size_t n = lower.size();
  const double pm = cfg.mutation_rate(n);
  std::vector<std::vector<double>> kids = parents;
  for (std::size_t p = 0; p + 1 < kids.size(); p += 2) {
    if (uniform01(rng) > cfg.crossover_probability) continue;
    auto& a = kids[p];
    auto& b = kids[p + 1];
    for (std::size_t i = 0; i < n; ++i) {
      if (uniform01(rng) > 0.5) continue;
      auto [c1, c2] = sbx_pair(a[i], b[i], lower[i], upper[i], cfg.crossover_eta, rng);
      if (uniform01(rng) <= 0.5) std::swap(c1, c2);
      a[i] = c1;
      b[i] = c2;
    }
  }
  if (pm > 0.0) {
    for (auto& k : kids)
      for (std::size_t i = 0; i < n; ++i)
        if (uniform01(rng) <= pm) k[i] = polynomial_mutation(k[i], lower[i], upper[i], cfg.mutation_eta, rng);
  }
  for (auto& k : kids)
    for (std::size_t i = 0; i < n; ++i) k[i] = std::clamp(k[i], lower[i], upper[i]);
  return kids;
}

/// Caches results by the bit pattern of x and runs cache misses on a pool of
/// worker threads.
class BatchEvaluator {
public:
  BatchEvaluator(const Problem& problem, std::size_t workers) : problem_(problem), workers_(workers) {}

  std::vector<Evaluation> operator()(const std::vector<std::vector<double>>& xs) {
    std::vector<Evaluation> out(xs.size());
    std::vector<std::size_t> todo;
    std::unordered_map<Key, std::size_t, KeyHash> pending;
    std::vector<std::size_t> alias(xs.size(), SIZE_MAX);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      check_bounds(xs[i]);
      Key k = key(xs[i]);
      if (auto it = cache_.find(k); it != cache_.end()) {
        out[i] = it->second;
      } else if (auto pt = pending.find(k); pt != pending.end()) {
        alias[i] = pt->second;
      } else {
        pending.emplace(std::move(k), i);
        todo.push_back(i);
      }
    }

    std::atomic<std::size_t> next{0};
    const auto work = [&] {
      for (std::size_t t = next++; t < todo.size(); t = next++) out[todo[t]] = problem_.evaluate(xs[todo[t]]);
    };
    const std::size_t n_threads = std::min(workers_, todo.size());
    if (n_threads <= 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < n_threads; ++w) pool.emplace_back(work);
      for (auto& t : pool) t.join();
    }
    evaluations_ += todo.size();
    for (std::size_t i : todo) cache_.emplace(key(xs[i]), out[i]);
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (alias[i] != SIZE_MAX) out[i] = out[alias[i]];
    return out;
  }

  std::size_t evaluations() const { return evaluations_; }

private:
  using Key = std::vector<std::uint64_t>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::uint64_t h = 1469598103934665603ull;
      for (auto v : k) h = (h ^ v) * 1099511628211ull;
      return static_cast<std::size_t>(h);
    }
  };

  static Key key(const std::vector<double>& x) {
    Key k(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) k[i] = std::bit_cast<std::uint64_t>(x[i]);
    return k;
  }

  void check_bounds(const std::vector<double>& x) const {
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!(x[i] >= problem_.lower[i] && x[i] <= problem_.upper[i]))
        throw Error(ErrorCode::OutOfRange, "optimizer produced an out-of-bounds candidate");
  }

  const Problem& problem_;
  std::size_t workers_;
  std::size_t evaluations_ = 0;
  std::unordered_map<Key, Evaluation, KeyHash> cache_;
};

struct GenerationStats {
  std::size_t generation = 0;
  std::size_t feasible = 0;     // feasible members of the current population
  std::size_t archive_size = 0; // external non-dominated feasible archive
  double hypervolume = 0.0;
};

struct RunResult {
  ParetoArchive archive;
  std::vector<GenerationStats> history;
  std::size_t evaluations = 0;
};

using ProgressCallback = std::function<void(const GenerationStats&)>;

/// Hypervolume of the external archive against a box frozen at the first
/// generation that produced a feasible point, so the series cannot decrease
/// while the archive only gains non-dominated points.
class ProgressMeter {
public:
  double measure(const ParetoArchive& archive) {
    if (archive.empty()) return 0.0;
    if (origin_.empty()) {
      ParetoArchive a = archive;
      a.recompute_bounds();
      origin_ = a.ideal;
      scale_.resize(origin_.size());
      for (std::size_t i = 0; i < origin_.size(); ++i) {
        const double span = a.nadir[i] - a.ideal[i];
        scale_[i] = 1.1 * (span > 0.0 ? span : std::max(1.0, std::abs(a.ideal[i])));
      }
    }
    std::vector<std::vector<double>> pts;
    pts.reserve(archive.size());
    for (const auto& e : archive.entries) {
      std::vector<double> p(e.y.size());
      for (std::size_t i = 0; i < p.size(); ++i) p[i] = (e.y[i] - origin_[i]) / scale_[i];
      pts.push_back(std::move(p));
    }
    const std::vector<double> ref(origin_.size(), 1.0);
    return hypervolume(pts, ref);
  }

  const std::vector<double>& origin() const { return origin_; }
  const std::vector<double>& scale() const { return scale_; }

private:
  std::vector<double> origin_;
  std::vector<double> scale_;
};

namespace detail {

inline std::vector<std::vector<double>> random_population(const Problem& p, std::size_t n, Rng& rng) {
  std::vector<std::vector<double>> xs(n, std::vector<double>(p.num_variables()));
  for (auto& x : xs)
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = p.lower[i] + uniform01(rng) * (p.upper[i] - p.lower[i]);
  return xs;
}

inline std::vector<Individual> evaluate_all(BatchEvaluator& eval, std::vector<std::vector<double>> xs) {
  const auto evals = eval(xs);
  std::vector<Individual> pop(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    pop[i].x = std::move(xs[i]);
    pop[i].eval = evals[i];
  }
  return pop;
}

inline void absorb_feasible(ParetoArchive& archive, const std::vector<Individual>& pop) {
  for (const auto& ind : pop)
    if (ind.eval.feasible) archive.insert({ind.x, ind.eval.objectives});
}

inline std::size_t count_feasible(const std::vector<Individual>& pop) {
  return static_cast<std::size_t>(
      std::count_if(pop.begin(), pop.end(), [](const Individual& i) { return i.eval.feasible; }));
}

class Recorder {
public:
  Recorder(RunResult& result, const ProgressCallback& cb) : result_(result), cb_(cb) {}

  void operator()(std::size_t gen, const std::vector<Individual>& pop) {
    GenerationStats s;
    s.generation = gen;
    s.feasible = count_feasible(pop);
    s.archive_size = result_.archive.size();
    s.hypervolume = meter_.measure(result_.archive);
    result_.history.push_back(s);
    if (cb_) cb_(s);
  }

private:
  RunResult& result_;
  const ProgressCallback& cb_;
  ProgressMeter meter_;
};

} // namespace detail

/// Fronts under constraint-domination; assigns `rank`.
inline std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::vector<Individual>& pop) {
  const std::size_t n = pop.size();
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<std::size_t> count(n, 0);
  std::vector<std::vector<std::size_t>> fronts(1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (constrained_dominates(pop[i].eval, pop[j].eval)) {
        dominated[i].push_back(j);
        ++count[j];
      } else if (constrained_dominates(pop[j].eval, pop[i].eval)) {
        dominated[j].push_back(i);
        ++count[i];
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (count[i] == 0) {
      pop[i].rank = 0;
      fronts[0].push_back(i);
    }
  for (std::size_t f = 0; !fronts[f].empty(); ++f) {
    std::vector<std::size_t> next;
    for (std::size_t i : fronts[f])
      for (std::size_t j : dominated[i])
        if (--count[j] == 0) {
          pop[j].rank = static_cast<int>(f + 1);
          next.push_back(j);
        }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(next));
  }
  fronts.pop_back();
  return fronts;
}

/// Crowding distance within one front; boundary points get infinity.
/// Infeasible members get zero.
inline void crowding_distance(std::vector<Individual>& pop, const std::vector<std::size_t>& front) {
  for (std::size_t i : front) pop[i].crowding = 0.0;
  if (front.empty() || !pop[front.front()].eval.feasible) return;
  const std::size_t m = pop[front.front()].eval.objectives.size();
  std::vector<std::size_t> idx = front;
  for (std::size_t k = 0; k < m; ++k) {
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return pop[a].eval.objectives[k] < pop[b].eval.objectives[k];
    });
    const double lo = pop[idx.front()].eval.objectives[k];
    const double hi = pop[idx.back()].eval.objectives[k];
    pop[idx.front()].crowding = std::numeric_limits<double>::infinity();
    pop[idx.back()].crowding = std::numeric_limits<double>::infinity();
    if (!(hi > lo)) continue;
    for (std::size_t t = 1; t + 1 < idx.size(); ++t)
      pop[idx[t]].crowding +=
          (pop[idx[t + 1]].eval.objectives[k] - pop[idx[t - 1]].eval.objectives[k]) / (hi - lo);
  }
}

namespace detail {

inline bool nsga2_better(const Individual& a, const Individual& b) {
  if (a.rank != b.rank) return a.rank < b.rank;
  return a.crowding > b.crowding;
}

inline std::vector<std::vector<double>> nsga2_mating(const std::vector<Individual>& pop, std::size_t n, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
  std::vector<std::vector<double>> parents;
  parents.reserve(n);
  while (parents.size() < n) {
    const std::size_t a = pick(rng), b = pick(rng);
    const Individual& winner = nsga2_better(pop[b], pop[a]) ? pop[b] : pop[a];
    parents.push_back(winner.x);
  }
  return parents;
}

} // namespace detail

/// NSGA-II with elitist (mu + mu) survival. The returned archive holds every
/// non-dominated feasible design evaluated during the run.
inline RunResult nsga2_run(const MooConfig& cfg, const Problem& problem, const ProgressCallback& progress = {}) {
  cfg.validate();
  RunResult result;
  Rng rng(cfg.seed);
  BatchEvaluator eval(problem, cfg.workers);
  detail::Recorder record(result, progress);

  auto pop = detail::evaluate_all(eval, detail::random_population(problem, cfg.population, rng));
  for (const auto& front : fast_nondominated_sort(pop)) crowding_distance(pop, front);
  detail::absorb_feasible(result.archive, pop);
  record(0, pop);

  for (std::size_t gen = 1; gen <= cfg.generations; ++gen) {
    auto parents = detail::nsga2_mating(pop, cfg.population, rng);
    auto kids = detail::evaluate_all(eval, variation(parents, cfg, problem.lower, problem.upper, rng));
    detail::absorb_feasible(result.archive, kids);

    std::vector<Individual> merged = std::move(pop);
    merged.insert(merged.end(), std::make_move_iterator(kids.begin()), std::make_move_iterator(kids.end()));
    const auto fronts = fast_nondominated_sort(merged);
    std::vector<Individual> next;
    next.reserve(cfg.population);
    for (const auto& front : fronts) {
      crowding_distance(merged, front);
      if (next.size() + front.size() <= cfg.population) {
        for (std::size_t i : front) next.push_back(merged[i]);
        continue;
      }
      std::vector<std::size_t> order = front;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return merged[a].crowding > merged[b].crowding; });
      for (std::size_t t = 0; next.size() < cfg.population; ++t) next.push_back(merged[order[t]]);
      break;
    }
    pop = std::move(next);
    for (const auto& front : fast_nondominated_sort(pop)) crowding_distance(pop, front);
    record(gen, pop);
  }
  result.archive.recompute_bounds();
  result.evaluations = eval.evaluations();
  return result;
}

namespace detail {

// Objective-space distances between feasible members after scaling each
// objective by its spread over the union; infeasible pairs are infinitely far.
inline std::vector<std::vector<double>> scaled_distances(const std::vector<Individual>& u) {
  const std::size_t n = u.size();
  std::vector<double> lo, hi;
  for (const auto& ind : u) {
    if (!ind.eval.feasible) continue;
    const auto& y = ind.eval.objectives;
    if (lo.empty()) {
      lo = y;
      hi = y;
    }
    for (std::size_t k = 0; k < y.size(); ++k) {
      lo[k] = std::min(lo[k], y[k]);
      hi[k] = std::max(hi[k], y[k]);
    }
  }
  std::vector<std::vector<double>> d(n, std::vector<double>(n, std::numeric_limits<double>::infinity()));
  for (std::size_t i = 0; i < n; ++i) {
    d[i][i] = 0.0;
    if (!u[i].eval.feasible) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!u[j].eval.feasible) continue;
      double s = 0.0;
      for (std::size_t k = 0; k < lo.size(); ++k) {
        const double span = hi[k] > lo[k] ? hi[k] - lo[k] : 1.0;
        const double t = (u[i].eval.objectives[k] - u[j].eval.objectives[k]) / span;
        s += t * t;
      }
      d[i][j] = d[j][i] = std::sqrt(s);
    }
  }
  return d;
}

} // namespace detail

/// SPEA2 fitness: raw fitness (sum of dominator strengths) plus k-th nearest
/// neighbour density, k = floor(sqrt(n)).
inline void spea2_fitness(std::vector<Individual>& u, const std::vector<std::vector<double>>& dist) {
  const std::size_t n = u.size();
  std::vector<std::size_t> strength(n, 0);
  std::vector<std::vector<char>> dom(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && constrained_dominates(u[i].eval, u[j].eval)) {
        dom[i][j] = 1;
        ++strength[i];
      }
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(std::sqrt(static_cast<double>(n))), n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    double raw = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (dom[i][j]) raw += static_cast<double>(strength[i]);
    std::vector<double> row = dist[j];
    row.erase(row.begin() + static_cast<std::ptrdiff_t>(j));
    double sigma = std::numeric_limits<double>::infinity();
    if (k >= 1 && !row.empty()) {
      std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
      sigma = row[k - 1];
    }
    const double density = std::isfinite(sigma) ? 1.0 / (sigma + 2.0) : 0.0;
    u[j].fitness = raw + density;
  }
}

/// Removes members one at a time until `target` remain; the victim is the one
/// whose sorted neighbour-distance list is lexicographically smallest (ties go
/// to the lower index). Returns the surviving indices into `members`.
inline std::vector<std::size_t> spea2_truncate(std::vector<std::size_t> members,
                                               const std::vector<std::vector<double>>& dist, std::size_t target) {
  std::vector<std::vector<double>> lists(members.size());
  for (std::size_t a = 0; a < members.size(); ++a) {
    for (std::size_t b = 0; b < members.size(); ++b)
      if (a != b) lists[a].push_back(dist[members[a]][members[b]]);
    std::sort(lists[a].begin(), lists[a].end());
  }
  std::vector<char> alive(members.size(), 1);
  std::size_t remaining = members.size();
  while (remaining > target) {
    std::size_t victim = SIZE_MAX;
    for (std::size_t a = 0; a < members.size(); ++a) {
      if (!alive[a]) continue;
      if (victim == SIZE_MAX ||
          std::lexicographical_compare(lists[a].begin(), lists[a].end(), lists[victim].begin(), lists[victim].end()))
        victim = a;
    }
    alive[victim] = 0;
    --remaining;
    for (std::size_t a = 0; a < members.size(); ++a) {
      if (!alive[a]) continue;
      const double dv = dist[members[a]][members[victim]];
      auto it = std::lower_bound(lists[a].begin(), lists[a].end(), dv);
      if (it != lists[a].end()) lists[a].erase(it);
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < members.size(); ++a)
    if (alive[a]) out.push_back(members[a]);
  return out;
}

/// SPEA2 environmental selection on the union of population and archive.
inline std::vector<Individual> spea2_environmental_selection(std::vector<Individual> u, std::size_t archive_size) {
  const auto dist = detail::scaled_distances(u);
  spea2_fitness(u, dist);
  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i].fitness < 1.0) chosen.push_back(i);
  if (chosen.size() > archive_size) {
    chosen = spea2_truncate(std::move(chosen), dist, archive_size);
  } else if (chosen.size() < archive_size) {
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < u.size(); ++i)
      if (!(u[i].fitness < 1.0)) rest.push_back(i);
    std::stable_sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) { return u[a].fitness < u[b].fitness; });
    for (std::size_t t = 0; t < rest.size() && chosen.size() < archive_size; ++t) chosen.push_back(rest[t]);
    std::sort(chosen.begin(), chosen.end());
  }
  std::vector<Individual> out;
  out.reserve(chosen.size());
  for (std::size_t i : chosen) out.push_back(std::move(u[i]));
  return out;
}

/// SPEA2 with strength/density fitness and truncation-based archive update.
/// The returned archive holds every non-dominated feasible design evaluated.
inline RunResult spea2_run(const MooConfig& cfg, const Problem& problem, const ProgressCallback& progress = {}) {
  cfg.validate();
  RunResult result;
  Rng rng(cfg.seed);
  BatchEvaluator eval(problem, cfg.workers);
  detail::Recorder record(result, progress);
  const std::size_t archive_size = cfg.spea2_archive_size();

  auto pop = detail::evaluate_all(eval, detail::random_population(problem, cfg.population, rng));
  detail::absorb_feasible(result.archive, pop);
  std::vector<Individual> archive = spea2_environmental_selection(pop, archive_size);
  record(0, pop);

  for (std::size_t gen = 1; gen <= cfg.generations; ++gen) {
    std::uniform_int_distribution<std::size_t> pick(0, archive.size() - 1);
    std::vector<std::vector<double>> parents;
    parents.reserve(cfg.population);
    while (parents.size() < cfg.population) {
      const std::size_t a = pick(rng), b = pick(rng);
      parents.push_back(archive[b].fitness < archive[a].fitness ? archive[b].x : archive[a].x);
    }
    pop = detail::evaluate_all(eval, variation(parents, cfg, problem.lower, problem.upper, rng));
    detail::absorb_feasible(result.archive, pop);

    std::vector<Individual> u = std::move(archive);
    u.insert(u.end(), pop.begin(), pop.end());
    archive = spea2_environmental_selection(std::move(u), archive_size);
    record(gen, pop);
  }
  result.archive.recompute_bounds();
  result.evaluations = eval.evaluations();
  return result;
}

inline RunResult run(const MooConfig& cfg, const Problem& problem, const ProgressCallback& progress = {}) {
  return cfg.algorithm == Algorithm::Nsga2 ? nsga2_run(cfg, problem, progress) : spea2_run(cfg, problem, progress);
}

/// Non-dominated union of two archives with refreshed ideal/nadir.
inline ParetoArchive merge_archives(const ParetoArchive& a, const ParetoArchive& b) {
  std::vector<ArchiveEntry> all = a.entries;
  all.insert(all.end(), b.entries.begin(), b.entries.end());
  return nondominated_filter(all);
}

} // namespace xhinge::moo

#endif

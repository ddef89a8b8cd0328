#ifndef XHINGE_PIPELINE_HPP
#define XHINGE_PIPELINE_HPP

#include "xhinge/kinetostatics.hpp"
#include "xhinge/moo.hpp"
#include "xhinge/pareto.hpp"
#include "xhinge/refine.hpp"

#include <vector>

namespace xhinge {

/// The hinge design problem as seen by the evolutionary optimizers.
inline moo::Problem hinge_problem(const EvaluationOptions& opt = {},
                                  const DesignBounds& bounds = DesignBounds::standard()) {
  moo::Problem p;
  p.num_objectives = 3;
  p.lower.assign(bounds.lower.begin(), bounds.lower.end());
  p.upper.assign(bounds.upper.begin(), bounds.upper.end());
  p.evaluate = [opt](std::span<const double> x) {
    const ObjectiveVector o = evaluate_objectives(DesignVector::from_array(x), opt);
    moo::Evaluation e;
    e.feasible = o.feasible;
    e.violation = o.violation;
    if (o.feasible) {
      const auto v = o.values();
      e.objectives.assign(v.begin(), v.end());
    }
    return e;
  };
  return p;
}

struct CampaignResult {
  moo::RunResult nsga2;
  moo::RunResult spea2;
  ParetoArchive merged;
};

/// Both algorithms with the same settings and seed, archives merged.
inline CampaignResult run_campaign(moo::MooConfig cfg, const moo::Problem& problem,
                                   const moo::ProgressCallback& progress = {}) {
  CampaignResult out;
  cfg.algorithm = moo::Algorithm::Nsga2;
  out.nsga2 = moo::run(cfg, problem, progress);
  cfg.algorithm = moo::Algorithm::Spea2;
  out.spea2 = moo::run(cfg, problem, progress);
  out.merged = moo::merge_archives(out.nsga2.archive, out.spea2.archive);
  return out;
}

struct RefinementOutcome {
  DesignVector start;
  DesignVector refined;
  ObjectiveVector before;
  ObjectiveVector after;
  std::vector<double> weights;
  double scalar_before = 0.0;
  double scalar_after = 0.0;
  NelderMeadResult search;
};

/// Nelder-Mead on the weighted sum of normalized objectives, normalization
/// frozen at the archive's ideal/nadir. Empty `weights` selects inverse
/// normalization at the start design.
inline RefinementOutcome refine_design(const DesignVector& start, const ParetoArchive& archive,
                                       std::vector<double> weights, const EvaluationOptions& opt,
                                       const NelderMeadSettings& nm = {}) {
  RefinementOutcome out;
  out.start = start;
  out.before = evaluate_objectives(start, opt);
  if (!out.before.feasible) throw Error(ErrorCode::InfeasibleStart, "start design is infeasible: " + out.before.reason);
  if (weights.empty()) {
    const auto y = out.before.values();
    weights = inverse_normalization_weights(normalize(y, archive.ideal, archive.nadir));
  }
  const ScalarizedProblem problem(weights, archive.ideal, archive.nadir, opt);
  out.weights = weights;
  out.scalar_before = problem.scalar_of(out.before);

  const auto b = DesignBounds::standard();
  const auto x0 = start.to_array();
  out.search = nelder_mead([&](std::span<const double> x) { return problem(x); }, x0, b.lower, b.upper, nm);
  out.refined = DesignVector::from_array(out.search.x);
  out.after = evaluate_objectives(out.refined, opt);
  out.scalar_after = problem.scalar_of(out.after);
  return out;
}

} // namespace xhinge

#endif

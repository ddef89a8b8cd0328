#include "xhinge/pipeline.hpp"
#include "xhinge/refine.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace xhinge;

namespace {

const std::vector<double> kRowA{5.978e-2, 3.228e-2, 4.534e-2};

std::vector<double> unit(double v) { return std::vector<double>(kNumDesignVars, v); }

ScalarValue quadratic(std::span<const double> x) {
  double f = 0.0;
  for (double v : x) f += (v - 0.7) * (v - 0.7);
  return {f, true, 0.0};
}

void expect_code(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
    FAIL() << "no exception";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

EvaluationOptions coarse() {
  EvaluationOptions opt;
  opt.model.elements_per_flexure = 10;
  opt.sweep.steps = 10;
  return opt;
}

} // namespace

TEST(InverseNormalizationWeights, UniformSelectionRow) {
  const auto w = inverse_normalization_weights(kRowA);
  EXPECT_NEAR(w[0], 0.240, 1e-3);
  EXPECT_NEAR(w[1], 0.444, 1e-3);
  EXPECT_NEAR(w[2], 0.316, 1e-3);
  EXPECT_NEAR(w[0] + w[1] + w[2], 1.0, 1e-15);
}

TEST(InverseNormalizationWeights, SymmetryAndArithmetic) {
  for (double t : {1e-6, 0.3, 1.0}) {
    const auto w = inverse_normalization_weights(std::vector<double>{t, t, t});
    for (double v : w) EXPECT_NEAR(v, 1.0 / 3, 1e-15);
  }
  const auto w = inverse_normalization_weights(std::vector<double>{1.0, 1.0, 0.5});
  EXPECT_NEAR(w[0], 0.25, 1e-15);
  EXPECT_NEAR(w[1], 0.25, 1e-15);
  EXPECT_NEAR(w[2], 0.5, 1e-15);
}

TEST(InverseNormalizationWeights, ZeroEntryThrows) {
  expect_code(ErrorCode::DegenerateObjective,
              [] { inverse_normalization_weights(std::vector<double>{0.2, 0.0, 0.3}); });
}

TEST(Scalarize, UniformSelectionRow) {
  EXPECT_NEAR(scalarize(kRowA, std::vector<double>{0.240, 0.444, 0.316}), 4.300e-2, 2e-4);
  // with the unrounded weights every term equals 1 / sum(1/y)
  const auto w = inverse_normalization_weights(kRowA);
  EXPECT_NEAR(scalarize(kRowA, w), 3.0 / (1 / kRowA[0] + 1 / kRowA[1] + 1 / kRowA[2]), 1e-15);
}

TEST(Scalarize, TrivialCases) {
  EXPECT_EQ(scalarize(kRowA, std::vector<double>{1, 0, 0}), kRowA[0]);
  EXPECT_EQ(scalarize(std::vector<double>{0, 0, 0}, std::vector<double>{0.2, 0.3, 0.5}), 0.0);
}

TEST(ScalarizedProblem, ValidatesWeights) {
  const std::vector<double> ideal{0, 0, 0}, nadir{1, 1, 1};
  expect_code(ErrorCode::DegenerateInput, [&] { ScalarizedProblem({0.5, 0.6, -0.1}, ideal, nadir); });
  expect_code(ErrorCode::DegenerateInput, [&] { ScalarizedProblem({0.5, 0.5, 0.5}, ideal, nadir); });
  EXPECT_NO_THROW(ScalarizedProblem({0.2, 0.3, 0.5}, ideal, nadir));
}

TEST(ScalarizedProblem, MonotoneInEachRawObjective) {
  const ScalarizedProblem p({0.2, 0.3, 0.5}, {1.0, 10.0, 0.1}, {2.0, 30.0, 0.5});
  ObjectiveVector o;
  o.r_bar = 1.5;
  o.c_bar = 20.0;
  o.k_bar = 0.3;
  const double base = p.scalar_of(o);
  ObjectiveVector up = o;
  up.r_bar += 0.1;
  EXPECT_GT(p.scalar_of(up), base);
  up = o;
  up.c_bar += 0.1;
  EXPECT_GT(p.scalar_of(up), base);
  up = o;
  up.k_bar += 0.01;
  EXPECT_GT(p.scalar_of(up), base);
}

TEST(NelderMead, QuadraticReachesOptimumWithin200Iterations) {
  const auto lo = unit(0.0), hi = unit(1.0);
  const auto r = nelder_mead(quadratic, unit(0.65), lo, hi);
  EXPECT_LE(r.iterations, 200);
  EXPECT_LT(r.value, 1e-4);
  EXPECT_LE(r.value, r.initial_value);
}

TEST(NelderMead, QuadraticFromCentreImproves) {
  // From the box centre the objective gap after 200 iterations stays above
  // 1e-4; only improvement is asserted here.
  const auto r = nelder_mead(quadratic, unit(0.5), unit(0.0), unit(1.0));
  EXPECT_LT(r.value, 0.1 * r.initial_value);
}

TEST(NelderMead, ConstantObjectiveReturnsStart) {
  const auto x0 = unit(0.3);
  const auto r = nelder_mead([](std::span<const double>) { return ScalarValue{1.0, true, 0.0}; }, x0, unit(0.0),
                             unit(1.0));
  EXPECT_EQ(r.x, x0);
  EXPECT_EQ(r.value, 1.0);
}

TEST(NelderMead, ReturnsBestSeenAndVerticesStayInBounds) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> lo(kNumDesignVars), hi(kNumDesignVars), target(kNumDesignVars);
  for (std::size_t i = 0; i < kNumDesignVars; ++i) {
    lo[i] = -u(rng);
    hi[i] = u(rng);
    target[i] = 2.0 * (u(rng) - 0.5); // optimum may lie outside the box
  }
  double running_best = std::numeric_limits<double>::infinity();
  bool inside = true;
  const auto objective = [&](std::span<const double> x) {
    double f = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      f += (x[i] - target[i]) * (x[i] - target[i]);
      inside = inside && x[i] >= lo[i] && x[i] <= hi[i];
    }
    running_best = std::min(running_best, f);
    return ScalarValue{f, true, 0.0};
  };
  std::vector<double> x0(kNumDesignVars);
  for (std::size_t i = 0; i < kNumDesignVars; ++i) x0[i] = hi[i]; // on the upper face
  const auto r = nelder_mead(objective, x0, lo, hi);
  EXPECT_TRUE(inside);
  EXPECT_EQ(r.value, running_best);
  EXPECT_LE(r.value, r.initial_value);
  for (std::size_t i = 0; i < kNumDesignVars; ++i) {
    EXPECT_GE(r.x[i], lo[i]);
    EXPECT_LE(r.x[i], hi[i]);
  }
}

TEST(NelderMead, InfeasibleRegionPenalizedAndAvoided) {
  // feasible only for x0 <= 0.6; unconstrained optimum at 0.7
  const auto objective = [](std::span<const double> x) {
    if (x[0] > 0.6) return ScalarValue{0.0, false, x[0] - 0.6};
    return quadratic(x);
  };
  const auto r = nelder_mead(objective, unit(0.5), unit(0.0), unit(1.0));
  EXPECT_LE(r.x[0], 0.6);
  EXPECT_LT(r.value, r.initial_value);
}

TEST(NelderMead, InfeasibleStartThrows) {
  expect_code(ErrorCode::InfeasibleStart, [] {
    nelder_mead([](std::span<const double>) { return ScalarValue{0.0, false, 1.0}; }, unit(0.5), unit(0.0),
                unit(1.0));
  });
}

TEST(NelderMead, IterationBudgetRespected) {
  NelderMeadSettings s;
  s.max_iterations = 17;
  const auto r = nelder_mead(quadratic, unit(0.2), unit(0.0), unit(1.0), s);
  EXPECT_EQ(r.iterations, 17);
}

TEST(RefineDesign, ClassicalHingeDoesNotWorsen) {
  const auto opt = coarse();
  const auto start = classical_cross_hinge();
  const auto y = evaluate_objectives(start, opt);
  ASSERT_TRUE(y.feasible);
  ParetoArchive archive;
  const auto v = y.values();
  archive.ideal = {0.5 * v[0], 0.5 * v[1], 0.5 * v[2]};
  archive.nadir = {2.0 * v[0], 2.0 * v[1], 2.0 * v[2]};
  NelderMeadSettings nm;
  nm.max_iterations = 15;
  const auto out = refine_design(start, archive, {}, opt, nm);
  // start sits at 1/3 in every normalized coordinate: uniform weights
  for (double w : out.weights) EXPECT_NEAR(w, 1.0 / 3, 1e-12);
  EXPECT_NEAR(out.scalar_before, 1.0 / 3, 1e-12);
  EXPECT_TRUE(out.after.feasible);
  EXPECT_LE(out.scalar_after, out.scalar_before);
  EXPECT_NEAR(out.scalar_after, out.search.value, 1e-12);
  require_in_bounds(out.refined);
}

TEST(RefineDesign, InfeasibleStartThrows) {
  // the classical hinge breaks a tiny strain limit on the first step
  const auto d = classical_cross_hinge();
  ParetoArchive archive;
  archive.ideal = {0, 0, 0};
  archive.nadir = {1, 1, 1};
  EvaluationOptions opt = coarse();
  opt.sweep.strain_limit = 1e-9;
  expect_code(ErrorCode::InfeasibleStart, [&] { refine_design(d, archive, {}, opt); });
}

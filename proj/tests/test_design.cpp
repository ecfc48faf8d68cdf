#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "becsplit/design.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "becsplit/errors.hpp"
#include "becsplit/experiments.hpp"
#include "becsplit/model.hpp"
#include "doctest.h"

using namespace becsplit;
using namespace becsplit::design;
using experiments::ExperimentKind;
using experiments::ExperimentSpec;
using model::kNominalParams;

namespace {

ExperimentSpec offset_spec(double A_T) {
  ExperimentSpec s;
  s.kind = ExperimentKind::kOffset;
  s.A_end = A_T;
  return s;
}

ExperimentSpec lr_spec(double A_R, double T_R) {
  ExperimentSpec s;
  s.kind = ExperimentKind::kLinearRamp;
  s.A_end = A_R;
  s.T_R = T_R;
  return s;
}

// A domain of unique specs paired with hand-made sensitivity rows; lets the
// subset-search tests run without any simulation.
struct SyntheticProblem {
  ExperimentDomain domain;
  SensitivityTable table;
};

SyntheticProblem synthetic_problem(int n, std::uint64_t seed) {
  SyntheticProblem out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  out.table.computed_at = kNominalParams;
  for (int i = 0; i < n; ++i) {
    out.domain.entries.push_back({offset_spec(0.30 + 0.01 * i), 1});
    Row r;
    for (double& v : r) v = normal(rng);
    out.table.rows.push_back(r);
    out.table.row_owner.push_back(i);
    out.table.baseline.push_back(10.0 + i);
  }
  return out;
}

double lambda_min_unnormalized(const std::vector<Row>& rows, double q) {
  return fim_spectrum(unnormalized_fim(rows, q)).front();
}

}  // namespace

TEST_CASE("default domains enumerate the documented grids") {
  const ExperimentDomain d1 = trap1_domain();
  d1.validate();
  int lr = 0, clr = 0, off = 0;
  for (const DomainEntry& e : d1.entries) {
    switch (e.spec.kind) {
      case ExperimentKind::kLinearRamp: ++lr; break;
      case ExperimentKind::kConsecutiveLinearRamp: ++clr; break;
      case ExperimentKind::kOffset: ++off; break;
    }
  }
  CHECK(lr == 140);   // 14 end values x 10 ramp times
  CHECK(clr == 14);
  CHECK(off == 21);
  CHECK(d1.size() == 175);

  const ExperimentDomain d2 = trap2_domain();
  d2.validate();
  CHECK(d2.size() == 175);
  // Trap 2 ranges sit above its higher splitting value.
  double a_min = 1.0, a_max = 0.0;
  for (const DomainEntry& e : d2.entries) {
    a_min = std::min(a_min, e.spec.A_end);
    a_max = std::max(a_max, e.spec.A_end);
  }
  CHECK(a_min == doctest::Approx(0.40));
  CHECK(a_max == doctest::Approx(0.80));
}

TEST_CASE("domain validation rejects duplicates") {
  ExperimentDomain d;
  d.entries.push_back({offset_spec(0.35), 1});
  d.entries.push_back({offset_spec(0.35), 1});
  CHECK_THROWS_AS(d.validate(), ConfigError);
  d.entries.back().n_freq = 2;  // differing n_freq makes entries distinct
  CHECK_NOTHROW(d.validate());
}

TEST_CASE("orthonormal rows give the identity information matrix") {
  std::vector<Row> rows(5);
  for (int i = 0; i < 5; ++i) {
    rows[i] = {0, 0, 0, 0, 0};
    rows[i][i] = 0.5;  // column scaling removes the magnitude
  }
  const Fim fim = normalized_fim(rows, 2.0);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      CHECK(fim[i * 5 + j] == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12).scale(1.0));
  CHECK(collinearity_index(rows, 2.0) == doctest::Approx(1.0));
}

TEST_CASE("normalized information matrix has unit diagonal") {
  const SyntheticProblem toy = synthetic_problem(9, 21);
  const Fim fim = normalized_fim(toy.table.rows, 1.7);
  for (int i = 0; i < 5; ++i)
    CHECK(fim[i * 5 + i] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("collinearity index ignores variance scale and row order") {
  const SyntheticProblem toy = synthetic_problem(8, 5);
  const double rho = collinearity_index(toy.table.rows, 1.0);
  CHECK(std::isfinite(rho));
  CHECK(collinearity_index(toy.table.rows, 400.0) == doctest::Approx(rho).epsilon(1e-10));

  std::vector<Row> shuffled = toy.table.rows;
  std::reverse(shuffled.begin(), shuffled.end());
  std::swap(shuffled[1], shuffled[4]);
  CHECK(collinearity_index(shuffled, 1.0) == doctest::Approx(rho).epsilon(1e-10));
}

TEST_CASE("rank-deficient selections have infinite collinearity") {
  // Fewer than five rows can never determine five parameters.
  std::vector<Row> rows(4, Row{1.0, 0.4, -0.2, 2.0, 0.1});
  CHECK(std::isinf(collinearity_index(rows, 1.0)));

  // Two identical rows only: perfect collinearity.
  rows.assign(2, Row{1.0, 0.4, -0.2, 2.0, 0.1});
  CHECK(std::isinf(collinearity_index(rows, 1.0)));
}

TEST_CASE("an unexcited parameter is flagged and collapses the spectrum") {
  SyntheticProblem toy = synthetic_problem(6, 11);
  for (Row& r : toy.table.rows) r[3] = 0.0;
  bool flagged = false;
  const Fim fim = normalized_fim(toy.table.rows, 1.0, &flagged);
  CHECK(flagged);
  CHECK(fim[3 * 5 + 3] == 0.0);
  CHECK(std::isinf(collinearity_index(toy.table.rows, 1.0)));
}

TEST_CASE("unnormalized information never loses from an added row") {
  const SyntheticProblem toy = synthetic_problem(10, 3);
  std::vector<Row> rows(toy.table.rows.begin(), toy.table.rows.begin() + 5);
  double prev = lambda_min_unnormalized(rows, 1.0);
  for (int i = 5; i < 10; ++i) {
    rows.push_back(toy.table.rows[i]);
    const double cur = lambda_min_unnormalized(rows, 1.0);
    CHECK(cur >= prev - 1e-12 * std::abs(prev));
    prev = cur;
  }
}

TEST_CASE("below the split kappa2 and c act only through the quartic term") {
  // With A_T < A_s the quadratic coefficient carries kappa1 alone; kappa2 and
  // c enter through a4 = kappa2/(8 c^2) only, forcing c dh/dc = -2 kappa2
  // dh/dkappa2. The finite differences reproduce the identity to the
  // truncation level.
  const Row r = sensitivity_row(kNominalParams, offset_spec(0.30));
  const double lhs = kNominalParams.c * r[2];
  const double rhs = -2.0 * kNominalParams.kappa2 * r[1];
  CHECK(lhs == doctest::Approx(rhs).epsilon(2e-3));
}

TEST_CASE("harmonic-limit offset rows isolate the quadratic coefficient") {
  // Large c removes the quartic term; the remaining dynamics is a displaced
  // harmonic oscillator whose frequency depends on kappa1 and A_s only: the
  // interaction drops out (undamped center-of-mass mode) and so do kappa2
  // and c.
  model::ModelParameters p = kNominalParams;
  p.c = 50.0;
  const Row r = sensitivity_row(p, offset_spec(0.30));
  const double k1 = std::abs(r[0] * p.kappa1);
  CHECK(k1 > 1.0);
  CHECK(std::abs(r[1] * p.kappa2) < 1e-2 * k1);
  CHECK(std::abs(r[2] * p.c) < 1e-2 * k1);
  CHECK(std::abs(r[4] * p.g_perp) < 1e-2 * k1);
}

TEST_CASE("sensitivity rows refine quadratically in the step") {
  const ExperimentSpec spec = lr_spec(0.56, 1.1);
  const Row r2 = sensitivity_row(kNominalParams, spec, 2e-3);
  const Row r1 = sensitivity_row(kNominalParams, spec, 1e-3);
  const Row rh = sensitivity_row(kNominalParams, spec, 5e-4);
  // kappa2 and c have truncation errors well above the frequency-estimator
  // noise floor; halving the step must shrink them about fourfold.
  for (int j : {1, 2}) {
    const double e1 = std::abs(r2[j] - r1[j]);
    const double e2 = std::abs(r1[j] - rh[j]);
    CHECK(e2 < 0.4 * e1);
    CHECK(e1 < 1e-3 * std::abs(r1[j]));
  }
}

TEST_CASE("table construction stacks per-frequency rows and is thread invariant") {
  ExperimentDomain d;
  d.entries.push_back({offset_spec(0.33), 1});
  d.entries.push_back({offset_spec(0.40), 2});  // intermediate regime
  d.entries.push_back({lr_spec(0.56, 0.5), 1});

  const SensitivityTable t1 =
      build_sensitivity_table(kNominalParams, d, 1e-3, 1);
  REQUIRE(t1.rows.size() == 4);
  CHECK(t1.row_owner == std::vector<int>{0, 1, 1, 2});
  CHECK(t1.computed_at == kNominalParams);
  for (double f : t1.baseline) CHECK(f > 0.0);
  for (const Row& r : t1.rows)
    for (double v : r) CHECK(std::isfinite(v));

  const SensitivityTable t3 =
      build_sensitivity_table(kNominalParams, d, 1e-3, 3);
  REQUIRE(t3.rows.size() == t1.rows.size());
  for (std::size_t i = 0; i < t1.rows.size(); ++i)
    for (int j = 0; j < 5; ++j)
      CHECK(t1.rows[i][j] == t3.rows[i][j]);  // bit-identical
  CHECK(t1.baseline == t3.baseline);

  const std::vector<Row> both = t1.rows_for({0, 2});
  REQUIRE(both.size() == 2);
  CHECK(both[0] == t1.rows[0]);
  CHECK(both[1] == t1.rows[3]);
}

TEST_CASE("ga returns the only full-rank option on a five-experiment domain") {
  const SyntheticProblem toy = synthetic_problem(5, 77);
  GAConfig cfg;
  cfg.population = 9;
  cfg.init_size = 5;
  cfg.iterations = 30;
  cfg.seed = 4;
  const Selection sel = ga_select(toy.domain, toy.table, cfg);
  CHECK(sel.ids == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(std::isfinite(sel.rho));
}

TEST_CASE("ga matches the exhaustive oracle on a toy domain") {
  const SyntheticProblem toy = synthetic_problem(12, 123);
  const Selection oracle = exhaustive_best(toy.domain, toy.table, 7);
  REQUIRE(std::isfinite(oracle.rho));
  CHECK(oracle.ids.size() >= 5);
  CHECK(oracle.ids.size() <= 7);

  // Generous budget and livelier mutation than the full-domain defaults;
  // 12-entry toys lose diversity quickly at the paper-scale rates.
  GAConfig cfg;
  cfg.population = 48;
  cfg.init_size = 6;
  cfg.iterations = 1500;
  cfg.p_swap = 0.02;
  cfg.p_add = 0.02;
  cfg.p_remove = 0.02;
  cfg.seed = 9;
  GAReport report;
  const Selection sel = ga_select(toy.domain, toy.table, cfg, &report);
  CHECK(sel.rho <= 1.05 * oracle.rho);
  CHECK(report.initial_best_rho >= sel.rho);

  // Best-so-far trace is non-increasing, one entry per generation plus the
  // seeded population.
  REQUIRE(report.best_rho_history.size() ==
          static_cast<std::size_t>(cfg.iterations) + 1);
  for (std::size_t i = 1; i < report.best_rho_history.size(); ++i)
    CHECK(report.best_rho_history[i] <= report.best_rho_history[i - 1]);
}

TEST_CASE("ga is deterministic per seed") {
  const SyntheticProblem toy = synthetic_problem(12, 123);
  GAConfig cfg;
  cfg.population = 24;
  cfg.init_size = 6;
  cfg.iterations = 120;
  cfg.seed = 31;
  const Selection a = ga_select(toy.domain, toy.table, cfg);
  const Selection b = ga_select(toy.domain, toy.table, cfg);
  CHECK(a.ids == b.ids);
  CHECK(a.rho == b.rho);
}

TEST_CASE("ga survives aggressive removal by reseeding emptied members") {
  const SyntheticProblem toy = synthetic_problem(12, 2);
  GAConfig cfg;
  cfg.population = 3;
  cfg.init_size = 1;
  cfg.p_swap = 0.0;
  cfg.p_add = 0.0;
  cfg.p_remove = 1.0;
  cfg.iterations = 6;
  const Selection sel = ga_select(toy.domain, toy.table, cfg);
  CHECK(std::isinf(sel.rho));  // single-experiment members stay rank-deficient
}

TEST_CASE("ga config validation") {
  GAConfig cfg;
  cfg.population = 10;  // not a multiple of 3
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.population = 240;
  cfg.p_swap = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.p_swap = 0.001;
  cfg.q = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.q = 1.0;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("exhaustive search guardrails") {
  const SyntheticProblem big = synthetic_problem(40, 8);
  CHECK_THROWS_AS(exhaustive_best(big.domain, big.table, 20), ConfigError);

  const SyntheticProblem toy = synthetic_problem(12, 8);
  const Selection below = exhaustive_best(toy.domain, toy.table, 4);
  CHECK(std::isinf(below.rho));
  CHECK(below.ids.empty());

  SensitivityTable partial = toy.table;
  partial.rows.pop_back();
  partial.row_owner.pop_back();
  CHECK_THROWS_AS(exhaustive_best(toy.domain, partial, 6), ConfigError);
}

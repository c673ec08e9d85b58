#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "dsr/errors.hpp"
#include "dsr/harness.hpp"
#include "test_util.hpp"

namespace dsr {
namespace {

ExperimentConfig tiny() {
  ExperimentConfig c;
  c.lr_size = 16;
  c.zones = 4;
  c.focal = 2;
  c.psf_size = 5;
  c.pupil_grid = 32;
  c.iterations = 5;
  c.deblur_iterations = 3;
  c.trials = 2;
  c.crop_margin = 4;
  return c;
}

TEST(Solvers, NamesRoundTrip) {
  for (SolverKind k : {SolverKind::kPg, SolverKind::kSm, SolverKind::kSandr,
                       SolverKind::kL1Btv, SolverKind::kL1BtvL, SolverKind::kL2Btv}) {
    EXPECT_EQ(solver_from_string(to_string(k)), k);
  }
  EXPECT_THROW(solver_from_string("admm"), ConfigError);
}

TEST(Presets, TableGeometry) {
  const ExperimentConfig t2 = preset("table2");
  EXPECT_EQ(t2.lr_size, 165u);
  EXPECT_EQ(t2.zones, 55);
  EXPECT_EQ(t2.focal, 28);
  EXPECT_EQ(t2.frames, 4);
  EXPECT_EQ(t2.factor, 2);
  EXPECT_EQ(t2.sr_size(), 330u);
  const ExperimentConfig t3 = preset("table3");
  EXPECT_EQ(t3.lr_size, 255u);
  EXPECT_EQ(t3.zones, 85);
  EXPECT_EQ(t3.blur_max, 0.09);
  for (const std::string& name : preset_names()) EXPECT_NO_THROW(preset(name).validate());
  EXPECT_THROW(preset("table9"), ConfigError);
}

TEST(Presets, ValidationNamesField) {
  ExperimentConfig c = tiny();
  c.zones = 5;
  try {
    c.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("zones"), std::string::npos);
  }
}

TEST(Shifts, GridCoverageAndOrder) {
  const auto two = default_shifts(2, 4);
  EXPECT_EQ(two[0], (ShiftVector{Fraction(0), Fraction(0)}));
  EXPECT_EQ(two[1], (ShiftVector{Fraction(1, 2), Fraction(0)}));
  EXPECT_EQ(two[2], (ShiftVector{Fraction(0), Fraction(1, 2)}));
  EXPECT_EQ(two[3], (ShiftVector{Fraction(1, 2), Fraction(1, 2)}));
  const auto four = default_shifts(4, 16);
  std::set<std::pair<std::int64_t, std::int64_t>> seen;
  for (const ShiftVector& v : four) {
    const PixelShift s = v.scaled(4);
    seen.insert({s.rows, s.cols});
  }
  EXPECT_EQ(seen.size(), 16u);
  // Shorter lists are prefixes of longer ones.
  const auto eight = default_shifts(4, 8);
  EXPECT_TRUE(std::equal(eight.begin(), eight.end(), four.begin()));
  EXPECT_THROW(default_shifts(2, 5), ConfigError);
}

TEST(Sweeps, SolvabilityCounts) {
  const SweepResult r = run_solvability_sweep({0.06, 0.12}, tiny());
  EXPECT_EQ(r.records.size(), 12u);
  EXPECT_EQ(r.records[0].value, 0.06);
  EXPECT_EQ(r.records.back().value, 0.12);
  EXPECT_EQ(r.records[0].seed, r.records[6].seed);  // paired draws
  for (const SweepRecord& rec : r.records) {
    EXPECT_TRUE(std::isfinite(rec.rms));
    EXPECT_GT(rec.rms, 0.0);
  }
}

TEST(Sweeps, DeterministicAndWorkerIndependent) {
  ExperimentConfig c = tiny();
  const SweepResult a = run_solvability_sweep({0.1}, c);
  c.workers = 3;
  const SweepResult b = run_solvability_sweep({0.1}, c);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].rms, b.records[i].rms);
    EXPECT_EQ(a.records[i].solver, b.records[i].solver);
  }
}

TEST(Sweeps, EmptyValueListGivesNoRecords) {
  EXPECT_TRUE(run_noise_sweep({}, 0.09, tiny()).records.empty());
}

TEST(Sweeps, FrameCountsBoundedBySquareFactor) {
  ExperimentConfig c = tiny();
  c.trials = 1;
  EXPECT_THROW(run_frame_count_study({2, 5}, c), ConfigError);
  EXPECT_EQ(run_frame_count_study({1, 2, 4}, c).records.size(), 9u);
}

TEST(Sweeps, ZeroIterationConvergenceTrace) {
  ExperimentConfig c = tiny();
  c.iterations = 0;
  const auto traces = run_convergence_trace(c);
  ASSERT_EQ(traces.size(), 3u);
  for (const NamedTrace& t : traces) {
    ASSERT_EQ(t.trace.records.size(), 1u);
    EXPECT_TRUE(t.trace.records[0].rms.has_value());
  }
}

TEST(Sweeps, BaselineComparisonRunsEverySolver) {
  ExperimentConfig c = tiny();
  c.trials = 1;
  c.solvers = {SolverKind::kSandr, SolverKind::kL1Btv, SolverKind::kL1BtvL,
               SolverKind::kL2Btv};
  const SweepResult r = run_baseline_comparison(c);
  ASSERT_EQ(r.records.size(), 4u);
  EXPECT_EQ(r.records[3].solver, SolverKind::kL2Btv);
}

TEST(Cropping, ReportsEverySolver) {
  ExperimentConfig c = tiny();
  const CroppingResult r = run_cropping_study(c);
  EXPECT_EQ(r.reference.rows(), 32u);
  ASSERT_EQ(r.reconstructions.size(), 3u);
  for (const auto& rec : r.reconstructions) {
    EXPECT_NEAR(rec.full_rms, relative_rms(rec.image, r.reference), 1e-15);
    EXPECT_NEAR(rec.central_rms, central_relative_rms(rec.image, r.reference, 0.9), 1e-15);
  }
}

TEST(Statistics, QuantileInterpolates) {
  EXPECT_EQ(quantile({3, 1, 2}, 0.5), 2.0);
  EXPECT_EQ(quantile({1, 2, 3, 4}, 0.5), 2.5);
  EXPECT_EQ(quantile({1, 2, 3, 4, 5}, 0.25), 2.0);
  EXPECT_EQ(quantile({10, 20}, 0.25), 12.5);
  EXPECT_EQ(quantile({7}, 0.9), 7.0);
  EXPECT_THROW(quantile({}, 0.5), std::invalid_argument);
}

TEST(Statistics, SummaryMatchesDirectComputation) {
  SweepResult s{"blur_max", {}};
  const std::vector<double> sandr_rms{0.4, 0.1, 0.3, 0.2};
  for (std::size_t t = 0; t < sandr_rms.size(); ++t) {
    s.records.push_back({0.06, t, SolverKind::kSandr, sandr_rms[t], 5, 0.0});
    s.records.push_back({0.06, t, SolverKind::kPg, 1.0, 5, 0.0});
  }
  s.records.push_back({0.12, 0, SolverKind::kSandr, 0.5, 5, 0.0});
  const auto rows = summarize(s);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].solver, SolverKind::kSandr);
  EXPECT_EQ(rows[0].count, 4u);
  EXPECT_DOUBLE_EQ(rows[0].min, 0.1);
  EXPECT_DOUBLE_EQ(rows[0].max, 0.4);
  EXPECT_DOUBLE_EQ(rows[0].median, 0.25);
  EXPECT_DOUBLE_EQ(rows[0].q1, 0.175);
  EXPECT_DOUBLE_EQ(rows[0].q3, 0.325);
  EXPECT_DOUBLE_EQ(rows[0].mean, 0.25);
  EXPECT_DOUBLE_EQ(rows[0].stddev, std::sqrt(0.0125));
  EXPECT_EQ(rows[1].solver, SolverKind::kPg);
  EXPECT_EQ(rows[1].stddev, 0.0);
  EXPECT_EQ(rows[2].value, 0.12);
  EXPECT_EQ(rows[2].count, 1u);
}

TEST(Statistics, CentralRmsIgnoresBorder) {
  ImageGrid ref(21, 21, 0.5);
  ImageGrid est = ref;
  est(0, 0) = 1.0;
  EXPECT_EQ(central_relative_rms(est, ref, 0.9), 0.0);
  EXPECT_GT(relative_rms(est, ref), 0.0);
  est(10, 10) = 0.0;
  EXPECT_GT(central_relative_rms(est, ref, 0.9), 0.0);
}

}  // namespace
}  // namespace dsr

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "tepkit/heuristics.hpp"

namespace {

using tepkit::HeuristicVariant;
using tepkit::ScenarioConfig;

const std::vector<int> kC{0, 1, 2};

tepkit::Network radial(double capacity, double load) {
  tepkit::Network net;
  net.snapshots = {{0, 8760.0}};
  net.buses = {{"b1", {0.0}}, {"b2", {load}}};
  net.generators.push_back(
      fixtures::generator("ocgt", "b1", tepkit::Technology::kOcgt, 100, 50, false, {1.0}));
  net.lines.push_back(fixtures::line("l", "b1", "b2", 50, 1, capacity, 10, 10, true));
  tepkit::validate(net);
  return net;
}

ScenarioConfig open_config() {
  ScenarioConfig cfg;
  cfg.renewable_share = 0.0;
  cfg.volume_cap = 1.0;
  return cfg;
}

TEST(SeqDiscretize, Examples) {
  EXPECT_EQ(tepkit::seq_discretize(0.4, kC), 0);
  EXPECT_EQ(tepkit::seq_discretize(0.5, kC), 1);
  EXPECT_EQ(tepkit::seq_discretize(2.4, kC), 2);
  EXPECT_EQ(tepkit::seq_discretize(1.5, kC), 2);
  const std::vector<int> sparse{0, 3};
  EXPECT_EQ(tepkit::seq_discretize(1.4, sparse), 0);
  EXPECT_EQ(tepkit::seq_discretize(1.5, sparse), 3);
  EXPECT_THROW(tepkit::seq_discretize(1.0, std::vector<int>{}), std::invalid_argument);
}

TEST(PostDiscretize, Examples) {
  EXPECT_EQ(tepkit::post_discretize(1.29, 0.3, kC), 1);
  EXPECT_EQ(tepkit::post_discretize(1.31, 0.3, kC), 2);
  EXPECT_EQ(tepkit::post_discretize(0.0, 0.1, kC), 0);
  EXPECT_EQ(tepkit::post_discretize(0.0, 0.9, kC), 0);
  EXPECT_EQ(tepkit::post_discretize(1.95, 0.3, kC), 2);
}

TEST(Discretize, IdempotentAndInCandidateSet) {
  for (int c : kC) {
    EXPECT_EQ(tepkit::seq_discretize(c, kC), c);
    for (double z : {0.1, 0.3, 0.5, 0.9}) EXPECT_EQ(tepkit::post_discretize(c, z, kC), c);
  }
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int k = 0; k < 200; ++k) {
    const double g = u(rng);
    EXPECT_TRUE(tepkit::seq_discretize(g, kC) >= 0 && tepkit::seq_discretize(g, kC) <= 2);
    EXPECT_TRUE(tepkit::post_discretize(g, 0.3, kC) >= 0 && tepkit::post_discretize(g, 0.3, kC) <= 2);
  }
}

TEST(Variant, ParseAndName) {
  for (const auto& v : tepkit::standard_variants()) EXPECT_EQ(HeuristicVariant::parse(v.name()), v);
  const auto v = HeuristicVariant::parse("heur-iter-seqdisc-postdisc-mult");
  EXPECT_TRUE(v.iterate && v.sequential_discretization);
  EXPECT_EQ(v.post, tepkit::PostDiscretization::kMulti);
  EXPECT_THROW(HeuristicVariant::parse("heur-seqdisc"), std::invalid_argument);
  EXPECT_THROW(HeuristicVariant::parse("heur-int-iter-postdisc"), std::invalid_argument);
  EXPECT_THROW(HeuristicVariant::parse("bigm"), std::invalid_argument);
  EXPECT_THROW(HeuristicVariant::parse("heur-iterx"), std::invalid_argument);
}

TEST(RunSlp, RadialConvergesAtSecondIteration) {
  const auto net = radial(100.0, 100.0);
  const auto run = tepkit::run_slp(net, open_config(), HeuristicVariant::parse("heur-iter"));
  ASSERT_TRUE(run.converged);
  EXPECT_EQ(run.iterations.size(), 2u);
  EXPECT_EQ(run.iterations[0].susceptances, tepkit::initial_susceptances(net));
  EXPECT_NEAR(run.iterations[0].gamma[0], run.iterations[1].gamma[0], 1e-9);
}

TEST(RunSlp, HeurIsSingleIterationAndInfeasible) {
  const auto net = radial(100.0, 100.0);
  const auto run = tepkit::run_slp(net, open_config(), HeuristicVariant::parse("heur"));
  EXPECT_EQ(run.iterations.size(), 1u);
  EXPECT_FALSE(run.minlp_feasible);
  ASSERT_FALSE(run.violations.empty());
  EXPECT_NE(run.violations[0].find("Γ not in candidate set"), std::string::npos);
  // Fractional: 100 MW / 0.7 needs Γ = 3/7.
  EXPECT_NEAR(run.final_solution.line_gamma[0], 100.0 / 0.7 / 100.0 - 1.0, 1e-9);
}

TEST(RunSlp, TriangleSeqdiscPostdiscIsFeasible) {
  for (int t : {2, 4}) {
    const auto net = fixtures::triangle(t);
    const ScenarioConfig cfg;
    const auto run = tepkit::run_slp(net, cfg, HeuristicVariant::parse("heur-iter-seqdisc-postdisc"));
    EXPECT_TRUE(run.minlp_feasible) << (run.violations.empty() ? "" : run.violations[0]);
    EXPECT_LE(run.iterations.size(), 10u);
    EXPECT_TRUE(run.converged);
    const double oracle = fixtures::enumerate_optimum(net, cfg);
    EXPECT_GE(run.final_solution.objective, oracle - 1e-6 * std::abs(oracle));
    EXPECT_EQ(run.chosen_threshold, 0.3);
  }
}

TEST(RunSlp, FixedPointOnConvergence) {
  const auto net = fixtures::triangle(4);
  const ScenarioConfig cfg;
  const auto run = tepkit::run_slp(net, cfg, HeuristicVariant::parse("heur-iter-seqdisc-postdisc"));
  ASSERT_TRUE(run.converged);
  const auto& last = run.iterations.back();
  std::vector<double> rounded = last.gamma;
  for (std::size_t l = 0; l < rounded.size(); ++l) rounded[l] = tepkit::seq_discretize(rounded[l], kC);
  EXPECT_EQ(tepkit::susceptances_for(net, rounded), last.susceptances);
}

TEST(RunSlp, IntegerIterationIsFeasible) {
  const auto net = fixtures::triangle(2);
  const ScenarioConfig cfg;
  const auto run = tepkit::run_slp(net, cfg, HeuristicVariant::parse("heur-int-iter"));
  EXPECT_TRUE(run.minlp_feasible) << (run.violations.empty() ? "" : run.violations[0]);
  for (double g : run.final_solution.line_gamma) EXPECT_EQ(g, std::round(g));
}

TEST(RunSlp, InfeasibleIterationAborts) {
  auto net = radial(100.0, 100.0);
  net.lines[0].candidates = {0};
  try {
    tepkit::run_slp(net, open_config(), HeuristicVariant::parse("heur-iter"));
    FAIL();
  } catch (const tepkit::HeuristicError& e) {
    EXPECT_EQ(e.iteration(), 1);
    EXPECT_NE(std::string(e.what()).find("infeasible"), std::string::npos);
  }
}

TEST(Finalize, IntegralInputIsIdentity) {
  const auto net = fixtures::triangle();
  ScenarioConfig cfg;
  cfg.volume_cap = 1.0;
  const std::vector<double> gamma{1.0, 0.0, 2.0};
  const auto sol = tepkit::finalize_with_threshold(net, cfg, gamma, 0.3);
  const auto fixed = tepkit::solve_fixed_investment(net, cfg, gamma);
  ASSERT_TRUE(fixed.solution.has_value());
  EXPECT_EQ(sol.objective, fixed.solution->objective);
  EXPECT_EQ(sol.line_gamma, gamma);
}

TEST(Finalize, HighThresholdRoundingDownIsReported) {
  const auto net = radial(100.0, 100.0);
  const std::vector<double> gamma{100.0 / 0.7 / 100.0 - 1.0};
  EXPECT_NO_THROW(tepkit::finalize_with_threshold(net, open_config(), gamma, 0.3));
  try {
    tepkit::finalize_with_threshold(net, open_config(), gamma, 0.9);
    FAIL();
  } catch (const tepkit::DiscretizationError& e) {
    EXPECT_EQ(e.threshold(), 0.9);
  }
}

TEST(Finalize, TriangleRespectsCapAndLoading) {
  const auto net = fixtures::triangle();
  const ScenarioConfig cfg;
  const auto run = tepkit::run_slp(net, cfg, HeuristicVariant::parse("heur-iter"));
  const auto sol = tepkit::finalize_with_threshold(net, cfg, run.final_solution.line_gamma, 0.3);
  const auto verdict = tepkit::verify_minlp_feasibility(net, cfg, sol, 1e-6);
  EXPECT_TRUE(verdict.feasible) << (verdict.violations.empty() ? "" : verdict.violations[0]);
  EXPECT_LE(tepkit::expansion_volume_ratio(net, sol.line_gamma), cfg.volume_cap + 1e-9);
}

TEST(Finalize, CapRepairUndoesWeakestRoundUp) {
  const auto net = fixtures::triangle();
  const ScenarioConfig cfg;  // 25% of 13200 MWkm = 3300 MWkm
  // Rounding at 0.3 adds 3600 (l12) + 2400 (l23); dropping l12 (fraction 0.31) fits.
  const std::vector<double> gamma_star{0.31, 0.0, 0.45};
  EXPECT_EQ(tepkit::discretize_investment(net, cfg, gamma_star, 0.3), (std::vector<double>{0, 0, 1}));
  ScenarioConfig loose = cfg;
  loose.volume_cap = 1.0;
  EXPECT_EQ(tepkit::discretize_investment(net, loose, gamma_star, 0.3), (std::vector<double>{1, 0, 1}));
}

TEST(PostDiscretizeMulti, SingleThresholdMatchesFinalize) {
  const auto net = fixtures::triangle();
  const ScenarioConfig cfg;
  const auto run = tepkit::run_slp(net, cfg, HeuristicVariant::parse("heur-iter"));
  const auto& g = run.final_solution.line_gamma;
  const std::vector<double> one{0.3};
  const auto multi = tepkit::post_discretize_multi(net, cfg, g, one);
  EXPECT_EQ(multi.threshold, 0.3);
  EXPECT_EQ(multi.solution.objective, tepkit::finalize_with_threshold(net, cfg, g, 0.3).objective);
}

TEST(PostDiscretizeMulti, MinimumOverThresholds) {
  for (int t : {2, 4, 6}) {
    const auto net = fixtures::triangle(t);
    const ScenarioConfig cfg;
    const auto run = tepkit::run_slp(net, cfg, HeuristicVariant::parse("heur-iter"));
    const auto& g = run.final_solution.line_gamma;
    const auto multi = tepkit::post_discretize_multi(net, cfg, g, cfg.thresholds);
    double best = tepkit::lp::kInfinity;
    for (double z : cfg.thresholds) {
      try {
        best = std::min(best, tepkit::finalize_with_threshold(net, cfg, g, z).objective);
      } catch (const tepkit::DiscretizationError&) {
      }
    }
    EXPECT_EQ(multi.solution.objective, best);
    const auto parallel = tepkit::post_discretize_multi(net, cfg, g, cfg.thresholds, {.parallel = true});
    EXPECT_EQ(parallel.solution.objective, multi.solution.objective);
    EXPECT_EQ(parallel.threshold, multi.threshold);
  }
}

TEST(PostDiscretizeMulti, AllInfeasibleIsAnError) {
  const auto net = radial(100.0, 100.0);
  const std::vector<double> gamma{0.43};
  const std::vector<double> high{0.8, 0.9};
  EXPECT_THROW(tepkit::post_discretize_multi(net, open_config(), gamma, high), std::runtime_error);
}

TEST(Verify, DetectsPerturbedFlow) {
  const auto net = fixtures::triangle();
  const ScenarioConfig cfg;
  const auto run = tepkit::run_slp(net, cfg, HeuristicVariant::parse("heur-iter-seqdisc-postdisc"));
  ASSERT_TRUE(run.minlp_feasible);
  auto sol = run.final_solution;
  sol.line_flow[1][1] += 1.0;
  const auto verdict = tepkit::verify_minlp_feasibility(net, cfg, sol, 1e-6);
  EXPECT_FALSE(verdict.feasible);
  bool named = false;
  for (const auto& v : verdict.violations)
    named = named || v.find("line l13 snapshot 1") != std::string::npos;
  EXPECT_TRUE(named);
  // KCL at both ends is broken as well.
  EXPECT_GE(verdict.violations.size(), 3u);
}

TEST(Trace, CsvHasOneRowPerIteration) {
  const auto net = radial(100.0, 100.0);
  const auto run = tepkit::run_slp(net, open_config(), HeuristicVariant::parse("heur-iter"));
  const std::string csv = tepkit::iteration_trace_csv(run);
  EXPECT_EQ(csv.rfind("k,objective,max_abs_delta_gamma,wall_time_s\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + static_cast<long>(run.iterations.size()));
}

TEST(MoveLimit, BoundsStepBetweenIterations) {
  const auto net = fixtures::triangle();
  ScenarioConfig cfg;
  cfg.move_limit = 0.25;
  const auto run = tepkit::run_slp(net, cfg, HeuristicVariant::parse("heur-iter"));
  ASSERT_GE(run.iterations.size(), 1u);
  for (std::size_t k = 1; k < run.iterations.size(); ++k) EXPECT_LE(run.iterations[k].max_delta_gamma, 0.25 + 1e-9);
}

TEST(MoveLimit, ConfigRoundTripAndValidation) {
  ScenarioConfig cfg;
  EXPECT_EQ(cfg.move_limit, 0.0);
  cfg.move_limit = 0.5;
  EXPECT_EQ(tepkit::load_config(tepkit::serialize(cfg)).move_limit, 0.5);
  EXPECT_THROW(tepkit::load_config(R"({"move_limit": -1})"), tepkit::NetworkError);
}

}  // namespace

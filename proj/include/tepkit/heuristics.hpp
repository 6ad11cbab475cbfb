#pragma once

// Sequential linear programming heuristics for integer transmission expansion
// with susceptances that follow the installed circuits.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tepkit/lopf.hpp"

namespace tepkit {

enum class PostDiscretization { kNone, kSingle, kMulti };

struct HeuristicVariant {
  bool integer_investment = false;
  bool iterate = false;
  bool sequential_discretization = false;
  PostDiscretization post = PostDiscretization::kNone;

  void validate() const {
    if (sequential_discretization && !iterate)
      throw std::invalid_argument("seqdisc requires iter");
    if (integer_investment && post != PostDiscretization::kNone)
      throw std::invalid_argument("int excludes postdisc");
    if (integer_investment && sequential_discretization)
      throw std::invalid_argument("int excludes seqdisc");
  }

  /// Code such as "heur-iter-seqdisc-postdisc-mult".
  [[nodiscard]] std::string name() const {
    std::string s = "heur";
    if (integer_investment) s += "-int";
    if (iterate) s += "-iter";
    if (sequential_discretization) s += "-seqdisc";
    if (post == PostDiscretization::kSingle) s += "-postdisc";
    if (post == PostDiscretization::kMulti) s += "-postdisc-mult";
    return s;
  }

  static HeuristicVariant parse(std::string_view code) {
    if (code.substr(0, 4) != "heur") throw std::invalid_argument("unknown variant '" + std::string(code) + "'");
    HeuristicVariant v;
    std::string_view rest = code.substr(4);
    auto take = [&](std::string_view token) {
      if (rest.substr(0, token.size()) != token) return false;
      rest.remove_prefix(token.size());
      return true;
    };
    if (take("-int")) v.integer_investment = true;
    if (take("-iter")) v.iterate = true;
    if (take("-seqdisc")) v.sequential_discretization = true;
    if (take("-postdisc-mult") || take("-postdisc_mult")) {
      v.post = PostDiscretization::kMulti;
    } else if (take("-postdisc")) {
      v.post = PostDiscretization::kSingle;
    }
    if (!rest.empty()) throw std::invalid_argument("unknown variant '" + std::string(code) + "'");
    v.validate();
    return v;
  }

  friend bool operator==(const HeuristicVariant&, const HeuristicVariant&) = default;
};

/// The variants evaluated as a family.
inline std::vector<HeuristicVariant> standard_variants() {
  std::vector<HeuristicVariant> out;
  for (const char* code : {"heur", "heur-iter", "heur-int-iter", "heur-iter-postdisc", "heur-iter-postdisc-mult",
                           "heur-iter-seqdisc-postdisc", "heur-iter-seqdisc-postdisc-mult"})
    out.push_back(HeuristicVariant::parse(code));
  return out;
}

/// A solve inside the iteration loop failed.
class HeuristicError : public std::runtime_error {
 public:
  HeuristicError(int iteration, const std::string& detail)
      : std::runtime_error("iteration " + std::to_string(iteration) + ": " + detail), iteration_(iteration) {}
  [[nodiscard]] int iteration() const { return iteration_; }

 private:
  int iteration_;
};

/// The fixed-line re-solve after rounding at threshold z is infeasible.
class DiscretizationError : public std::runtime_error {
 public:
  DiscretizationError(double z, const std::string& detail)
      : std::runtime_error("threshold z=" + format_z(z) + ": " + detail), z_(z) {}
  [[nodiscard]] double threshold() const { return z_; }

 private:
  static std::string format_z(double z) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", z);
    return buf;
  }
  double z_;
};

struct IterationRecord {
  int k = 0;
  std::vector<double> susceptances;
  std::vector<double> gamma;  // optimal Γ* per line
  std::vector<std::vector<double>> line_flow;  // [line][snapshot]
  double objective = 0.0;
  double max_delta_gamma = 0.0;  // vs previous record, 0 for the first
  double wall_time = 0.0;        // seconds since the run started
};

struct HeuristicRun {
  HeuristicVariant variant;
  std::vector<IterationRecord> iterations;
  bool converged = false;
  ExpansionSolution final_solution;
  bool minlp_feasible = false;
  std::vector<std::string> violations;
  std::optional<double> chosen_threshold;
  /// Objective per evaluated threshold; absent where infeasible.
  std::vector<std::pair<double, std::optional<double>>> threshold_objectives;
  double wall_time = 0.0;
};

struct HeuristicOptions {
  /// Evaluate thresholds of the multi-threshold step concurrently.
  bool parallel = false;
  lp::SolverOptions lp;
};

// ---------------------------------------------------------------------------
// Discretization

/// Nearest candidate; exact ties round up.
inline int seq_discretize(double gamma, std::span<const int> candidates) {
  if (candidates.empty()) throw std::invalid_argument("empty candidate set");
  gamma = std::max(0.0, gamma);
  int best = candidates[0];
  double best_dist = std::abs(gamma - best);
  for (int c : candidates) {
    const double d = std::abs(gamma - c);
    if (d < best_dist || (d == best_dist && c > best)) {
      best = c;
      best_dist = d;
    }
  }
  return best;
}

/// Round up when the fractional part reaches z, then snap into the candidates.
inline int post_discretize(double gamma, double z, std::span<const int> candidates) {
  if (!(z > 0.0 && z < 1.0)) throw std::invalid_argument("threshold must lie in (0,1)");
  gamma = std::max(0.0, gamma);
  const double base = std::floor(gamma);
  const double rounded = gamma - base < z ? base : base + 1.0;
  return seq_discretize(rounded, candidates);
}

// ---------------------------------------------------------------------------
// Fixed-investment solves

struct FixedSolve {
  lp::LpSolution lp;
  std::optional<ExpansionSolution> solution;
};

/// Lines fixed at `gamma` (capacity and susceptance), generators and links free.
inline FixedSolve solve_fixed_investment(const Network& net, const ScenarioConfig& cfg,
                                         std::span<const double> gamma, const lp::SolverOptions& opts = {}) {
  const std::vector<double> b = susceptances_for(net, gamma);
  const LopfFormulation f = build_continuous_lopf(net, cfg, b, LineMode::kFixed, gamma);
  FixedSolve out;
  out.lp = lp::solve_lp(f.lp, opts);
  if (out.lp.optimal()) out.solution = extract_solution(net, cfg, f.map, out.lp.primal, out.lp.objective);
  return out;
}

inline std::string lp_failure(const lp::LpSolution& s, const lp::LinearProgram& lp) {
  std::string msg = "LP " + std::string(lp::to_string(s.status));
  if (s.status == lp::LpStatus::kInfeasible) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " (phase-1 residual %.6g; rows:", s.phase1_objective);
    msg += buf;
    int shown = 0;
    for (int r : s.infeasible_rows) {
      if (shown++ == 8) {
        msg += " ...";
        break;
      }
      const std::string& name = lp.constraint(r).name;
      msg += " " + (name.empty() ? std::to_string(r) : name);
    }
    msg += ")";
  }
  if (!s.message.empty()) msg += ": " + s.message;
  return msg;
}

/// Thresholded rounding of every extendable line. Round-ups that push the
/// expansion volume over the cap are undone one candidate step at a time,
/// smallest fractional part first (lowest line index on ties).
inline std::vector<double> discretize_investment(const Network& net, const ScenarioConfig& cfg,
                                                 std::span<const double> gamma_star, double z) {
  std::vector<double> gamma(net.lines.size(), 0.0);
  for (std::size_t l = 0; l < net.lines.size(); ++l)
    if (net.lines[l].extendable) gamma[l] = post_discretize(gamma_star[l], z, net.lines[l].candidates);
  while (expansion_volume_ratio(net, gamma) > cfg.volume_cap + 1e-9) {
    int pick = -1;
    double pick_frac = 0.0;
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
      if (!net.lines[l].extendable || !(gamma[l] > gamma_star[l])) continue;
      const double frac = gamma_star[l] - std::floor(std::max(0.0, gamma_star[l]));
      if (pick < 0 || frac < pick_frac) {
        pick = static_cast<int>(l);
        pick_frac = frac;
      }
    }
    if (pick < 0) break;
    int lower = -1;
    for (int c : net.lines[pick].candidates)
      if (c < gamma[pick] && c > lower) lower = c;
    gamma[pick] = std::max(lower, 0);
  }
  return gamma;
}

/// Discretizes Γ* at threshold z and re-optimizes generation and links with
/// the lines fixed.
inline ExpansionSolution finalize_with_threshold(const Network& net, const ScenarioConfig& cfg,
                                                 std::span<const double> gamma_star, double z,
                                                 const lp::SolverOptions& opts = {}) {
  const std::vector<double> gamma = discretize_investment(net, cfg, gamma_star, z);
  const std::vector<double> b = susceptances_for(net, gamma);
  const LopfFormulation f = build_continuous_lopf(net, cfg, b, LineMode::kFixed, gamma);
  const lp::LpSolution s = lp::solve_lp(f.lp, opts);
  if (!s.optimal()) throw DiscretizationError(z, lp_failure(s, f.lp));
  return extract_solution(net, cfg, f.map, s.primal, s.objective);
}

struct MultiThresholdResult {
  ExpansionSolution solution;
  double threshold = 0.0;
  std::vector<std::pair<double, std::optional<double>>> objectives;
};

/// Minimum-objective result over all thresholds (lowest z on ties);
/// infeasible thresholds are skipped.
inline MultiThresholdResult post_discretize_multi(const Network& net, const ScenarioConfig& cfg,
                                                  std::span<const double> gamma_star,
                                                  std::span<const double> thresholds,
                                                  const HeuristicOptions& options = {}) {
  if (thresholds.empty()) throw std::invalid_argument("thresholds must be nonempty");
  struct Outcome {
    std::optional<ExpansionSolution> solution;
    std::string error;
  };
  auto evaluate = [&](double z) {
    Outcome o;
    try {
      o.solution = finalize_with_threshold(net, cfg, gamma_star, z, options.lp);
    } catch (const DiscretizationError& e) {
      o.error = e.what();
    }
    return o;
  };
  std::vector<Outcome> outcomes(thresholds.size());
  if (options.parallel) {
    std::vector<std::future<Outcome>> jobs;
    for (double z : thresholds) jobs.push_back(std::async(std::launch::async, evaluate, z));
    for (std::size_t k = 0; k < jobs.size(); ++k) outcomes[k] = jobs[k].get();
  } else {
    for (std::size_t k = 0; k < thresholds.size(); ++k) outcomes[k] = evaluate(thresholds[k]);
  }

  MultiThresholdResult out;
  int best = -1;
  std::string errors;
  for (std::size_t k = 0; k < thresholds.size(); ++k) {
    const Outcome& o = outcomes[k];
    if (!o.solution) {
      out.objectives.emplace_back(thresholds[k], std::nullopt);
      errors += (errors.empty() ? "" : "; ") + o.error;
      continue;
    }
    out.objectives.emplace_back(thresholds[k], o.solution->objective);
    if (best < 0) {
      best = static_cast<int>(k);
      continue;
    }
    const double cur = outcomes[best].solution->objective;
    const double obj = o.solution->objective;
    if (obj < cur || (obj == cur && thresholds[k] < thresholds[best])) best = static_cast<int>(k);
  }
  if (best < 0) throw std::runtime_error("all thresholds infeasible: " + errors);
  out.solution = *outcomes[best].solution;
  out.threshold = thresholds[best];
  return out;
}

// ---------------------------------------------------------------------------
// Feasibility verdict

struct FeasibilityReport {
  bool feasible = true;
  std::vector<std::string> violations;
};

/// Checks integrality, capacity-consistent KVL, loading, KCL, generator and
/// link limits, renewable share and the volume cap. Tolerances are relative:
/// tol·(1+|reference magnitude|).
inline FeasibilityReport verify_minlp_feasibility(const Network& net, const ScenarioConfig& cfg,
                                                  const ExpansionSolution& s, double tol = 1e-6) {
  FeasibilityReport r;
  auto fail = [&](std::string msg) {
    r.feasible = false;
    r.violations.push_back(std::move(msg));
  };
  auto num = [](double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::string(buf);
  };
  auto exceeds = [&](double excess, double magnitude) { return excess > tol * (1.0 + std::abs(magnitude)); };

  const int nt = net.num_snapshots();
  const std::size_t ng = net.generators.size(), nl = net.lines.size(), nk = net.links.size();
  auto shape_ok = [&](const std::vector<std::vector<double>>& m, std::size_t rows) {
    if (m.size() != rows) return false;
    return std::all_of(m.begin(), m.end(), [&](const auto& row) { return static_cast<int>(row.size()) == nt; });
  };
  if (s.gen_capacity.size() != ng || s.line_gamma.size() != nl || s.line_capacity.size() != nl ||
      s.link_capacity.size() != nk || !shape_ok(s.dispatch, ng) || !shape_ok(s.line_flow, nl) ||
      !shape_ok(s.link_flow, nk) || !shape_ok(s.angle, net.buses.size())) {
    fail("solution shape does not match the network");
    return r;
  }

  // Lines.
  for (std::size_t l = 0; l < nl; ++l) {
    const AcLine& line = net.lines[l];
    const double gamma = s.line_gamma[l];
    const bool valid = line.extendable ? line.is_candidate(gamma) : gamma == 0.0;
    if (!valid) {
      fail("line " + line.id + ": Γ not in candidate set (Γ=" + num(gamma) + ")");
      if (!(gamma >= 0.0)) continue;
    }
    const double cap = capacity_from_circuits(line, gamma);
    const double b = susceptance_from_circuits(line, gamma);
    if (exceeds(std::abs(s.line_capacity[l] - cap), cap))
      fail("line " + line.id + ": capacity " + num(s.line_capacity[l]) + " != F(Γ) " + num(cap));
    const auto [i, j] = net.line_ends[l];
    for (int t = 0; t < nt; ++t) {
      const double f = s.line_flow[l][t];
      const double implied = b * (s.angle[i][t] - s.angle[j][t]);
      if (exceeds(std::abs(f - implied), f))
        fail("line " + line.id + " snapshot " + std::to_string(t) + ": flow " + num(f) + " != b(Γ)·Δθ " +
             num(implied));
      const double limit = cfg.line_loading_factor * cap;
      if (exceeds(std::abs(f) - limit, limit))
        fail("line " + line.id + " snapshot " + std::to_string(t) + ": loading " + num(std::abs(f)) + " > " +
             num(limit));
    }
  }

  // Generators.
  for (std::size_t g = 0; g < ng; ++g) {
    const Generator& gen = net.generators[g];
    const double G = s.gen_capacity[g];
    if (gen.extendable) {
      if (G < -tol || exceeds(G - gen.capacity_max, gen.capacity_max))
        fail("generator " + gen.id + ": capacity " + num(G) + " outside [0, capacity_max]");
    } else if (exceeds(std::abs(G - gen.capacity), gen.capacity)) {
      fail("generator " + gen.id + ": fixed capacity changed");
    }
    for (int t = 0; t < nt; ++t) {
      const double v = s.dispatch[g][t];
      const double avail = gen.availability[t] * G;
      if (v < -tol * (1 + avail) || exceeds(v - avail, avail))
        fail("generator " + gen.id + " snapshot " + std::to_string(t) + ": dispatch " + num(v) + " outside [0, " +
             num(avail) + "]");
    }
  }

  // Links.
  for (std::size_t k = 0; k < nk; ++k) {
    const HvdcLink& link = net.links[k];
    const double H = s.link_capacity[k];
    if (exceeds(link.capacity - H, H) || exceeds(H - link.upper_capacity(), H))
      fail("link " + link.id + ": capacity " + num(H) + " outside limits");
    for (int t = 0; t < nt; ++t)
      if (exceeds(std::abs(s.link_flow[k][t]) - H, H))
        fail("link " + link.id + " snapshot " + std::to_string(t) + ": flow exceeds capacity");
  }

  // Nodal balance.
  for (int t = 0; t < nt; ++t) {
    std::vector<double> balance(net.buses.size(), 0.0);
    for (std::size_t g = 0; g < ng; ++g) balance[net.generator_bus[g]] += s.dispatch[g][t];
    for (std::size_t l = 0; l < nl; ++l) {
      balance[net.line_ends[l].from] -= s.line_flow[l][t];
      balance[net.line_ends[l].to] += s.line_flow[l][t];
    }
    for (std::size_t k = 0; k < nk; ++k) {
      balance[net.link_ends[k].from] -= s.link_flow[k][t];
      balance[net.link_ends[k].to] += s.link_flow[k][t];
    }
    for (std::size_t i = 0; i < net.buses.size(); ++i) {
      const double load = net.buses[i].load[t];
      if (exceeds(std::abs(balance[i] - load), load))
        fail("bus " + net.buses[i].id + " snapshot " + std::to_string(t) + ": imbalance " + num(balance[i] - load));
    }
  }

  // System-wide rows.
  double renewable = 0.0;
  for (std::size_t g = 0; g < ng; ++g)
    if (net.generators[g].renewable)
      for (int t = 0; t < nt; ++t) renewable += net.snapshots[t].weight * s.dispatch[g][t];
  const double required = cfg.renewable_share * net.total_energy_demand();
  if (exceeds(required - renewable, required))
    fail("renewable share: " + num(renewable) + " MWh < " + num(required) + " MWh");
  std::vector<double> gamma(s.line_gamma);
  for (double& v : gamma) v = std::max(0.0, v);
  const double ratio = expansion_volume_ratio(net, gamma);
  if (ratio > cfg.volume_cap + tol) fail("volume cap: ratio " + num(ratio) + " > " + num(cfg.volume_cap));

  const double recomputed = evaluate_objective(net, cfg, s);
  if (std::abs(recomputed - s.objective) > 1e-6 * std::max(1.0, std::abs(s.objective)))
    fail("objective " + num(s.objective) + " != recomputed " + num(recomputed));
  return r;
}

// ---------------------------------------------------------------------------
// SLP loop

namespace detail {

inline bool same_investment(std::span<const double> a, std::span<const double> b) {
  for (std::size_t l = 0; l < a.size(); ++l)
    if (std::abs(a[l] - b[l]) > 1e-9 * (1.0 + std::abs(b[l]))) return false;
  return true;
}

inline ExpansionSolution solve_iteration(const Network& net, const ScenarioConfig& cfg, const HeuristicVariant& v,
                                         std::span<const double> b, int k, const HeuristicOptions& options,
                                         std::span<const double> previous_gamma = {}) {
  if (v.integer_investment) {
    MilpFormulation f = build_integer_lopf(net, cfg, b);
    milp::MilpOptions mo;
    mo.mip_gap = 0.005;
    mo.walltime = cfg.milp_walltime;
    mo.lp = options.lp;
    const milp::MilpSolution s = milp::solve_milp(f.problem, mo);
    if (!s.has_incumbent()) throw HeuristicError(k, "integer LOPF " + std::string(milp::to_string(s.status)));
    return extract_solution(net, cfg, f.map, *s.incumbent, s.upper_bound);
  }
  const LopfFormulation f = build_continuous_lopf(net, cfg, b, LineMode::kExtendableContinuous);
  std::vector<lp::BoundOverride> moves;
  if (cfg.move_limit > 0.0 && !previous_gamma.empty()) {
    for (std::size_t l = 0; l < net.lines.size(); ++l) {
      const int col = f.map.line_investment[l];
      if (col < 0) continue;
      const double g = previous_gamma[l];
      moves.push_back({col, std::max(0.0, g - cfg.move_limit),
                       std::min<double>(net.lines[l].max_candidate(), g + cfg.move_limit)});
    }
  }
  const lp::LpSolution s = lp::solve_lp(f.lp, options.lp, moves);
  if (!s.optimal()) throw HeuristicError(k, lp_failure(s, f.lp));
  return extract_solution(net, cfg, f.map, s.primal, s.objective);
}

}  // namespace detail

/// Runs the heuristic `variant`: iterate LOPF solves with updated
/// susceptances, then discretize and re-optimize as configured.
inline HeuristicRun run_slp(const Network& net, const ScenarioConfig& cfg, const HeuristicVariant& variant,
                            const HeuristicOptions& options = {}) {
  variant.validate();
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  HeuristicRun run;
  run.variant = variant;
  std::vector<double> b = initial_susceptances(net);
  std::vector<double> previous_drive;
  ExpansionSolution last;
  const int limit = variant.iterate ? cfg.max_iterations : 1;
  for (int k = 1; k <= limit; ++k) {
    last = detail::solve_iteration(net, cfg, variant, b, k, options, previous_drive);
    IterationRecord rec;
    rec.k = k;
    rec.susceptances = b;
    rec.gamma = last.line_gamma;
    rec.line_flow = last.line_flow;
    rec.objective = last.objective;
    if (!run.iterations.empty()) {
      const auto& prev = run.iterations.back().gamma;
      for (std::size_t l = 0; l < prev.size(); ++l)
        rec.max_delta_gamma = std::max(rec.max_delta_gamma, std::abs(rec.gamma[l] - prev[l]));
    }
    rec.wall_time = elapsed();

    // Investment that drives the susceptance update.
    std::vector<double> drive = last.line_gamma;
    if (variant.sequential_discretization)
      for (std::size_t l = 0; l < net.lines.size(); ++l)
        if (net.lines[l].extendable) drive[l] = seq_discretize(drive[l], net.lines[l].candidates);

    bool converged = false;
    if (!run.iterations.empty()) {
      const double dobj = std::abs(rec.objective - run.iterations.back().objective);
      converged = dobj <= cfg.convergence_tol && detail::same_investment(drive, previous_drive);
    }
    run.iterations.push_back(std::move(rec));
    if (converged) {
      run.converged = true;
      break;
    }
    b = susceptances_for(net, drive);
    previous_drive = std::move(drive);
  }

  const std::vector<double> gamma_star = last.line_gamma;
  if (variant.integer_investment) {
    // Integral already; fix capacities and matching susceptances.
    FixedSolve fixed = solve_fixed_investment(net, cfg, gamma_star, options.lp);
    if (!fixed.solution) throw HeuristicError(static_cast<int>(run.iterations.size()), "final fixed-line round failed");
    run.final_solution = std::move(*fixed.solution);
  } else if (variant.post == PostDiscretization::kSingle) {
    run.final_solution = finalize_with_threshold(net, cfg, gamma_star, cfg.default_threshold, options.lp);
    run.chosen_threshold = cfg.default_threshold;
    run.threshold_objectives.emplace_back(cfg.default_threshold, run.final_solution.objective);
  } else if (variant.post == PostDiscretization::kMulti) {
    MultiThresholdResult m = post_discretize_multi(net, cfg, gamma_star, cfg.thresholds, options);
    run.final_solution = std::move(m.solution);
    run.chosen_threshold = m.threshold;
    run.threshold_objectives = std::move(m.objectives);
  } else {
    run.final_solution = std::move(last);
    run.final_solution.status = "relaxed";
  }

  FeasibilityReport verdict = verify_minlp_feasibility(net, cfg, run.final_solution, 1e-6);
  run.minlp_feasible = verdict.feasible;
  run.violations = std::move(verdict.violations);
  run.wall_time = elapsed();
  return run;
}

/// CSV trace: k,objective,max_abs_delta_gamma,wall_time_s.
inline std::string iteration_trace_csv(const HeuristicRun& run) {
  std::ostringstream out;
  out << "k,objective,max_abs_delta_gamma,wall_time_s\n";
  char buf[160];
  for (const IterationRecord& r : run.iterations) {
    std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%.6f\n", r.k, r.objective, r.max_delta_gamma, r.wall_time);
    out << buf;
  }
  return out.str();
}

}  // namespace tepkit

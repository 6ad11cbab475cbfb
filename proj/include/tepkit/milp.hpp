#pragma once

// Best-bound branch and bound over tepkit::lp for mixed-binary programs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <optional>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tepkit/lp.hpp"

namespace tepkit::milp {

/// Binary variables must carry bounds inside [0,1] with integral endpoints
/// ([0,1], [0,0] or [1,1]).
struct MilpProblem {
  lp::LinearProgram lp;
  std::vector<int> binaries;

  void validate() const {
    lp.validate();
    for (int j : binaries) {
      if (j < 0 || j >= lp.num_variables())
        throw std::invalid_argument("binary index out of range");
      const auto& v = lp.variable(j);
      const bool lo_ok = v.lower == 0.0 || v.lower == 1.0;
      const bool hi_ok = v.upper == 0.0 || v.upper == 1.0;
      if (!lo_ok || !hi_ok || v.lower > v.upper)
        throw std::invalid_argument("binary variable " + std::to_string(j) +
                                    " must be bounded within [0,1]");
    }
  }
};

enum class MilpStatus {
  kOptimalWithinGap,
  kFeasibleWalltime,
  kInfeasible,
  kInfeasibleUnknown,  // walltime reached before any incumbent
  kNumericFailure,
};

inline std::string_view to_string(MilpStatus s) {
  switch (s) {
    case MilpStatus::kOptimalWithinGap: return "optimal-within-gap";
    case MilpStatus::kFeasibleWalltime: return "feasible-walltime";
    case MilpStatus::kInfeasible: return "infeasible";
    case MilpStatus::kInfeasibleUnknown: return "infeasible-unknown";
    case MilpStatus::kNumericFailure: return "numeric-failure";
  }
  return "unknown";
}

struct GapLogEntry {
  double wall_time;
  long nodes;
  double lower_bound;
  double upper_bound;
  double gap;
};

struct MilpSolution {
  MilpStatus status = MilpStatus::kInfeasible;
  std::optional<std::vector<double>> incumbent;
  double upper_bound = lp::kInfinity;
  double lower_bound = -lp::kInfinity;
  double gap = lp::kInfinity;
  double root_bound = -lp::kInfinity;
  long nodes_explored = 0;
  long failed_nodes = 0;
  double wall_time = 0.0;
  std::vector<GapLogEntry> log;

  [[nodiscard]] bool has_incumbent() const { return incumbent.has_value(); }
};

struct MilpOptions {
  double mip_gap = 1e-4;
  double walltime = lp::kInfinity;  // seconds
  double int_tol = 1e-6;
  /// Round-and-fix heuristic runs at the root and every this many nodes (0 disables).
  int rounding_frequency = 10;
  /// Evaluate the two children of a branch concurrently.
  bool parallel = false;
  lp::SolverOptions lp;
};

/// Relative gap (upper - lower) / max(|upper|, 1e-10). Crossing bounds beyond
/// a 1e-9 relative slack signal a solver bug.
inline double mip_gap(double upper, double lower) {
  if (!std::isfinite(upper)) return lp::kInfinity;
  if (lower > upper + 1e-9 * std::max(1.0, std::abs(upper)))
    throw std::logic_error("mip_gap: lower bound exceeds upper bound");
  return std::max(0.0, upper - lower) / std::max(std::abs(upper), 1e-10);
}

namespace detail {

struct Node {
  long id;
  int depth;
  double bound;
  std::vector<lp::BoundOverride> fixes;
  std::vector<double> primal;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const MilpProblem& problem, const MilpOptions& options)
      : problem_(problem), opt_(options), start_(std::chrono::steady_clock::now()) {}

  MilpSolution run() {
    MilpSolution& s = result_;
    const lp::LpSolution root = solve({});
    s.nodes_explored = 1;
    if (root.status == lp::LpStatus::kInfeasible) {
      s.status = MilpStatus::kInfeasible;
      return finish();
    }
    if (!root.optimal()) {
      s.status = MilpStatus::kNumericFailure;
      return finish();
    }
    s.root_bound = root.objective;
    s.lower_bound = root.objective;
    log();

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    if (fractional_var(root.primal) < 0) {
      try_incumbent(root.primal, {});
    } else {
      if (opt_.rounding_frequency > 0) round_and_fix(root.primal, {});
      open.push(Node{next_id_++, 0, root.objective, {}, root.primal});
    }

    bool timed_out = false;
    while (!open.empty()) {
      if (elapsed() >= opt_.walltime) {
        timed_out = true;
        break;
      }
      raise_lower_bound(open.top().bound);
      if (s.has_incumbent() && mip_gap(s.upper_bound, s.lower_bound) <= opt_.mip_gap) break;

      Node node = open.top();
      open.pop();
      if (pruned(node.bound)) continue;

      const int var = fractional_var(node.primal);
      std::vector<lp::BoundOverride> fixes[2] = {node.fixes, node.fixes};
      fixes[0].push_back({var, 0.0, 0.0});
      fixes[1].push_back({var, 1.0, 1.0});
      lp::LpSolution child[2];
      if (opt_.parallel) {
        auto down = std::async(std::launch::async, [&] { return solve(fixes[0]); });
        child[1] = solve(fixes[1]);
        child[0] = down.get();
      } else {
        child[0] = solve(fixes[0]);
        child[1] = solve(fixes[1]);
      }
      for (int k = 0; k < 2; ++k) {
        ++s.nodes_explored;
        const lp::LpSolution& c = child[k];
        if (c.status == lp::LpStatus::kInfeasible) continue;
        if (!c.optimal()) {
          ++s.failed_nodes;
          continue;
        }
        if (pruned(c.objective)) continue;
        if (fractional_var(c.primal) < 0) {
          try_incumbent(c.primal, fixes[k]);
          continue;
        }
        if (opt_.rounding_frequency > 0 && s.nodes_explored % opt_.rounding_frequency == 0)
          round_and_fix(c.primal, fixes[k]);
        open.push(Node{next_id_++, node.depth + 1, c.objective, std::move(fixes[k]), c.primal});
      }
    }

    if (open.empty() && !timed_out) {
      if (s.has_incumbent()) raise_lower_bound(s.upper_bound);
    } else if (!open.empty()) {
      raise_lower_bound(open.top().bound);
    }
    if (s.has_incumbent()) {
      s.lower_bound = std::min(s.lower_bound, s.upper_bound);
      s.gap = mip_gap(s.upper_bound, s.lower_bound);
      s.status = !timed_out || s.gap <= opt_.mip_gap ? MilpStatus::kOptimalWithinGap
                                                     : MilpStatus::kFeasibleWalltime;
    } else {
      s.status = timed_out ? MilpStatus::kInfeasibleUnknown : MilpStatus::kInfeasible;
    }
    log();
    return finish();
  }

 private:
  lp::LpSolution solve(const std::vector<lp::BoundOverride>& fixes) const {
    return lp::solve_lp(problem_.lp, opt_.lp, fixes);
  }

  [[nodiscard]] double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  // Most fractional binary, lowest index on ties; -1 when all are integral.
  [[nodiscard]] int fractional_var(const std::vector<double>& x) const {
    int best = -1;
    double best_frac = 0.0;
    for (int j : problem_.binaries) {
      const double frac = std::min(x[j] - std::floor(x[j]), std::ceil(x[j]) - x[j]);
      if (frac <= opt_.int_tol) continue;
      if (frac > best_frac + 1e-12 || (std::abs(frac - best_frac) <= 1e-12 && j < best)) {
        best_frac = frac;
        best = j;
      }
    }
    return best;
  }

  [[nodiscard]] bool pruned(double bound) const {
    const MilpSolution& s = result_;
    return s.has_incumbent() &&
           bound >= s.upper_bound - 1e-9 * std::max(1.0, std::abs(s.upper_bound));
  }

  void raise_lower_bound(double bound) {
    MilpSolution& s = result_;
    double candidate = bound;
    if (s.has_incumbent()) candidate = std::min(candidate, s.upper_bound);
    if (candidate > s.lower_bound) {
      s.lower_bound = candidate;
      log();
    }
  }

  // Rounds binaries exactly and re-solves with them fixed so the continuous
  // part is consistent with the rounded values.
  void try_incumbent(const std::vector<double>& x, std::vector<lp::BoundOverride> fixes) {
    for (int j : problem_.binaries) {
      const double v = std::round(x[j]);
      fixes.push_back({j, v, v});
    }
    const lp::LpSolution fixed = solve(fixes);
    ++result_.nodes_explored;
    if (!fixed.optimal()) return;
    accept(fixed);
  }

  void round_and_fix(const std::vector<double>& x, std::vector<lp::BoundOverride> fixes) {
    try_incumbent(x, std::move(fixes));
  }

  void accept(const lp::LpSolution& sol) {
    MilpSolution& s = result_;
    if (s.has_incumbent() && sol.objective >= s.upper_bound) return;
    std::vector<double> x = sol.primal;
    for (int j : problem_.binaries) x[j] = std::round(x[j]);
    s.incumbent = std::move(x);
    s.upper_bound = sol.objective;
    if (s.lower_bound > s.upper_bound) s.lower_bound = s.upper_bound;
    log();
  }

  void log() {
    MilpSolution& s = result_;
    double gap = lp::kInfinity;
    if (s.has_incumbent()) gap = mip_gap(s.upper_bound, std::min(s.lower_bound, s.upper_bound));
    s.log.push_back({elapsed(), s.nodes_explored, s.lower_bound, s.upper_bound, gap});
  }

  MilpSolution finish() {
    result_.wall_time = elapsed();
    if (result_.has_incumbent())
      result_.gap = mip_gap(result_.upper_bound, std::min(result_.lower_bound, result_.upper_bound));
    return std::move(result_);
  }

  const MilpProblem& problem_;
  MilpOptions opt_;
  std::chrono::steady_clock::time_point start_;
  MilpSolution result_;
  long next_id_ = 0;
};

}  // namespace detail

/// Solves `problem` to within `options.mip_gap`, or until the walltime runs
/// out. The lower bound is the best bound over the open frontier.
inline MilpSolution solve_milp(const MilpProblem& problem, const MilpOptions& options = {}) {
  problem.validate();
  detail::BranchAndBound bnb(problem, options);
  return bnb.run();
}

/// Gap progression as CSV: wall_time_s,nodes,lower_bound,upper_bound,gap.
inline std::string gap_log_csv(const MilpSolution& solution) {
  std::ostringstream out;
  out << "wall_time_s,nodes,lower_bound,upper_bound,gap\n";
  char buf[256];
  for (const GapLogEntry& e : solution.log) {
    std::snprintf(buf, sizeof buf, "%.6f,%ld,%.10g,%.10g,%.10g\n", e.wall_time, e.nodes,
                  e.lower_bound, e.upper_bound, e.gap);
    out << buf;
  }
  return out.str();
}

}  // namespace tepkit::milp

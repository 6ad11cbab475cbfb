#pragma once

// Translation of a Network + ScenarioConfig into LP/MILP instances of the
// linearized optimal power flow with generation and transmission expansion.

#include <algorithm>
#include <cmath>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tepkit/lp.hpp"
#include "tepkit/milp.hpp"
#include "tepkit/netmodel.hpp"

namespace tepkit {

class FormulationError : public std::runtime_error {
 public:
  FormulationError(std::string entity, std::string rule, const std::string& detail)
      : std::runtime_error(rule + " [" + entity + "]: " + detail),
        entity_(std::move(entity)),
        rule_(std::move(rule)) {}
  [[nodiscard]] const std::string& entity() const { return entity_; }
  [[nodiscard]] const std::string& rule() const { return rule_; }

 private:
  std::string entity_;
  std::string rule_;
};

enum class LineMode { kExtendableContinuous, kFixed };

/// Column/row ids of every model entity. -1 marks entities that are
/// constants in this build (fixed capacities, fixed lines).
struct FormulationMap {
  int snapshots = 0;
  std::vector<int> gen_capacity;
  std::vector<std::vector<int>> dispatch;   // [generator][t]
  std::vector<std::vector<int>> line_flow;  // [line][t]
  std::vector<int> line_capacity;           // F
  std::vector<int> line_investment;         // continuous Γ
  std::vector<std::vector<int>> line_choice;  // binary Γ_c, indexed like candidates
  std::vector<int> link_capacity;
  std::vector<std::vector<int>> link_flow;  // [link][t]
  std::vector<std::vector<int>> angle;      // [bus][t]

  std::vector<std::vector<int>> kcl_rows;               // [bus][t]
  std::vector<std::vector<std::vector<int>>> kvl_rows;  // [line][t] -> LP rows
  std::vector<int> capacity_rows;                       // F-Γ link, per line (-1 if none)
  std::vector<int> choice_rows;                         // Σ_c Γ_c = 1, per line (-1 if none)
  int share_row = -1;
  int volume_row = -1;

  /// Susceptance used in plain KVL rows, per line.
  std::vector<double> susceptance;
  /// Circuit additions of lines held fixed in this build (0 for non-extendable lines).
  std::vector<double> fixed_gamma;
  std::vector<int> reference_buses;
  /// Lines whose KVL is disjunctive (b implied by the chosen candidate).
  std::vector<char> disjunctive;

  /// Logical constraints: each disjunctive pair counts once.
  int logical_constraints = 0;
};

struct LopfFormulation {
  lp::LinearProgram lp;
  FormulationMap map;
};

struct MilpFormulation {
  milp::MilpProblem problem;
  FormulationMap map;
};

/// Big-M constants per extendable line and candidate, with the angle bound
/// they were derived from.
struct BigMValues {
  struct Line {
    std::vector<double> upper;  // M̄ per candidate
    std::vector<double> lower;  // M̲ per candidate
    double angle_bound = 0.0;   // Δθ_max
    std::vector<int> path;      // lines of the bounding path (empty on fallback)
    double path_weight = 0.0;
    bool fallback = false;
  };
  std::vector<Line> lines;  // indexed by line; empty entries for non-extendable

  void scale(double factor) {
    for (Line& l : lines) {
      for (double& m : l.upper) m *= factor;
      for (double& m : l.lower) m *= factor;
    }
  }
};

struct ExpansionSolution {
  std::string status = "optimal";
  double objective = 0.0;
  std::vector<double> gen_capacity;
  std::vector<double> line_capacity;
  std::vector<double> line_gamma;
  std::vector<double> line_susceptance;
  std::vector<double> link_capacity;
  std::vector<std::vector<double>> dispatch;
  std::vector<std::vector<double>> line_flow;
  std::vector<std::vector<double>> link_flow;
  std::vector<std::vector<double>> angle;
};

namespace detail {

enum class Investment { kFixed, kContinuous, kBinaryChoice };

struct BuildSpec {
  Investment investment = Investment::kContinuous;
  std::span<const double> susceptance;  // plain KVL (not used with big-M)
  std::span<const double> fixed_gamma;  // kFixed
  const BigMValues* big_m = nullptr;    // disjunctive KVL on extendable lines
};

inline void check_structure(const Network& net) {
  std::vector<int> degree(net.buses.size(), 0);
  for (int b : net.generator_bus) ++degree[b];
  for (const auto& e : net.line_ends) ++degree[e.from], ++degree[e.to];
  for (const auto& e : net.link_ends) ++degree[e.from], ++degree[e.to];
  for (std::size_t i = 0; i < net.buses.size(); ++i) {
    const auto& load = net.buses[i].load;
    const bool loaded = std::any_of(load.begin(), load.end(), [](double v) { return v > 0.0; });
    if (loaded && degree[i] == 0)
      throw FormulationError(net.buses[i].id, "structurally-infeasible",
                             "bus has load but no generator, line or link");
  }
}

inline std::vector<int> reference_buses(const Network& net) {
  const std::vector<int> comp = ac_components(net);
  std::vector<int> refs;
  for (std::size_t i = 0; i < comp.size(); ++i)
    if (comp[i] == static_cast<int>(i)) refs.push_back(static_cast<int>(i));
  return refs;
}

inline LopfFormulation build(const Network& net, const ScenarioConfig& cfg, const BuildSpec& spec) {
  using lp::RowSense;
  using lp::Term;
  check_structure(net);
  const int nt = net.num_snapshots();
  const int nl = static_cast<int>(net.lines.size());
  const double loading = cfg.line_loading_factor;
  if (spec.big_m == nullptr && spec.susceptance.size() != net.lines.size())
    throw std::invalid_argument("one susceptance per line required");
  for (double b : spec.susceptance)
    if (!(b > 0.0)) throw std::invalid_argument("susceptances must be positive");
  if (spec.investment == Investment::kFixed && spec.fixed_gamma.size() != net.lines.size())
    throw std::invalid_argument("fixed mode needs Γ̂ for every line");

  LopfFormulation out;
  lp::LinearProgram& lp = out.lp;
  FormulationMap& m = out.map;
  m.snapshots = nt;
  m.susceptance.assign(spec.susceptance.begin(), spec.susceptance.end());
  m.fixed_gamma.assign(nl, 0.0);
  m.reference_buses = reference_buses(net);

  double offset = 0.0;

  // Generators.
  for (std::size_t g = 0; g < net.generators.size(); ++g) {
    const Generator& gen = net.generators[g];
    if (gen.extendable) {
      m.gen_capacity.push_back(
          lp.add_variable(0.0, gen.capacity_max, gen.capital_cost, "G_" + gen.id));
    } else {
      m.gen_capacity.push_back(-1);
      if (cfg.charge_existing) offset += gen.capital_cost * gen.capacity;
    }
    std::vector<int> disp(nt);
    for (int t = 0; t < nt; ++t) {
      const double cost = net.snapshots[t].weight * gen.marginal_cost;
      const double ub = gen.extendable ? lp::kInfinity : gen.availability[t] * gen.capacity;
      disp[t] = lp.add_variable(0.0, ub, cost, "g_" + gen.id + "_" + std::to_string(t));
    }
    m.dispatch.push_back(std::move(disp));
  }

  // Lines: investment and capacity.
  m.line_capacity.assign(nl, -1);
  m.line_investment.assign(nl, -1);
  m.line_choice.assign(nl, {});
  m.capacity_rows.assign(nl, -1);
  m.choice_rows.assign(nl, -1);
  std::vector<double> fixed_capacity(nl, 0.0);
  double volume_rhs = 0.0;
  std::vector<Term> volume_terms;
  for (int l = 0; l < nl; ++l) {
    const AcLine& line = net.lines[l];
    volume_rhs += cfg.volume_cap * line.init_capacity * line.length;
    const bool variable = line.extendable && spec.investment != Investment::kFixed;
    if (!variable) {
      const double gamma = line.extendable ? spec.fixed_gamma[l] : 0.0;
      m.fixed_gamma[l] = gamma;
      fixed_capacity[l] = capacity_from_circuits(line, gamma);
      offset += line.capital_cost * fixed_capacity[l];
      if (!cfg.charge_existing) offset -= line.capital_cost * line.init_capacity;
      volume_rhs -= (fixed_capacity[l] - line.init_capacity) * line.length;
      continue;
    }
    const double fmax = capacity_from_circuits(line, line.max_candidate());
    const int F = lp.add_variable(line.init_capacity, fmax, line.capital_cost, "F_" + line.id);
    if (!cfg.charge_existing) offset -= line.capital_cost * line.init_capacity;
    m.line_capacity[l] = F;
    const double per_circuit = line.init_capacity / line.init_circuits;
    std::vector<Term> link{{F, 1.0}};
    if (spec.investment == Investment::kContinuous) {
      const int gamma = lp.add_variable(0.0, line.max_candidate(), 0.0, "Gamma_" + line.id);
      m.line_investment[l] = gamma;
      link.push_back({gamma, -per_circuit});
    } else {
      std::vector<Term> choice;
      for (int c : line.candidates) {
        const int v = lp.add_variable(0.0, 1.0, 0.0, "Gamma_" + line.id + "_" + std::to_string(c));
        m.line_choice[l].push_back(v);
        choice.push_back({v, 1.0});
        if (c != 0) link.push_back({v, -per_circuit * c});
      }
      m.choice_rows[l] = lp.add_constraint(choice, RowSense::kEqual, 1.0, "choice_" + line.id);
      ++m.logical_constraints;
    }
    m.capacity_rows[l] =
        lp.add_constraint(link, RowSense::kEqual, line.init_capacity, "capacity_" + line.id);
    ++m.logical_constraints;
    volume_terms.push_back({F, line.length});
    volume_rhs += line.init_capacity * line.length;
  }

  // Links.
  for (const HvdcLink& link : net.links) {
    m.link_capacity.push_back(
        lp.add_variable(link.capacity, link.upper_capacity(), link.capital_cost, "H_" + link.id));
    if (!cfg.charge_existing) offset -= link.capital_cost * link.capacity;
  }

  // Angles, with one reference bus per AC component pinned to zero.
  std::vector<bool> is_ref(net.buses.size(), false);
  for (int r : m.reference_buses) is_ref[r] = true;
  for (std::size_t i = 0; i < net.buses.size(); ++i) {
    std::vector<int> th(nt);
    for (int t = 0; t < nt; ++t) {
      const double bound = is_ref[i] ? 0.0 : lp::kInfinity;
      th[t] = lp.add_variable(-bound, bound, 0.0, "theta_" + net.buses[i].id + "_" + std::to_string(t));
    }
    m.angle.push_back(std::move(th));
  }

  // Flows.
  for (int l = 0; l < nl; ++l) {
    const AcLine& line = net.lines[l];
    const bool variable = m.line_capacity[l] >= 0;
    std::vector<int> fl(nt);
    for (int t = 0; t < nt; ++t) {
      const double bound = variable ? lp::kInfinity : loading * fixed_capacity[l];
      fl[t] = lp.add_variable(-bound, bound, 0.0, "f_" + line.id + "_" + std::to_string(t));
    }
    m.line_flow.push_back(std::move(fl));
  }
  for (std::size_t k = 0; k < net.links.size(); ++k) {
    std::vector<int> hf(nt);
    for (int t = 0; t < nt; ++t)
      hf[t] = lp.add_variable(-lp::kInfinity, lp::kInfinity, 0.0,
                              "h_" + net.links[k].id + "_" + std::to_string(t));
    m.link_flow.push_back(std::move(hf));
  }

  // Generator availability rows for extendable capacity.
  for (std::size_t g = 0; g < net.generators.size(); ++g) {
    if (m.gen_capacity[g] < 0) continue;
    for (int t = 0; t < nt; ++t) {
      lp.add_constraint({{m.dispatch[g][t], 1.0}, {m.gen_capacity[g], -net.generators[g].availability[t]}},
                        RowSense::kLessEqual, 0.0);
      ++m.logical_constraints;
    }
  }

  // Line loading rows for variable capacity.
  for (int l = 0; l < nl; ++l) {
    if (m.line_capacity[l] < 0) continue;
    for (int t = 0; t < nt; ++t) {
      lp.add_constraint({{m.line_flow[l][t], 1.0}, {m.line_capacity[l], -loading}}, RowSense::kLessEqual, 0.0);
      lp.add_constraint({{m.line_flow[l][t], 1.0}, {m.line_capacity[l], loading}}, RowSense::kGreaterEqual, 0.0);
      m.logical_constraints += 2;
    }
  }

  // Link capacity rows.
  for (std::size_t k = 0; k < net.links.size(); ++k) {
    for (int t = 0; t < nt; ++t) {
      lp.add_constraint({{m.link_flow[k][t], 1.0}, {m.link_capacity[k], -1.0}}, RowSense::kLessEqual, 0.0);
      lp.add_constraint({{m.link_flow[k][t], 1.0}, {m.link_capacity[k], 1.0}}, RowSense::kGreaterEqual, 0.0);
      m.logical_constraints += 2;
    }
  }

  // Kirchhoff's current law.
  m.kcl_rows.assign(net.buses.size(), std::vector<int>(nt, -1));
  for (int t = 0; t < nt; ++t) {
    std::vector<std::vector<Term>> rows(net.buses.size());
    for (std::size_t g = 0; g < net.generators.size(); ++g)
      rows[net.generator_bus[g]].push_back({m.dispatch[g][t], 1.0});
    for (int l = 0; l < nl; ++l) {
      rows[net.line_ends[l].from].push_back({m.line_flow[l][t], -1.0});
      rows[net.line_ends[l].to].push_back({m.line_flow[l][t], 1.0});
    }
    for (std::size_t k = 0; k < net.links.size(); ++k) {
      rows[net.link_ends[k].from].push_back({m.link_flow[k][t], -1.0});
      rows[net.link_ends[k].to].push_back({m.link_flow[k][t], 1.0});
    }
    for (std::size_t i = 0; i < net.buses.size(); ++i) {
      m.kcl_rows[i][t] = lp.add_constraint(std::move(rows[i]), RowSense::kEqual, net.buses[i].load[t],
                                           "kcl_" + net.buses[i].id + "_" + std::to_string(t));
      ++m.logical_constraints;
    }
  }

  // Kirchhoff's voltage law: plain rows or disjunctive pairs per candidate.
  m.kvl_rows.assign(nl, std::vector<std::vector<int>>(nt));
  for (int l = 0; l < nl; ++l) {
    const AcLine& line = net.lines[l];
    const int i = net.line_ends[l].from, j = net.line_ends[l].to;
    const bool disjunctive = spec.big_m != nullptr && !m.line_choice[l].empty();
    m.disjunctive.push_back(disjunctive ? 1 : 0);
    for (int t = 0; t < nt; ++t) {
      const int f = m.line_flow[l][t];
      if (!disjunctive) {
        const double b = spec.big_m != nullptr ? line.init_susceptance : spec.susceptance[l];
        m.kvl_rows[l][t].push_back(lp.add_constraint(
            {{f, 1.0}, {m.angle[i][t], -b}, {m.angle[j][t], b}}, RowSense::kEqual, 0.0,
            "kvl_" + line.id + "_" + std::to_string(t)));
        ++m.logical_constraints;
        continue;
      }
      const BigMValues::Line& bm = spec.big_m->lines.at(l);
      for (std::size_t c = 0; c < line.candidates.size(); ++c) {
        const double b = susceptance_from_circuits(line, line.candidates[c]);
        const int choice = m.line_choice[l][c];
        const std::string tag = line.id + "_" + std::to_string(line.candidates[c]) + "_" + std::to_string(t);
        m.kvl_rows[l][t].push_back(lp.add_constraint(
            {{m.angle[i][t], b}, {m.angle[j][t], -b}, {f, -1.0}, {choice, -bm.upper[c]}},
            RowSense::kGreaterEqual, -bm.upper[c], "kvl_lo_" + tag));
        m.kvl_rows[l][t].push_back(lp.add_constraint(
            {{m.angle[i][t], b}, {m.angle[j][t], -b}, {f, -1.0}, {choice, bm.lower[c]}},
            RowSense::kLessEqual, bm.lower[c], "kvl_up_" + tag));
        ++m.logical_constraints;
      }
    }
  }

  // Minimum renewable share of demand energy.
  {
    std::vector<Term> terms;
    for (std::size_t g = 0; g < net.generators.size(); ++g) {
      if (!net.generators[g].renewable) continue;
      for (int t = 0; t < nt; ++t) terms.push_back({m.dispatch[g][t], net.snapshots[t].weight});
    }
    m.share_row = lp.add_constraint(std::move(terms), RowSense::kGreaterEqual,
                                    cfg.renewable_share * net.total_energy_demand(), "renewable_share");
    ++m.logical_constraints;
  }

  // Transmission volume cap (MWkm), over AC lines.
  m.volume_row = lp.add_constraint(std::move(volume_terms), RowSense::kLessEqual, volume_rhs, "volume_cap");
  ++m.logical_constraints;

  lp.set_objective_offset(offset);
  return out;
}

}  // namespace detail

/// Continuous co-optimization LP with fixed susceptances `b`. In
/// kExtendableContinuous mode Γ ∈ [0, max C] per extendable line; in kFixed
/// mode `fixed_gamma` fixes every extendable line's circuit additions.
inline LopfFormulation build_continuous_lopf(const Network& net, const ScenarioConfig& cfg,
                                             std::span<const double> susceptances, LineMode mode,
                                             std::span<const double> fixed_gamma = {}) {
  detail::BuildSpec spec;
  spec.investment = mode == LineMode::kFixed ? detail::Investment::kFixed : detail::Investment::kContinuous;
  spec.susceptance = susceptances;
  spec.fixed_gamma = fixed_gamma;
  return detail::build(net, cfg, spec);
}

/// Fixed-susceptance model with integer circuit choice per extendable line
/// (one binary per candidate, plain KVL at `susceptances`).
inline MilpFormulation build_integer_lopf(const Network& net, const ScenarioConfig& cfg,
                                          std::span<const double> susceptances) {
  detail::BuildSpec spec;
  spec.investment = detail::Investment::kBinaryChoice;
  spec.susceptance = susceptances;
  LopfFormulation f = detail::build(net, cfg, spec);
  MilpFormulation out{{std::move(f.lp), {}}, std::move(f.map)};
  for (const auto& ids : out.map.line_choice)
    out.problem.binaries.insert(out.problem.binaries.end(), ids.begin(), ids.end());
  return out;
}

/// Exact big-M disjunctive MILP: per candidate c, KVL at (1+c/γ̃)b̃ is
/// enforced when Γ_c = 1 and relaxed by M otherwise.
inline MilpFormulation build_bigm_milp(const Network& net, const ScenarioConfig& cfg, const BigMValues& big_m) {
  if (big_m.lines.size() != net.lines.size()) throw std::invalid_argument("big-M table size mismatch");
  std::vector<double> b(net.lines.size());
  for (std::size_t l = 0; l < net.lines.size(); ++l) b[l] = net.lines[l].init_susceptance;
  detail::BuildSpec spec;
  spec.investment = detail::Investment::kBinaryChoice;
  spec.susceptance = b;
  spec.big_m = &big_m;
  LopfFormulation f = detail::build(net, cfg, spec);
  MilpFormulation out{{std::move(f.lp), {}}, std::move(f.map)};
  for (const auto& ids : out.map.line_choice)
    out.problem.binaries.insert(out.problem.binaries.end(), ids.begin(), ids.end());
  return out;
}

/// Angle-difference bounds by shortest path (edge weight loading·F^max/b^min)
/// avoiding the line itself; bridges fall back to a global angle-spread bound.
inline BigMValues compute_big_m(const Network& net, const ScenarioConfig& cfg) {
  const int nl = static_cast<int>(net.lines.size());
  const int nb = net.num_buses();
  const double loading = cfg.line_loading_factor;
  std::vector<double> weight(nl), fmax(nl);
  for (int l = 0; l < nl; ++l) {
    const AcLine& line = net.lines[l];
    fmax[l] = capacity_from_circuits(line, line.extendable ? line.max_candidate() : 0);
    weight[l] = loading * fmax[l] / line.init_susceptance;
  }
  std::vector<std::vector<int>> incident(nb);
  for (int l = 0; l < nl; ++l) {
    incident[net.line_ends[l].from].push_back(l);
    incident[net.line_ends[l].to].push_back(l);
  }
  const std::vector<int> comp = ac_components(net);

  BigMValues out;
  out.lines.resize(nl);
  for (int l = 0; l < nl; ++l) {
    const AcLine& line = net.lines[l];
    if (!line.extendable) continue;
    const int src = net.line_ends[l].from, dst = net.line_ends[l].to;

    // Dijkstra from src without line l.
    std::vector<double> dist(nb, lp::kInfinity);
    std::vector<int> via(nb, -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[src] = 0.0;
    pq.push({0.0, src});
    while (!pq.empty()) {
      auto [d, u] = pq.top();
      pq.pop();
      if (d > dist[u]) continue;
      for (int e : incident[u]) {
        if (e == l) continue;
        const int v = net.line_ends[e].from == u ? net.line_ends[e].to : net.line_ends[e].from;
        if (d + weight[e] < dist[v]) {
          dist[v] = d + weight[e];
          via[v] = e;
          pq.push({dist[v], v});
        }
      }
    }

    BigMValues::Line& entry = out.lines[l];
    if (std::isfinite(dist[dst])) {
      entry.angle_bound = dist[dst];
      entry.path_weight = dist[dst];
      for (int v = dst; v != src;) {
        const int e = via[v];
        entry.path.insert(entry.path.begin(), e);
        v = net.line_ends[e].from == v ? net.line_ends[e].to : net.line_ends[e].from;
      }
    } else {
      entry.fallback = true;
      if (cfg.angle_spread_bound > 0.0) {
        entry.angle_bound = cfg.angle_spread_bound;
      } else {
        for (int e = 0; e < nl; ++e)
          if (comp[net.line_ends[e].from] == comp[src]) entry.angle_bound += weight[e];
      }
    }
    for (int c : line.candidates) {
      const double m = susceptance_from_circuits(line, c) * entry.angle_bound + loading * fmax[l];
      entry.upper.push_back(m);
      entry.lower.push_back(m);
    }
  }
  return out;
}

struct FormulationSize {
  int added_variables = 0;
  int added_constraints = 0;
  friend bool operator==(const FormulationSize&, const FormulationSize&) = default;
};

/// Variables and constraints the big-M build adds over the continuous build.
inline FormulationSize formulation_size(const Network& net, int snapshot_count) {
  int ext = 0, cand = 0;
  for (const AcLine& line : net.lines) {
    if (!line.extendable) continue;
    ++ext;
    cand += static_cast<int>(line.candidates.size());
  }
  return {cand - ext, ext + snapshot_count * (cand - ext)};
}

/// Objective recomputed from decoded values (independent of the LP's cost vector).
inline double evaluate_objective(const Network& net, const ScenarioConfig& cfg, const ExpansionSolution& s) {
  double obj = 0.0;
  for (std::size_t g = 0; g < net.generators.size(); ++g) {
    const Generator& gen = net.generators[g];
    if (gen.extendable || cfg.charge_existing) obj += gen.capital_cost * s.gen_capacity[g];
    for (int t = 0; t < net.num_snapshots(); ++t)
      obj += net.snapshots[t].weight * gen.marginal_cost * s.dispatch[g][t];
  }
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    const AcLine& line = net.lines[l];
    obj += line.capital_cost * s.line_capacity[l];
    if (!cfg.charge_existing) obj -= line.capital_cost * line.init_capacity;
  }
  for (std::size_t k = 0; k < net.links.size(); ++k) {
    obj += net.links[k].capital_cost * s.link_capacity[k];
    if (!cfg.charge_existing) obj -= net.links[k].capital_cost * net.links[k].capacity;
  }
  return obj;
}

/// Decodes primal values into an ExpansionSolution and checks the
/// recomputed objective against `solver_objective` (1e-6 relative).
inline ExpansionSolution extract_solution(const Network& net, const ScenarioConfig& cfg, const FormulationMap& map,
                                          std::span<const double> x, double solver_objective,
                                          std::string status = "optimal") {
  const int nt = map.snapshots;
  auto values = [&](const std::vector<int>& ids) {
    std::vector<double> v(ids.size());
    for (std::size_t k = 0; k < ids.size(); ++k) v[k] = x[ids[k]];
    return v;
  };
  ExpansionSolution s;
  s.status = std::move(status);
  s.objective = solver_objective;
  for (std::size_t g = 0; g < net.generators.size(); ++g) {
    s.gen_capacity.push_back(map.gen_capacity[g] >= 0 ? x[map.gen_capacity[g]] : net.generators[g].capacity);
    s.dispatch.push_back(values(map.dispatch[g]));
  }
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    const AcLine& line = net.lines[l];
    double gamma = map.fixed_gamma[l];
    if (map.line_investment[l] >= 0) {
      gamma = std::max(0.0, x[map.line_investment[l]]);
    } else if (!map.line_choice[l].empty()) {
      gamma = 0.0;
      for (std::size_t c = 0; c < line.candidates.size(); ++c)
        gamma += line.candidates[c] * std::round(x[map.line_choice[l][c]]);
    }
    s.line_gamma.push_back(gamma);
    s.line_capacity.push_back(map.line_capacity[l] >= 0 ? x[map.line_capacity[l]]
                                                        : capacity_from_circuits(line, gamma));
    s.line_susceptance.push_back(map.disjunctive[l]
                                     ? susceptance_from_circuits(line, gamma)
                                     : map.susceptance[l]);
    s.line_flow.push_back(values(map.line_flow[l]));
  }
  for (std::size_t k = 0; k < net.links.size(); ++k) {
    s.link_capacity.push_back(x[map.link_capacity[k]]);
    s.link_flow.push_back(values(map.link_flow[k]));
  }
  for (std::size_t i = 0; i < net.buses.size(); ++i) s.angle.push_back(values(map.angle[i]));
  (void)nt;

  const double recomputed = evaluate_objective(net, cfg, s);
  if (std::abs(recomputed - solver_objective) > 1e-6 * std::max(1.0, std::abs(solver_objective)))
    throw std::logic_error("extract_solution: objective mismatch (" + std::to_string(recomputed) + " vs " +
                           std::to_string(solver_objective) + ")");
  return s;
}

/// Initial susceptances b̃ per line.
inline std::vector<double> initial_susceptances(const Network& net) {
  std::vector<double> b;
  for (const AcLine& line : net.lines) b.push_back(line.init_susceptance);
  return b;
}

/// Susceptances implied by per-line circuit additions.
inline std::vector<double> susceptances_for(const Network& net, std::span<const double> gamma) {
  std::vector<double> b;
  for (std::size_t l = 0; l < net.lines.size(); ++l) b.push_back(susceptance_from_circuits(net.lines[l], gamma[l]));
  return b;
}

}  // namespace tepkit

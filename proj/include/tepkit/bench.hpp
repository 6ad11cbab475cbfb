#pragma once

// Experiment harness: synthetic networks, the enumeration oracle, method
// runs and report files.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tepkit/heuristics.hpp"
#include "tepkit/lopf.hpp"
#include "tepkit/milp.hpp"
#include "tepkit/netmodel.hpp"

namespace tepkit {

// ---------------------------------------------------------------------------
// Synthetic networks

enum class Topology { kMesh, kTree };

struct SyntheticSpec {
  std::uint64_t seed = 1;
  int buses = 3;
  int snapshots = 2;
  /// Exponent steering wind north and load south; 0 removes the skew.
  double skew = 1.5;
  Topology topology = Topology::kMesh;
  int max_extendable = 4;

  void validate() const {
    if (buses < 1) throw std::invalid_argument("synthetic spec needs at least one bus");
    if (snapshots < 1) throw std::invalid_argument("synthetic spec needs at least one snapshot");
    if (skew < 0.0) throw std::invalid_argument("skew must be non-negative");
    if (max_extendable < 0) throw std::invalid_argument("max_extendable must be non-negative");
  }
};

/// Frozen parameter ranges of the synthetic generator. Costs are annuities.
namespace synthetic {
inline constexpr double kMapScaleKm = 400.0;
inline constexpr double kMinLineKm = 40.0;
inline constexpr double kPeakLoadMw[2] = {300.0, 600.0};
inline constexpr double kLoadProfile[2] = {0.6, 1.0};  // share of peak per snapshot
inline constexpr double kCircuitShareOfPeak[2] = {0.05, 0.15};
inline constexpr double kSusceptancePerCircuitKm = 2000.0;  // b̃ = γ̃·k/length
inline constexpr double kLineCostPerMwKm[2] = {25.0, 45.0};
inline constexpr double kLinkCostPerMwKm[2] = {70.0, 100.0};
inline constexpr double kWindCapital[2] = {95000.0, 115000.0};
inline constexpr double kWindMarginal[2] = {0.01, 0.5};
inline constexpr double kSolarCapital[2] = {45000.0, 60000.0};
inline constexpr double kSolarMarginal[2] = {0.005, 0.05};
inline constexpr double kOcgtCapital[2] = {45000.0, 50000.0};
inline constexpr double kOcgtMarginal[2] = {60.0, 80.0};
inline constexpr double kCcgtCapital[2] = {80000.0, 95000.0};
inline constexpr double kCcgtMarginal[2] = {40.0, 50.0};
inline constexpr double kWindWeather[2] = {0.15, 1.0};
inline constexpr double kSolarWeather[2] = {0.0, 0.8};
}  // namespace synthetic

namespace detail {

/// Uniform draws from mt19937_64 bits, identical on every platform
/// (std::uniform_real_distribution is implementation-defined).
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double range(const double (&r)[2]) { return r[0] + (r[1] - r[0]) * unit(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(unit() * static_cast<double>(n)); }

 private:
  std::mt19937_64 rng_;
};

/// Rounds to `decimals` places so the value prints without float noise.
inline double round_to(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(v * scale) / scale;
}

}  // namespace detail

/// Deterministic network for `spec`: wind sites in the north (high y), load
/// concentrated in the south, gas everywhere.
inline Network generate_synthetic_network(const SyntheticSpec& spec) {
  namespace S = synthetic;
  spec.validate();
  detail::Draw draw(spec.seed);
  const int n = spec.buses, nt = spec.snapshots;

  Network net;
  net.name = "synthetic-s" + std::to_string(spec.seed) + "-n" + std::to_string(n) + "-t" + std::to_string(nt);
  for (int t = 0; t < nt; ++t) net.snapshots.push_back({t, kHoursPerYear / nt});

  std::vector<double> x(n), y(n);
  for (int i = 0; i < n; ++i) {
    x[i] = draw.unit();
    y[i] = draw.unit();
  }
  const double peak = detail::round_to(draw.range(S::kPeakLoadMw), 0);
  std::vector<double> profile(nt), wind_weather(nt), solar_weather(nt);
  for (int t = 0; t < nt; ++t) {
    profile[t] = draw.range(S::kLoadProfile);
    wind_weather[t] = draw.range(S::kWindWeather);
    solar_weather[t] = draw.range(S::kSolarWeather);
  }

  // Loads: weight grows towards the south.
  std::vector<double> weight(n);
  double weight_sum = 0.0;
  for (int i = 0; i < n; ++i) weight_sum += weight[i] = 0.2 + std::pow(1.0 - y[i], spec.skew);
  for (int i = 0; i < n; ++i) {
    Bus b{"n" + std::to_string(i + 1), {}};
    for (int t = 0; t < nt; ++t) b.load.push_back(detail::round_to(peak * profile[t] * weight[i] / weight_sum, 2));
    net.buses.push_back(std::move(b));
  }

  // Generators.
  for (int i = 0; i < n; ++i) {
    const std::string& bus = net.buses[i].id;
    const double north = std::pow(y[i], spec.skew);
    Generator wind;
    wind.id = "wind-" + bus;
    wind.bus = bus;
    wind.tech = Technology::kWindOnshore;
    wind.capital_cost = detail::round_to(draw.range(S::kWindCapital), 0);
    wind.marginal_cost = detail::round_to(draw.range(S::kWindMarginal), 2);
    wind.capacity_max = detail::round_to(peak * (0.3 + 4.0 * north), 0);
    wind.renewable = true;
    for (int t = 0; t < nt; ++t)
      wind.availability.push_back(
          detail::round_to(std::clamp(wind_weather[t] * (0.35 + 0.65 * north) + 0.05 * draw.unit(), 0.0, 1.0), 4));
    net.generators.push_back(std::move(wind));

    Generator solar;
    solar.id = "solar-" + bus;
    solar.bus = bus;
    solar.tech = Technology::kSolar;
    solar.capital_cost = detail::round_to(draw.range(S::kSolarCapital), 0);
    solar.marginal_cost = detail::round_to(draw.range(S::kSolarMarginal), 3);
    solar.capacity_max = detail::round_to(peak * 0.3, 0);
    solar.renewable = true;
    for (int t = 0; t < nt; ++t)
      solar.availability.push_back(detail::round_to(solar_weather[t] * (0.85 + 0.15 * draw.unit()), 4));
    net.generators.push_back(std::move(solar));

    Generator ocgt;
    ocgt.id = "ocgt-" + bus;
    ocgt.bus = bus;
    ocgt.tech = Technology::kOcgt;
    ocgt.capital_cost = detail::round_to(draw.range(S::kOcgtCapital), 0);
    ocgt.marginal_cost = detail::round_to(draw.range(S::kOcgtMarginal), 2);
    ocgt.availability.assign(nt, 1.0);
    net.generators.push_back(std::move(ocgt));

    if (i % 2 == 1) {
      Generator ccgt;
      ccgt.id = "ccgt-" + bus;
      ccgt.bus = bus;
      ccgt.tech = Technology::kCcgt;
      ccgt.capital_cost = detail::round_to(draw.range(S::kCcgtCapital), 0);
      ccgt.marginal_cost = detail::round_to(draw.range(S::kCcgtMarginal), 2);
      ccgt.availability.assign(nt, 1.0);
      net.generators.push_back(std::move(ccgt));
    }
  }

  // AC lines: nearest-earlier-bus spanning tree, then the shortest extra
  // edges for a mesh (n/2 of them).
  auto dist = [&](int a, int b) { return std::hypot(x[a] - x[b], y[a] - y[b]); };
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i < n; ++i) {
    int best = 0;
    for (int j = 1; j < i; ++j)
      if (dist(i, j) < dist(i, best)) best = j;
    edges.emplace_back(best, i);
  }
  if (spec.topology == Topology::kMesh) {
    std::vector<std::pair<int, int>> extra;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (std::find(edges.begin(), edges.end(), std::pair{a, b}) == edges.end() &&
            std::find(edges.begin(), edges.end(), std::pair{b, a}) == edges.end())
          extra.emplace_back(a, b);
    std::stable_sort(extra.begin(), extra.end(),
                     [&](const auto& p, const auto& q) { return dist(p.first, p.second) < dist(q.first, q.second); });
    extra.resize(std::min<std::size_t>(extra.size(), n / 2));
    edges.insert(edges.end(), extra.begin(), extra.end());
  }
  std::vector<int> order(edges.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
  for (std::size_t k = order.size(); k > 1; --k) std::swap(order[k - 1], order[draw.index(k)]);
  std::vector<bool> extendable(edges.size(), false);
  for (std::size_t k = 0; k < order.size() && static_cast<int>(k) < spec.max_extendable; ++k)
    extendable[order[k]] = true;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto [a, b] = edges[k];
    AcLine line;
    line.id = "l" + std::to_string(a + 1) + "-" + std::to_string(b + 1);
    line.from = net.buses[a].id;
    line.to = net.buses[b].id;
    line.length = detail::round_to(std::max(S::kMinLineKm, dist(a, b) * S::kMapScaleKm), 1);
    line.init_circuits = draw.unit() < 0.5 ? 1 : 2;
    line.init_capacity = detail::round_to(line.init_circuits * peak * draw.range(S::kCircuitShareOfPeak), 0);
    line.init_susceptance = line.init_circuits * S::kSusceptancePerCircuitKm / line.length;
    line.capital_cost = detail::round_to(line.length * draw.range(S::kLineCostPerMwKm), 2);
    line.extendable = extendable[k];
    net.lines.push_back(std::move(line));
  }

  // One HVDC link north to south on larger meshed networks. Trees stay
  // trees: a link would close a loop.
  if (n >= 4 && spec.topology == Topology::kMesh) {
    const int north = static_cast<int>(std::max_element(y.begin(), y.end()) - y.begin());
    const int south = static_cast<int>(std::min_element(y.begin(), y.end()) - y.begin());
    HvdcLink link;
    link.id = "dc-" + net.buses[north].id + "-" + net.buses[south].id;
    link.from = net.buses[north].id;
    link.to = net.buses[south].id;
    const double km = std::max(S::kMinLineKm, dist(north, south) * S::kMapScaleKm);
    link.capital_cost = detail::round_to(km * draw.range(S::kLinkCostPerMwKm), 2);
    net.links.push_back(std::move(link));
  }

  // Renewable potential covers the default share with 25% headroom.
  double renewable_energy = 0.0;
  for (const Generator& g : net.generators)
    if (g.renewable)
      for (int t = 0; t < nt; ++t) renewable_energy += g.capacity_max * g.availability[t] * net.snapshots[t].weight;
  const double needed = 1.25 * ScenarioConfig{}.renewable_share * net.total_energy_demand();
  if (renewable_energy < needed && renewable_energy > 0.0)
    for (Generator& g : net.generators)
      if (g.renewable) g.capacity_max = std::ceil(g.capacity_max * needed / renewable_energy);

  validate(net);

  // Raise renewable potential until dispatch without expansion is feasible
  // under the default scenario, so every instance has a feasible point.
  const std::vector<double> no_expansion(net.lines.size(), 0.0);
  for (int attempt = 0;; ++attempt) {
    const FixedSolve s = solve_fixed_investment(net, ScenarioConfig{}, no_expansion);
    if (s.solution) break;
    if (attempt == 40)
      throw std::runtime_error(net.name + ": no feasible dispatch without expansion (" + s.lp.message + ")");
    for (Generator& g : net.generators)
      if (g.renewable) g.capacity_max = std::ceil(g.capacity_max * 1.2);
  }
  return net;
}

/// Member k of the seeded evaluation suite: 3-6 buses, 2-8 snapshots,
/// meshed, at most 4 extendable lines.
inline SyntheticSpec suite_spec(int k) {
  SyntheticSpec s;
  s.seed = 1000 + static_cast<std::uint64_t>(k);
  s.buses = 3 + k % 4;
  s.snapshots = 2 + (k * 3) % 7;
  return s;
}

/// Random tree networks (every line extendable up to the cap).
inline SyntheticSpec tree_spec(int k) {
  SyntheticSpec s;
  s.seed = 5000 + static_cast<std::uint64_t>(k);
  s.buses = 2 + k % 5;
  s.snapshots = 2 + k % 4;
  s.topology = Topology::kTree;
  return s;
}

// ---------------------------------------------------------------------------
// Enumeration oracle

struct BruteForceResult {
  std::optional<ExpansionSolution> solution;
  long combinations = 0;
  long solved = 0;
  long skipped_by_cap = 0;
  long feasible = 0;
  /// One row per combination: Γ of the extendable lines and objective (NaN
  /// when infeasible or skipped).
  std::vector<std::pair<std::vector<int>, double>> trace;
};

inline long candidate_combinations(const Network& net) {
  long total = 1;
  for (const AcLine& l : net.lines) {
    if (!l.extendable) continue;
    total *= static_cast<long>(l.candidates.size());
    if (total > (1L << 40)) return total;
  }
  return total;
}

/// Exact MINLP optimum by enumerating all candidate combinations, each solved
/// as a fixed-line LP with matching susceptances.
inline BruteForceResult brute_force_optimum(const Network& net, const ScenarioConfig& cfg, long cap = 4096,
                                            const lp::SolverOptions& opts = {}) {
  BruteForceResult out;
  out.combinations = candidate_combinations(net);
  if (out.combinations > cap)
    throw std::length_error(std::to_string(out.combinations) + " candidate combinations exceed the cap of " +
                            std::to_string(cap));
  const std::vector<int> ext = net.extendable_lines();
  std::vector<std::size_t> pick(ext.size(), 0);
  std::vector<double> gamma(net.lines.size(), 0.0);
  while (true) {
    std::vector<int> combo;
    for (std::size_t k = 0; k < ext.size(); ++k) {
      const int c = net.lines[ext[k]].candidates[pick[k]];
      gamma[ext[k]] = c;
      combo.push_back(c);
    }
    double objective = std::numeric_limits<double>::quiet_NaN();
    if (expansion_volume_ratio(net, gamma) > cfg.volume_cap + 1e-12) {
      ++out.skipped_by_cap;
    } else {
      FixedSolve s = solve_fixed_investment(net, cfg, gamma, opts);
      ++out.solved;
      if (s.solution) {
        ++out.feasible;
        objective = s.solution->objective;
        if (!out.solution || objective < out.solution->objective) out.solution = std::move(s.solution);
      }
    }
    out.trace.emplace_back(std::move(combo), objective);
    std::size_t k = 0;
    while (k < ext.size() && ++pick[k] == net.lines[ext[k]].candidates.size()) pick[k++] = 0;
    if (k == ext.size()) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Solution documents

inline std::string serialize(const ExpansionSolution& s, const Network& net) {
  using ordered_json = nlohmann::ordered_json;
  ordered_json doc;
  doc["format"] = "tepkit-solution-1";
  doc["network"] = net.name;
  doc["status"] = s.status;
  doc["objective"] = s.objective;
  auto& gens = doc["generators"] = ordered_json::array();
  for (std::size_t g = 0; g < net.generators.size(); ++g)
    gens.push_back({{"id", net.generators[g].id}, {"capacity", s.gen_capacity[g]}, {"dispatch", s.dispatch[g]}});
  auto& lines = doc["lines"] = ordered_json::array();
  for (std::size_t l = 0; l < net.lines.size(); ++l)
    lines.push_back({{"id", net.lines[l].id},
                     {"gamma", s.line_gamma[l]},
                     {"capacity", s.line_capacity[l]},
                     {"susceptance", s.line_susceptance[l]},
                     {"flow", s.line_flow[l]}});
  auto& links = doc["links"] = ordered_json::array();
  for (std::size_t k = 0; k < net.links.size(); ++k)
    links.push_back({{"id", net.links[k].id}, {"capacity", s.link_capacity[k]}, {"flow", s.link_flow[k]}});
  auto& buses = doc["buses"] = ordered_json::array();
  for (std::size_t i = 0; i < net.buses.size(); ++i) buses.push_back({{"id", net.buses[i].id}, {"angle", s.angle[i]}});
  return doc.dump(1) + "\n";
}

/// Parses a solution document, matching entries to `net` by id.
inline ExpansionSolution load_solution(std::string_view document, const Network& net) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw NetworkError("solution", "schema", e.what());
  }
  auto section = [&](const char* key, std::size_t expected, auto&& ids, auto&& fill) {
    if (!doc.contains(key) || !doc[key].is_array()) throw NetworkError("solution", "schema", std::string("missing ") + key);
    if (doc[key].size() != expected) throw NetworkError("solution", "schema", std::string(key) + " count mismatch");
    for (const auto& entry : doc[key]) {
      const std::string id = entry.at("id").get<std::string>();
      const auto it = std::find(ids.begin(), ids.end(), id);
      if (it == ids.end()) throw NetworkError(id, "schema", "id not in network");
      fill(static_cast<std::size_t>(it - ids.begin()), entry);
    }
  };
  auto ids_of = [](const auto& items) {
    std::vector<std::string> ids;
    for (const auto& item : items) ids.push_back(item.id);
    return ids;
  };
  ExpansionSolution s;
  try {
    s.status = doc.at("status").get<std::string>();
    s.objective = doc.at("objective").get<double>();
    const std::size_t ng = net.generators.size(), nl = net.lines.size(), nk = net.links.size(), nb = net.buses.size();
    s.gen_capacity.resize(ng);
    s.dispatch.resize(ng);
    section("generators", ng, ids_of(net.generators), [&](std::size_t g, const nlohmann::json& e) {
      s.gen_capacity[g] = e.at("capacity").get<double>();
      s.dispatch[g] = e.at("dispatch").get<std::vector<double>>();
    });
    s.line_gamma.resize(nl);
    s.line_capacity.resize(nl);
    s.line_susceptance.resize(nl);
    s.line_flow.resize(nl);
    section("lines", nl, ids_of(net.lines), [&](std::size_t l, const nlohmann::json& e) {
      s.line_gamma[l] = e.at("gamma").get<double>();
      s.line_capacity[l] = e.at("capacity").get<double>();
      s.line_susceptance[l] = e.at("susceptance").get<double>();
      s.line_flow[l] = e.at("flow").get<std::vector<double>>();
    });
    s.link_capacity.resize(nk);
    s.link_flow.resize(nk);
    section("links", nk, ids_of(net.links), [&](std::size_t k, const nlohmann::json& e) {
      s.link_capacity[k] = e.at("capacity").get<double>();
      s.link_flow[k] = e.at("flow").get<std::vector<double>>();
    });
    s.angle.resize(nb);
    section("buses", nb, ids_of(net.buses),
            [&](std::size_t i, const nlohmann::json& e) { s.angle[i] = e.at("angle").get<std::vector<double>>(); });
  } catch (const nlohmann::json::exception& e) {
    throw NetworkError("solution", "schema", e.what());
  }
  return s;
}

// ---------------------------------------------------------------------------
// Experiments

struct ExperimentManifest {
  std::optional<std::string> network_path;
  std::optional<SyntheticSpec> synthetic;
  std::vector<std::string> methods;
  ScenarioConfig config;
  std::string output_dir = "out";
  bool parallel = false;

  void validate() const {
    if (methods.empty()) throw std::invalid_argument("manifest lists no methods");
    if (network_path.has_value() == synthetic.has_value())
      throw std::invalid_argument("manifest needs exactly one of 'network' or 'synthetic'");
    if (synthetic) synthetic->validate();
    for (const std::string& m : methods)
      if (m != "bigm" && m != "brute-force") HeuristicVariant::parse(m);
    config.validate();
  }
};

/// Parses a manifest; relative paths resolve against `base_dir`.
inline ExperimentManifest load_manifest(std::string_view document, const std::filesystem::path& base_dir = {}) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("manifest: ") + e.what());
  }
  ExperimentManifest m;
  try {
    auto resolve = [&](const std::string& p) {
      const std::filesystem::path path(p);
      return (path.is_absolute() ? path : base_dir / path).lexically_normal().string();
    };
    if (doc.contains("network")) m.network_path = resolve(doc["network"].get<std::string>());
    if (doc.contains("synthetic")) {
      const auto& s = doc["synthetic"];
      SyntheticSpec spec;
      spec.seed = s.value("seed", spec.seed);
      spec.buses = s.value("buses", spec.buses);
      spec.snapshots = s.value("snapshots", spec.snapshots);
      spec.skew = s.value("skew", spec.skew);
      spec.max_extendable = s.value("max_extendable", spec.max_extendable);
      const std::string topo = s.value("topology", std::string("mesh"));
      if (topo != "mesh" && topo != "tree") throw std::invalid_argument("topology must be mesh or tree");
      spec.topology = topo == "tree" ? Topology::kTree : Topology::kMesh;
      m.synthetic = spec;
    }
    m.methods = doc.at("methods").get<std::vector<std::string>>();
    if (doc.contains("config")) m.config = load_config(doc["config"].dump());
    m.output_dir = resolve(doc.value("output", std::string("out")));
    m.parallel = doc.value("parallel", false);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("manifest: ") + e.what());
  }
  m.validate();
  return m;
}

struct MethodRecord {
  std::string method;
  bool completed = false;
  std::string error;
  std::string status;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> lower_bound;
  double deviation = std::numeric_limits<double>::quiet_NaN();
  double wall_time = 0.0;
  long iterations = 0;  // SLP iterations, B&B nodes, or LP solves
  bool converged = false;
  double volume_ratio = std::numeric_limits<double>::quiet_NaN();
  bool minlp_feasible = false;
  std::vector<std::string> violations;
  std::optional<double> threshold;
  std::vector<std::pair<double, std::optional<double>>> threshold_objectives;
  std::optional<ExpansionSolution> solution;
  std::string trace_csv;
};

struct ExperimentReport {
  std::string network;
  std::vector<MethodRecord> methods;
  std::optional<double> relaxation_bound;
  std::string reference_label;
  double reference_bound = std::numeric_limits<double>::quiet_NaN();

  [[nodiscard]] const MethodRecord* find(std::string_view method) const {
    for (const MethodRecord& r : methods)
      if (r.method == method) return &r;
    return nullptr;
  }
};

struct RunOptions {
  bool parallel = false;
  /// Overrides the configured MIP gap for the big-M method when set.
  std::optional<double> bigm_gap;
  long brute_force_cap = 4096;
  lp::SolverOptions lp;
};

namespace detail {

inline std::string trace_brute_force(const BruteForceResult& r, const Network& net) {
  std::ostringstream out;
  out << "combination";
  for (int l : net.extendable_lines()) out << "," << net.lines[l].id;
  out << ",objective\n";
  char buf[64];
  for (std::size_t k = 0; k < r.trace.size(); ++k) {
    out << k;
    for (int c : r.trace[k].first) out << "," << c;
    if (std::isnan(r.trace[k].second)) {
      out << ",\n";
    } else {
      std::snprintf(buf, sizeof buf, ",%.10g\n", r.trace[k].second);
      out << buf;
    }
  }
  return out.str();
}

inline void finish_record(MethodRecord& rec, const Network& net, const ScenarioConfig& cfg) {
  if (!rec.solution) return;
  rec.objective = rec.solution->objective;
  std::vector<double> gamma = rec.solution->line_gamma;
  for (double& g : gamma) g = std::max(0.0, g);
  rec.volume_ratio = expansion_volume_ratio(net, gamma);
  FeasibilityReport verdict = verify_minlp_feasibility(net, cfg, *rec.solution, 1e-6);
  rec.minlp_feasible = verdict.feasible;
  rec.violations = std::move(verdict.violations);
}

inline MethodRecord run_method(const Network& net, const ScenarioConfig& cfg, const std::string& method,
                               const RunOptions& options) {
  MethodRecord rec;
  rec.method = method;
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  try {
    if (method == "brute-force") {
      BruteForceResult r = brute_force_optimum(net, cfg, options.brute_force_cap, options.lp);
      rec.wall_time = elapsed();
      rec.iterations = r.solved;
      rec.trace_csv = trace_brute_force(r, net);
      if (!r.solution) throw std::runtime_error("all candidate combinations infeasible");
      rec.solution = std::move(r.solution);
      rec.lower_bound = rec.solution->objective;
      rec.status = "optimal";
    } else if (method == "bigm") {
      const MilpFormulation f = build_bigm_milp(net, cfg, compute_big_m(net, cfg));
      milp::MilpOptions mo;
      mo.mip_gap = options.bigm_gap.value_or(cfg.mip_gap);
      mo.walltime = cfg.milp_walltime;
      mo.lp = options.lp;
      const milp::MilpSolution s = milp::solve_milp(f.problem, mo);
      rec.iterations = s.nodes_explored;
      rec.trace_csv = milp::gap_log_csv(s);
      rec.status = std::string(milp::to_string(s.status));
      if (std::isfinite(s.lower_bound)) rec.lower_bound = s.lower_bound;
      if (!s.has_incumbent()) {
        rec.wall_time = elapsed();
        throw std::runtime_error("big-M MILP " + rec.status);
      }
      rec.solution = extract_solution(net, cfg, f.map, *s.incumbent, s.upper_bound, rec.status);
      rec.wall_time = elapsed();
    } else {
      HeuristicOptions ho;
      ho.lp = options.lp;
      HeuristicRun run = run_slp(net, cfg, HeuristicVariant::parse(method), ho);
      rec.wall_time = elapsed();
      rec.iterations = static_cast<long>(run.iterations.size());
      rec.converged = run.converged;
      rec.trace_csv = iteration_trace_csv(run);
      rec.threshold = run.chosen_threshold;
      rec.threshold_objectives = std::move(run.threshold_objectives);
      rec.status = run.converged ? "converged" : "iteration-limit";
      rec.solution = std::move(run.final_solution);
    }
    finish_record(rec, net, cfg);
    rec.completed = true;
  } catch (const std::exception& e) {
    if (rec.wall_time == 0.0) rec.wall_time = elapsed();
    rec.completed = false;
    rec.error = e.what();
    if (rec.status.empty()) rec.status = "failed";
  }
  return rec;
}

}  // namespace detail

/// LP relaxation of the big-M MILP; a valid lower bound on the MINLP.
inline std::optional<double> relaxation_bound(const Network& net, const ScenarioConfig& cfg,
                                              const lp::SolverOptions& opts = {}) {
  const MilpFormulation f = build_bigm_milp(net, cfg, compute_big_m(net, cfg));
  const lp::LpSolution s = lp::solve_lp(f.problem.lp, opts);
  if (!s.optimal()) return std::nullopt;
  return s.objective;
}

/// Runs every method on `net`. Failures are recorded, never rethrown.
/// Deviations are measured against one reference bound: the brute-force
/// optimum, else the MILP lower bound, else the LP relaxation.
inline ExperimentReport run_experiment(const Network& net, const ScenarioConfig& cfg,
                                       const std::vector<std::string>& methods, const RunOptions& options = {}) {
  ExperimentReport report;
  report.network = net.name;
  if (options.parallel) {
    std::vector<std::future<MethodRecord>> jobs;
    for (const std::string& m : methods)
      jobs.push_back(std::async(std::launch::async, [&, m] { return detail::run_method(net, cfg, m, options); }));
    for (auto& j : jobs) report.methods.push_back(j.get());
  } else {
    for (const std::string& m : methods) report.methods.push_back(detail::run_method(net, cfg, m, options));
  }
  try {
    report.relaxation_bound = relaxation_bound(net, cfg, options.lp);
  } catch (const std::exception&) {
    report.relaxation_bound.reset();
  }

  const MethodRecord* brute = report.find("brute-force");
  const MethodRecord* bigm = report.find("bigm");
  if (brute && brute->completed) {
    report.reference_label = "brute-force optimum";
    report.reference_bound = brute->objective;
  } else if (bigm && bigm->lower_bound) {
    report.reference_label = "MILP lower bound";
    report.reference_bound = *bigm->lower_bound;
  } else if (report.relaxation_bound) {
    report.reference_label = "continuous relaxation (not a feasible-solution bound gap)";
    report.reference_bound = *report.relaxation_bound;
  } else {
    report.reference_label = "none";
  }
  for (MethodRecord& r : report.methods)
    if (r.completed && std::isfinite(report.reference_bound))
      r.deviation = (r.objective - report.reference_bound) / std::max(std::abs(report.reference_bound), 1e-10);
  return report;
}

inline Network load_manifest_network(const ExperimentManifest& m) {
  if (m.synthetic) return generate_synthetic_network(*m.synthetic);
  return load_network_file(*m.network_path);
}

inline ExperimentReport run_experiment(const ExperimentManifest& manifest) {
  manifest.validate();
  const Network net = load_manifest_network(manifest);
  RunOptions options;
  options.parallel = manifest.parallel;
  return run_experiment(net, manifest.config, manifest.methods, options);
}

// ---------------------------------------------------------------------------
// Report files

namespace detail {
inline std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}
}  // namespace detail

/// method,objective,lower_bound,deviation,wall_time_s,iterations,volume_ratio,feasible
inline std::string report_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "method,objective,lower_bound,deviation,wall_time_s,iterations,volume_ratio,feasible\n";
  for (const MethodRecord& r : report.methods) {
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.6f", r.wall_time);
    out << r.method << ',' << detail::fmt(r.objective) << ','
        << (r.lower_bound ? detail::fmt(*r.lower_bound) : "") << ',' << detail::fmt(r.deviation) << ',' << wall
        << ',' << r.iterations << ',' << detail::fmt(r.volume_ratio) << ','
        << (r.completed && r.minlp_feasible ? "true" : "false") << '\n';
  }
  return out.str();
}

inline std::string summary_json(const ExperimentReport& report) {
  using ordered_json = nlohmann::ordered_json;
  auto num = [](double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); };
  ordered_json doc;
  doc["network"] = report.network;
  doc["reference"] = {{"label", report.reference_label}, {"bound", num(report.reference_bound)}};
  doc["relaxation_bound"] = report.relaxation_bound ? ordered_json(*report.relaxation_bound) : ordered_json(nullptr);
  auto& methods = doc["methods"] = ordered_json::array();
  for (const MethodRecord& r : report.methods) {
    ordered_json m{{"method", r.method},
                   {"completed", r.completed},
                   {"status", r.status},
                   {"objective", num(r.objective)},
                   {"lower_bound", r.lower_bound ? num(*r.lower_bound) : ordered_json(nullptr)},
                   {"deviation", num(r.deviation)},
                   {"wall_time_s", r.wall_time},
                   {"iterations", r.iterations},
                   {"converged", r.converged},
                   {"volume_ratio", num(r.volume_ratio)},
                   {"minlp_feasible", r.minlp_feasible},
                   {"violations", r.violations}};
    if (r.threshold) m["threshold"] = *r.threshold;
    if (!r.threshold_objectives.empty()) {
      auto& per = m["threshold_objectives"] = ordered_json::array();
      for (const auto& [z, obj] : r.threshold_objectives)
        per.push_back({{"z", z}, {"objective", obj ? ordered_json(*obj) : ordered_json(nullptr)}});
    }
    if (r.solution) m["gamma"] = r.solution->line_gamma;
    if (!r.completed) m["error"] = r.error;
    methods.push_back(std::move(m));
  }
  return doc.dump(1) + "\n";
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

/// Writes report.csv, summary.json, solutions/<method>.json, trace/<method>.csv.
inline void write_report(const ExperimentReport& report, const Network& net, const std::filesystem::path& dir) {
  write_text(dir / "report.csv", report_csv(report));
  write_text(dir / "summary.json", summary_json(report));
  for (const MethodRecord& r : report.methods) {
    if (r.solution) write_text(dir / "solutions" / (r.method + ".json"), serialize(*r.solution, net));
    if (!r.trace_csv.empty()) write_text(dir / "trace" / (r.method + ".csv"), r.trace_csv);
  }
}

}  // namespace tepkit

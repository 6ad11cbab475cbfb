#pragma once

// Power system domain types, the tepkit-net-1 JSON document format, and the
// circuit/capacity/susceptance algebra shared by every formulation.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

namespace tepkit {

inline constexpr std::string_view kNetworkFormat = "tepkit-net-1";
inline constexpr double kHoursPerYear = 8760.0;
inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// Raised for schema and semantic violations; carries the offending entity
/// and the name of the rule it broke (e.g. "weight-sum", "dangling-bus").
class NetworkError : public std::runtime_error {
 public:
  NetworkError(std::string entity, std::string rule, const std::string& detail)
      : std::runtime_error(rule + " [" + entity + "]: " + detail),
        entity_(std::move(entity)),
        rule_(std::move(rule)) {}

  [[nodiscard]] const std::string& entity() const { return entity_; }
  [[nodiscard]] const std::string& rule() const { return rule_; }

 private:
  std::string entity_;
  std::string rule_;
};

enum class Technology {
  kSolar,
  kWindOnshore,
  kWindOffshoreAc,
  kWindOffshoreDc,
  kOcgt,
  kCcgt,
  kRunOfRiver,
  kBiomass,
};

inline std::string_view to_string(Technology t) {
  switch (t) {
    case Technology::kSolar: return "solar";
    case Technology::kWindOnshore: return "wind-onshore";
    case Technology::kWindOffshoreAc: return "wind-offshore-ac";
    case Technology::kWindOffshoreDc: return "wind-offshore-dc";
    case Technology::kOcgt: return "ocgt";
    case Technology::kCcgt: return "ccgt";
    case Technology::kRunOfRiver: return "ror";
    case Technology::kBiomass: return "biomass";
  }
  return "unknown";
}

inline Technology technology_from_string(std::string_view s) {
  for (Technology t : {Technology::kSolar, Technology::kWindOnshore, Technology::kWindOffshoreAc,
                       Technology::kWindOffshoreDc, Technology::kOcgt, Technology::kCcgt,
                       Technology::kRunOfRiver, Technology::kBiomass}) {
    if (to_string(t) == s) return t;
  }
  throw NetworkError(std::string(s), "schema", "unknown technology");
}

struct Bus {
  std::string id;
  std::vector<double> load;  // MW per snapshot
};

struct Snapshot {
  int id = 0;
  double weight = 0.0;  // hours
};

struct Generator {
  std::string id;
  std::string bus;
  Technology tech = Technology::kOcgt;
  double capital_cost = 0.0;   // EUR/MW/a
  double marginal_cost = 0.0;  // EUR/MWh
  double capacity_max = kUnbounded;
  bool extendable = true;
  bool renewable = false;
  double capacity = 0.0;  // existing capacity, used when not extendable
  std::vector<double> availability;
};

struct AcLine {
  std::string id;
  std::string from;
  std::string to;
  double length = 0.0;  // km
  int init_circuits = 1;
  double init_capacity = 0.0;     // MW
  double init_susceptance = 0.0;  // MW per unit angle
  double capital_cost = 0.0;      // EUR/MW/a
  bool extendable = false;
  std::vector<int> candidates{0, 1, 2};

  [[nodiscard]] int max_candidate() const {
    return candidates.empty() ? 0 : *std::max_element(candidates.begin(), candidates.end());
  }
  [[nodiscard]] bool is_candidate(double gamma) const {
    return std::any_of(candidates.begin(), candidates.end(),
                       [&](int c) { return static_cast<double>(c) == gamma; });
  }
};

struct HvdcLink {
  std::string id;
  std::string from;
  std::string to;
  double capital_cost = 0.0;
  double capacity_max = 8000.0;
  bool stub = false;
  double capacity = 0.0;  // existing capacity (lower bound on H)

  [[nodiscard]] double upper_capacity() const { return stub ? kUnbounded : capacity_max; }
};

/// Immutable after load; resolved bus indices are filled by `reindex`.
struct Network {
  std::string name;
  std::vector<Bus> buses;
  std::vector<Snapshot> snapshots;
  std::vector<Generator> generators;
  std::vector<AcLine> lines;
  std::vector<HvdcLink> links;

  struct Endpoints {
    int from;
    int to;
  };
  std::vector<int> generator_bus;
  std::vector<Endpoints> line_ends;
  std::vector<Endpoints> link_ends;

  [[nodiscard]] int num_snapshots() const { return static_cast<int>(snapshots.size()); }
  [[nodiscard]] int num_buses() const { return static_cast<int>(buses.size()); }

  [[nodiscard]] int bus_index(std::string_view id) const {
    for (std::size_t i = 0; i < buses.size(); ++i)
      if (buses[i].id == id) return static_cast<int>(i);
    return -1;
  }

  [[nodiscard]] std::vector<int> extendable_lines() const {
    std::vector<int> out;
    for (std::size_t l = 0; l < lines.size(); ++l)
      if (lines[l].extendable) out.push_back(static_cast<int>(l));
    return out;
  }

  [[nodiscard]] double total_energy_demand() const {
    double e = 0.0;
    for (const Bus& b : buses)
      for (int t = 0; t < num_snapshots(); ++t) e += snapshots[t].weight * b.load[t];
    return e;
  }

  void reindex() {
    auto resolve = [&](const std::string& owner, const std::string& bus) {
      const int i = bus_index(bus);
      if (i < 0) throw NetworkError(owner, "dangling-bus", "unknown bus '" + bus + "'");
      return i;
    };
    generator_bus.clear();
    line_ends.clear();
    link_ends.clear();
    for (const Generator& g : generators) generator_bus.push_back(resolve(g.id, g.bus));
    for (const AcLine& l : lines) line_ends.push_back({resolve(l.id, l.from), resolve(l.id, l.to)});
    for (const HvdcLink& k : links) link_ends.push_back({resolve(k.id, k.from), resolve(k.id, k.to)});
  }
};

struct ScenarioConfig {
  double renewable_share = 0.70;
  double volume_cap = 0.25;
  double line_loading_factor = 0.70;
  std::vector<double> thresholds{0.1, 0.2, 0.3, 0.4, 0.5};
  double default_threshold = 0.3;
  int max_iterations = 10;
  double convergence_tol = 1000.0;  // EUR/a
  double mip_gap = 0.01;
  double milp_walltime = 3600.0;  // seconds
  unsigned long long seed = 1;
  /// Include capital cost of existing line/generator capacity in the objective.
  bool charge_existing = true;
  /// Angle-spread bound for big-M on bridge lines; <= 0 selects the sum of
  /// all line angle bounds in the component.
  double angle_spread_bound = 0.0;
  /// SLP move limit: bound on |Γ^(k+1) − Γ^(k)| per line in continuous
  /// iterations; 0 disables it.
  double move_limit = 0.0;

  void validate() const {
    auto fraction = [](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0)) throw NetworkError(name, "config-range", "must lie in [0,1]");
    };
    fraction(renewable_share, "renewable_share");
    fraction(volume_cap, "volume_cap");
    fraction(line_loading_factor, "line_loading_factor");
    fraction(mip_gap, "mip_gap");
    if (thresholds.empty()) throw NetworkError("thresholds", "config-range", "must be nonempty");
    for (double z : thresholds)
      if (!(z > 0.0 && z < 1.0)) throw NetworkError("thresholds", "config-range", "z in (0,1)");
    if (!(default_threshold > 0.0 && default_threshold < 1.0))
      throw NetworkError("default_threshold", "config-range", "z in (0,1)");
    if (!(convergence_tol > 0.0))
      throw NetworkError("convergence_tol", "config-range", "must be positive");
    if (max_iterations < 1) throw NetworkError("max_iterations", "config-range", "must be >= 1");
    if (!(milp_walltime >= 0.0)) throw NetworkError("milp_walltime", "config-range", ">= 0");
    if (!(move_limit >= 0.0)) throw NetworkError("move_limit", "config-range", ">= 0");
  }
};

// ---------------------------------------------------------------------------
// Circuit algebra

/// (1 + Γ/γ̃), the factor shared by capacity and susceptance.
inline double circuit_factor(const AcLine& line, double gamma) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("circuit addition must be non-negative");
  return 1.0 + gamma / line.init_circuits;
}

/// F(Γ) = (1 + Γ/γ̃)·F̃
inline double capacity_from_circuits(const AcLine& line, double gamma) {
  return circuit_factor(line, gamma) * line.init_capacity;
}

/// b(Γ) = (1 + Γ/γ̃)·b̃
inline double susceptance_from_circuits(const AcLine& line, double gamma) {
  return circuit_factor(line, gamma) * line.init_susceptance;
}

/// Added MWkm over original MWkm, across all AC lines. `gamma` holds one
/// entry per line (non-extendable lines contribute their entry, normally 0).
inline double expansion_volume_ratio(const Network& net, std::span<const double> gamma) {
  if (gamma.size() != net.lines.size())
    throw std::invalid_argument("expansion_volume_ratio: one Γ per line required");
  double added = 0.0, original = 0.0;
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    const AcLine& line = net.lines[l];
    added += (capacity_from_circuits(line, gamma[l]) - line.init_capacity) * line.length;
    original += line.init_capacity * line.length;
  }
  return original > 0.0 ? added / original : 0.0;
}

/// Component label per bus of the graph formed by AC lines only.
inline std::vector<int> ac_components(const Network& net) {
  std::vector<int> parent(net.buses.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : net.line_ends) {
    const int a = find(e.from), b = find(e.to);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<int> label(net.buses.size());
  for (std::size_t i = 0; i < parent.size(); ++i) label[i] = find(static_cast<int>(i));
  return label;
}

// ---------------------------------------------------------------------------
// Validation

inline void validate(Network& net) {
  const std::size_t nt = net.snapshots.size();
  if (nt == 0) throw NetworkError("snapshots", "snapshot-count", "at least one snapshot required");
  if (net.buses.empty()) throw NetworkError("buses", "bus-count", "at least one bus required");

  double weight_sum = 0.0;
  for (const Snapshot& s : net.snapshots) {
    if (!(s.weight > 0.0))
      throw NetworkError("snapshot " + std::to_string(s.id), "weight-positive", "weight must be > 0");
    weight_sum += s.weight;
  }
  if (std::abs(weight_sum - kHoursPerYear) > 1e-6 * kHoursPerYear)
    throw NetworkError("snapshots", "weight-sum",
                       "weights sum to " + std::to_string(weight_sum) + " h, expected 8760");

  std::unordered_set<std::string> ids;
  for (const Bus& b : net.buses) {
    if (!ids.insert(b.id).second) throw NetworkError(b.id, "duplicate-id", "bus id repeated");
    if (b.load.size() != nt) throw NetworkError(b.id, "load-length", "one load per snapshot");
    for (double v : b.load)
      if (!(v >= 0.0) || !std::isfinite(v)) throw NetworkError(b.id, "load-negative", "load < 0");
  }

  auto unique = [](auto& items, const char* kind) {
    std::unordered_set<std::string> seen;
    for (const auto& it : items)
      if (!seen.insert(it.id).second)
        throw NetworkError(it.id, "duplicate-id", std::string(kind) + " id repeated");
  };
  unique(net.generators, "generator");
  unique(net.lines, "line");
  unique(net.links, "link");

  net.reindex();

  for (const Generator& g : net.generators) {
    if (g.availability.size() != nt)
      throw NetworkError(g.id, "availability-length", "one availability per snapshot");
    for (double a : g.availability)
      if (!(a >= 0.0 && a <= 1.0)) throw NetworkError(g.id, "availability-range", "must be in [0,1]");
    if (g.capital_cost < 0.0 || g.marginal_cost < 0.0)
      throw NetworkError(g.id, "cost-negative", "costs must be non-negative");
    if (!(g.capacity_max >= 0.0)) throw NetworkError(g.id, "capacity-range", "capacity_max < 0");
    if (!g.extendable && !(g.capacity >= 0.0 && std::isfinite(g.capacity)))
      throw NetworkError(g.id, "fixed-capacity", "non-extendable generator needs a capacity");
  }

  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    const AcLine& line = net.lines[l];
    if (net.line_ends[l].from == net.line_ends[l].to)
      throw NetworkError(line.id, "self-loop", "line endpoints coincide");
    if (!(line.init_susceptance > 0.0))
      throw NetworkError(line.id, "susceptance-positive", "b̃ must be > 0");
    if (!(line.init_capacity > 0.0))
      throw NetworkError(line.id, "capacity-positive", "F̃ must be > 0");
    if (line.init_circuits < 1)
      throw NetworkError(line.id, "circuits-positive", "γ̃ must be >= 1");
    if (!(line.length >= 0.0)) throw NetworkError(line.id, "length-range", "length < 0");
    if (line.capital_cost < 0.0) throw NetworkError(line.id, "cost-negative", "cost < 0");
    if (line.extendable) {
      if (line.candidates.empty())
        throw NetworkError(line.id, "candidate-empty", "extendable line needs candidates");
      for (int c : line.candidates)
        if (c < 0) throw NetworkError(line.id, "candidate-negative", "candidates must be >= 0");
      if (!line.is_candidate(0.0))
        throw NetworkError(line.id, "candidate-zero", "0 must be a candidate");
      std::unordered_set<int> seen;
      for (int c : line.candidates)
        if (!seen.insert(c).second)
          throw NetworkError(line.id, "candidate-duplicate", "candidate repeated");
    }
  }

  for (std::size_t k = 0; k < net.links.size(); ++k) {
    const HvdcLink& link = net.links[k];
    if (net.link_ends[k].from == net.link_ends[k].to)
      throw NetworkError(link.id, "self-loop", "link endpoints coincide");
    if (link.capital_cost < 0.0) throw NetworkError(link.id, "cost-negative", "cost < 0");
    if (!(link.capacity >= 0.0)) throw NetworkError(link.id, "capacity-range", "capacity < 0");
    if (!link.stub && link.capacity > link.capacity_max)
      throw NetworkError(link.id, "link-cap", "existing capacity exceeds capacity_max");
  }
}

// ---------------------------------------------------------------------------
// JSON document

namespace detail {

using ordered_json = nlohmann::ordered_json;

template <typename T>
T field(const ordered_json& obj, const char* key, const std::string& entity) {
  if (!obj.is_object() || !obj.contains(key))
    throw NetworkError(entity, "schema", std::string("missing field '") + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw NetworkError(entity, "schema", std::string("field '") + key + "' has wrong type");
  }
}

inline double optional_capacity(const ordered_json& obj, const char* key, const std::string& entity,
                                double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (v.is_null()) return kUnbounded;
  if (!v.is_number()) throw NetworkError(entity, "schema", std::string("field '") + key + "' has wrong type");
  return v.get<double>();
}

inline const ordered_json& array_field(const ordered_json& doc, const char* key) {
  if (!doc.contains(key) || !doc.at(key).is_array())
    throw NetworkError(key, "schema", std::string("missing array '") + key + "'");
  return doc.at(key);
}

inline ordered_json capacity_json(double v) {
  return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

}  // namespace detail

/// Parses and validates a tepkit-net-1 document.
inline Network load_network(std::string_view document) {
  using detail::field;
  detail::ordered_json doc;
  try {
    doc = detail::ordered_json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw NetworkError("document", "schema", e.what());
  }
  if (!doc.is_object()) throw NetworkError("document", "schema", "top level must be an object");
  const auto format = field<std::string>(doc, "format", "document");
  if (format != kNetworkFormat)
    throw NetworkError("document", "format-version", "unsupported format '" + format + "'");

  Network net;
  net.name = doc.contains("name") ? field<std::string>(doc, "name", "document") : std::string{};
  for (const auto& b : detail::array_field(doc, "buses")) {
    const auto id = field<std::string>(b, "id", "bus");
    net.buses.push_back({id, field<std::vector<double>>(b, "load", id)});
  }
  for (const auto& s : detail::array_field(doc, "snapshots"))
    net.snapshots.push_back({field<int>(s, "id", "snapshot"), field<double>(s, "weight", "snapshot")});
  for (const auto& g : detail::array_field(doc, "generators")) {
    Generator gen;
    gen.id = field<std::string>(g, "id", "generator");
    gen.bus = field<std::string>(g, "bus", gen.id);
    gen.tech = technology_from_string(field<std::string>(g, "tech", gen.id));
    gen.capital_cost = field<double>(g, "capital_cost", gen.id);
    gen.marginal_cost = field<double>(g, "marginal_cost", gen.id);
    gen.capacity_max = detail::optional_capacity(g, "capacity_max", gen.id, kUnbounded);
    gen.extendable = field<bool>(g, "extendable", gen.id);
    gen.renewable = field<bool>(g, "renewable", gen.id);
    gen.capacity = g.contains("capacity") ? field<double>(g, "capacity", gen.id) : 0.0;
    gen.availability = field<std::vector<double>>(g, "availability", gen.id);
    net.generators.push_back(std::move(gen));
  }
  for (const auto& l : detail::array_field(doc, "lines")) {
    AcLine line;
    line.id = field<std::string>(l, "id", "line");
    line.from = field<std::string>(l, "from", line.id);
    line.to = field<std::string>(l, "to", line.id);
    line.length = field<double>(l, "length", line.id);
    line.init_circuits = field<int>(l, "init_circuits", line.id);
    line.init_capacity = field<double>(l, "init_capacity", line.id);
    line.init_susceptance = field<double>(l, "init_susceptance", line.id);
    line.capital_cost = field<double>(l, "capital_cost", line.id);
    line.extendable = field<bool>(l, "extendable", line.id);
    if (l.contains("candidates")) line.candidates = field<std::vector<int>>(l, "candidates", line.id);
    net.lines.push_back(std::move(line));
  }
  for (const auto& k : detail::array_field(doc, "links")) {
    HvdcLink link;
    link.id = field<std::string>(k, "id", "link");
    link.from = field<std::string>(k, "from", link.id);
    link.to = field<std::string>(k, "to", link.id);
    link.capital_cost = field<double>(k, "capital_cost", link.id);
    link.capacity_max = detail::optional_capacity(k, "capacity_max", link.id, 8000.0);
    link.stub = k.contains("stub") ? field<bool>(k, "stub", link.id) : false;
    link.capacity = k.contains("capacity") ? field<double>(k, "capacity", link.id) : 0.0;
    net.links.push_back(std::move(link));
  }
  validate(net);
  return net;
}

inline Network load_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NetworkError(path, "io", "cannot open network file");
  std::stringstream buf;
  buf << in.rdbuf();
  return load_network(buf.str());
}

/// Deterministic serialization; `load_network(serialize(n))` reproduces `n`.
inline std::string serialize(const Network& net) {
  detail::ordered_json doc;
  doc["format"] = kNetworkFormat;
  doc["name"] = net.name;
  auto& buses = doc["buses"] = detail::ordered_json::array();
  for (const Bus& b : net.buses) buses.push_back({{"id", b.id}, {"load", b.load}});
  auto& snaps = doc["snapshots"] = detail::ordered_json::array();
  for (const Snapshot& s : net.snapshots) snaps.push_back({{"id", s.id}, {"weight", s.weight}});
  auto& gens = doc["generators"] = detail::ordered_json::array();
  for (const Generator& g : net.generators) {
    gens.push_back({{"id", g.id},
                    {"bus", g.bus},
                    {"tech", to_string(g.tech)},
                    {"capital_cost", g.capital_cost},
                    {"marginal_cost", g.marginal_cost},
                    {"capacity_max", detail::capacity_json(g.capacity_max)},
                    {"extendable", g.extendable},
                    {"renewable", g.renewable},
                    {"capacity", g.capacity},
                    {"availability", g.availability}});
  }
  auto& lines = doc["lines"] = detail::ordered_json::array();
  for (const AcLine& l : net.lines) {
    lines.push_back({{"id", l.id},
                     {"from", l.from},
                     {"to", l.to},
                     {"length", l.length},
                     {"init_circuits", l.init_circuits},
                     {"init_capacity", l.init_capacity},
                     {"init_susceptance", l.init_susceptance},
                     {"capital_cost", l.capital_cost},
                     {"extendable", l.extendable},
                     {"candidates", l.candidates}});
  }
  auto& links = doc["links"] = detail::ordered_json::array();
  for (const HvdcLink& k : net.links) {
    links.push_back({{"id", k.id},
                     {"from", k.from},
                     {"to", k.to},
                     {"capital_cost", k.capital_cost},
                     {"capacity_max", detail::capacity_json(k.capacity_max)},
                     {"stub", k.stub},
                     {"capacity", k.capacity}});
  }
  return doc.dump(1) + "\n";
}

// ---------------------------------------------------------------------------
// Scenario configuration JSON (all keys optional; defaults apply)

inline ScenarioConfig load_config(std::string_view document, ScenarioConfig base = {}) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::parse_error& e) {
    throw NetworkError("config", "schema", e.what());
  }
  if (!doc.is_object()) throw NetworkError("config", "schema", "config must be an object");
  auto get = [&](const char* key, auto& dst) {
    if (!doc.contains(key)) return;
    try {
      dst = doc.at(key).get<std::decay_t<decltype(dst)>>();
    } catch (const nlohmann::json::exception&) {
      throw NetworkError(key, "schema", "wrong type");
    }
  };
  get("renewable_share", base.renewable_share);
  get("volume_cap", base.volume_cap);
  get("line_loading_factor", base.line_loading_factor);
  get("thresholds", base.thresholds);
  get("default_threshold", base.default_threshold);
  get("max_iterations", base.max_iterations);
  get("convergence_tol", base.convergence_tol);
  get("mip_gap", base.mip_gap);
  get("milp_walltime", base.milp_walltime);
  get("seed", base.seed);
  get("charge_existing", base.charge_existing);
  get("angle_spread_bound", base.angle_spread_bound);
  get("move_limit", base.move_limit);
  base.validate();
  return base;
}

inline std::string serialize(const ScenarioConfig& c) {
  detail::ordered_json doc{{"renewable_share", c.renewable_share},
                           {"volume_cap", c.volume_cap},
                           {"line_loading_factor", c.line_loading_factor},
                           {"thresholds", c.thresholds},
                           {"default_threshold", c.default_threshold},
                           {"max_iterations", c.max_iterations},
                           {"convergence_tol", c.convergence_tol},
                           {"mip_gap", c.mip_gap},
                           {"milp_walltime", c.milp_walltime},
                           {"seed", c.seed},
                           {"charge_existing", c.charge_existing},
                           {"angle_spread_bound", c.angle_spread_bound},
                           {"move_limit", c.move_limit}};
  return doc.dump(1) + "\n";
}

}  // namespace tepkit

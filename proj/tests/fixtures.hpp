#pragma once

#include <string>
#include <vector>

#include "tepkit/lopf.hpp"

namespace fixtures {

inline tepkit::Generator generator(std::string id, std::string bus, tepkit::Technology tech, double capital,
                                   double marginal, bool renewable, std::vector<double> availability,
                                   double capacity_max = tepkit::kUnbounded) {
  tepkit::Generator g;
  g.id = std::move(id);
  g.bus = std::move(bus);
  g.tech = tech;
  g.capital_cost = capital;
  g.marginal_cost = marginal;
  g.renewable = renewable;
  g.availability = std::move(availability);
  g.capacity_max = capacity_max;
  return g;
}

inline tepkit::AcLine line(std::string id, std::string from, std::string to, double length, int circuits,
                           double capacity, double susceptance, double capital, bool extendable) {
  tepkit::AcLine l;
  l.id = std::move(id);
  l.from = std::move(from);
  l.to = std::move(to);
  l.length = length;
  l.init_circuits = circuits;
  l.init_capacity = capacity;
  l.init_susceptance = susceptance;
  l.capital_cost = capital;
  l.extendable = extendable;
  return l;
}

inline std::vector<tepkit::Snapshot> snapshots(int count) {
  std::vector<tepkit::Snapshot> s;
  for (int t = 0; t < count; ++t) s.push_back({t, tepkit::kHoursPerYear / count});
  return s;
}

/// Three buses: cheap wind in the north, load and expensive gas in the south.
/// Line capacities are tight enough that expansion competes with gas.
inline tepkit::Network triangle(int snapshot_count = 2) {
  using tepkit::Technology;
  tepkit::Network net;
  net.name = "triangle";
  net.snapshots = snapshots(snapshot_count);
  std::vector<double> load2, load3, wind, sun;
  for (int t = 0; t < snapshot_count; ++t) {
    load2.push_back(t % 2 == 0 ? 120.0 : 80.0);
    load3.push_back(t % 2 == 0 ? 30.0 : 60.0);
    wind.push_back(t % 2 == 0 ? 0.9 : 0.35);
    sun.push_back(t % 2 == 0 ? 0.1 : 0.6);
  }
  net.buses = {{"n1", std::vector<double>(snapshot_count, 0.0)}, {"n2", load2}, {"n3", load3}};
  net.generators.push_back(generator("wind1", "n1", Technology::kWindOnshore, 9000, 0.5, true, wind, 600));
  net.generators.push_back(generator("solar3", "n3", Technology::kSolar, 30000, 0.1, true, sun, 200));
  net.generators.push_back(
      generator("gas2", "n2", Technology::kOcgt, 40000, 90, false, std::vector<double>(snapshot_count, 1.0)));
  net.lines.push_back(line("l12", "n1", "n2", 120, 2, 60, 30, 400, true));
  net.lines.push_back(line("l13", "n1", "n3", 90, 1, 40, 20, 400, true));
  net.lines.push_back(line("l23", "n2", "n3", 60, 1, 40, 20, 400, true));
  tepkit::validate(net);
  return net;
}

/// Minimum over all candidate combinations of the fixed-line LP.
inline double enumerate_optimum(const tepkit::Network& net, const tepkit::ScenarioConfig& cfg) {
  const auto ext = net.extendable_lines();
  std::vector<double> gamma(net.lines.size(), 0.0);
  double best = tepkit::lp::kInfinity;
  std::vector<std::size_t> pick(ext.size(), 0);
  while (true) {
    for (std::size_t k = 0; k < ext.size(); ++k) gamma[ext[k]] = net.lines[ext[k]].candidates[pick[k]];
    const auto b = tepkit::susceptances_for(net, gamma);
    const auto f = tepkit::build_continuous_lopf(net, cfg, b, tepkit::LineMode::kFixed, gamma);
    const auto s = tepkit::lp::solve_lp(f.lp);
    if (s.optimal()) best = std::min(best, s.objective);
    std::size_t k = 0;
    while (k < ext.size() && ++pick[k] == net.lines[ext[k]].candidates.size()) pick[k++] = 0;
    if (k == ext.size()) break;
  }
  return best;
}

}  // namespace fixtures

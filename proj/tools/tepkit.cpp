#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tepkit/tepkit.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

tepkit::ScenarioConfig config_from(const std::string& path) {
  return path.empty() ? tepkit::ScenarioConfig{} : tepkit::load_config(read_file(path));
}

int cmd_run(const std::string& manifest_path, const std::string& output_override) {
  const auto base = std::filesystem::path(manifest_path).parent_path();
  tepkit::ExperimentManifest manifest = tepkit::load_manifest(read_file(manifest_path), base);
  if (!output_override.empty()) manifest.output_dir = output_override;
  const tepkit::Network net = tepkit::load_manifest_network(manifest);
  tepkit::RunOptions options;
  options.parallel = manifest.parallel;
  const tepkit::ExperimentReport report = tepkit::run_experiment(net, manifest.config, manifest.methods, options);
  tepkit::write_report(report, net, manifest.output_dir);
  std::cout << tepkit::report_csv(report);
  std::cout << "reference: " << report.reference_label << "\n";
  bool all_completed = true;
  for (const auto& r : report.methods) {
    if (r.completed) continue;
    all_completed = false;
    std::cerr << r.method << " failed: " << r.error << "\n";
  }
  return all_completed ? 0 : 1;
}

int cmd_gen(const tepkit::SyntheticSpec& spec, const std::string& topology, const std::string& out) {
  tepkit::SyntheticSpec s = spec;
  if (topology != "mesh" && topology != "tree") throw std::invalid_argument("topology must be mesh or tree");
  s.topology = topology == "tree" ? tepkit::Topology::kTree : tepkit::Topology::kMesh;
  const std::string doc = tepkit::serialize(tepkit::generate_synthetic_network(s));
  if (out.empty() || out == "-") {
    std::cout << doc;
  } else {
    tepkit::write_text(out, doc);
  }
  return 0;
}

int cmd_oracle(const std::string& network_path, const std::string& config_path, long cap, const std::string& out) {
  const tepkit::Network net = tepkit::load_network_file(network_path);
  const tepkit::ScenarioConfig cfg = config_from(config_path);
  const tepkit::BruteForceResult r = tepkit::brute_force_optimum(net, cfg, cap);
  std::printf("combinations %ld, solved %ld, skipped by volume cap %ld, feasible %ld\n", r.combinations, r.solved,
              r.skipped_by_cap, r.feasible);
  if (!r.solution) {
    std::printf("no feasible combination\n");
    return 1;
  }
  std::printf("objective %.10g\n", r.solution->objective);
  for (std::size_t l = 0; l < net.lines.size(); ++l)
    std::printf("  %s gamma %g\n", net.lines[l].id.c_str(), r.solution->line_gamma[l]);
  if (!out.empty()) tepkit::write_text(out, tepkit::serialize(*r.solution, net));
  return 0;
}

int cmd_verify(const std::string& network_path, const std::string& solution_path, const std::string& config_path,
               double tol) {
  const tepkit::Network net = tepkit::load_network_file(network_path);
  const tepkit::ScenarioConfig cfg = config_from(config_path);
  const tepkit::ExpansionSolution sol = tepkit::load_solution(read_file(solution_path), net);
  const tepkit::FeasibilityReport report = tepkit::verify_minlp_feasibility(net, cfg, sol, tol);
  for (const std::string& v : report.violations) std::cout << v << "\n";
  std::cout << (report.feasible ? "feasible" : "infeasible") << "\n";
  return report.feasible ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transmission expansion planning toolkit"};
  app.require_subcommand(1);

  std::string manifest_path, output_override;
  auto* run = app.add_subcommand("run", "Run the methods listed in an experiment manifest");
  run->add_option("manifest,--manifest", manifest_path, "Manifest JSON")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--out,--output", output_override, "Output directory (overrides the manifest)");

  tepkit::SyntheticSpec spec;
  std::string topology = "mesh", gen_out;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic network");
  gen->add_option("--seed", spec.seed, "Random seed");
  gen->add_option("--buses", spec.buses, "Number of buses")->check(CLI::PositiveNumber);
  gen->add_option("--snapshots", spec.snapshots, "Number of snapshots")->check(CLI::PositiveNumber);
  gen->add_option("--skew", spec.skew, "North/south skew exponent");
  gen->add_option("--max-extendable", spec.max_extendable, "Extendable line limit");
  gen->add_option("--topology", topology, "mesh or tree");
  gen->add_option("-o,--out,--output", gen_out, "Output file (default stdout)");

  std::string network_path, config_path, solution_out;
  long cap = 4096;
  auto* oracle = app.add_subcommand("oracle", "Enumerate all candidate combinations");
  oracle->add_option("network,--network", network_path, "Network JSON")->required()->check(CLI::ExistingFile);
  oracle->add_option("-c,--config", config_path, "Scenario config JSON")->check(CLI::ExistingFile);
  oracle->add_option("--cap", cap, "Maximum number of combinations");
  oracle->add_option("-o,--out,--output", solution_out, "Write the optimal solution JSON");

  std::string solution_path;
  double tol = 1e-6;
  auto* verify = app.add_subcommand("verify", "Check a solution against the mixed-integer model");
  verify->add_option("network,--network", network_path, "Network JSON")->required()->check(CLI::ExistingFile);
  verify->add_option("solution,--solution", solution_path, "Solution JSON")->required()->check(CLI::ExistingFile);
  verify->add_option("-c,--config", config_path, "Scenario config JSON")->check(CLI::ExistingFile);
  verify->add_option("--tol", tol, "Relative tolerance");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(manifest_path, output_override);
    if (*gen) return cmd_gen(spec, topology, gen_out);
    if (*oracle) return cmd_oracle(network_path, config_path, cap, solution_out);
    if (*verify) return cmd_verify(network_path, solution_path, config_path, tol);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

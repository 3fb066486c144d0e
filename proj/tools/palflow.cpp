#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "palflow/experiments.hpp"
#include "palflow/io.hpp"

namespace {

int run(int argc, char** argv) {
  CLI::App app{"Primal-dual gradient flow simulation and exponential "
               "stability certificates for composite problems"};
  app.require_subcommand(1);

  std::string config_path;
  auto* simulate = app.add_subcommand(
      "simulate", "Integrate the flow for each configured mu; writes "
                  "trajectory CSVs, rates.csv and summary.json");
  simulate->add_option("--config", config_path, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);

  std::string problem_path;
  std::vector<double> mu_grid;
  std::string certify_out = ".";
  auto* certify = app.add_subcommand(
      "certify", "Certificate table over a mu grid; writes certificates.csv");
  certify->add_option("--problem", problem_path, "problem instance (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  certify->add_option("--mu", mu_grid, "comma-separated mu grid")
      ->required()
      ->delimiter(',');
  certify->add_option("--out", certify_out, "output directory");

  std::string oracle_problem;
  auto* oracle = app.add_subcommand(
      "oracle", "Active-set reference solution of a box-constrained QP "
                "(prints JSON)");
  oracle->add_option("--problem", oracle_problem, "problem instance (JSON)")
      ->required()
      ->check(CLI::ExistingFile);

  std::string sweep_config;
  std::optional<std::string> compare_csv;
  bool gnuplot = false;
  auto* sweep = app.add_subcommand(
      "sweep", "Certificate table for the configured random family over its "
               "mu grid; writes sweep.csv");
  sweep->add_option("--config", sweep_config, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--compare", compare_csv,
                    "CSV of externally computed rates (mu,rate) to overlay");
  sweep->add_flag("--gnuplot", gnuplot, "also emit a gnuplot script rates.gp");

  CLI11_PARSE(app, argc, argv);

  if (simulate->parsed()) {
    palflow::run_simulate(palflow::load_config(config_path));
  } else if (certify->parsed()) {
    const auto problem = palflow::load_problem(problem_path);
    const auto outdir = palflow::resolve_output_dir(certify_out);
    std::filesystem::create_directories(outdir);
    palflow::run_certify(problem, mu_grid, outdir / "certificates.csv");
  } else if (oracle->parsed()) {
    const auto problem = palflow::load_problem(oracle_problem);
    const auto solution = palflow::active_set_oracle(problem);
    palflow::Json out = {{"x", palflow::vector_to_json(solution.x)},
                         {"y", palflow::vector_to_json(solution.y)},
                         {"z", palflow::vector_to_json(solution.z)}};
    std::cout << out.dump(2) << "\n";
  } else if (sweep->parsed()) {
    palflow::run_sweep(palflow::load_config(sweep_config), compare_csv, gnuplot);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const palflow::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}

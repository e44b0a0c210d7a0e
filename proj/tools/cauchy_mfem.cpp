// cauchy-mfem: convergence runs, rate fits and gamma_T calibration for the
// stabilized mixed method on the Hadamard and well-posed test cases.
//
// Exit codes: 0 success, 2 solver failure, 3 configuration error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cauchy/error.hpp"
#include "cauchy/experiments.hpp"

namespace {

constexpr int kSolverFailure = 2;
constexpr int kConfigError = 3;

struct RunOptions {
  std::string case_name = "hadamard1";
  int n = 1;
  int k = 1;
  std::string variant = "wellbalanced";
  double gamma_T = 1e-4;
  double gamma_star = 0.1;
  int l = -1;
  double delta = 0.0;
  std::string ladder = "12x4:5";
  std::uint64_t seed = 42;
  double sigma = 0.5;
  double defect_tol = 1e-6;
  int max_outer = 50;
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--case", o.case_name, "hadamard1, hadamard2 or wellposed")->capture_default_str();
  cmd->add_option("--n", o.n, "Hadamard mode number")->capture_default_str();
  cmd->add_option("--k", o.k, "Lagrange order (1 or 2)")->capture_default_str();
  cmd->add_option("--variant", o.variant, "infsup, wellbalanced, wellbalanced-nodual, reduced or defect")
      ->capture_default_str();
  cmd->add_option("--gamma-t", o.gamma_T, "Tikhonov weight")->capture_default_str();
  cmd->add_option("--gamma-star", o.gamma_star, "dual stabilizer weight (wellbalanced)")->capture_default_str();
  cmd->add_option("--l", o.l, "flux order for reduced/defect (default k-1)");
  cmd->add_option("--delta", o.delta, "relative perturbation of the Neumann data")->capture_default_str();
  cmd->add_option("--seed", o.seed, "seed of the random perturbation")->capture_default_str();
  cmd->add_option("--sigma", o.sigma, "height fraction of the local error region")->capture_default_str();
  cmd->add_option("--defect-tol", o.defect_tol, "defect correction increment tolerance")->capture_default_str();
  cmd->add_option("--max-outer", o.max_outer, "defect correction iteration cap")->capture_default_str();
}

cauchy::RunConfig to_config(const RunOptions& o) {
  cauchy::RunConfig c;
  c.kind = cauchy::parse_case(o.case_name);
  c.n = o.n;
  c.k = o.k;
  c.method = cauchy::parse_method(o.variant);
  c.gamma_T = o.gamma_T;
  c.gamma_star = o.gamma_star;
  if (o.l >= 0) c.l = o.l;
  c.delta = o.delta;
  c.ladder = cauchy::parse_ladder(o.ladder);
  c.seed = o.seed;
  c.sigma = o.sigma;
  c.solver.defect_tol = o.defect_tol;
  c.solver.max_outer = o.max_outer;
  return c;
}

void print_rates(std::FILE* out, const cauchy::RateTable& table, int window) {
  const auto rates = cauchy::fit_rates(table, window);
  std::fprintf(out, "fitted rates over the last %d rungs:\n", window);
  for (const auto& [name, rate] : rates) std::fprintf(out, "  %-16s %6.3f\n", name.c_str(), rate);
}

int cmd_run(const RunOptions& o, const std::string& out_path, int window) {
  const cauchy::RunConfig config = to_config(o);
  config.validate();
  std::unique_ptr<std::ofstream> file;
  if (!out_path.empty()) {
    file = std::make_unique<std::ofstream>(out_path);
    if (!*file) throw cauchy::ConfigError("cannot open " + out_path + " for writing");
  }
  std::ostream& csv = file ? static_cast<std::ostream&>(*file) : std::cout;
  const cauchy::RunRecord record = cauchy::run_case(config, &csv);
  // The summary goes to stderr when stdout carries the CSV.
  if (static_cast<int>(record.rows.size()) >= std::max(window, 2)) {
    print_rates(file ? stdout : stderr, record.table, window);
  }
  return 0;
}

int cmd_rates(const std::string& path, int window) {
  std::ifstream in(path);
  if (!in) throw cauchy::ConfigError("cannot open " + path);
  print_rates(stdout, cauchy::read_rates_csv(in), window);
  return 0;
}

int cmd_sweep(const RunOptions& o, const std::string& mesh, std::vector<double> gammas) {
  RunOptions opts = o;
  opts.ladder = mesh + ":1";
  const cauchy::RunConfig config = to_config(opts);
  const auto [nx, ny] = config.ladder.front();
  const cauchy::GammaSweep sweep = cauchy::sweep_gamma(config, gammas, nx, ny);
  std::printf("gamma_T,rel_l2_global\n");
  for (std::size_t i = 0; i < sweep.gammas.size(); ++i) std::printf("%g,%.10e\n", sweep.gammas[i], sweep.rel_l2[i]);
  if (sweep.first_increase >= 0) {
    std::printf("first visible increase at gamma_T = %g\n", sweep.gammas[static_cast<std::size_t>(sweep.first_increase)]);
  } else {
    std::printf("no visible increase over the sweep\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stabilized mixed finite elements for the elliptic Cauchy problem"};
  app.require_subcommand(1);

  RunOptions run_opts;
  std::string out_path;
  int run_window = 3;
  CLI::App* run = app.add_subcommand("run", "run a case over a mesh ladder and write CSV");
  add_run_options(run, run_opts);
  run->add_option("--ladder", run_opts.ladder, "NXxNY:R, doubling R times")->capture_default_str();
  run->add_option("--out", out_path, "CSV output (stdout if omitted)");
  run->add_option("--window", run_window, "rungs used for the printed rate fit")->capture_default_str();

  std::string rates_path;
  int rates_window = 3;
  CLI::App* rates = app.add_subcommand("rates", "fit convergence rates from a CSV");
  rates->add_option("csv", rates_path, "CSV written by run")->required();
  rates->add_option("--window", rates_window, "number of finest rungs in the fit")->capture_default_str();

  RunOptions sweep_opts;
  std::string sweep_mesh = "240x80";
  std::vector<double> gammas = {0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2};
  CLI::App* sweep = app.add_subcommand("sweep-gamma", "error against gamma_T on one mesh with clean data");
  add_run_options(sweep, sweep_opts);
  sweep->add_option("--mesh", sweep_mesh, "NXxNY")->capture_default_str();
  sweep->add_option("--gammas", gammas, "gamma_T values")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*run) return cmd_run(run_opts, out_path, run_window);
    if (*rates) return cmd_rates(rates_path, rates_window);
    if (*sweep) return cmd_sweep(sweep_opts, sweep_mesh, gammas);
  } catch (const cauchy::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolverFailure;
  } catch (const cauchy::Error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  }
  return 0;
}

// isinglab: run experiments, verify the oracle identities, re-summarize output.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "isinglab/harness/emit.hpp"

namespace {

using namespace isinglab;

void print_table(const Table& t) { std::cout << to_csv(t); }

int cmd_run(const std::string& config_path, const std::string& out, std::optional<std::uint64_t> seed,
            std::optional<std::uint64_t> replicas, std::optional<unsigned> workers,
            std::optional<std::string> resume) {
  auto cfg = load_config(config_path);
  if (seed) cfg.seed = *seed;
  if (replicas) cfg.replicas = *replicas;
  if (workers) cfg.workers = *workers;
  cfg.validate();
  RunOptions opt;
  opt.workers = cfg.workers;
  opt.time_budget_s = cfg.time_budget;
  opt.resume = resume.has_value();
  opt.checkpoint_dir = resume ? fs::path(*resume) : fs::path(out) / "checkpoints";
  auto res = run_experiment(cfg, opt);
  for (const auto& p : emit(res, out)) std::cerr << "wrote " << p.string() << "\n";
  std::size_t missing = 0;
  for (const auto& t : res.tasks) missing += t.replicas - t.records.size();
  if (missing)
    std::cerr << "time budget reached: " << missing << " replicas not run; rerun with --resume "
              << opt.checkpoint_dir->string() << " to continue\n";
  for (const auto& [name, table] : res.tables) {
    std::cout << "# " << name << "\n";
    print_table(table);
  }
  return 0;
}

int cmd_verify(std::optional<std::string> out, std::optional<unsigned> workers) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::oracle_suite;
  cfg.beta = {0.5, 0.7, 0.9};
  cfg.trials = 50;
  cfg.replicas = 1;
  cfg.workers = workers.value_or(1);
  RunOptions opt;
  opt.workers = cfg.workers;
  auto res = run_experiment(cfg, opt);
  if (out) emit(res, *out);
  std::size_t failed = 0, observational = 0;
  for (const auto& c : res.checks) {
    failed += !c.passed();
    observational += c.observational;
  }
  print_table(res.tables.front().second);
  std::cout << res.checks.size() << " checks, " << failed << " failed, " << observational << " observational\n";
  return failed ? 1 : 0;
}

int cmd_report(const std::string& in) {
  int status = 0;
  for (const auto& e : report(in)) {
    std::cout << "# " << e.file.filename().string() << " max difference " << format_double(e.max_difference)
              << "\n";
    print_table(e.table);
    if (!(e.max_difference <= 1e-12)) status = 1;
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Glauber dynamics, contours and random-line identities for the 2D Ising model"};
  app.require_subcommand(1);

  std::string config, out, in;
  std::optional<std::uint64_t> seed, replicas;
  std::optional<unsigned> workers;
  std::optional<std::string> resume, verify_out;

  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("--config", config, "config file (key = value)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "output directory")->required();
  run->add_option("--seed", seed, "master seed (overrides the config)");
  run->add_option("--replicas", replicas, "replicas per task (overrides the config)");
  run->add_option("--workers", workers, "worker threads (overrides the config)");
  run->add_option("--resume", resume, "checkpoint directory to resume from");

  auto* verify = app.add_subcommand("verify", "run the oracle identity battery");
  verify->add_option("--out", verify_out, "also write the oracle-suite output here");
  verify->add_option("--workers", workers, "worker threads");

  auto* rep = app.add_subcommand("report", "re-summarize the CSVs of a run");
  rep->add_option("--in", in, "output directory of a run")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, out, seed, replicas, workers, resume);
    if (*verify) return cmd_verify(verify_out, workers);
    if (*rep) return cmd_report(in);
  } catch (const isinglab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "romuq/study.hpp"

namespace
{

struct GlobalOptions
{
  std::string config_path;
  std::string output;
  std::string variant;
  std::string model = "fom";
  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned workers = 0;
  bool workers_set = false;
};

// Flags override the corresponding config fields.
romuq::StudyConfig load_config(const GlobalOptions &opt)
{
  romuq::StudyConfig config = romuq::StudyConfig::from_file(opt.config_path);
  if (!opt.output.empty()) config.output_dir = opt.output;
  if (opt.seed_set) config.seed = opt.seed;
  if (opt.workers_set) config.workers = opt.workers;
  if (!opt.variant.empty()) config.rom_variant = opt.variant;
  return config;
}

void print_result(const std::string &stage, const romuq::StageResult &result)
{
  std::cout << stage << ": " << (result.skipped ? "up to date" : "written") << " at "
            << result.dir.string() << "\n";
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Non-intrusive POD-GPR reduced order modeling and UQ pipeline"};
  app.require_subcommand(1);

  GlobalOptions opt;
  app.add_option("--config", opt.config_path, "Study configuration JSON")->required();
  app.add_option("--out", opt.output, "Output directory (overrides config)");
  auto *seed_opt = app.add_option("--seed", opt.seed, "Study seed (overrides config)");
  auto *workers_opt = app.add_option("--workers", opt.workers, "Worker threads (0 = hardware)");
  app.add_option("--variant", opt.variant, "ROM variant: global or td");
  app.add_option("--model", opt.model, "Model for SA/MCMC: fom, rom:global or rom:td");

  auto *snapshots = app.add_subcommand("snapshots", "Sample the parameter space and run the FOM");
  auto *pod = app.add_subcommand("pod", "Build the reduced basis from training snapshots");
  auto *train = app.add_subcommand("train", "Train the POD-GPR ROM");
  auto *evaluate = app.add_subcommand("evaluate", "Error metrics and speed-up on the test split");
  auto *morris = app.add_subcommand("morris", "Elementary-effects screening");
  auto *sobol = app.add_subcommand("sobol", "Sobol indices via the Saltelli design");
  auto *mcmc = app.add_subcommand("mcmc", "Metropolis-Hastings parameter estimation");
  auto *report = app.add_subcommand("report", "Aggregate stage outputs into a study report");

  CLI11_PARSE(app, argc, argv);
  opt.seed_set = seed_opt->count() > 0;
  opt.workers_set = workers_opt->count() > 0;

  try {
    const romuq::StudyConfig config = load_config(opt);
    const std::string variant = opt.variant.empty() ? config.rom_variant : opt.variant;

    if (snapshots->parsed()) print_result("snapshots", romuq::cmd_snapshots(config));
    if (pod->parsed()) {
      romuq::cmd_snapshots(config);
      print_result("pod", romuq::cmd_pod(config));
    }
    if (train->parsed()) {
      romuq::cmd_snapshots(config);
      print_result("train", romuq::cmd_train(config, variant));
    }
    if (evaluate->parsed()) {
      romuq::cmd_snapshots(config);
      print_result("evaluate", romuq::cmd_evaluate(config, variant));
    }
    if (morris->parsed()) {
      if (opt.model.rfind("rom:", 0) == 0) romuq::cmd_snapshots(config);
      print_result("morris", romuq::cmd_morris(config, opt.model));
    }
    if (sobol->parsed()) {
      if (opt.model.rfind("rom:", 0) == 0) romuq::cmd_snapshots(config);
      print_result("sobol", romuq::cmd_sobol(config, opt.model));
    }
    if (mcmc->parsed()) {
      if (opt.model.rfind("rom:", 0) == 0) romuq::cmd_snapshots(config);
      print_result("mcmc", romuq::cmd_mcmc(config, opt.model));
    }
    if (report->parsed()) print_result("report", romuq::cmd_report(config));
  } catch (const std::exception &err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}

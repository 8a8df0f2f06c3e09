// nlch: simulate and verify nonlocal conserved phase-field dynamics.
//
//   nlch run         --config run.cfg [--out DIR]
//   nlch verify      --config run.cfg --preset kernel-oracle
//   nlch equilibrate --config run.cfg [--out DIR]
//   nlch sweep       --config run.cfg --axis potential.lambda=1.0,1.25,1.5
//                    [--out DIR] [--threads N]
//   nlch export      snapshot.bin [--out dump.csv]
//
// NLCH_THREADS is the fallback for --threads.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nlch/app.hpp"
#include "nlch/errors.hpp"
#include "nlch/version.hpp"

int main(int argc, char** argv) {
  CLI::App cli{"nonlocal conserved phase-field laboratory"};
  cli.set_version_flag("--version", std::string("nlch ") + nlch::kVersion);
  cli.require_subcommand(1);

  std::string config_path, out_dir, preset, axis, snapshot_path;
  int threads = 0;
  if (const char* env = std::getenv("NLCH_THREADS")) threads = std::atoi(env);

  auto* c_run = cli.add_subcommand("run", "integrate the configured model");
  c_run->add_option("--config", config_path, "config file")->required();
  c_run->add_option("--out", out_dir, "output directory");

  auto* c_verify = cli.add_subcommand("verify", "run a verification preset");
  c_verify->add_option("--config", config_path, "config file")->required();
  c_verify->add_option("--preset", preset, "preset name")->required();

  auto* c_eq = cli.add_subcommand("equilibrate", "solve the stationary problem");
  c_eq->add_option("--config", config_path, "config file")->required();
  c_eq->add_option("--out", out_dir, "output directory");

  auto* c_sweep = cli.add_subcommand("sweep", "run independent jobs over one key");
  c_sweep->add_option("--config", config_path, "config file")->required();
  c_sweep->add_option("--axis", axis, "key=v1,v2,...")->required();
  c_sweep->add_option("--out", out_dir, "output directory");
  c_sweep->add_option("--threads", threads, "parallel jobs");

  auto* c_export = cli.add_subcommand("export", "snapshot -> CSV grid dump");
  c_export->add_option("snapshot", snapshot_path, "snapshot file")->required();
  c_export->add_option("--out", out_dir, "output CSV path");

  CLI11_PARSE(cli, argc, argv);

  try {
    if (c_run->parsed()) {
      nlch::RunConfig cfg = nlch::parse_config_file(config_path);
      return nlch::app::run(cfg, out_dir.empty() ? cfg.output_dir : out_dir,
                            std::cout);
    }
    if (c_verify->parsed()) {
      nlch::RunConfig cfg = nlch::parse_config_file(config_path);
      return nlch::app::verify(cfg, preset, std::cout);
    }
    if (c_eq->parsed()) {
      nlch::RunConfig cfg = nlch::parse_config_file(config_path);
      return nlch::app::equilibrate(cfg, out_dir.empty() ? cfg.output_dir : out_dir,
                                    std::cout);
    }
    if (c_sweep->parsed()) {
      nlch::RunConfig cfg = nlch::parse_config_file(config_path);
      auto [key, values] = nlch::app::parse_axis(axis);
      return nlch::app::sweep(cfg, key, values,
                              out_dir.empty() ? cfg.output_dir : out_dir,
                              threads > 0 ? threads : 1, std::cout);
    }
    if (c_export->parsed()) {
      return nlch::app::export_csv(snapshot_path,
                                   out_dir.empty() ? snapshot_path + ".csv" : out_dir,
                                   std::cout);
    }
  } catch (const nlch::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "chvi/app.hpp"

namespace app = chvi::app;

int main(int argc, char **argv) {
  CLI::App cli{"Inertial viscous Cahn-Hilliard solver with singular potentials"};
  cli.require_subcommand(1);

  app::RunOptions run_opt;
  std::string resume;
  auto *run = cli.add_subcommand("run", "integrate one configuration");
  run->add_option("--config", run_opt.config, "key=value configuration file")->required();
  run->add_option("--resume", resume, "continue from a CHVI1 checkpoint");
  run->add_option("--out", run_opt.out, "output directory")->capture_default_str();

  app::SweepOptions sweep_opt;
  std::string sweep_ladder;
  bool hold_data = false;
  auto *sweep = cli.add_subcommand("sweep", "run a descending eps ladder");
  sweep->add_option("--config", sweep_opt.config, "key=value configuration file")->required();
  sweep->add_option("--eps-ladder", sweep_ladder, "comma separated, strictly decreasing");
  sweep->add_flag("--joint-refine", sweep_opt.joint_refine, "scale dt with eps");
  sweep->add_flag("--no-regularize", hold_data, "start every rung from the unregularized data");
  sweep->add_option("--stride", sweep_opt.stride, "store field checkpoints every k steps");
  sweep->add_option("--out", sweep_opt.out, "output directory")->capture_default_str();

  app::PotentialTableOptions pot_opt;
  std::string pot_ladder, pot_out;
  auto *pot = cli.add_subcommand("check-potential", "tabulate resolvents and verify the L1 bound");
  pot->add_option("--kind", pot_opt.kind, "logarithmic, obstacle or double_well")->required();
  pot->add_option("--eps-ladder", pot_ladder, "comma separated eps values");
  pot->add_option("--samples", pot_opt.samples, "grid points in r")->capture_default_str();
  pot->add_option("--r-min", pot_opt.r_lo)->capture_default_str();
  pot->add_option("--r-max", pot_opt.r_hi)->capture_default_str();
  pot->add_option("--out", pot_out, "also write the table to this file");

  std::string report_dir;
  auto *report = cli.add_subcommand("energy-report", "recompute energies from checkpoints and cross-check run.csv");
  report->add_option("run-dir", report_dir)->required();

  std::string plot_dir;
  auto *plot = cli.add_subcommand("plotdata", "derive plot-ready CSV series");
  plot->add_option("dir", plot_dir)->required();

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : app::ConfigFailure;
  }

  return app::run_guarded(
      [&]() -> int {
        if (run->parsed()) {
          if (!resume.empty())
            run_opt.resume = resume;
          app::run(run_opt, std::cerr);
          return app::Success;
        }
        if (sweep->parsed()) {
          if (!sweep_ladder.empty())
            sweep_opt.eps_ladder = app::parse_real_list(sweep_ladder);
          sweep_opt.regularize_initial = !hold_data;
          app::sweep(sweep_opt, std::cerr);
          return app::Success;
        }
        if (pot->parsed()) {
          if (!pot_ladder.empty())
            pot_opt.eps_ladder = app::parse_real_list(pot_ladder);
          if (!pot_out.empty())
            pot_opt.out = pot_out;
          const auto verdict = app::check_potential(pot_opt, std::cout);
          return verdict.ok ? app::Success : app::NumericalFailure;
        }
        if (report->parsed())
          return app::energy_report(report_dir, std::cout).ok ? app::Success : app::NumericalFailure;
        app::plotdata(plot_dir, std::cerr);
        return app::Success;
      },
      std::cerr);
}

#ifndef CHVI_APP_HPP
#define CHVI_APP_HPP

// Command implementations behind the chvi executable. Each command reads
// its inputs, writes into an output directory and reports through a stream;
// errors are exceptions, mapped to exit codes by run_guarded.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "chvi/checkpoint.hpp"
#include "chvi/config.hpp"
#include "chvi/csv.hpp"
#include "chvi/initial_data.hpp"
#include "chvi/potential.hpp"
#include "chvi/simulation.hpp"
#include "chvi/sweep.hpp"

namespace chvi::app {

namespace fs = std::filesystem;

inline constexpr const char *artifact_version = "1.0.0";

enum ExitCode : int { Success = 0, ConfigFailure = 2, NumericalFailure = 3, IoFailure = 4 };

/// Runs a command and maps its exceptions to exit codes.
inline int run_guarded(const std::function<int()> &command, std::ostream &err) {
  try {
    return command();
  } catch (const ConfigError &e) {
    err << "config error: " << e.what() << '\n';
    return ConfigFailure;
  } catch (const InvalidArgument &e) {
    err << "invalid argument: " << e.what() << '\n';
    return ConfigFailure;
  } catch (const ConstraintViolation &e) {
    err << "invalid initial data: " << e.what() << '\n';
    return ConfigFailure;
  } catch (const StepFailure &e) {
    err << "numerical failure: " << e.what() << '\n';
    return NumericalFailure;
  } catch (const IoError &e) {
    err << "i/o error: " << e.what() << '\n';
    return IoFailure;
  } catch (const fs::filesystem_error &e) {
    err << "i/o error: " << e.what() << '\n';
    return IoFailure;
  }
}

/// Comma separated list of reals, e.g. "0.1,0.05,0.025".
inline std::vector<double> parse_real_list(std::string_view text) {
  std::vector<double> out;
  for (const std::string &cell : split_csv_line(text)) {
    const std::string_view t = detail::trim(cell);
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(x))
      throw ConfigError("not a list of numbers: '" + std::string(text) + "'");
    out.push_back(x);
  }
  return out;
}

inline std::string checkpoint_name(std::int64_t step) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "checkpoint_%08lld.chvi", static_cast<long long>(step));
  return buf;
}

inline std::vector<fs::path> list_checkpoints(const fs::path &dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir))
    return out;
  for (const auto &e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.starts_with("checkpoint_") && name.ends_with(".chvi"))
      out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::string hash_hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// manifest.json of an output directory. Paths are relative to it.
class Manifest {
public:
  Manifest(fs::path dir, std::uint64_t config_hash) : dir_(std::move(dir)), hash_(config_hash) {}

  void add(const fs::path &file, std::string role) {
    outputs_.emplace_back(fs::relative(file, dir_).generic_string(), std::move(role));
  }

  fs::path write() const {
    nlohmann::ordered_json j;
    j["config_hash"] = hash_hex(hash_);
    j["artifact_version"] = artifact_version;
    j["outputs"] = nlohmann::ordered_json::array();
    for (const auto &[path, role] : outputs_)
      j["outputs"].push_back({{"path", path}, {"role", role}});
    const fs::path p = dir_ / "manifest.json";
    write_text(p, j.dump(2) + "\n");
    return p;
  }

private:
  fs::path dir_;
  std::uint64_t hash_;
  std::vector<std::pair<std::string, std::string>> outputs_;
};

inline RunConfig load_config(const fs::path &path, bool require_eps) {
  return parse_config(read_text(path), require_eps);
}

// ---------------------------------------------------------------- run

struct RunOptions {
  fs::path config;
  std::optional<fs::path> resume;
  fs::path out = "chvi_run";
};

struct RunSummary {
  std::int64_t first_step = 0;
  std::int64_t last_step = 0;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  double max_inequality_residual = 0.0;
  std::vector<fs::path> checkpoints;
};

/// One simulation. Writes config.txt, run.csv, checkpoint files (step 0 or
/// the resume point, every output.every steps, and the final step) and
/// manifest.json. A resumed run keeps the rows of an existing run.csv up to
/// the checkpoint step and continues from there.
inline RunSummary run(const RunOptions &opt, std::ostream &log) {
  const RunConfig rc = load_config(opt.config, true);
  const SimConfig &cfg = rc.sim;
  fs::create_directories(opt.out);
  const fs::path cfg_copy = opt.out / "config.txt";
  write_text(cfg_copy, normalize(rc));

  SimState initial = SimState::zero(cfg.grid);
  if (opt.resume) {
    initial = resume(*opt.resume, cfg);
  } else {
    auto [u0, u1] = initial_data(rc);
    initial = rung_initial_state(cfg, u0, u1);
  }
  const Integrator integ(cfg);
  Simulation sim(integ, std::move(initial));

  const fs::path csv_path = opt.out / "run.csv";
  std::vector<std::string> kept;
  if (opt.resume && fs::exists(csv_path)) {
    const CsvTable old = read_csv(csv_path);
    const std::size_t step_col = old.column("step");
    for (const auto &row : old.rows) {
      if (std::stoll(row[step_col]) > sim.state().step)
        break;
      std::string line;
      for (std::size_t i = 0; i < row.size(); ++i)
        line += (i ? "," : "") + row[i];
      kept.push_back(std::move(line));
    }
  }
  CsvFile csv(csv_path, run_csv_header);
  for (const auto &line : kept)
    csv.line(line);

  RunSummary sum;
  sum.first_step = sim.state().step;
  sum.initial_energy = sim.last().energy.total;
  Manifest manifest(opt.out, config_hash(rc));

  auto save = [&]() {
    const fs::path p = opt.out / checkpoint_name(sim.state().step);
    write_checkpoint(p, make_checkpoint(sim.state(), cfg.eps));
    sum.checkpoints.push_back(p);
  };
  auto finish_manifest = [&]() {
    manifest.add(cfg_copy, "config");
    manifest.add(csv_path, "run-csv");
    for (const auto &p : list_checkpoints(opt.out))
      manifest.add(p, "checkpoint");
    manifest.write();
  };

  if (!opt.resume) {
    csv.line(run_csv_row(sim.last()));
    save();
  }
  try {
    while (!sim.finished()) {
      const StepRecord &r = sim.advance();
      csv.line(run_csv_row(r));
      sum.max_inequality_residual = std::max(sum.max_inequality_residual, r.energy.inequality_residual);
      if (r.step % rc.output_every == 0 || sim.finished())
        save();
    }
  } catch (const StepFailure &) {
    finish_manifest();
    throw;
  }
  sum.last_step = sim.state().step;
  sum.final_energy = sim.last().energy.total;
  finish_manifest();
  log << "run: steps " << sum.first_step << ".." << sum.last_step << ", E " << format_double(sum.initial_energy)
      << " -> " << format_double(sum.final_energy) << ", max inequality residual "
      << format_double(sum.max_inequality_residual) << '\n';
  return sum;
}

// ---------------------------------------------------------------- sweep

struct SweepOptions {
  fs::path config;
  std::vector<double> eps_ladder{1e-1, 5e-2, 2.5e-2, 1.25e-2};
  bool joint_refine = false;
  bool regularize_initial = true;
  int stride = 0; // stored field checkpoints every stride steps; 0 = none
  fs::path out = "chvi_sweep";
};

inline const std::vector<std::string> &sweep_summary_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c{"eps",          "cauchy_L2V",          "cauchy_L2Vprime",
                               "duality_pairing", "duality_gap", "concentration_index"};
    for (const char *n : EstimateReport::names)
      c.emplace_back(n);
    return c;
  }();
  return cols;
}

/// eps-sweep. Writes rung_<i>/run.csv (plus stored checkpoints when
/// stride > 0), sweep_summary.csv, eta_profile.csv, config.txt and
/// manifest.json. A sweep cut short by a step failure still writes the
/// outputs of the finished rungs, then throws StepFailure.
inline SweepReport sweep(const SweepOptions &opt, std::ostream &log) {
  const RunConfig rc = load_config(opt.config, false);
  if (opt.stride < 0)
    throw InvalidArgument("stride must be >= 0");
  SweepPlan plan;
  plan.base = rc.sim;
  plan.eps_ladder = opt.eps_ladder;
  plan.joint_refine = opt.joint_refine;
  plan.regularize_initial = opt.regularize_initial;
  plan.stored_fields = opt.stride;
  std::tie(plan.u0, plan.u1) = initial_data(rc);
  plan.validate();

  fs::create_directories(opt.out);
  const fs::path cfg_copy = opt.out / "config.txt";
  write_text(cfg_copy, normalize(rc));
  Manifest manifest(opt.out, config_hash(rc));
  manifest.add(cfg_copy, "config");

  std::optional<CsvFile> rung_csv;
  std::size_t current = static_cast<std::size_t>(-1);
  auto observer = [&](std::size_t rung, const Integrator &integ, const SimState &s, const StepRecord &rec) {
    const fs::path dir = opt.out / ("rung_" + std::to_string(rung));
    if (rung != current) {
      current = rung;
      fs::create_directories(dir);
      rung_csv.emplace(dir / "run.csv", run_csv_header);
      manifest.add(dir / "run.csv", "run-csv");
    }
    rung_csv->line(run_csv_row(rec));
    if (plan.stored_fields > 0 && (s.step % plan.stored_fields == 0 || s.step == integ.config().steps())) {
      const fs::path p = dir / checkpoint_name(s.step);
      write_checkpoint(p, make_checkpoint(s, integ.config().eps));
      manifest.add(p, "checkpoint");
    }
  };
  SweepReport rep = run_sweep(plan, observer);
  rung_csv.reset();

  const double rhs = rep.rungs.empty() ? 0.0 : rep.rungs.back().duality_identity_rhs;
  const fs::path summary_path = opt.out / "sweep_summary.csv";
  {
    std::string header;
    for (const auto &c : sweep_summary_columns())
      header += (header.empty() ? "" : ",") + c;
    CsvFile summary(summary_path, header);
    for (std::size_t i = 0; i < rep.rungs.size(); ++i) {
      const RungResult &r = rep.rungs[i];
      std::string line = format_double(r.eps);
      line += ',' + (i ? format_double(rep.cauchy_L2V_of_u[i - 1]) : std::string("nan"));
      line += ',' + (i ? format_double(rep.cauchy_L2Vprime_of_ut[i - 1]) : std::string("nan"));
      line += ',' + format_double(r.duality_pairing);
      line += ',' + format_double(r.duality_pairing - rhs);
      line += ',' + format_double(r.concentration_index);
      for (double m : r.monitors.values())
        line += ',' + format_double(m);
      summary.line(line);
    }
  }
  manifest.add(summary_path, "sweep-csv");

  const fs::path eta_path = opt.out / "eta_profile.csv";
  {
    CsvFile eta(eta_path, "rung,eps,t,eta");
    for (std::size_t i = 0; i < rep.rungs.size(); ++i) {
      const RungResult &r = rep.rungs[i];
      for (std::size_t n = 0; n < r.eta_profile.size(); ++n)
        eta.line(std::to_string(i) + ',' + format_double(r.eps) + ',' + format_double(r.times[n]) + ',' +
                 format_double(r.eta_profile[n]));
    }
  }
  manifest.add(eta_path, "sweep-csv");
  manifest.write();

  if (!rep.complete)
    throw StepFailure("sweep incomplete: " + rep.failure, std::numeric_limits<double>::quiet_NaN());

  const DualityVerdict dv = duality_limsup_check(rep);
  log << "sweep: " << rep.rungs.size() << " rungs, duality limsup check " << (dv.pass ? "pass" : "FAIL")
      << " (finest gap " << format_double(dv.gaps.back()) << ", tolerance " << format_double(dv.tolerance) << ")\n";
  return rep;
}

// ---------------------------------------------------------------- check-potential

struct PotentialTableOptions {
  std::string kind = "logarithmic";
  std::vector<double> eps_ladder{1e-1, 1e-2, 1e-3, 1e-4};
  int samples = 2000;
  double r_lo = -5.0;
  double r_hi = 5.0;
  std::optional<fs::path> out; // also write the table to this file
};

/// Resolvent table for every (eps, r) plus the (c1, c2, ok) verdict of the
/// L1 structural bound, written to `out` (and to opt.out if given).
inline L1BoundResult check_potential(const PotentialTableOptions &opt, std::ostream &out) {
  const auto kind = parse_potential_kind(opt.kind);
  if (!kind)
    throw ConfigError("--kind must be logarithmic, obstacle or double_well");
  if (opt.samples < 1)
    throw ConfigError("--samples must be >= 1");
  if (!(opt.r_lo <= opt.r_hi))
    throw ConfigError("r range is empty");
  PotentialSpec spec;
  spec.kind = *kind;
  const L1BoundResult verdict = verify_l1_bound(spec, opt.eps_ladder, opt.r_lo, opt.r_hi, opt.samples);

  std::string text = "kind,eps,r,resolvent,yosida,moreau,residual\n";
  const std::string name(to_string(spec.kind));
  for (double eps : opt.eps_ladder) {
    for (int i = 0; i < opt.samples; ++i) {
      const double r = opt.samples == 1 ? opt.r_lo : opt.r_lo + (opt.r_hi - opt.r_lo) * i / (opt.samples - 1);
      const YosidaEval y = resolvent(spec, r, eps);
      text += name;
      for (double x : {eps, r, y.resolvent, y.yosida, y.moreau, y.residual})
        text += ',' + format_double(x);
      text += '\n';
    }
  }
  text += "\nc1,c2,ok\n" + format_double(verdict.c1) + ',' + format_double(verdict.c2) + ',' +
          (verdict.ok ? "true" : "false") + '\n';
  out << text;
  if (opt.out) {
    if (opt.out->has_parent_path())
      fs::create_directories(opt.out->parent_path());
    write_text(*opt.out, text);
  }
  return verdict;
}

// ---------------------------------------------------------------- energy-report

struct EnergyReport {
  std::size_t checkpoints = 0;
  std::size_t mismatches = 0;
  double max_inequality_residual = 0.0;
  double tolerance = 0.0;
  bool ok = false;
};

/// Recomputes the energy ledger of every checkpoint in a run directory and
/// compares it, digit for digit, with the matching run.csv row. Also checks
/// the per-step energy inequality recorded in the CSV.
inline EnergyReport energy_report(const fs::path &dir, std::ostream &out) {
  if (!fs::is_directory(dir))
    throw IoError("not a directory: " + dir.string());
  const RunConfig rc = load_config(dir / "config.txt", true);
  const CsvTable csv = read_csv(dir / "run.csv");
  const auto ckpts = list_checkpoints(dir);
  if (ckpts.empty())
    throw IoError("no checkpoints in " + dir.string());
  const Integrator integ(rc.sim);

  std::map<std::string, std::size_t> by_step;
  const std::size_t step_col = csv.column("step");
  for (std::size_t i = 0; i < csv.rows.size(); ++i)
    by_step[csv.rows[i][step_col]] = i;

  static constexpr std::array<const char *, 11> compared{
      "t",         "E_total",  "kinetic",  "dirichlet", "potential",    "concave",
      "dissipation_integral", "max_abs_u", "norm_V_u", "norm_H_v", "norm_Vprime_v"};

  EnergyReport rep;
  out << "step,t,E_total,kinetic,dirichlet,potential,concave,dissipation_integral,match\n";
  for (const auto &path : ckpts) {
    const SimState s = restore_state(read_checkpoint(path), rc.sim.grid, rc.sim.eps);
    const StepRecord r = state_record(integ, s);
    const std::array<double, 11> values{r.t,
                                        r.energy.total,
                                        r.energy.kinetic,
                                        r.energy.dirichlet,
                                        r.energy.potential,
                                        r.energy.concave,
                                        r.dissipation_integral,
                                        r.max_abs_u,
                                        r.u_norms.V,
                                        r.v_norms.H,
                                        r.v_norms.Vprime};
    bool match = false;
    if (auto it = by_step.find(std::to_string(s.step)); it != by_step.end()) {
      match = true;
      for (std::size_t k = 0; k < compared.size(); ++k)
        match = match && csv.rows[it->second][csv.column(compared[k])] == format_double(values[k]);
    }
    ++rep.checkpoints;
    if (!match)
      ++rep.mismatches;
    out << s.step;
    for (std::size_t k = 0; k < 7; ++k)
      out << ',' << format_double(values[k]);
    out << ',' << (match ? "true" : "false") << '\n';
  }

  const double E0 = csv.rows.empty() ? 0.0 : csv.number(0, "E_total");
  rep.tolerance = energy_tolerance(E0);
  for (std::size_t i = 0; i < csv.rows.size(); ++i)
    rep.max_inequality_residual = std::max(rep.max_inequality_residual, csv.number(i, "ineq_residual"));
  rep.ok = rep.mismatches == 0 && rep.max_inequality_residual <= rep.tolerance;
  out << "\ncheckpoints,mismatches,max_ineq_residual,tolerance,ok\n"
      << rep.checkpoints << ',' << rep.mismatches << ',' << format_double(rep.max_inequality_residual) << ','
      << format_double(rep.tolerance) << ',' << (rep.ok ? "true" : "false") << '\n';
  return rep;
}

// ---------------------------------------------------------------- plotdata

namespace detail {

inline std::string log10_cell(double x) {
  return x > 0.0 && std::isfinite(x) ? format_double(std::log10(x)) : std::string("nan");
}

inline std::string cell(double x) { return std::isnan(x) ? std::string("nan") : format_double(x); }

inline void energy_series(const CsvTable &run, const std::string &prefix, CsvFile &energy, CsvFile &max_u) {
  for (std::size_t i = 0; i < run.rows.size(); ++i) {
    std::string e = prefix + cell(run.number(i, "t"));
    for (const char *c : {"E_total", "kinetic", "dirichlet", "potential", "concave", "dissipation_integral"})
      e += ',' + cell(run.number(i, c));
    energy.line(e);
    max_u.line(prefix + cell(run.number(i, "t")) + ',' + cell(run.number(i, "max_abs_u")));
  }
}

} // namespace detail

/// Plot-ready series derived from a run or sweep directory:
/// plot_energy.csv and plot_max_u.csv from run CSVs, and for sweeps also
/// plot_eta_profile.csv, plot_cauchy.csv (log10 columns) and
/// plot_monitors.csv. Refuses a directory without run or sweep outputs.
inline std::vector<fs::path> plotdata(const fs::path &dir, std::ostream &log) {
  if (!fs::is_directory(dir))
    throw IoError("not a directory: " + dir.string());
  const bool is_run = fs::exists(dir / "run.csv");
  const bool is_sweep = fs::exists(dir / "sweep_summary.csv");
  if (!is_run && !is_sweep)
    throw IoError("no run.csv or sweep_summary.csv in " + dir.string());

  std::vector<fs::path> written;
  if (is_run) {
    const CsvTable run = read_csv(dir / "run.csv");
    CsvFile energy(dir / "plot_energy.csv", "t,E_total,kinetic,dirichlet,potential,concave,dissipation_integral");
    CsvFile max_u(dir / "plot_max_u.csv", "t,max_abs_u");
    detail::energy_series(run, "", energy, max_u);
    written.push_back(energy.path());
    written.push_back(max_u.path());
  }
  if (is_sweep) {
    const CsvTable summary = read_csv(dir / "sweep_summary.csv");
    if (!is_run) {
      CsvFile energy(dir / "plot_energy.csv",
                     "eps,t,E_total,kinetic,dirichlet,potential,concave,dissipation_integral");
      CsvFile max_u(dir / "plot_max_u.csv", "eps,t,max_abs_u");
      for (std::size_t i = 0; i < summary.rows.size(); ++i) {
        const fs::path rung = dir / ("rung_" + std::to_string(i)) / "run.csv";
        if (!fs::exists(rung))
          throw IoError("missing " + rung.string());
        detail::energy_series(read_csv(rung), detail::cell(summary.number(i, "eps")) + ",", energy, max_u);
      }
      written.push_back(energy.path());
      written.push_back(max_u.path());
    }

    {
      CsvFile cauchy(dir / "plot_cauchy.csv",
                     "eps,log10_eps,cauchy_L2V,log10_cauchy_L2V,cauchy_L2Vprime,log10_cauchy_L2Vprime");
      for (std::size_t i = 0; i < summary.rows.size(); ++i) {
        const double eps = summary.number(i, "eps");
        const double a = summary.number(i, "cauchy_L2V");
        const double b = summary.number(i, "cauchy_L2Vprime");
        cauchy.line(detail::cell(eps) + ',' + detail::log10_cell(eps) + ',' + detail::cell(a) + ',' +
                    detail::log10_cell(a) + ',' + detail::cell(b) + ',' + detail::log10_cell(b));
      }
      written.push_back(cauchy.path());
    }
    {
      std::string header = "eps,log10_eps";
      for (const char *n : EstimateReport::names)
        header += std::string(",") + n;
      CsvFile monitors(dir / "plot_monitors.csv", header);
      for (std::size_t i = 0; i < summary.rows.size(); ++i) {
        const double eps = summary.number(i, "eps");
        std::string line = detail::cell(eps) + ',' + detail::log10_cell(eps);
        for (const char *n : EstimateReport::names)
          line += ',' + detail::cell(summary.number(i, n));
        monitors.line(line);
      }
      written.push_back(monitors.path());
    }
    if (fs::exists(dir / "eta_profile.csv")) {
      const CsvTable eta = read_csv(dir / "eta_profile.csv");
      // eta normalized by its time average on the rung: concentration shows as peaks >> 1
      std::map<std::string, std::pair<double, std::size_t>> mean;
      for (std::size_t i = 0; i < eta.rows.size(); ++i) {
        auto &m = mean[eta.rows[i][eta.column("rung")]];
        m.first += eta.number(i, "eta");
        ++m.second;
      }
      CsvFile plot(dir / "plot_eta_profile.csv", "eps,t,eta,eta_over_mean");
      for (std::size_t i = 0; i < eta.rows.size(); ++i) {
        const auto &m = mean[eta.rows[i][eta.column("rung")]];
        const double avg = m.second ? m.first / static_cast<double>(m.second) : 0.0;
        const double x = eta.number(i, "eta");
        plot.line(detail::cell(eta.number(i, "eps")) + ',' + detail::cell(eta.number(i, "t")) + ',' +
                  detail::cell(x) + ',' + (avg > 0.0 ? detail::cell(x / avg) : std::string("nan")));
      }
      written.push_back(plot.path());
    }
  }
  for (const auto &p : written)
    log << "wrote " << p.string() << '\n';
  return written;
}

} // namespace chvi::app

#endif // CHVI_APP_HPP

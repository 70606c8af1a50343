#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sfnls/diagnostics.hpp"
#include "sfnls/ensemble.hpp"
#include "sfnls/initial.hpp"
#include "sfnls/integrator.hpp"
#include "sfnls/io.hpp"
#include "sfnls/noise.hpp"

namespace sfnls {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitDiverged = 3;

/// What a command leaves behind besides its data files.
struct CommandOutcome {
  int exit_code = kExitOk;
  std::string status = "ok";
  std::vector<std::string> outputs;
  std::string report;
};

namespace detail {

inline std::string path_in(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

/// Short decimal form used in file names: 0.525, 0.75, 1.
inline std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline void line(std::string& rep, const std::string& key, const std::string& value) {
  rep += key + ": " + value + "\n";
}

inline void line(std::string& rep, const std::string& key, double value) { line(rep, key, fmt_double(value)); }

inline double relative_mass_drift(const std::vector<DiagnosticsRecord>& recs) {
  double d = 0.0;
  for (const auto& r : recs) d = std::max(d, std::abs(r.mass - recs.front().mass) / recs.front().mass);
  return d;
}

/// Noise constant for the driven equation: epsilon^2 times the raw-mode
/// estimate, 0 without noise, +inf when the mode sum does not converge.
inline PhicondEstimate phicond_for(const NoiseModel& noise, double alpha) {
  if (noise.size() == 0 || noise.epsilon == 0.0) return PhicondEstimate{};
  if (alpha >= 1.0) {
    PhicondEstimate e;
    e.converged = false;
    e.note = "kernel constant undefined at alpha = 1";
    return e;
  }
  return estimate_phicond_constant(noise, alpha);
}

} // namespace detail

inline CommandOutcome cmd_simulate(const RunConfig& c, const std::string& out) {
  CommandOutcome o;
  const auto noise = make_noise(c);
  RunOptions opt;
  opt.weight = make_weight(c.virial, c.sim.grid);
  opt.keep_snapshots = c.snapshots;
  opt.track_martingale = noise.size() > 0 && noise.epsilon > 0.0;
  const auto res = run(make_initial(c.initial, c.sim.grid), c.sim, noise, opt);

  write_csv(res.records, detail::path_in(out, "records.csv"));
  o.outputs.push_back("records.csv");
  if (c.snapshots) {
    std::vector<Snapshot> snaps;
    for (std::size_t i = 0; i < res.snapshots.size(); ++i) snaps.push_back({res.records[i].t, res.snapshots[i]});
    write_snapshots(snaps, c.sim.grid, detail::path_in(out, "snapshots.bin"));
    o.outputs.push_back("snapshots.bin");
  }
  std::string& rep = o.report;
  detail::line(rep, "status", to_string(res.status));
  detail::line(rep, "samples", std::to_string(res.records.size()));
  detail::line(rep, "relative_mass_drift", detail::relative_mass_drift(res.records));
  detail::line(rep, "energy_initial", res.records.front().energy);
  detail::line(rep, "energy_final", res.records.back().energy);
  if (res.blowup.fired) {
    detail::line(rep, "blowup_cause", to_string(res.blowup.cause));
    detail::line(rep, "blowup_t", res.blowup.t_fire);
  }
  if (res.status == RunStatus::diverged) {
    o.exit_code = kExitDiverged;
    o.status = "diverged";
  }
  return o;
}

inline CommandOutcome cmd_ensemble(const RunConfig& c, const std::string& out) {
  CommandOutcome o;
  const auto noise = make_noise(c);
  RunOptions opt;
  opt.weight = make_weight(c.virial, c.sim.grid);
  opt.track_martingale = true;
  const auto res = run_ensemble(make_initial(c.initial, c.sim.grid), c.ensemble(), noise, opt);
  write_csv(res.trajectories, detail::path_in(out, "records.csv"));
  write_csv(res.stats, detail::path_in(out, "stats.csv"));
  o.outputs = {"records.csv", "stats.csv"};

  const auto est = detail::phicond_for(noise, c.sim.params.alpha);
  const double r_hat = est.effective(noise.epsilon);
  const auto chk = energy_drift_check(res.stats, r_hat, c.sim.grid.n, c.sim.params.alpha);
  std::string& rep = o.report;
  detail::line(rep, "n_traj", std::to_string(res.stats.n_traj));
  detail::line(rep, "diverged", std::to_string(res.stats.diverged));
  if (res.stats.all_diverged) detail::line(rep, "all_diverged", "true");
  detail::line(rep, "r_hat", r_hat);
  if (!est.note.empty()) detail::line(rep, "r_hat_note", est.note);
  if (chk.skipped) {
    detail::line(rep, "energy_drift_check", "skipped (" + chk.reason + ")");
  } else {
    detail::line(rep, "energy_drift_check", chk.passed ? "pass" : "fail");
    detail::line(rep, "energy_drift_worst_margin", chk.worst_margin);
  }
  detail::line(rep, "martingale_mean_check", chk.martingale_passed ? "pass" : "fail");
  detail::line(rep, "martingale_worst_z", chk.martingale_worst_z);
  if (res.stats.diverged > 0) {
    o.exit_code = kExitDiverged;
    o.status = res.stats.all_diverged ? "all-diverged" : "diverged";
  }
  return o;
}

inline CommandOutcome cmd_dispersive(const RunConfig& c, const std::string& out) {
  CommandOutcome o;
  std::vector<double> t_grid = c.dispersive.t_grid;
  if (t_grid.empty())
    for (int k = 0; k <= 18; ++k) t_grid.push_back(1.0 + 0.5 * k);
  std::vector<DispersivePair> pairs = c.dispersive.pairs;
  if (pairs.empty()) pairs.push_back({c.sim.params.alpha, 1.0});
  const auto initial = make_initial(c.initial, c.sim.grid);
  std::string csv = "alpha,p,expected_slope,slope,intercept,residual,max_relative_variation\n";
  for (const auto& pr : pairs) {
    const auto fit = dispersive_decay_fit(initial, pr.alpha, pr.p, t_grid);
    csv += fmt_double(pr.alpha) + "," + fmt_double(pr.p) + "," + fmt_double(fit.expected) + "," +
           fmt_double(fit.slope) + "," + fmt_double(fit.intercept) + "," + fmt_double(fit.residual) + "," +
           fmt_double(fit.max_relative_variation) + "\n";
    o.report += "alpha=" + detail::short_number(pr.alpha) + " p=" + detail::short_number(pr.p) +
                " slope=" + fmt_double(fit.slope) + " expected=" + fmt_double(fit.expected) + "\n";
  }
  write_text(detail::path_in(out, "dispersive.csv"), csv);
  o.outputs.push_back("dispersive.csv");
  return o;
}

/// Table of the sampled virial, its centered-difference rate and the
/// identity's right-hand side along a noise-free run.
struct VirialCheck {
  std::vector<double> t, virial, fd_rate, rhs, closed_form, rel_err;
  double max_rel_err = 0.0;
  bool quadrature_converged = true;
  RunStatus status = RunStatus::completed;
};

inline VirialCheck virial_check(const ComplexField& initial, const SimConfig& sim, const VirialWeight& w,
                                const VirialRhsOptions& qopt = {}) {
  RunOptions opt;
  opt.weight = w;
  opt.keep_snapshots = true;
  const auto res = run(initial, sim, build_zero_model(sim.grid), opt);
  VirialCheck vc;
  vc.status = res.status;
  for (const auto& r : res.records) {
    vc.t.push_back(r.t);
    vc.virial.push_back(r.virial);
  }
  vc.fd_rate = centered_rate(vc.virial, sim.dt * sim.sample_every);
  for (std::size_t i = 0; i < res.snapshots.size(); ++i) {
    const bool interior = !std::isnan(vc.fd_rate[i]);
    double rhs = std::numeric_limits<double>::quiet_NaN();
    if (interior) {
      const auto vr = virial_rhs(res.snapshots[i], w, sim.params, qopt);
      vc.quadrature_converged = vc.quadrature_converged && vr.converged;
      rhs = vr.value;
    }
    vc.rhs.push_back(rhs);
    vc.closed_form.push_back(w.kind == VirialWeight::Kind::quadratic ? virial_rhs_quadratic(res.snapshots[i], sim.params)
                                                                      : std::numeric_limits<double>::quiet_NaN());
    const double e = interior ? std::abs(vc.fd_rate[i] - rhs) / std::max(std::abs(rhs), 1e-300)
                              : std::numeric_limits<double>::quiet_NaN();
    vc.rel_err.push_back(e);
    if (interior) vc.max_rel_err = std::max(vc.max_rel_err, e);
  }
  return vc;
}

inline CommandOutcome cmd_virial_check(const RunConfig& c, const std::string& out) {
  CommandOutcome o;
  const auto w = make_weight(c.virial, c.sim.grid);
  VirialRhsOptions q;
  q.rel_tol = c.virial.rel_tol;
  const auto vc = virial_check(make_initial(c.initial, c.sim.grid), c.sim, w, q);
  std::string csv = "t,virial,fd_rate,virial_rhs,closed_form,rel_err\n";
  for (std::size_t i = 0; i < vc.t.size(); ++i)
    csv += fmt_double(vc.t[i]) + "," + fmt_double(vc.virial[i]) + "," + fmt_double(vc.fd_rate[i]) + "," +
           fmt_double(vc.rhs[i]) + "," + fmt_double(vc.closed_form[i]) + "," + fmt_double(vc.rel_err[i]) + "\n";
  write_text(detail::path_in(out, "virial_check.csv"), csv);
  o.outputs.push_back("virial_check.csv");
  detail::line(o.report, "status", to_string(vc.status));
  detail::line(o.report, "max_relative_error", vc.max_rel_err);
  detail::line(o.report, "quadrature_converged", vc.quadrature_converged ? "true" : "false");
  if (!w.warning.empty()) detail::line(o.report, "weight_warning", w.warning);
  if (vc.status == RunStatus::diverged) {
    o.exit_code = kExitDiverged;
    o.status = "diverged";
  }
  return o;
}

inline CommandOutcome cmd_blowup_cert(const RunConfig& c, const std::string& out) {
  CommandOutcome o;
  const auto noise = make_noise(c);
  const auto u0 = make_initial(c.initial, c.sim.grid);
  const auto e0 = energy(u0, c.sim.params);
  const double m0 = mass(u0);
  const auto est = detail::phicond_for(noise, c.sim.params.alpha);
  const double r_hat = est.effective(noise.epsilon);

  std::vector<double> t_grid = c.blowup.t_grid;
  if (t_grid.empty())
    for (int k = 1; k <= 10; ++k) t_grid.push_back(c.sim.t_final > 0.0 ? c.sim.t_final * k / 10.0 : 0.1 * k);
  std::string csv = "t,lhs,margin,certified\n";
  bool any = false;
  const bool defined = std::isfinite(r_hat) && c.sim.params.alpha < 1.0;
  for (double t : t_grid) {
    if (!defined) break;
    const auto cert = blowup_certificate(e0.H, m0, r_hat, c.sim.grid.n, c.sim.params.alpha, t);
    any = any || cert.certified;
    csv += fmt_double(t) + "," + fmt_double(cert.lhs) + "," + fmt_double(cert.margin) + "," +
           (cert.certified ? "1" : "0") + "\n";
  }
  write_text(detail::path_in(out, "certificate.csv"), csv);
  o.outputs.push_back("certificate.csv");

  std::string& rep = o.report;
  const auto hyp = hypotheses(c.sim.params);
  detail::line(rep, "energy_mean", e0.H);
  detail::line(rep, "mass_mean", m0);
  detail::line(rep, "r_hat", r_hat);
  detail::line(rep, "hypotheses", hyp.blowup ? "met" : "not met");
  for (const auto& wmsg : hyp.warnings) detail::line(rep, "warning", wmsg);
  detail::line(rep, "certificate", !defined ? "undefined" : (any ? "certified" : "not certified"));

  if (c.blowup.run) {
    RunOptions opt;
    opt.weight = make_weight(c.virial, c.sim.grid);
    const auto res = run_ensemble(u0, c.ensemble(), noise, opt);
    write_csv(res.trajectories, detail::path_in(out, "records.csv"));
    write_csv(res.stats, detail::path_in(out, "stats.csv"));
    o.outputs.push_back("records.csv");
    o.outputs.push_back("stats.csv");
    std::string fires = "traj_id,fired,t_fire,cause,min_kinetic_while_negative\n";
    for (std::size_t i = 0; i < res.trajectories.size(); ++i) {
      const auto& tr = res.trajectories[i];
      double kmin = std::numeric_limits<double>::infinity();
      for (const auto& r : tr.records)
        if (!r.diverged && r.energy < 0.0) kmin = std::min(kmin, r.kinetic);
      fires += std::to_string(i) + "," + (tr.blowup.fired ? "1" : "0") + "," + fmt_double(tr.blowup.t_fire) + "," +
               to_string(tr.blowup.cause) + "," + fmt_double(kmin) + "\n";
    }
    write_text(detail::path_in(out, "outcomes.csv"), fires);
    o.outputs.push_back("outcomes.csv");
    detail::line(rep, "trajectories", std::to_string(res.stats.n_traj));
    detail::line(rep, "detector_fired", std::to_string(res.stats.diverged));
    // Firing is the observed outcome here, so it does not change the exit code.
  }
  return o;
}

/// |u(x,t)| heatmaps for every (alpha, epsilon); the seed is shared across
/// alpha so each epsilon uses one noise path.
inline CommandOutcome cmd_figure_data(const RunConfig& c, const std::string& out) {
  CommandOutcome o;
  if (c.sim.grid.n != 1) throw ConfigError("grid.n", "figure-data needs a 1-d grid");
  const auto u0 = make_initial(c.initial, c.sim.grid);
  bool diverged = false;
  for (double eps : c.figure.epsilons) {
    const auto noise = make_noise(c.noise, c.sim.grid, eps);
    for (double alpha : c.figure.alphas) {
      SimConfig sim = c.sim;
      sim.params.alpha = alpha;
      RunOptions opt;
      opt.keep_snapshots = true;
      opt.weight = make_weight(c.virial, c.sim.grid);
      const auto res = run(u0, sim, noise, opt);
      std::vector<double> times;
      for (const auto& r : res.records) times.push_back(r.t);
      const std::string name = "heatmap_" + detail::short_number(alpha) + "_" + detail::short_number(eps) + ".csv";
      write_text(detail::path_in(out, name), heatmap_csv(times, res.snapshots));
      o.outputs.push_back(name);
      o.report += name + ": " + to_string(res.status) +
                  " mass_drift=" + fmt_double(detail::relative_mass_drift(res.records)) + "\n";
      diverged = diverged || res.status == RunStatus::diverged;
    }
  }
  if (diverged) {
    o.exit_code = kExitDiverged;
    o.status = "diverged";
  }
  return o;
}

inline CommandOutcome cmd_validate_config(const RunConfig& c, const std::string&) {
  CommandOutcome o;
  const auto noise = make_noise(c);
  const auto w = make_weight(c.virial, c.sim.grid);
  const auto hyp = hypotheses(c.sim.params);
  detail::line(o.report, "valid", "true");
  detail::line(o.report, "noise_modes", std::to_string(noise.size()));
  detail::line(o.report, "global_existence_hypotheses", hyp.global_existence ? "met" : "not met");
  detail::line(o.report, "blowup_hypotheses", hyp.blowup ? "met" : "not met");
  for (const auto& m : hyp.warnings) detail::line(o.report, "warning", m);
  if (!w.warning.empty()) detail::line(o.report, "weight_warning", w.warning);
  return o;
}

inline const std::map<std::string, std::function<CommandOutcome(const RunConfig&, const std::string&)>>&
command_table() {
  static const std::map<std::string, std::function<CommandOutcome(const RunConfig&, const std::string&)>> t{
      {"simulate", cmd_simulate},           {"ensemble", cmd_ensemble},
      {"dispersive", cmd_dispersive},       {"virial-check", cmd_virial_check},
      {"blowup-cert", cmd_blowup_cert},     {"figure-data", cmd_figure_data},
      {"validate-config", cmd_validate_config}};
  return t;
}

/// Full driver: read the config, run, write report.txt and manifest.json.
/// Diagnostics go to `err` as single lines "error[<kind>] <where>: <what>".
inline int run_command(const std::string& name, const std::string& config_path, const std::string& out,
                       std::optional<int> workers, std::ostream& err) {
  const auto& table = command_table();
  const auto it = table.find(name);
  if (it == table.end()) {
    err << "error[usage] unknown command " << name << "\n";
    return kExitInvalid;
  }
  RunConfig c;
  try {
    c = read_config(config_path);
    if (workers) {
      if (*workers < 1) throw ConfigError("--workers", "must be >= 1");
      c.workers = *workers;
    }
  } catch (const ConfigError& e) {
    err << "error[config] " << e.what() << "\n";
    return kExitInvalid;
  }
  if (!out.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) {
      err << "error[io] " << out << ": " << ec.message() << "\n";
      return kExitRuntime;
    }
  }

  const auto start = std::chrono::steady_clock::now();
  CommandOutcome o;
  try {
    o = it->second(c, out);
  } catch (const ConfigError& e) {
    err << "error[config] " << e.what() << "\n";
    return kExitInvalid;
  } catch (const AliasingError& e) {
    err << "error[noise] " << e.what() << " (set noise.alias to \"allow\" to keep aliased modes)\n";
    return kExitInvalid;
  } catch (const WraparoundError& e) {
    err << "error[wraparound] " << e.what() << "\n";
    return kExitInvalid;
  } catch (const InvalidArgument& e) {
    err << "error[invalid] " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error[runtime] " << e.what() << "\n";
    return kExitRuntime;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!out.empty()) {
    try {
      write_text(detail::path_in(out, "report.txt"), "command: " + name + "\n" + o.report);
      o.outputs.push_back("report.txt");
      write_text(detail::path_in(out, "manifest.json"), make_manifest(c, name, wall, o.status, o.outputs).dump(2) + "\n");
    } catch (const std::exception& e) {
      err << "error[io] " << e.what() << "\n";
      return kExitRuntime;
    }
  } else {
    std::cout << o.report;
  }
  return o.exit_code;
}

} // namespace sfnls

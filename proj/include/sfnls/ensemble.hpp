#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "sfnls/diagnostics.hpp"
#include "sfnls/integrator.hpp"
#include "sfnls/noise.hpp"

namespace sfnls {

struct EnsembleConfig {
  SimConfig sim;
  std::uint64_t base_seed = 0;
  int n_traj = 1;
  int workers = 1;

  void validate() const {
    sim.validate();
    if (n_traj < 1) throw InvalidArgument("ensemble n_traj must be >= 1");
    if (workers < 1) throw InvalidArgument("ensemble workers must be >= 1");
  }
};

/// Scalars averaged by the ensemble, in output column order.
inline constexpr std::array<const char*, 9> kStatFields{
    "mass", "kinetic", "potential", "energy", "virial", "lq_norm", "linf", "tail_mass", "martingale"};

inline double stat_field(const DiagnosticsRecord& r, std::size_t f) {
  switch (f) {
    case 0: return r.mass;
    case 1: return r.kinetic;
    case 2: return r.potential;
    case 3: return r.energy;
    case 4: return r.virial;
    case 5: return r.lq_norm;
    case 6: return r.linf;
    case 7: return r.tail_mass;
    default: return std::numeric_limits<double>::quiet_NaN();
  }
}

/// One-pass mean and variance (Welford), fed in a fixed order.
struct Welford {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double stderr_() const { return n > 0 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

struct EnsembleStats {
  std::vector<double> t;
  std::vector<std::int64_t> count; ///< live trajectories contributing at each sample
  std::array<std::vector<double>, kStatFields.size()> mean;
  std::array<std::vector<double>, kStatFields.size()> stderr_;
  int n_traj = 0;
  int diverged = 0;
  std::vector<double> fire_times; ///< per trajectory; NaN when it did not fire
  bool all_diverged = false;

  std::size_t samples() const { return t.size(); }
  std::size_t field_index(const std::string& name) const {
    for (std::size_t f = 0; f < kStatFields.size(); ++f)
      if (name == kStatFields[f]) return f;
    throw InvalidArgument("unknown ensemble field " + name);
  }
  const std::vector<double>& mean_of(const std::string& name) const { return mean[field_index(name)]; }
  const std::vector<double>& stderr_of(const std::string& name) const { return stderr_[field_index(name)]; }
};

struct EnsembleResult {
  EnsembleStats stats;
  std::vector<RunResult> trajectories; ///< indexed by trajectory id
  std::vector<std::uint64_t> seeds;
};

/// Reduce trajectories in index order. A trajectory contributes to a sample
/// only when that record exists and is not flagged diverged.
inline EnsembleStats reduce_ensemble(const std::vector<RunResult>& runs) {
  EnsembleStats st;
  st.n_traj = static_cast<int>(runs.size());
  std::size_t samples = 0;
  for (const auto& r : runs) samples = std::max(samples, r.records.size());
  st.t.assign(samples, std::numeric_limits<double>::quiet_NaN());
  st.count.assign(samples, 0);
  for (auto& m : st.mean) m.assign(samples, std::numeric_limits<double>::quiet_NaN());
  for (auto& s : st.stderr_) s.assign(samples, std::numeric_limits<double>::quiet_NaN());
  for (const auto& r : runs) {
    st.fire_times.push_back(r.blowup.fired ? r.blowup.t_fire : std::numeric_limits<double>::quiet_NaN());
    if (r.status == RunStatus::diverged) ++st.diverged;
  }
  st.all_diverged = st.diverged == st.n_traj;

  for (std::size_t s = 0; s < samples; ++s) {
    std::array<Welford, kStatFields.size()> acc;
    for (const auto& r : runs) {
      if (s >= r.records.size()) continue;
      const auto& rec = r.records[s];
      if (std::isnan(st.t[s])) st.t[s] = rec.t;
      if (rec.diverged) continue;
      for (std::size_t f = 0; f + 1 < kStatFields.size(); ++f) acc[f].add(stat_field(rec, f));
      acc.back().add(s < r.martingale.size() ? r.martingale[s] : 0.0);
    }
    st.count[s] = acc[0].n;
    if (acc[0].n == 0) continue;
    for (std::size_t f = 0; f < kStatFields.size(); ++f) {
      st.mean[f][s] = acc[f].mean;
      st.stderr_[f][s] = acc[f].stderr_();
    }
  }
  return st;
}

/// Run n_traj trajectories from the same initial field; trajectory i uses
/// seed derive_seed(base_seed, i). Workers pull trajectory ids from a shared
/// counter and write only their own result slot, so the output does not
/// depend on the worker count.
inline EnsembleResult run_ensemble(const ComplexField& initial, const EnsembleConfig& cfg,
                                   const NoiseModel& noise, const RunOptions& opt = {}) {
  cfg.validate();
  EnsembleResult res;
  res.trajectories.resize(cfg.n_traj);
  res.seeds.resize(cfg.n_traj);
  for (int i = 0; i < cfg.n_traj; ++i) res.seeds[i] = derive_seed(cfg.base_seed, static_cast<std::uint64_t>(i));

  RunOptions per = opt;
  per.observer = nullptr; // observers are not shared across threads
  if (!per.weight) per.weight = default_weight(cfg.sim.grid);

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int i = next++; i < cfg.n_traj; i = next++) {
      try {
        SimConfig sc = cfg.sim;
        sc.seed = res.seeds[i];
        res.trajectories[i] = run(initial, sc, noise, per);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int nw = std::min(cfg.workers, cfg.n_traj);
  if (nw == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  res.stats = reduce_ensemble(res.trajectories);
  return res;
}

/// C(n, alpha) with the alpha = 1 limit (the kernel constant vanishes).
inline double cn_alpha_or_limit(int n, double alpha) { return alpha == 1.0 ? 0.0 : cn_alpha(n, alpha); }

struct DriftCheck {
  bool skipped = false;
  std::string reason;
  bool passed = false;
  std::vector<double> bound;  ///< E[H(u0)] + (1/4) C t R E[M(u0)]
  std::vector<double> margin; ///< bound + 2 stderr - E[H(t)]
  double worst_margin = std::numeric_limits<double>::infinity();
  bool martingale_passed = true;
  double martingale_worst_z = 0.0; ///< max |mean| / stderr of the virial martingale
};

/// Mean-energy drift bound at every sample time, plus the virial
/// martingale zero-mean test (|mean| <= 3 stderr).
inline DriftCheck energy_drift_check(const EnsembleStats& st, double r_hat, int n, double alpha) {
  DriftCheck c;
  if (st.samples() == 0 || st.count[0] == 0) {
    c.skipped = true;
    c.reason = "no samples";
    return c;
  }
  if (!std::isfinite(r_hat)) {
    c.skipped = true;
    c.reason = "noise constant is not finite (mode sum does not converge)";
  }

  const auto& mart = st.mean_of("martingale");
  const auto& mart_se = st.stderr_of("martingale");
  for (std::size_t s = 0; s < st.samples(); ++s) {
    if (st.count[s] == 0) continue;
    const double m = mart[s], se = mart_se[s];
    if (se > 0.0) {
      c.martingale_worst_z = std::max(c.martingale_worst_z, std::abs(m) / se);
      if (std::abs(m) > 3.0 * se) c.martingale_passed = false;
    } else if (m != 0.0) {
      c.martingale_passed = false;
      c.martingale_worst_z = std::numeric_limits<double>::infinity();
    }
  }
  if (c.skipped) return c;

  const double C = cn_alpha_or_limit(n, alpha);
  const double h0 = st.mean_of("energy")[0], m0 = st.mean_of("mass")[0];
  const auto& H = st.mean_of("energy");
  const auto& se = st.stderr_of("energy");
  c.passed = true;
  for (std::size_t s = 0; s < st.samples(); ++s) {
    const double b = h0 + 0.25 * C * st.t[s] * r_hat * m0;
    c.bound.push_back(b);
    if (st.count[s] == 0) {
      c.margin.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const double mg = b + 2.0 * se[s] - H[s];
    c.margin.push_back(mg);
    c.worst_margin = std::min(c.worst_margin, mg);
    if (!(mg >= 0.0)) c.passed = false;
  }
  return c;
}

} // namespace sfnls

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sfnls/diagnostics.hpp"
#include "sfnls/flows.hpp"
#include "sfnls/grid.hpp"
#include "sfnls/noise.hpp"
#include "sfnls/spectral.hpp"
#include "sfnls/weight.hpp"

namespace sfnls {

enum class Scheme { lie, strang };

inline const char* to_string(Scheme s) { return s == Scheme::lie ? "lie" : "strang"; }

struct SimConfig {
  FracParams params;
  GridSpec grid;
  double dt = 0.01;
  double t_final = 1.0;
  Scheme scheme = Scheme::strang;
  std::uint64_t seed = 0;
  int sample_every = 1;
  bool dealias = false; ///< 2/3-rule truncation after each nonlinear substep
  BlowupGuard guard;

  void validate() const {
    grid.validate();
    params.validate();
    if (params.n != grid.n) throw InvalidArgument("params dimension differs from grid dimension");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be positive");
    if (!(t_final >= 0.0) || !std::isfinite(t_final)) throw InvalidArgument("t_final must be >= 0");
    if (sample_every < 1) throw InvalidArgument("sample_every must be >= 1");
    const double s = t_final / dt;
    if (std::abs(s - std::round(s)) > 1e-9 * std::max(1.0, s))
      throw InvalidArgument("t_final must be an integer multiple of dt");
  }

  std::int64_t steps() const { return static_cast<std::int64_t>(std::llround(t_final / dt)); }
};

/// One-trajectory time stepper with precomputed multipliers.
///
/// Strang: linear(dt/2), then noise and nonlinear phases over dt (they
/// commute pointwise), then linear(dt/2). Lie: noise, nonlinear, linear.
class Stepper {
public:
  explicit Stepper(const SimConfig& cfg) : cfg_(cfg), plan_(FftPlan::get(cfg.grid)) {
    cfg_.validate();
    FrequencyTable freq(cfg.grid);
    const double h = cfg.scheme == Scheme::strang ? 0.5 * cfg.dt : cfg.dt;
    const double inv = 1.0 / static_cast<double>(cfg.grid.size());
    lin_.resize(cfg.grid.size());
    for (std::size_t k = 0; k < lin_.size(); ++k)
      lin_[k] = std::polar(inv, -h * xi_power(freq.xi_sq[k], cfg.params.alpha));
    if (cfg.dealias) {
      keep_.assign(cfg.grid.size(), 1);
      const int cut = cfg.grid.N / 3;
      for (std::size_t k = 0; k < keep_.size(); ++k) {
        const auto ij = cfg.grid.unflatten(k);
        for (int a = 0; a < cfg.grid.n; ++a)
          if (std::abs(cfg.grid.signed_index(ij[a])) > cut) keep_[k] = 0;
      }
    }
  }

  const SimConfig& config() const { return cfg_; }

  /// Advance u by one dt. `increment` may be null (no noise).
  void advance(ComplexField& u, const std::vector<double>* increment) const {
    if (cfg_.scheme == Scheme::strang) {
      linear(u);
      phases(u, increment);
      linear(u);
    } else {
      phases(u, increment);
      linear(u);
    }
  }

private:
  void linear(ComplexField& u) const {
    plan_->forward(u.values.data());
    for (std::size_t k = 0; k < lin_.size(); ++k) u.values[k] *= lin_[k];
    plan_->backward(u.values.data());
  }

  void phases(ComplexField& u, const std::vector<double>* increment) const {
    if (increment) noise_step_inplace(u, *increment);
    nonlinear_step_inplace(u, cfg_.params.sigma, cfg_.dt);
    if (!keep_.empty()) {
      plan_->forward(u.values.data());
      const double inv = 1.0 / static_cast<double>(u.size());
      for (std::size_t k = 0; k < keep_.size(); ++k) u.values[k] *= keep_[k] ? inv : 0.0;
      plan_->backward(u.values.data());
    }
  }

  SimConfig cfg_;
  std::shared_ptr<const FftPlan> plan_;
  std::vector<cplx> lin_; ///< includes the 1/N^n inverse normalization
  std::vector<char> keep_;
};

/// One step from `u` with a fresh increment drawn from `rng`.
inline ComplexField step(const ComplexField& u, const SimConfig& cfg, const NoiseModel& noise, NormalSource& rng) {
  require_same_grid(u.grid, cfg.grid, "step");
  Stepper s(cfg);
  ComplexField out = u;
  if (noise.size() > 0 && noise.epsilon > 0.0) {
    const auto inc = sample_increment(noise, cfg.dt, rng);
    s.advance(out, &inc.values);
  } else {
    s.advance(out, nullptr);
  }
  return out;
}

enum class RunStatus { completed, diverged };

inline const char* to_string(RunStatus s) { return s == RunStatus::completed ? "completed" : "diverged"; }

struct RunOptions {
  /// Weight for the virial column; defaults to R = L/20 about the box center.
  std::optional<VirialWeight> weight;
  bool keep_snapshots = false;
  /// Accumulate the virial noise martingale sum_k c_k(u) dbeta_k.
  bool track_martingale = false;
  /// Called at every sample with the record and the current field.
  std::function<void(const DiagnosticsRecord&, const ComplexField&)> observer;
};

struct RunResult {
  RunStatus status = RunStatus::completed;
  std::vector<DiagnosticsRecord> records;
  std::vector<ComplexField> snapshots; ///< one per record when requested
  std::vector<double> martingale;      ///< cumulative virial martingale at each record
  BlowupReport blowup;
  ComplexField final_field;
};

inline VirialWeight default_weight(const GridSpec& g) { return build_virial_weight(g.L / 20.0, g); }

/// Integrate from t = 0 to t_final, sampling every `sample_every` steps
/// (and always at t = 0 and at the last step). Stops at the first sample
/// that trips the guard.
inline RunResult run(const ComplexField& initial, const SimConfig& cfg, const NoiseModel& noise,
                     const RunOptions& opt = {}) {
  cfg.validate();
  require_same_grid(initial.grid, cfg.grid, "run: initial field");
  require_same_grid(noise.grid, cfg.grid, "run: noise model");
  const VirialWeight weight = opt.weight ? *opt.weight : default_weight(cfg.grid);
  require_same_grid(weight.grid, cfg.grid, "run: virial weight");

  Stepper stepper(cfg);
  NormalSource rng(cfg.seed);
  const bool noisy = noise.size() > 0 && noise.epsilon > 0.0;
  const double sqdt = std::sqrt(cfg.dt);

  RunResult res;
  ComplexField u = initial;
  double mart = 0.0;
  auto sample = [&](double t) {
    DiagnosticsRecord r = make_record(u, cfg.params, weight, t);
    const auto cause = res.records.empty() ? guard_check(r, r, cfg.guard)
                                           : guard_check(res.records.front(), r, cfg.guard);
    if (cause != BlowupCause::none) {
      r.diverged = true;
      res.status = RunStatus::diverged;
      res.blowup = {true, t, cause, res.records.size()};
    }
    res.records.push_back(r);
    if (opt.keep_snapshots) res.snapshots.push_back(u);
    if (opt.track_martingale) res.martingale.push_back(mart);
    if (opt.observer) opt.observer(r, u);
    return cause == BlowupCause::none;
  };

  const std::int64_t steps = cfg.steps();
  if (sample(0.0)) {
    for (std::int64_t s = 1; s <= steps; ++s) {
      if (noisy) {
        const auto inc = sample_increment(noise, cfg.dt, rng);
        if (opt.track_martingale) {
          // Noise substep sees the field after the first linear half (Strang)
          // or the field itself (Lie); the virial jump of the exact phase
          // step is sum_k c_k g_k sqrt(dt) evaluated there.
          ComplexField pre = u;
          if (cfg.scheme == Scheme::strang) pre = linear_step(u, cfg.params.alpha, 0.5 * cfg.dt);
          const auto c = virial_martingale_coefficients(pre, weight, noise);
          for (std::size_t k = 0; k < c.size(); ++k) mart += c[k] * inc.draws[k] * sqdt;
        }
        stepper.advance(u, &inc.values);
      } else {
        stepper.advance(u, nullptr);
      }
      if (s % cfg.sample_every == 0 || s == steps) {
        if (!sample(static_cast<double>(s) * cfg.dt)) break;
      }
    }
  }
  res.final_field = std::move(u);
  return res;
}

} // namespace sfnls

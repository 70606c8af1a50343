#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "sfnls/grid.hpp"
#include "sfnls/smoothstep.hpp"
#include "sfnls/spectral.hpp"

namespace sfnls {

/// One real mode function Phi e_k sampled on the grid, with its gradient.
struct NoiseMode {
  int index = 0;
  std::vector<double> values;
  std::vector<std::vector<double>> gradient; ///< one component per axis
};

/// Q-Wiener noise W = sum_k beta_k Phi e_k with amplitude epsilon.
///
/// f_phi = sum_k (Phi e_k)^2 and hs_norm_sq = sum_k ||Phi e_k||_2^2 refer to
/// the raw modes; the increments carry the factor epsilon.
struct NoiseModel {
  GridSpec grid;
  std::vector<NoiseMode> modes;
  double epsilon = 0.0;
  std::vector<double> f_phi;
  double hs_norm_sq = 0.0;

  std::size_t size() const noexcept { return modes.size(); }

  /// Assemble from raw mode samples; derived fields are computed here.
  static NoiseModel from_modes(const GridSpec& g, std::vector<NoiseMode> modes, double eps) {
    if (!(eps >= 0.0) || !std::isfinite(eps))
      throw InvalidArgument("noise epsilon must be finite and >= 0");
    NoiseModel m;
    m.grid = g;
    m.epsilon = eps;
    m.f_phi.assign(g.size(), 0.0);
    for (auto& mode : modes) {
      if (mode.values.size() != g.size()) throw GridMismatch("noise mode length mismatch");
      for (double v : mode.values)
        if (!std::isfinite(v)) throw InvalidArgument("noise mode values must be finite");
      if (mode.gradient.empty()) mode.gradient = spectral_gradient_real(g, mode.values);
      double l2 = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        m.f_phi[i] += mode.values[i] * mode.values[i];
        l2 += mode.values[i] * mode.values[i];
      }
      m.hs_norm_sq += l2 * g.cell();
    }
    m.modes = std::move(modes);
    return m;
  }
};

enum class AliasPolicy { reject, allow };

/// Phi e_l(x) = cos(pi l x) / l for l = 1..K, x the first coordinate.
///
/// With AliasPolicy::reject, a mode whose frequency pi*l exceeds the lattice
/// maximum pi*N/L raises AliasingError naming l.
inline NoiseModel build_cosine_model(int K, const GridSpec& g, double eps,
                                     AliasPolicy policy = AliasPolicy::reject) {
  if (K < 0) throw InvalidArgument("noise K must be >= 0");
  std::vector<NoiseMode> modes;
  modes.reserve(K);
  for (int l = 1; l <= K; ++l) {
    const double freq = std::numbers::pi * l;
    if (policy == AliasPolicy::reject && freq > g.max_wavenumber() * (1.0 + 1e-12))
      throw AliasingError(l, freq, g.max_wavenumber());
    NoiseMode mode;
    mode.index = l;
    if (g.n == 1) {
      mode.values = sample_real(g, [&](double x) { return std::cos(freq * x) / l; });
    } else {
      mode.values = sample_real(g, [&](double x, double) { return std::cos(freq * x) / l; });
    }
    if (policy == AliasPolicy::allow) {
      // Analytic gradient; a spectral one is meaningless for aliased modes.
      mode.gradient.assign(g.n, std::vector<double>(g.size(), 0.0));
      mode.gradient[0] = g.n == 1
          ? sample_real(g, [&](double x) { return -std::numbers::pi * std::sin(freq * x); })
          : sample_real(g, [&](double x, double) { return -std::numbers::pi * std::sin(freq * x); });
    }
    modes.push_back(std::move(mode));
  }
  return NoiseModel::from_modes(g, std::move(modes), eps);
}

/// A single Gaussian bump mode a * exp(-|x - c|^2 / (2 w^2)).
inline NoiseModel build_bump_model(const GridSpec& g, double eps, double amplitude, double width,
                                   std::array<double, 2> center) {
  if (!(width > 0.0)) throw InvalidArgument("bump width must be positive");
  NoiseMode mode;
  mode.index = 1;
  const double s = 1.0 / (2.0 * width * width);
  if (g.n == 1) {
    mode.values = sample_real(g, [&](double x) {
      const double d = x - center[0];
      return amplitude * std::exp(-s * d * d);
    });
  } else {
    mode.values = sample_real(g, [&](double x, double y) {
      const double dx = x - center[0], dy = y - center[1];
      return amplitude * std::exp(-s * (dx * dx + dy * dy));
    });
  }
  std::vector<NoiseMode> modes;
  modes.push_back(std::move(mode));
  return NoiseModel::from_modes(g, std::move(modes), eps);
}

/// rho(t): 0 on [0, 1/2], 1 on [1, inf), smooth monotone in between.
inline double cutoff_profile(double t) { return Smoothstep9::value(2.0 * t - 1.0); }

/// Family Phi e_k(x) = rho(|x - c| / k) for the given scales k.
inline NoiseModel build_cutoff_family(const GridSpec& g, double eps, const std::vector<int>& scales,
                                      std::array<double, 2> center) {
  std::vector<NoiseMode> modes;
  for (int k : scales) {
    if (k <= 0) throw InvalidArgument("cutoff scales must be positive");
    NoiseMode mode;
    mode.index = k;
    if (g.n == 1) {
      mode.values =
          sample_real(g, [&](double x) { return cutoff_profile(std::abs(x - center[0]) / k); });
    } else {
      mode.values = sample_real(g, [&](double x, double y) {
        return cutoff_profile(std::hypot(x - center[0], y - center[1]) / k);
      });
    }
    modes.push_back(std::move(mode));
  }
  return NoiseModel::from_modes(g, std::move(modes), eps);
}

inline NoiseModel build_zero_model(const GridSpec& g) { return NoiseModel::from_modes(g, {}, 0.0); }

/// 64-bit finalizer of SplitMix64 (Steele, Lea, Flood).
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of trajectory `index` under `base_seed`:
/// splitmix64(splitmix64(base_seed) ^ (index * 0xD1B54A32D192ED03)).
constexpr std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(base_seed) ^ (index * 0xD1B54A32D192ED03ULL));
}

/// Standard normal draws from a seeded mt19937_64. One per trajectory.
class NormalSource {
public:
  explicit NormalSource(std::uint64_t seed) : engine_(seed) {}
  double operator()() { return dist_(engine_); }

private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

/// Delta W(x) over one step, plus the standard normals g_k behind it.
struct WienerIncrement {
  std::vector<double> values;
  double dt = 0.0;
  std::vector<double> draws;
};

/// Delta W = epsilon * sum_k Phi e_k * g_k * sqrt(dt), drawn mode-wise
/// so the spatial covariance of W is exact.
inline WienerIncrement sample_increment(const NoiseModel& model, double dt, NormalSource& rng) {
  if (!(dt > 0.0)) throw InvalidArgument("sample_increment: dt must be positive");
  WienerIncrement inc;
  inc.dt = dt;
  inc.values.assign(model.grid.size(), 0.0);
  inc.draws.resize(model.size());
  const double scale = model.epsilon * std::sqrt(dt);
  for (std::size_t k = 0; k < model.size(); ++k) {
    inc.draws[k] = rng();
    const double c = scale * inc.draws[k];
    if (c == 0.0) continue;
    const auto& v = model.modes[k].values;
    for (std::size_t i = 0; i < v.size(); ++i) inc.values[i] += c * v[i];
  }
  return inc;
}

/// Estimate of sup_x sum_k int (Phi e_k(x) - Phi e_k(y))^2 / |x-y|^{n+2 alpha} dy.
struct PhicondEstimate {
  double value = 0.0;                ///< sup over grid points of the mode sum
  bool converged = true;             ///< false when the mode sum fails the tail test
  double tail_exponent = std::numeric_limits<double>::quiet_NaN(); ///< fitted decay of per-mode sups
  std::vector<double> per_mode_sup; ///< sup_x of each single-mode integral
  std::string note;

  /// The constant for the noise actually driving the equation (amplitude epsilon).
  double effective(double epsilon, double safety = 1.0) const {
    return converged ? safety * epsilon * epsilon * value : std::numeric_limits<double>::infinity();
  }
};

namespace detail {

/// Least-squares slope and intercept of y against x.
inline std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {slope, (sy - slope * sx) / n};
}

} // namespace detail

/// Quadrature estimate of the Phicond constant over the periodic box.
///
/// Off-diagonal cells use nearest-image distances. The singular cell is
/// bounded with |Phi e_k(x) - Phi e_k(y)|^2 <= ||grad Phi e_k||_inf^2 |x-y|^2,
/// integrated over the cell (n = 1) or its equal-area disk (n = 2).
/// With at least four modes, per-mode sups over the upper half of the
/// indices are fitted to k^p; p >= -1 marks the sum as divergent.
inline PhicondEstimate estimate_phicond_constant(const NoiseModel& model, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("phicond: alpha must lie in (0,1)");
  const GridSpec& g = model.grid;
  const int N = g.N;
  const double dx = g.dx();
  const double expo = g.n + 2.0 * alpha;

  auto wrap = [&](int d) { return d > N / 2 ? d - N : (d < -N / 2 ? d + N : d); };
  // Kernel weight per periodic offset.
  std::vector<double> kernel(g.size(), 0.0);
  for (std::size_t idx = 1; idx < g.size(); ++idx) {
    const auto ij = g.unflatten(idx);
    double r2 = 0.0;
    for (int a = 0; a < g.n; ++a) {
      const double d = wrap(ij[a]) * dx;
      r2 += d * d;
    }
    kernel[idx] = g.cell() / std::pow(r2, 0.5 * expo);
  }
  const double cell_integral =
      g.n == 1 ? 2.0 * std::pow(0.5 * dx, 2.0 - 2.0 * alpha) / (2.0 - 2.0 * alpha)
               : 2.0 * std::numbers::pi * std::pow(dx / std::sqrt(std::numbers::pi), 2.0 - 2.0 * alpha) /
                     (2.0 - 2.0 * alpha);

  const auto plan = FftPlan::get(g);
  const double inv = 1.0 / static_cast<double>(g.size());
  double kernel_sum = 0.0;
  std::vector<cplx> kernel_hat(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    kernel_sum += kernel[i];
    kernel_hat[i] = kernel[i];
  }
  plan->forward(kernel_hat.data());

  PhicondEstimate est;
  std::vector<double> total(g.size(), 0.0);
  for (const auto& mode : model.modes) {
    double grad_sup_sq = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      double s = 0.0;
      for (int a = 0; a < g.n; ++a) s += mode.gradient[a][i] * mode.gradient[a][i];
      grad_sup_sq = std::max(grad_sup_sq, s);
    }
    // sum_j K(i-j) (v_i - v_j)^2 = v_i^2 sum K - 2 v_i (K*v)_i + (K*v^2)_i,
    // the two circular convolutions done by FFT.
    const auto& v = mode.values;
    std::vector<cplx> a(g.size()), b(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      a[i] = v[i];
      b[i] = v[i] * v[i];
    }
    plan->forward(a.data());
    plan->forward(b.data());
    for (std::size_t k = 0; k < g.size(); ++k) {
      a[k] *= kernel_hat[k] * inv;
      b[k] *= kernel_hat[k] * inv;
    }
    plan->backward(a.data());
    plan->backward(b.data());
    double mode_sup = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double s = grad_sup_sq * cell_integral + v[i] * v[i] * kernel_sum - 2.0 * v[i] * a[i].real() +
                       b[i].real();
      total[i] += s;
      mode_sup = std::max(mode_sup, s);
    }
    est.per_mode_sup.push_back(mode_sup);
  }
  est.value = model.modes.empty() ? 0.0 : *std::max_element(total.begin(), total.end());

  const std::size_t K = model.modes.size();
  if (K >= 4) {
    std::vector<double> lx, ly;
    for (std::size_t k = K / 2; k < K; ++k) {
      if (est.per_mode_sup[k] <= 0.0) continue;
      lx.push_back(std::log(static_cast<double>(model.modes[k].index)));
      ly.push_back(std::log(est.per_mode_sup[k]));
    }
    if (lx.size() >= 2) {
      est.tail_exponent = detail::linear_fit(lx, ly).first;
      if (est.tail_exponent >= -1.0) {
        est.converged = false;
        est.note = "mode sum diverges: per-mode contributions decay like k^" +
                   std::to_string(est.tail_exponent) + " (needs exponent < -1)";
      }
    }
  }
  return est;
}

} // namespace sfnls

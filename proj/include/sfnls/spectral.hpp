#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "sfnls/fft.hpp"
#include "sfnls/grid.hpp"

namespace sfnls {

// Fourier convention
// ------------------
// transform_forward is the unnormalized DFT, transform_inverse divides by
// N^n. With dV = dx^n the discrete Parseval identity reads
//
//     dV * sum_j |u_j|^2 = (dV / N^n) * sum_k |u^_k|^2
//
// and every spectral quadrature below uses the right-hand form.

inline SpectralField transform_forward(const ComplexField& field) {
  if (field.values.size() != field.grid.size())
    throw GridMismatch("transform_forward: field length does not match its grid");
  SpectralField out(field.grid);
  out.coeffs = field.values;
  FftPlan::get(field.grid)->forward(out.coeffs.data());
  return out;
}

inline ComplexField transform_inverse(const SpectralField& spec) {
  if (spec.coeffs.size() != spec.grid.size())
    throw GridMismatch("transform_inverse: coefficient count does not match its grid");
  ComplexField out(spec.grid);
  out.values = spec.coeffs;
  FftPlan::get(spec.grid)->backward(out.values.data());
  const double scale = 1.0 / static_cast<double>(spec.grid.size());
  for (auto& v : out.values) v *= scale;
  return out;
}

/// Per-index frequency data of a grid.
struct FrequencyTable {
  GridSpec grid;
  std::vector<double> xi_sq;             ///< |xi|^2
  std::array<std::vector<double>, 2> xi; ///< axis components
  /// Axis components with the Nyquist index zeroed, used for derivatives.
  std::array<std::vector<double>, 2> xi_deriv;

  explicit FrequencyTable(const GridSpec& g) : grid(g), xi_sq(g.size()) {
    for (int a = 0; a < g.n; ++a) {
      xi[a].resize(g.size());
      xi_deriv[a].resize(g.size());
    }
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
      const auto ij = g.unflatten(idx);
      double s = 0.0;
      for (int a = 0; a < g.n; ++a) {
        const double k = g.wavenumber(ij[a]);
        xi[a][idx] = k;
        xi_deriv[a][idx] = g.is_nyquist(ij[a]) ? 0.0 : k;
        s += k * k;
      }
      xi_sq[idx] = s;
    }
  }

  double min_nonzero_xi_sq() const {
    const double k = 2.0 * std::numbers::pi / grid.L;
    return k * k;
  }
  double max_xi_sq() const {
    const double k = grid.max_wavenumber();
    return grid.n * k * k;
  }
};

/// Multiply the spectrum by symbol(|xi|^2) and return to physical space.
template <class Symbol>
ComplexField apply_radial_multiplier(const ComplexField& field, Symbol&& symbol) {
  FrequencyTable freq(field.grid);
  SpectralField spec = transform_forward(field);
  for (std::size_t k = 0; k < spec.coeffs.size(); ++k) spec.coeffs[k] *= symbol(freq.xi_sq[k]);
  return transform_inverse(spec);
}

/// |xi|^{2s} with the convention 0^0 = 1 and 0^s = 0 for s > 0.
inline double xi_power(double xi_sq, double s) {
  if (s == 0.0) return 1.0;
  if (xi_sq == 0.0) return 0.0;
  return std::pow(xi_sq, s);
}

/// (-Delta)^alpha as the Fourier multiplier |xi|^{2 alpha}.
inline ComplexField apply_fractional_laplacian(const ComplexField& field, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw InvalidArgument("apply_fractional_laplacian: alpha must lie in (0,1]");
  return apply_radial_multiplier(field, [alpha](double xs) { return xi_power(xs, alpha); });
}

/// (dx^n sum |u_j|^p)^{1/p}; p = infinity gives the max norm.
inline double lp_norm(const ComplexField& field, double p) {
  if (!(p >= 1.0)) throw InvalidArgument("lp_norm: p must be >= 1");
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& v : field.values) m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0.0;
  if (p == 2.0) {
    for (const auto& v : field.values) s += std::norm(v);
    return std::sqrt(field.grid.cell() * s);
  }
  for (const auto& v : field.values) s += std::pow(std::abs(v), p);
  return std::pow(field.grid.cell() * s, 1.0 / p);
}

inline double l2_norm(const ComplexField& field) { return lp_norm(field, 2.0); }

/// Mass M(u) = ||u||_2^2.
inline double mass(const ComplexField& field) {
  double s = 0.0;
  for (const auto& v : field.values) s += std::norm(v);
  return field.grid.cell() * s;
}

/// ||(-Delta)^{s/2} u||_2 from an already transformed field.
inline double sobolev_seminorm(const SpectralField& spec, double s) {
  if (!(s >= 0.0)) throw InvalidArgument("sobolev_seminorm: s must be >= 0");
  FrequencyTable freq(spec.grid);
  double acc = 0.0;
  for (std::size_t k = 0; k < spec.coeffs.size(); ++k)
    acc += xi_power(freq.xi_sq[k], s) * std::norm(spec.coeffs[k]);
  return std::sqrt(acc * spec.grid.cell() / static_cast<double>(spec.grid.size()));
}

inline double sobolev_seminorm(const ComplexField& field, double s) {
  return sobolev_seminorm(transform_forward(field), s);
}

/// C(n, alpha) = alpha 4^alpha Gamma((n + 2 alpha)/2) / (pi^{n/2} Gamma(1 - alpha)),
/// the constant of the singular-integral form of (-Delta)^alpha.
inline double cn_alpha(int n, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("cn_alpha: alpha must lie in (0,1)");
  if (n < 1) throw InvalidArgument("cn_alpha: n must be >= 1");
  return alpha * std::pow(4.0, alpha) * std::tgamma(0.5 * (n + 2.0 * alpha)) /
         (std::pow(std::numbers::pi, 0.5 * n) * std::tgamma(1.0 - alpha));
}

/// Spectral gradient; one field per axis. The Nyquist index of each axis
/// is zeroed so real data stay real.
inline std::vector<ComplexField> spectral_gradient(const ComplexField& field) {
  const GridSpec& g = field.grid;
  FrequencyTable freq(g);
  SpectralField spec = transform_forward(field);
  std::vector<ComplexField> out;
  out.reserve(g.n);
  const cplx I(0.0, 1.0);
  for (int a = 0; a < g.n; ++a) {
    SpectralField d(g);
    for (std::size_t k = 0; k < spec.coeffs.size(); ++k)
      d.coeffs[k] = I * freq.xi_deriv[a][k] * spec.coeffs[k];
    out.push_back(transform_inverse(d));
  }
  return out;
}

/// Gradient of a real field, returned as real components.
inline std::vector<std::vector<double>> spectral_gradient_real(const GridSpec& g,
                                                               const std::vector<double>& f) {
  ComplexField c(g);
  for (std::size_t i = 0; i < f.size(); ++i) c[i] = f[i];
  auto grad = spectral_gradient(c);
  std::vector<std::vector<double>> out(g.n, std::vector<double>(g.size()));
  for (int a = 0; a < g.n; ++a)
    for (std::size_t i = 0; i < f.size(); ++i) out[a][i] = grad[a][i].real();
  return out;
}

} // namespace sfnls

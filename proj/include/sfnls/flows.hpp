#pragma once

#include <cmath>

#include "sfnls/grid.hpp"
#include "sfnls/noise.hpp"
#include "sfnls/spectral.hpp"

namespace sfnls {

// Exact flows of the three pieces of
//     i du = [(-Delta)^alpha u - |u|^{2 sigma} u] dt + u o dW.
// Each is a unimodular multiplier (in Fourier or physical space), so each
// preserves the discrete mass up to rounding.

/// u^_k <- exp(-i dt |xi_k|^{2 alpha}) u^_k.
inline ComplexField linear_step(const ComplexField& field, double alpha, double dt) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("linear_step: alpha must lie in (0,1]");
  return apply_radial_multiplier(field, [&](double xs) {
    return std::polar(1.0, -dt * xi_power(xs, alpha));
  });
}

/// u <- u exp(+i |u|^{2 sigma} dt), the exact flow of i u_t = -|u|^{2 sigma} u.
inline void nonlinear_step_inplace(ComplexField& field, double sigma, double dt) {
  for (auto& v : field.values) {
    const double a2 = std::norm(v);
    const double phase = (sigma == 1.0 ? a2 : std::pow(a2, sigma)) * dt;
    v *= std::polar(1.0, phase);
  }
}

inline ComplexField nonlinear_step(const ComplexField& field, double sigma, double dt) {
  if (!(sigma > 0.0)) throw InvalidArgument("nonlinear_step: sigma must be positive");
  ComplexField out = field;
  nonlinear_step_inplace(out, sigma, dt);
  return out;
}

/// u <- u exp(-i Delta W(x)): the exact Stratonovich step of i du = u o dW.
/// The Ito correction -(1/2) i u F_Phi dt is contained in the exponential.
inline void noise_step_inplace(ComplexField& field, const std::vector<double>& increment) {
  if (increment.size() != field.size()) throw GridMismatch("noise_step: increment length mismatch");
  for (std::size_t i = 0; i < increment.size(); ++i) field[i] *= std::polar(1.0, -increment[i]);
}

inline ComplexField noise_step(const ComplexField& field, const WienerIncrement& increment) {
  ComplexField out = field;
  noise_step_inplace(out, increment.values);
  return out;
}

/// Complex-valued increments are not phase noise; rejected explicitly.
inline ComplexField noise_step(const ComplexField& field, const std::vector<cplx>& increment) {
  std::vector<double> re(increment.size());
  for (std::size_t i = 0; i < increment.size(); ++i) {
    if (increment[i].imag() != 0.0) throw InvalidArgument("noise_step: increment must be real");
    re[i] = increment[i].real();
  }
  ComplexField out = field;
  noise_step_inplace(out, re);
  return out;
}

} // namespace sfnls

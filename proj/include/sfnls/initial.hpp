#pragma once

#include <cmath>
#include <string>

#include "sfnls/error.hpp"
#include "sfnls/grid.hpp"

namespace sfnls {

/// Initial datum description. Profiles are radial about `center` (on every
/// axis) and carry a plane-wave factor exp(i k x) along the first axis.
///
///   sech:     amplitude * sech(r / width)
///   gaussian: amplitude * exp(-r^2 / (2 width^2))
///   soliton:  sqrt(2) sech(r), the alpha = 1, sigma = 1 ground state (1-d)
struct InitialSpec {
  std::string type = "sech";
  double amplitude = 1.0;
  double width = 1.0;
  double center = 0.0;
  double wavenumber = 0.0;

  void validate() const {
    if (type != "sech" && type != "gaussian" && type != "soliton")
      throw ConfigError("initial.type", "expected sech, gaussian or soliton, got \"" + type + "\"");
    if (!(width > 0.0)) throw ConfigError("initial.width", "must be positive");
    if (!std::isfinite(amplitude)) throw ConfigError("initial.amplitude", "must be finite");
  }
};

inline double initial_profile(const InitialSpec& s, double r) {
  if (s.type == "gaussian") return s.amplitude * std::exp(-0.5 * r * r / (s.width * s.width));
  if (s.type == "soliton") return std::sqrt(2.0) / std::cosh(r);
  return s.amplitude / std::cosh(r / s.width);
}

inline ComplexField make_initial(const InitialSpec& s, const GridSpec& g) {
  s.validate();
  auto phase = [&](double x) { return std::polar(1.0, s.wavenumber * x); };
  if (g.n == 1)
    return sample(g, [&](double x) { return initial_profile(s, std::abs(x - s.center)) * phase(x); });
  return sample(g, [&](double x, double y) {
    return initial_profile(s, std::hypot(x - s.center, y - s.center)) * phase(x);
  });
}

} // namespace sfnls

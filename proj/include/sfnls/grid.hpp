#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <type_traits>
#include <vector>

#include "sfnls/error.hpp"

namespace sfnls {

using cplx = std::complex<double>;

/// Periodic box [origin, origin + L)^n sampled at N points per axis.
///
/// Points are x_j = origin + j*dx, dx = L/N. Storage for n = 2 is row
/// major with the first axis slowest. Axis frequencies are
/// xi_k = 2*pi*k~/L with k~ in {-N/2, ..., N/2-1}; k~ = -N/2 is the single
/// Nyquist mode.
struct GridSpec {
  int n = 1;
  double L = 1.0;
  int N = 8;
  double origin = 0.0;

  GridSpec() = default;
  GridSpec(int dim, double length, int points, double x0 = 0.0)
      : n(dim), L(length), N(points), origin(x0) {
    validate();
  }

  void validate() const {
    if (n != 1 && n != 2)
      throw InvalidArgument("grid dimension must be 1 or 2, got " + std::to_string(n));
    if (N < 8 || N % 2 != 0)
      throw InvalidArgument("grid N must be even and >= 8, got " + std::to_string(N));
    if (!(L > 0.0) || !std::isfinite(L))
      throw InvalidArgument("grid length must be positive");
  }

  double dx() const noexcept { return L / N; }
  /// Quadrature weight dx^n.
  double cell() const noexcept { return n == 1 ? dx() : dx() * dx(); }
  std::size_t size() const noexcept {
    return n == 1 ? static_cast<std::size_t>(N) : static_cast<std::size_t>(N) * N;
  }
  double coord(int j) const noexcept { return origin + j * dx(); }
  double center() const noexcept { return origin + 0.5 * L; }

  /// Signed lattice index k~ for storage index k along one axis.
  int signed_index(int k) const noexcept { return k < N / 2 ? k : k - N; }
  double wavenumber(int k) const noexcept {
    return 2.0 * std::numbers::pi * signed_index(k) / L;
  }
  bool is_nyquist(int k) const noexcept { return k == N / 2; }
  double max_wavenumber() const noexcept { return std::numbers::pi * N / L; }

  /// Axis coordinates of a flat index.
  std::array<int, 2> unflatten(std::size_t idx) const noexcept {
    if (n == 1) return {static_cast<int>(idx), 0};
    return {static_cast<int>(idx / N), static_cast<int>(idx % N)};
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

inline void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) throw GridMismatch(std::string(what) + ": grids differ");
}

/// Complex samples of a field on a grid (physical space).
struct ComplexField {
  GridSpec grid;
  std::vector<cplx> values;

  ComplexField() = default;
  explicit ComplexField(const GridSpec& g) : grid(g), values(g.size()) {}
  ComplexField(const GridSpec& g, std::vector<cplx> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size())
      throw GridMismatch("field length " + std::to_string(values.size()) +
                         " does not match grid size " + std::to_string(grid.size()));
  }

  std::size_t size() const noexcept { return values.size(); }
  cplx& operator[](std::size_t i) noexcept { return values[i]; }
  const cplx& operator[](std::size_t i) const noexcept { return values[i]; }

  bool finite() const noexcept {
    for (const auto& v : values)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }
};

/// Fourier coefficients of a ComplexField under the unnormalized forward
/// convention u^_k = sum_j u_j exp(-2 pi i j.k / N).
struct SpectralField {
  GridSpec grid;
  std::vector<cplx> coeffs;

  SpectralField() = default;
  explicit SpectralField(const GridSpec& g) : grid(g), coeffs(g.size()) {}
};

/// Sample f(x) (n = 1) or f(x, y) (n = 2) on the grid.
template <class F>
ComplexField sample(const GridSpec& g, F&& f) {
  ComplexField out(g);
  if constexpr (std::is_invocable_v<F&, double>) {
    if (g.n != 1) throw InvalidArgument("sample: one-argument function on a 2-d grid");
    for (int j = 0; j < g.N; ++j) out[j] = cplx(f(g.coord(j)));
  } else {
    if (g.n != 2) throw InvalidArgument("sample: two-argument function on a 1-d grid");
    for (int i = 0; i < g.N; ++i)
      for (int j = 0; j < g.N; ++j)
        out[static_cast<std::size_t>(i) * g.N + j] = cplx(f(g.coord(i), g.coord(j)));
  }
  return out;
}

/// Real-valued sampling; same layout as sample().
template <class F>
std::vector<double> sample_real(const GridSpec& g, F&& f) {
  std::vector<double> out(g.size());
  if constexpr (std::is_invocable_v<F&, double>) {
    if (g.n != 1) throw InvalidArgument("sample_real: one-argument function on a 2-d grid");
    for (int j = 0; j < g.N; ++j) out[j] = f(g.coord(j));
  } else {
    if (g.n != 2) throw InvalidArgument("sample_real: two-argument function on a 1-d grid");
    for (int i = 0; i < g.N; ++i)
      for (int j = 0; j < g.N; ++j)
        out[static_cast<std::size_t>(i) * g.N + j] = f(g.coord(i), g.coord(j));
  }
  return out;
}

/// Fractional exponent, nonlinearity power and dimension.
///
/// alpha = 1 is accepted (classical Laplacian) so that closed-form oracles
/// can be run through the same code; hypotheses() flags it.
struct FracParams {
  double alpha = 0.5;
  double sigma = 1.0;
  int n = 1;

  FracParams() = default;
  FracParams(double a, double s, int dim) : alpha(a), sigma(s), n(dim) { validate(); }

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0))
      throw InvalidArgument("alpha must lie in (0,1], got " + std::to_string(alpha));
    if (!(sigma > 0.0)) throw InvalidArgument("sigma must be positive");
    if (n < 1) throw InvalidArgument("dimension must be >= 1");
  }

  /// Exponent q = 2 sigma + 2 of the potential term.
  double q() const noexcept { return 2.0 * sigma + 2.0; }
  /// Time exponent gamma = 4 (sigma + 1) alpha / (n sigma).
  double gamma() const noexcept { return 4.0 * (sigma + 1.0) * alpha / (n * sigma); }
};

/// Which hypotheses of the well-posedness and blow-up theorems hold.
struct HypothesisReport {
  bool global_existence = false;
  bool blowup = false;
  std::vector<std::string> warnings;
};

inline HypothesisReport hypotheses(const FracParams& p) {
  HypothesisReport r;
  const double n = p.n;
  const double alpha_min = n / (2.0 * n - 1.0);
  const bool alpha_ok = p.alpha >= alpha_min && p.alpha < 1.0;

  const double sigma_max = p.n <= 2 ? 2.0 / n : 1.0 / (n - 1.0);
  r.global_existence = alpha_ok && p.sigma < sigma_max;
  if (!alpha_ok)
    r.warnings.push_back("alpha outside [n/(2n-1), 1) = [" + std::to_string(alpha_min) + ", 1)");
  if (p.sigma >= sigma_max)
    r.warnings.push_back("sigma >= " + std::to_string(sigma_max) +
                         ": outside the global existence range");

  bool bl = p.n >= 2 && alpha_ok;
  if (bl) {
    const double lo = 2.0 * p.alpha / n;
    const double hi = n > 2.0 * p.alpha ? 2.0 * p.alpha / (n - 2.0 * p.alpha)
                                        : std::numeric_limits<double>::infinity();
    bl = p.sigma >= lo && p.sigma <= hi && p.sigma < 2.0 * p.alpha;
  }
  r.blowup = bl;
  if (!bl) r.warnings.push_back("blow-up criterion hypotheses not met (need n>=2, "
                                "2a/n <= sigma <= 2a/(n-2a), sigma < 2a)");
  return r;
}

} // namespace sfnls

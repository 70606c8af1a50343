#pragma once
// Independent reference computations shared by the unit tests and the
// acceptance driver.

#include <boost/math/special_functions/zeta.hpp>

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "sfnls/spectral.hpp"

namespace sfnls::oracle {

/// Random band-limited field: coefficients with random phase and power-law
/// envelope, wavenumbers well below Nyquist.
inline ComplexField random_field(const GridSpec& g, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.5, 3.0);
  const double decay = ud(rng);
  SpectralField s(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto ij = g.unflatten(k);
    double kk = 0.0;
    for (int a = 0; a < g.n; ++a) kk += std::pow(g.signed_index(ij[a]), 2);
    s.coeffs[k] = cplx(nd(rng), nd(rng)) * std::pow(1.0 + kk, -decay);
  }
  return transform_inverse(s);
}

/// Regularized lattice sum  sum'_{m in Z^n} |m|^b - int_{R^n} |x|^b dx,
/// b = 2 - n - 2s, via a Gaussian cutoff of radius R (error O(R^-2)).
inline double lattice_constant(int n, double s) {
  const double b = 2.0 - n - 2.0 * s, R = 40.0;
  const int M = static_cast<int>(6 * R);
  double sum = 0.0;
  if (n == 1) {
    for (int m = 1; m <= M; ++m) sum += 2.0 * std::pow(m, b) * std::exp(-double(m) * m / (R * R));
    return sum - std::pow(R, 2.0 - 2.0 * s) * std::tgamma(1.0 - s);
  }
  for (int i = -M; i <= M; ++i)
    for (int j = -M; j <= M; ++j) {
      if (i == 0 && j == 0) continue;
      const double r2 = double(i) * i + double(j) * j;
      sum += std::pow(r2, 0.5 * b) * std::exp(-r2 / (R * R));
    }
  return sum - std::numbers::pi * std::pow(R, 2.0 - 2.0 * s) * std::tgamma(1.0 - s);
}

/// sum over m in Z^n with |m|_inf > M of |m|^{-e}.
inline double image_tail(int n, double e, int M) {
  if (n == 1) {
    double part = 0.0;
    for (int m = 1; m <= M; ++m) part += std::pow(m, -e);
    return 2.0 * (boost::math::zeta(e) - part);
  }
  const int F = 400;
  double sum = 0.0;
  for (int i = -F; i <= F; ++i)
    for (int j = -F; j <= F; ++j)
      if (std::max(std::abs(i), std::abs(j)) > M) sum += std::pow(double(i) * i + double(j) * j, -0.5 * e);
  return sum + 2.0 * std::numbers::pi * std::pow(F + 0.5, 2.0 - e) / (e - 2.0);
}

/// Direct-sum seminorm oracle
///   ||(-Delta)^{s/2} u||^2 = (C(n,s)/2) int int |u(x)-u(y)|^2 / |x-y|^{n+2s}
/// on the torus: explicit periodized kernel for images |m|_inf <= M, far
/// images through a constant kernel times sum |u(x)-u(y)|^2, and the
/// singular part of the Riemann sum corrected with |grad u|^2 times the
/// regularized lattice constant.
inline double seminorm_sq_direct(const ComplexField& u, double s, int images) {
  const GridSpec& g = u.grid;
  const double dx = g.dx();
  const int N = g.N;
  const double e = g.n + 2.0 * s;
  std::vector<double> kernel(g.size(), 0.0);
  for (std::size_t off = 0; off < g.size(); ++off) {
    const auto ij = g.unflatten(off);
    double k = 0.0;
    for (int m0 = -images; m0 <= images; ++m0) {
      if (g.n == 1) {
        const double d = (ij[0] + m0 * N) * dx;
        if (d != 0.0) k += std::pow(std::abs(d), -e);
      } else {
        for (int m1 = -images; m1 <= images; ++m1) {
          const double d0 = (ij[0] + m0 * N) * dx, d1 = (ij[1] + m1 * N) * dx;
          if (d0 != 0.0 || d1 != 0.0) k += std::pow(d0 * d0 + d1 * d1, -0.5 * e);
        }
      }
    }
    kernel[off] = k;
  }
  const double far = std::pow(g.L, -e) * image_tail(g.n, e, images);
  const auto grad = spectral_gradient(u);
  const double local = -std::pow(dx, 2.0 - 2.0 * s) * lattice_constant(g.n, s) / g.n;
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto xi = g.unflatten(i);
    double gsq = 0.0;
    for (int a = 0; a < g.n; ++a) gsq += std::norm(grad[a][i]);
    double acc = gsq * local;
    for (std::size_t off = 1; off < g.size(); ++off) {
      const auto oi = g.unflatten(off);
      const std::size_t j = g.n == 1 ? (xi[0] + oi[0]) % N
                                     : static_cast<std::size_t>((xi[0] + oi[0]) % N) * N + (xi[1] + oi[1]) % N;
      acc += std::norm(u[i] - u[j]) * (kernel[off] + far) * g.cell();
    }
    total += acc * g.cell();
  }
  return 0.5 * cn_alpha(g.n, s) * total;
}

/// Localized random field: a few random plane waves under a Gaussian envelope.
inline ComplexField random_localized(const GridSpec& g, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> kd(-2.0, 2.0), wd(1.0, 2.0);
  const double w = wd(rng);
  std::array<cplx, 4> a;
  std::array<std::array<double, 2>, 4> k;
  for (int j = 0; j < 4; ++j) {
    a[j] = cplx(nd(rng), nd(rng)) * 0.5;
    k[j] = {kd(rng), kd(rng)};
  }
  auto f = [&](double x, double y) {
    cplx s = 0;
    for (int j = 0; j < 4; ++j) s += a[j] * std::polar(1.0, k[j][0] * x + k[j][1] * y);
    return s * std::exp(-(x * x + y * y) / (2 * w * w));
  };
  if (g.n == 1) return sample(g, [&](double x) { return f(x, 0.0); });
  return sample(g, [&](double x, double y) { return f(x, y); });
}

/// All j-th order partial derivatives of a real periodic field, by repeated
/// spectral differentiation.
inline std::vector<std::vector<double>> partials(const GridSpec& g, const std::vector<double>& f, int j) {
  std::vector<std::vector<double>> out{f};
  for (int k = 0; k < j; ++k) {
    std::vector<std::vector<double>> next;
    for (const auto& h : out)
      for (auto& d : spectral_gradient_real(g, h)) next.push_back(std::move(d));
    out = std::move(next);
  }
  return out;
}

inline double sup_tensor(const std::vector<std::vector<double>>& comps) {
  double s = 0;
  for (std::size_t i = 0; i < comps[0].size(); ++i) {
    double q = 0;
    for (const auto& c : comps) q += c[i] * c[i];
    s = std::max(s, std::sqrt(q));
  }
  return s;
}

} // namespace sfnls::oracle

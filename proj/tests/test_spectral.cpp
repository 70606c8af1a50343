#include <catch_amalgamated.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "sfnls/spectral.hpp"
#include "oracles.hpp"

using namespace sfnls;
using namespace sfnls::oracle;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double pi = std::numbers::pi;

ComplexField gaussian_1d(const GridSpec& g, double w, double k = 0.0) {
  return sample(g, [&](double x) { return std::exp(-x * x / (2 * w * w)) * std::polar(1.0, k * x); });
}

} // namespace

TEST_CASE("forward/inverse round trip and Parseval", "[spectral]") {
  for (int n : {1, 2}) {
    GridSpec g(n, 7.0, n == 1 ? 96 : 24, -1.0);
    std::mt19937_64 rng(11);
    const auto u = random_field(g, rng);
    const auto back = transform_inverse(transform_forward(u));
    for (std::size_t i = 0; i < u.size(); ++i) REQUIRE(std::abs(back[i] - u[i]) <= 1e-14 * (1 + std::abs(u[i])));
    const auto uh = transform_forward(u);
    double phys = 0.0, spec = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      phys += std::norm(u[i]);
      spec += std::norm(uh.coeffs[i]);
    }
    REQUIRE_THAT(phys * g.cell(), WithinRel(spec * g.cell() / g.size(), 1e-13));
  }
}

TEST_CASE("grid mismatch and wrong size are rejected", "[spectral]") {
  GridSpec g(1, 1.0, 16);
  REQUIRE_THROWS_AS(ComplexField(g, std::vector<cplx>(15)), GridMismatch);
  REQUIRE_THROWS_AS(GridSpec(1, 1.0, 7), InvalidArgument);
  REQUIRE_THROWS_AS(GridSpec(3, 1.0, 8), InvalidArgument);
  REQUIRE_THROWS_AS(GridSpec(1, -1.0, 8), InvalidArgument);
}

TEST_CASE("fractional Laplacian acts on plane waves by |xi|^{2 alpha}", "[spectral]") {
  GridSpec g(1, 2 * pi, 64);
  for (double alpha : {0.3, 0.75, 1.0}) {
    for (int k : {1, 5, -7}) {
      const auto u = sample(g, [&](double x) { return std::polar(1.0, k * x); });
      const auto Lu = apply_fractional_laplacian(u, alpha);
      const double lam = std::pow(std::abs(k), 2 * alpha);
      for (std::size_t i = 0; i < u.size(); ++i) REQUIRE(std::abs(Lu[i] - lam * u[i]) <= 1e-12 * lam);
    }
  }
  const auto c = sample(g, [](double) { return cplx(2.0, 1.0); });
  const auto Lc = apply_fractional_laplacian(c, 0.6);
  for (const auto& v : Lc.values) REQUIRE(std::abs(v) <= 1e-13);
  REQUIRE_THROWS_AS(apply_fractional_laplacian(c, 1.2), InvalidArgument);
  REQUIRE_THROWS_AS(apply_fractional_laplacian(c, 0.0), InvalidArgument);
}

TEST_CASE("alpha = 1 reproduces -u'' of a Gaussian", "[spectral]") {
  GridSpec g(1, 40.0, 512, -20.0);
  const auto u = gaussian_1d(g, 1.3);
  const auto Lu = apply_fractional_laplacian(u, 1.0);
  for (int j = 0; j < g.N; ++j) {
    const double x = g.coord(j), w2 = 1.3 * 1.3;
    const double exact = -(x * x / (w2 * w2) - 1.0 / w2) * std::exp(-x * x / (2 * w2));
    REQUIRE_THAT(Lu[j].real(), WithinAbs(exact, 1e-10));
  }
}

TEST_CASE("L2 norm of the sampled sech pulse matches quadrature", "[spectral]") {
  GridSpec g(1, 10.0, 100, 0.0);
  const auto u = sample(g, [](double x) { return std::polar(1.0 / std::cosh(x), 2 * x); });
  const auto f = [](double x) { return 1.0 / (std::cosh(x) * std::cosh(x)); };
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 10.0, 15, 1e-14);
  // Sampling [0, 10) at left points: the datum is not periodic, so the
  // rectangle sum carries the endpoint term (dx/2)(f(0) - f(L)).
  const double endpoint = 0.5 * g.dx() * (f(0.0) - f(10.0));
  REQUIRE_THAT(mass(u), WithinAbs(integral + endpoint, 1e-4));
  REQUIRE_THAT(l2_norm(u) * l2_norm(u), WithinRel(mass(u), 1e-14));
}

TEST_CASE("lp_norm special cases", "[spectral]") {
  GridSpec g(1, 4.0, 16);
  const auto c = sample(g, [](double) { return cplx(0.0, -3.0); });
  REQUIRE_THAT(lp_norm(c, 2.0), WithinRel(3.0 * 2.0, 1e-14));
  REQUIRE_THAT(lp_norm(c, 4.0), WithinRel(3.0 * std::pow(4.0, 0.25), 1e-14));
  REQUIRE_THAT(lp_norm(c, std::numeric_limits<double>::infinity()), WithinRel(3.0, 1e-15));
  REQUIRE_THROWS_AS(lp_norm(c, 0.5), InvalidArgument);
}

TEST_CASE("cn_alpha closed values and limits", "[spectral]") {
  REQUIRE_THAT(cn_alpha(1, 0.5), WithinRel(1.0 / pi, 1e-14));
  REQUIRE_THAT(cn_alpha(2, 0.5), WithinRel(1.0 / (2 * pi), 1e-14));
  // Gamma(1 - alpha) diverges as alpha -> 1, so the constant vanishes.
  double prev = cn_alpha(1, 0.99);
  for (double a : {0.999, 0.9999, 0.99999}) {
    const double c = cn_alpha(1, a);
    REQUIRE(c < prev);
    prev = c;
  }
  REQUIRE(prev < 1e-4);
  REQUIRE_THROWS_AS(cn_alpha(1, 1.0), InvalidArgument);
  REQUIRE_THROWS_AS(cn_alpha(1, 0.0), InvalidArgument);
}

TEST_CASE("cn_alpha normalizes the singular integral on plane waves", "[spectral]") {
  // C(1,a) int_R (1 - cos h) / |h|^{1+2a} dh = 1; by parts the integral is
  // (1/a) int_0^inf sin(h) h^{-2a} dh.
  for (double a : {0.3, 0.55, 0.75, 0.9}) {
    boost::math::quadrature::ooura_fourier_sin<double> sin_int;
    auto [val, err] = sin_int.integrate([a](double h) { return std::pow(h, -2 * a); }, 1.0);
    REQUIRE(err < 1e-9);
    REQUIRE_THAT(cn_alpha(1, a) * val / a, WithinRel(1.0, 1e-8));
  }
  // n = 2 in polar form: C(2,a) 2 pi int_0^inf (1 - J0(r)) r^{-1-2a} dr = 1.
  for (double a : {0.55, 0.8}) {
    auto f = [a](double r) {
      return (1.0 - boost::math::cyl_bessel_j(0, r)) * std::pow(r, -1 - 2 * a);
    };
    // Series 1 - J0 = r^2/4 - r^4/64 on [0, d], then one panel per half period.
    const double d = 1e-3;
    double val = std::pow(d, 2 - 2 * a) / (4 * (2 - 2 * a)) - std::pow(d, 4 - 2 * a) / (64 * (4 - 2 * a));
    boost::math::quadrature::tanh_sinh<double> ts;
    val += ts.integrate(f, d, pi);
    const int panels = 4000;
    for (int k = 1; k < panels; ++k)
      val += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, k * pi, (k + 1) * pi, 0);
    // Tail: the "1" part exactly; the J0 part is below 1e-9 past the last panel.
    val += std::pow(panels * pi, -2 * a) / (2 * a);
    REQUIRE_THAT(cn_alpha(2, a) * 2 * pi * val, WithinRel(1.0, 1e-4));
  }
}

TEST_CASE("Sobolev seminorm equals the singular double sum", "[spectral]") {
  SECTION("1-d Gaussian packets") {
    GridSpec g(1, 30.0, 600, -15.0);
    for (double s : {0.3, 0.55, 0.75, 0.9}) {
      for (double k : {0.0, 1.5}) {
        const auto u = gaussian_1d(g, 1.0, k);
        const double spec = std::pow(sobolev_seminorm(u, s), 2);
        const double direct = seminorm_sq_direct(u, s, 3);
        REQUIRE_THAT(direct, WithinRel(spec, 0.05));
      }
    }
  }
  SECTION("2-d Gaussian") {
    GridSpec g(2, 16.0, 48, -8.0);
    const auto u = sample(g, [](double x, double y) { return std::exp(-(x * x + y * y) / 2.0); });
    for (double s : {0.55, 0.8}) {
      const double spec = std::pow(sobolev_seminorm(u, s), 2);
      const double direct = seminorm_sq_direct(u, s, 1);
      REQUIRE_THAT(direct, WithinRel(spec, 0.05));
    }
  }
}

TEST_CASE("Sobolev seminorm closed form and homogeneity", "[spectral]") {
  // ||(-Delta)^{s/2} e^{-x^2/2}||^2 = int |xi|^{2s} e^{-xi^2} dxi = Gamma(s + 1/2).
  // For integer s the lattice sum is spectrally accurate; otherwise the kink
  // of |xi|^{2s} at 0 limits it to O(dxi^{1+2s}), which must shrink with L.
  for (double s : {0.0, 1.0, 2.0}) {
    GridSpec g(1, 40.0, 512, -20.0);
    REQUIRE_THAT(std::pow(sobolev_seminorm(gaussian_1d(g, 1.0), s), 2), WithinRel(std::tgamma(s + 0.5), 1e-12));
  }
  for (double s : {0.25, 0.5, 0.75}) {
    double prev = 1.0;
    for (double L : {40.0, 80.0, 160.0}) {
      GridSpec g(1, L, static_cast<int>(12.8 * L), -L / 2);
      const double err = std::abs(std::pow(sobolev_seminorm(gaussian_1d(g, 1.0), s), 2) / std::tgamma(s + 0.5) - 1);
      REQUIRE(err < prev);
      prev = err;
    }
    REQUIRE(prev < 5e-3);
  }
  GridSpec g(1, 40.0, 512, -20.0);
  const auto u = gaussian_1d(g, 1.0);
  ComplexField v = u;
  for (auto& x : v.values) x *= cplx(0.0, 2.5);
  REQUIRE_THAT(sobolev_seminorm(v, 0.7), WithinRel(2.5 * sobolev_seminorm(u, 0.7), 1e-13));
}

TEST_CASE("interpolation inequality holds on random fields", "[spectral]") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    GridSpec g(trial % 2 == 0 ? 1 : 2, 5.0 + 10.0 * ud(rng), trial % 2 == 0 ? 64 : 16);
    const auto u = random_field(g, rng);
    const double alpha = 0.05 + 0.95 * ud(rng);
    const double s = alpha * (0.01 + 0.98 * ud(rng));
    const double lhs = sobolev_seminorm(u, s);
    const double rhs = std::pow(l2_norm(u), 1.0 - s / alpha) * std::pow(sobolev_seminorm(u, alpha), s / alpha);
    if (lhs > rhs * (1.0 + 1e-12)) ++violations;
  }
  REQUIRE(violations == 0);
}

TEST_CASE("spectral gradient of a Gaussian", "[spectral]") {
  GridSpec g(2, 20.0, 64, -10.0);
  const auto u = sample(g, [](double x, double y) { return std::exp(-(x * x + 2 * y * y) / 2.0); });
  const auto grad = spectral_gradient(u);
  REQUIRE(grad.size() == 2);
  for (int i = 0; i < g.N; ++i)
    for (int j = 0; j < g.N; ++j) {
      const double x = g.coord(i), y = g.coord(j);
      const double e = std::exp(-(x * x + 2 * y * y) / 2.0);
      const std::size_t idx = static_cast<std::size_t>(i) * g.N + j;
      REQUIRE_THAT(grad[0][idx].real(), WithinAbs(-x * e, 1e-10));
      REQUIRE_THAT(grad[1][idx].real(), WithinAbs(-2 * y * e, 1e-10));
      REQUIRE(std::abs(grad[0][idx].imag()) < 1e-14);
    }
  // Odd Nyquist content would make the derivative of real data complex.
  GridSpec h(1, 2 * pi, 8);
  const auto nyq = sample(h, [](double x) { return std::cos(4 * x); });
  for (const auto& v : spectral_gradient(nyq)[0].values) REQUIRE(std::abs(v) < 1e-14);
}

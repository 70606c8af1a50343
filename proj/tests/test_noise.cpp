#include <catch_amalgamated.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>
#include <set>

#include "sfnls/noise.hpp"

using namespace sfnls;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double pi = std::numbers::pi;

/// O(N^2) (or O(N^4) in 2-d) direct evaluation of the same quadrature the
/// estimator performs with FFT convolutions.
double phicond_brute(const NoiseModel& m, double alpha) {
  const GridSpec& g = m.grid;
  const int N = g.N;
  const double dx = g.dx(), expo = g.n + 2 * alpha;
  auto wrap = [&](int d) { return d > N / 2 ? d - N : (d < -N / 2 ? d + N : d); };
  const double cell = g.n == 1 ? 2 * std::pow(0.5 * dx, 2 - 2 * alpha) / (2 - 2 * alpha)
                               : 2 * pi * std::pow(dx / std::sqrt(pi), 2 - 2 * alpha) / (2 - 2 * alpha);
  std::vector<double> total(g.size(), 0.0);
  for (const auto& mode : m.modes) {
    double gsup = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      double s = 0;
      for (int a = 0; a < g.n; ++a) s += mode.gradient[a][i] * mode.gradient[a][i];
      gsup = std::max(gsup, s);
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto pi_ = g.unflatten(i);
      double s = gsup * cell;
      for (std::size_t j = 0; j < g.size(); ++j) {
        if (i == j) continue;
        const auto pj = g.unflatten(j);
        double r2 = 0;
        for (int a = 0; a < g.n; ++a) {
          const double d = wrap((pi_[a] - pj[a] + N) % N) * dx;
          r2 += d * d;
        }
        const double dv = mode.values[i] - mode.values[j];
        s += dv * dv * g.cell() / std::pow(r2, 0.5 * expo);
      }
      total[i] += s;
    }
  }
  return *std::max_element(total.begin(), total.end());
}

} // namespace

TEST_CASE("cosine model fields and aliasing guard", "[noise]") {
  GridSpec g(1, 10.0, 100, 0.0);
  // Lattice maximum pi N / L = 10 pi: l = 10 is the last admissible mode.
  REQUIRE_NOTHROW(build_cosine_model(10, g, 1.0));
  try {
    build_cosine_model(100, g, 1.0);
    FAIL("expected AliasingError");
  } catch (const AliasingError& e) {
    REQUIRE(e.mode() == 11);
    REQUIRE(std::string(e.what()).find("l=11") != std::string::npos);
  }
  REQUIRE_NOTHROW(build_cosine_model(100, g, 1.0, AliasPolicy::allow));
  REQUIRE_THROWS_AS(build_cosine_model(-1, g, 1.0), InvalidArgument);

  const auto one = build_cosine_model(1, g, 1.0);
  for (int j = 0; j < g.N; ++j) REQUIRE_THAT(one.f_phi[j], WithinAbs(std::pow(std::cos(pi * g.coord(j)), 2), 1e-12));

  const auto m = build_cosine_model(10, g, 0.3);
  double hs = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    double f = 0.0;
    for (const auto& mode : m.modes) f += mode.values[i] * mode.values[i];
    REQUIRE(m.f_phi[i] >= 0.0);
    REQUIRE_THAT(m.f_phi[i], WithinAbs(f, 1e-12));
  }
  for (const auto& mode : m.modes) {
    double l2 = 0;
    for (double v : mode.values) l2 += v * v * g.dx();
    hs += l2;
  }
  REQUIRE_THAT(m.hs_norm_sq, WithinRel(hs, 1e-12));
  // ||cos(pi l x)/l||^2 on [0, 10] is 5 / l^2; the l = 10 mode sits on the
  // Nyquist index, where the lattice sum of cos^2 is L rather than L/2.
  double expect = 10.0 / 100.0;
  for (int l = 1; l < 10; ++l) expect += 5.0 / (l * l);
  REQUIRE_THAT(m.hs_norm_sq, WithinRel(expect, 1e-12));
}

TEST_CASE("zero models give zero increments", "[noise]") {
  GridSpec g(1, 10.0, 64, 0.0);
  NormalSource rng(3);
  const auto k0 = build_cosine_model(0, g, 1.0);
  for (double v : k0.f_phi) REQUIRE(v == 0.0);
  for (double v : sample_increment(k0, 0.01, rng).values) REQUIRE(v == 0.0);
  const auto e0 = build_cosine_model(5, g, 0.0);
  for (double v : sample_increment(e0, 0.01, rng).values) REQUIRE(v == 0.0);
  REQUIRE_THROWS_AS(build_cosine_model(3, g, -1.0), InvalidArgument);
}

TEST_CASE("increment pointwise variance matches eps^2 F dt", "[noise]") {
  GridSpec g(1, 10.0, 100, 0.0);
  const double eps = 0.7, dt = 0.01;
  const auto m = build_cosine_model(10, g, eps);
  NormalSource rng(12345);
  const int S = 100000;
  const int probes[10] = {0, 7, 13, 25, 38, 50, 61, 77, 89, 99};
  std::array<double, 10> sum{}, sum2{}, sum4{};
  for (int s = 0; s < S; ++s) {
    const auto inc = sample_increment(m, dt, rng);
    for (int p = 0; p < 10; ++p) {
      const double x2 = inc.values[probes[p]] * inc.values[probes[p]];
      sum[p] += inc.values[probes[p]];
      sum2[p] += x2;
      sum4[p] += x2 * x2;
    }
  }
  for (int p = 0; p < 10; ++p) {
    const double var = eps * eps * m.f_phi[probes[p]] * dt;
    const double est = sum2[p] / S;
    const double se = std::sqrt((sum4[p] / S - est * est) / S);
    REQUIRE(std::abs(est - var) <= 3 * se);
    REQUIRE(std::abs(sum[p] / S) <= 3 * std::sqrt(var / S) + 1e-300);
  }
}

TEST_CASE("increments are deterministic and linear in epsilon", "[noise]") {
  GridSpec g(2, 8.0, 16, -4.0);
  const auto a = build_bump_model(g, 0.5, 1.0, 1.0, {0.0, 0.0});
  const auto b = build_bump_model(g, 1.5, 1.0, 1.0, {0.0, 0.0});
  NormalSource r1(99), r2(99), r3(99);
  for (int s = 0; s < 5; ++s) {
    const auto i1 = sample_increment(a, 0.02, r1);
    const auto i2 = sample_increment(a, 0.02, r2);
    const auto i3 = sample_increment(b, 0.02, r3);
    REQUIRE(i1.values == i2.values);
    for (std::size_t i = 0; i < g.size(); ++i) REQUIRE_THAT(i3.values[i], WithinAbs(3.0 * i1.values[i], 1e-15));
  }
  NormalSource other(100);
  REQUIRE(sample_increment(a, 0.02, other).values != sample_increment(a, 0.02, r1).values);
}

TEST_CASE("seed derivation", "[noise]") {
  // Reference values of the SplitMix64 finalizer.
  REQUIRE(splitmix64(0) == 0xE220A8397B1DCDAFULL);
  REQUIRE(derive_seed(7, 0) == splitmix64(splitmix64(7)));
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(42, i));
  REQUIRE(seen.size() == 1000);
}

TEST_CASE("phicond of a smooth bump against direct sums", "[noise]") {
  const double alpha = 0.6;
  SECTION("1-d: FFT path equals the direct double sum, both near the continuum integral") {
    GridSpec g(1, 20.0, 256, -10.0);
    const auto m = build_bump_model(g, 1.0, 1.0, 1.0, {0.0, 0.0});
    const auto est = estimate_phicond_constant(m, alpha);
    REQUIRE(est.converged);
    REQUIRE_THAT(est.value, WithinRel(phicond_brute(m, alpha), 1e-10));

    // Continuum oracle: sup over grid x of the periodic integral of the analytic bump.
    auto v = [&](double y) {
      double s = 0;
      for (int img = -1; img <= 1; ++img) s += std::exp(-0.5 * std::pow(y + img * g.L, 2));
      return s;
    };
    boost::math::quadrature::tanh_sinh<double> ts;
    double sup = 0;
    for (int j = 0; j < g.N; j += 2) {
      const double x = g.coord(j);
      auto f = [&](double d) {
        if (std::abs(d) < 1e-100) return 0.0; // integrand ~ |d|^{1 - 2 alpha}
        const double dv = v(x) - v(x + d);
        return dv * dv / std::pow(std::abs(d), 1 + 2 * alpha);
      };
      using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
      const double val = GK::integrate(f, -g.L / 2, -1.0, 15, 1e-12) + ts.integrate(f, -1.0, 0.0) +
                         ts.integrate(f, 0.0, 1.0) + GK::integrate(f, 1.0, g.L / 2, 15, 1e-12);
      sup = std::max(sup, val);
    }
    REQUIRE_THAT(est.value, WithinRel(sup, 0.05));
  }
  SECTION("2-d: FFT path equals the direct double sum") {
    GridSpec g(2, 8.0, 16, -4.0);
    const auto m = build_bump_model(g, 1.0, 1.0, 1.0, {0.0, 0.0});
    REQUIRE_THAT(estimate_phicond_constant(m, alpha).value, WithinRel(phicond_brute(m, alpha), 1e-10));
  }
}

TEST_CASE("phicond: zero model, divergence flag, cutoff-family scaling", "[noise]") {
  GridSpec g(1, 10.0, 100, 0.0);
  const auto est0 = estimate_phicond_constant(build_zero_model(g), 0.7);
  REQUIRE(est0.value == 0.0);
  REQUIRE(est0.converged);
  REQUIRE_THROWS_AS(estimate_phicond_constant(build_zero_model(g), 1.0), InvalidArgument);

  // Amplitudes 1/l: per-mode contributions ~ l^{2 alpha - 2}, not summable for alpha >= 1/2.
  const auto cos100 = build_cosine_model(100, GridSpec(1, 10.0, 2048, 0.0), 1.0, AliasPolicy::allow);
  const auto div = estimate_phicond_constant(cos100, 0.75);
  REQUIRE_FALSE(div.converged);
  REQUIRE(std::isinf(div.effective(1.0)));
  REQUIRE(div.tail_exponent > -1.0);

  // rho(|x| / k): each mode contributes ~ k^{-2 alpha}.
  for (double alpha : {0.6, 0.8}) {
    GridSpec gb(1, 256.0, 4096, -128.0);
    const auto fam = build_cutoff_family(gb, 1.0, {4, 8, 16, 32}, {0.0, 0.0});
    const auto e = estimate_phicond_constant(fam, alpha);
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < fam.size(); ++k) {
      lx.push_back(std::log(fam.modes[k].index));
      ly.push_back(std::log(e.per_mode_sup[k]));
    }
    const double slope = detail::linear_fit(lx, ly).first;
    REQUIRE_THAT(slope, WithinAbs(-2 * alpha, 0.15));
    REQUIRE(e.converged);
    REQUIRE_THAT(e.effective(0.5), WithinRel(0.25 * e.value, 1e-15));
  }
}

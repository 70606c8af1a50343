#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "sfnls/grid.hpp"
#include "sfnls/smoothstep.hpp"

namespace sfnls {

/// Unit-scale radial virial profile phi(r).
///
/// phi'(r) = r * chi(r) with chi = 1 on [0,1], chi = 0 on [10, inf) and
/// chi = 1 - S((r-1)/9) in between (S the degree-9 smoothstep). Since
/// chi' <= 0 and chi <= 1 this gives phi'' = chi + r chi' <= 1,
/// phi'/r = chi <= 1 and Laplacian phi = n chi + r chi' <= n, so phi is
/// r^2/2 inside r = 1, constant beyond r = 10, and C^5.
struct VirialProfile {
  static constexpr double inner = 1.0;
  static constexpr double outer = 10.0;
  static constexpr double span = outer - inner;

  /// chi^{(j)}(r), j <= 4.
  static double chi(double r, int j) {
    const double t = (r - inner) / span;
    if (t <= 0.0) return j == 0 ? 1.0 : 0.0;
    if (t >= 1.0) return 0.0;
    const double s = Smoothstep9::derivative(t, j) / std::pow(span, j);
    return j == 0 ? 1.0 - s : -s;
  }

  /// phi^{(j)}(r) for j = 1..4 (j = 0 handled by value()).
  static double derivative(double r, int j) {
    switch (j) {
      case 1: return r * chi(r, 0);
      case 2: return chi(r, 0) + r * chi(r, 1);
      case 3: return 2.0 * chi(r, 1) + r * chi(r, 2);
      case 4: return 3.0 * chi(r, 2) + r * chi(r, 3);
      default: return value(r);
    }
  }

  /// phi(r) = 1/2 + int_1^r s chi(s) ds beyond r = 1, integrated exactly as
  /// a polynomial in t = (r - 1)/9.
  static double value(double r) {
    if (r <= inner) return 0.5 * r * r;
    const double t = std::min(1.0, (r - inner) / span);
    // integrand in t: span * (inner + span t) * (1 - S(t))
    constexpr auto& c = Smoothstep9::coeffs;
    std::array<double, 11> one_minus_s{};
    for (std::size_t p = 0; p < c.size(); ++p) one_minus_s[p] = -c[p];
    one_minus_s[0] += 1.0;
    std::array<double, 12> poly{};
    for (std::size_t p = 0; p < one_minus_s.size(); ++p) {
      poly[p] += span * inner * one_minus_s[p];
      poly[p + 1] += span * span * one_minus_s[p];
    }
    double acc = 0.0;
    for (int p = static_cast<int>(poly.size()) - 1; p >= 0; --p) acc = acc * t + poly[p] / (p + 1);
    return 0.5 + acc * t;
  }
};

/// Radial weight phi_R(x) = R^2 phi(|x - c| / R) tabulated on a tensor grid,
/// or the unbounded quadratic |x - c|^2 / 2.
struct VirialWeight {
  enum class Kind { localized, quadratic };

  GridSpec grid;
  Kind kind = Kind::localized;
  double R = 1.0;
  std::array<double, 2> center{0.0, 0.0};
  std::vector<double> phi;
  std::vector<double> radius;
  std::vector<double> dphi;  ///< phi_R'(r)
  std::vector<double> d2phi; ///< phi_R''(r)
  std::array<std::vector<double>, 2> grad;
  std::array<std::array<std::vector<double>, 2>, 2> hess;
  std::vector<double> lap;   ///< Laplacian of phi_R
  std::vector<double> bilap; ///< bi-Laplacian of phi_R
  std::string warning;
};

namespace detail {

inline void allocate_weight(VirialWeight& w) {
  const std::size_t sz = w.grid.size();
  w.phi.assign(sz, 0.0);
  w.radius.assign(sz, 0.0);
  w.dphi.assign(sz, 0.0);
  w.d2phi.assign(sz, 0.0);
  w.lap.assign(sz, 0.0);
  w.bilap.assign(sz, 0.0);
  for (int a = 0; a < w.grid.n; ++a) {
    w.grad[a].assign(sz, 0.0);
    for (int b = 0; b < w.grid.n; ++b) w.hess[a][b].assign(sz, 0.0);
  }
}

inline std::array<double, 2> offset(const GridSpec& g, std::size_t idx, const std::array<double, 2>& c) {
  const auto ij = g.unflatten(idx);
  std::array<double, 2> d{g.coord(ij[0]) - c[0], 0.0};
  if (g.n == 2) d[1] = g.coord(ij[1]) - c[1];
  return d;
}

} // namespace detail

/// Tabulate phi_R about `center` (defaults to the box center).
inline VirialWeight build_virial_weight(double R, const GridSpec& g, std::array<double, 2> center) {
  if (!(R > 0.0)) throw InvalidArgument("virial weight scale R must be positive");
  VirialWeight w;
  w.grid = g;
  w.R = R;
  w.center = center;
  detail::allocate_weight(w);
  const double n = g.n;
  const double reach = VirialProfile::outer * R;
  for (int a = 0; a < g.n; ++a) {
    const double lo = center[a] - g.origin, hi = g.origin + g.L - center[a];
    if (reach > std::min(lo, hi))
      w.warning = "10R = " + std::to_string(reach) + " exceeds the distance from the center to the box edge";
  }

  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const auto d = detail::offset(g, idx, center);
    const double r = std::hypot(d[0], d[1]);
    const double s = r / R;
    w.radius[idx] = r;
    w.phi[idx] = R * R * VirialProfile::value(s);
    if (s <= VirialProfile::inner) {
      w.dphi[idx] = r;
      w.d2phi[idx] = 1.0;
      for (int a = 0; a < g.n; ++a) {
        w.grad[a][idx] = d[a];
        w.hess[a][a][idx] = 1.0;
      }
      w.lap[idx] = n;
      w.bilap[idx] = 0.0;
      continue;
    }
    if (s >= VirialProfile::outer) continue; // constant: every derivative vanishes
    const double p1 = R * VirialProfile::derivative(s, 1);
    const double p2 = VirialProfile::derivative(s, 2);
    const double p3 = VirialProfile::derivative(s, 3) / R;
    const double p4 = VirialProfile::derivative(s, 4) / (R * R);
    w.dphi[idx] = p1;
    w.d2phi[idx] = p2;
    for (int a = 0; a < g.n; ++a) {
      const double ua = d[a] / r;
      w.grad[a][idx] = p1 * ua;
      for (int b = 0; b < g.n; ++b) {
        const double ub = d[b] / r;
        w.hess[a][b][idx] = ((a == b ? 1.0 : 0.0) - ua * ub) * p1 / r + ua * ub * p2;
      }
    }
    // Radial Laplacian g = phi'' + (n-1) phi'/r and its derivatives.
    const double lap = p2 + (n - 1.0) * p1 / r;
    const double g1 = p3 + (n - 1.0) * (p2 / r - p1 / (r * r));
    const double g2 = p4 + (n - 1.0) * (p3 / r - 2.0 * p2 / (r * r) + 2.0 * p1 / (r * r * r));
    w.lap[idx] = lap;
    w.bilap[idx] = g2 + (n - 1.0) * g1 / r;
  }
  return w;
}

inline VirialWeight build_virial_weight(double R, const GridSpec& g) {
  return build_virial_weight(R, g, {g.center(), g.center()});
}

/// Unbounded weight |x - c|^2 / 2: grad = x - c, Hessian = I, bi-Laplacian 0.
inline VirialWeight build_quadratic_weight(const GridSpec& g, std::array<double, 2> center) {
  VirialWeight w;
  w.grid = g;
  w.kind = VirialWeight::Kind::quadratic;
  w.R = std::numeric_limits<double>::infinity();
  w.center = center;
  detail::allocate_weight(w);
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const auto d = detail::offset(g, idx, center);
    const double r = std::hypot(d[0], d[1]);
    w.radius[idx] = r;
    w.phi[idx] = 0.5 * r * r;
    w.dphi[idx] = r;
    w.d2phi[idx] = 1.0;
    for (int a = 0; a < g.n; ++a) {
      w.grad[a][idx] = d[a];
      w.hess[a][a][idx] = 1.0;
    }
    w.lap[idx] = g.n;
  }
  return w;
}

/// Largest violation of 1 - phi'' >= 0, 1 - phi'/r >= 0, n - Laplacian >= 0
/// over the grid (0 when all hold).
struct WeightCheck {
  double hessian_radial = 0.0;
  double hessian_angular = 0.0;
  double laplacian = 0.0;
  bool ok() const { return hessian_radial <= 0.0 && hessian_angular <= 0.0 && laplacian <= 0.0; }
};

inline WeightCheck check_weight_inequalities(const VirialWeight& w, double tol = 1e-12) {
  WeightCheck c;
  for (std::size_t i = 0; i < w.grid.size(); ++i) {
    c.hessian_radial = std::max(c.hessian_radial, w.d2phi[i] - 1.0 - tol);
    if (w.radius[i] > 0.0)
      c.hessian_angular = std::max(c.hessian_angular, w.dphi[i] / w.radius[i] - 1.0 - tol);
    c.laplacian = std::max(c.laplacian, w.lap[i] - w.grid.n - tol);
  }
  return c;
}

} // namespace sfnls

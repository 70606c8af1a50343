#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "sfnls/flows.hpp"
#include "sfnls/grid.hpp"
#include "sfnls/noise.hpp"
#include "sfnls/spectral.hpp"
#include "sfnls/weight.hpp"

namespace sfnls {

// ---------------------------------------------------------------------------
// Scalar functionals
// ---------------------------------------------------------------------------

struct EnergyParts {
  double H = 0.0;         ///< kinetic/2 - potential
  double kinetic = 0.0;   ///< ||(-Delta)^{alpha/2} u||_2^2
  double potential = 0.0; ///< ||u||_{2 sigma + 2}^{2 sigma + 2} / (2 sigma + 2)
};

inline double potential_energy(const ComplexField& u, double sigma) {
  const double q = 2.0 * sigma + 2.0;
  double s = 0.0;
  for (const auto& v : u.values) {
    const double a2 = std::norm(v);
    s += sigma == 1.0 ? a2 * a2 : std::pow(a2, sigma + 1.0);
  }
  return u.grid.cell() * s / q;
}

inline EnergyParts energy(const ComplexField& u, const FracParams& params) {
  EnergyParts e;
  const double k = sobolev_seminorm(u, params.alpha);
  e.kinetic = k * k;
  e.potential = potential_energy(u, params.sigma);
  e.H = 0.5 * e.kinetic - e.potential;
  return e;
}

/// M_phi[u] = 2 Im int conj(u) grad(phi) . grad(u) dx, spectral gradient.
inline double virial(const ComplexField& u, const VirialWeight& w) {
  require_same_grid(u.grid, w.grid, "virial");
  const auto grad = spectral_gradient(u);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cplx dot = 0.0;
    for (int a = 0; a < u.grid.n; ++a) dot += w.grad[a][i] * grad[a][i];
    s += (std::conj(u[i]) * dot).imag();
  }
  return 2.0 * s * u.grid.cell();
}

/// Mass in the boundary band |x_a - center_a| > 0.45 L on any axis
/// (the outer 10% of each axis).
inline double tail_mass(const ComplexField& u) {
  const GridSpec& g = u.grid;
  const double c = g.center(), lim = 0.45 * g.L;
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const auto ij = g.unflatten(i);
    bool outer = std::abs(g.coord(ij[0]) - c) > lim;
    if (g.n == 2) outer = outer || std::abs(g.coord(ij[1]) - c) > lim;
    if (outer) s += std::norm(u[i]);
  }
  return s * g.cell();
}

/// Per-sample scalars for one trajectory.
struct DiagnosticsRecord {
  double t = 0.0;
  double mass = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;
  double energy = 0.0;
  double virial = 0.0;
  double lq_norm = 0.0; ///< ||u||_q with q = 2 sigma + 2
  double linf = 0.0;
  double tail_mass = 0.0;
  bool diverged = false;

  bool finite() const {
    for (double v : {t, mass, kinetic, potential, energy, virial, lq_norm, linf, tail_mass})
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline DiagnosticsRecord make_record(const ComplexField& u, const FracParams& params,
                                     const VirialWeight& w, double t) {
  DiagnosticsRecord r;
  const auto e = energy(u, params);
  r.t = t;
  r.mass = mass(u);
  r.kinetic = e.kinetic;
  r.potential = e.potential;
  r.energy = e.H;
  r.virial = virial(u, w);
  r.lq_norm = lp_norm(u, params.q());
  r.linf = lp_norm(u, std::numeric_limits<double>::infinity());
  r.tail_mass = tail_mass(u);
  return r;
}

// ---------------------------------------------------------------------------
// Resolvent smoothing and the m-integral
// ---------------------------------------------------------------------------

/// u_m = (sin(pi alpha)/pi) (-Delta + m)^{-1} u as a Fourier multiplier.
inline ComplexField smoothed_resolvent(const ComplexField& u, double m, double alpha) {
  if (!(m > 0.0)) throw InvalidArgument("smoothed_resolvent: m must be positive");
  const double c = std::sin(std::numbers::pi * alpha) / std::numbers::pi;
  return apply_radial_multiplier(u, [&](double xs) { return c / (xs + m); });
}

/// Composite Gauss-Legendre rule in s = ln m on [ln m_min, ln m_max].
/// Weights include the Jacobian dm = m ds.
struct MQuadrature {
  double m_min = 0.0;
  double m_max = 0.0;
  int panels = 0;
  std::vector<double> nodes;
  std::vector<double> weights;

  static constexpr int order = 8;

  MQuadrature(double lo, double hi, int panel_count) : m_min(lo), m_max(hi), panels(panel_count) {
    using Rule = boost::math::quadrature::gauss<double, order>;
    const auto& absc = Rule::abscissa();
    const auto& wts = Rule::weights();
    const double a = std::log(lo), b = std::log(hi);
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = a + (p + 0.5) * h;
      for (std::size_t i = 0; i < absc.size(); ++i) {
        const double xs[2] = {absc[i], -absc[i]};
        for (int side = 0; side < (absc[i] == 0.0 ? 1 : 2); ++side) {
          const double m = std::exp(mid + 0.5 * h * xs[side]);
          nodes.push_back(m);
          weights.push_back(0.5 * h * wts[i] * m);
        }
      }
    }
  }

  /// Range m_min = 1e-6 * min |xi|^2, m_max = 1e6 * max |xi|^2 of the grid lattice.
  static std::pair<double, double> range_for(const GridSpec& g) {
    FrequencyTable f(g);
    return {1e-6 * f.min_nonzero_xi_sq(), 1e6 * f.max_xi_sq()};
  }
};

/// (sin(pi alpha)/pi) int_0^inf m^alpha / (xi_sq + m)^2 dm using the rule on
/// [m_min, m_max] plus series for both end pieces. Equals
/// alpha |xi|^{2 alpha - 2} for xi != 0.
inline double m_integral(const MQuadrature& rule, double xi_sq, double alpha) {
  const double c = std::sin(std::numbers::pi * alpha) / std::numbers::pi;
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double m = rule.nodes[i];
    const double d = xi_sq + m;
    s += rule.weights[i] * std::pow(m, alpha) / (d * d);
  }
  // int_{m_max}^inf m^{alpha-2} (1 + a/m)^{-2} = sum_j (j+1)(-a)^j m_max^{alpha-1-j}/(1-alpha+j)
  const double M = rule.m_max, a = xi_sq;
  double upper = 0.0, term = 1.0;
  for (int j = 0; j < 4; ++j) {
    upper += (j + 1) * term * std::pow(M, alpha - 1.0 - j) / (1.0 - alpha + j);
    term *= -a;
  }
  double lower = 0.0;
  if (a > 0.0) {
    // int_0^{m_min} m^alpha a^{-2} (1 + m/a)^{-2}
    const double mm = rule.m_min;
    double tj = 1.0;
    for (int j = 0; j < 4; ++j) {
      lower += (j + 1) * tj * std::pow(mm, alpha + 1.0 + j) / (alpha + 1.0 + j);
      tj *= -1.0 / a;
    }
    lower /= a * a;
  }
  return c * (s + upper + lower);
}

/// Double the panel count from `start` until every probe value of
/// m_integral changes by less than rel_tol.
inline MQuadrature build_m_rule(double m_min, double m_max, double alpha, double rel_tol = 1e-6,
                                int start = 8, int max_panels = 4096) {
  std::vector<double> probes;
  const double lo = std::log(m_min * 1e6), hi = std::log(m_max * 1e-6);
  for (int i = 0; i <= 64; ++i) probes.push_back(std::exp(lo + (hi - lo) * i / 64.0));
  MQuadrature rule(m_min, m_max, start);
  std::vector<double> prev;
  for (double p : probes) prev.push_back(m_integral(rule, p, alpha));
  for (int panels = 2 * start; panels <= max_panels; panels *= 2) {
    MQuadrature next(m_min, m_max, panels);
    double change = 0.0;
    for (std::size_t i = 0; i < probes.size(); ++i) {
      const double v = m_integral(next, probes[i], alpha);
      change = std::max(change, std::abs(v - prev[i]) / std::abs(v));
      prev[i] = v;
    }
    rule = std::move(next);
    if (change < rel_tol) break;
  }
  return rule;
}

struct VirialRhsOptions {
  double rel_tol = 1e-6;
  int start_panels = 8;
  int max_panels = 2048;
};

/// Drift of the localized virial for the deterministic flow.
struct VirialRhs {
  double value = 0.0;
  double linear = 0.0;    ///< m-integral of the commutator with (-Delta)^alpha
  double nonlinear = 0.0; ///< -(2 sigma/(sigma+1)) int Laplacian(phi) |u|^{2 sigma+2}
  int panels = 0;
  double achieved_tol = 0.0;
  bool converged = false;
};

namespace detail {

/// Quadratic form int 4 conj(d_k v) H_kl d_l v - bilap |v|^2 for the
/// spectrum vhat (zero mode handled separately by the caller).
struct VirialForm {
  const VirialWeight& w;
  FrequencyTable freq;
  std::vector<double> bilap0; ///< bi-Laplacian projected to zero grid mean

  explicit VirialForm(const VirialWeight& weight) : w(weight), freq(weight.grid) {
    bilap0 = w.bilap;
    const double mean =
        std::accumulate(bilap0.begin(), bilap0.end(), 0.0) / static_cast<double>(bilap0.size());
    for (auto& b : bilap0) b -= mean;
  }

  /// Returns the form for the field with spectrum `vhat` (zero mode
  /// excluded) plus the cross term with a constant kappa.
  double operator()(const std::vector<cplx>& vhat, cplx kappa) const {
    const GridSpec& g = w.grid;
    const auto plan = FftPlan::get(g);
    const double inv = 1.0 / static_cast<double>(g.size());
    const cplx I(0.0, 1.0);
    std::vector<cplx> v = vhat;
    v[0] = 0.0;
    std::array<std::vector<cplx>, 2> dv;
    for (int a = 0; a < g.n; ++a) {
      dv[a].resize(v.size());
      for (std::size_t k = 0; k < v.size(); ++k) dv[a][k] = I * freq.xi_deriv[a][k] * v[k];
      plan->backward(dv[a].data());
    }
    plan->backward(v.data());
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const cplx vi = v[i] * inv;
      double hess = 0.0;
      for (int a = 0; a < g.n; ++a)
        for (int b = 0; b < g.n; ++b)
          hess += w.hess[a][b][i] * (std::conj(dv[a][i]) * dv[b][i]).real();
      hess *= inv * inv;
      s += 4.0 * hess - bilap0[i] * (std::norm(vi) + 2.0 * (std::conj(kappa) * vi).real());
    }
    return s * g.cell();
  }
};

} // namespace detail

/// Right-hand side of the localized virial identity
///
///   d/dt M_phi = int_0^inf m^alpha int {4 conj(d_k u_m) (d_kl phi) d_l u_m
///                                       - (bilap phi)|u_m|^2} dx dm
///                - (2 sigma/(sigma+1)) int (Lap phi) |u|^{2 sigma + 2} dx
///
/// with u_m = sqrt(sin(pi alpha)/pi) (-Delta + m)^{-1} u, the normalization
/// for which the m-integral reproduces alpha |xi|^{2 alpha}. The m-integral
/// uses composite Gauss-Legendre in ln m over [1e-6 min|xi|^2, 1e6 max|xi|^2],
/// panels doubled until the relative change is below rel_tol, plus the
/// leading asymptotics of both end pieces.
inline VirialRhs virial_rhs(const ComplexField& u, const VirialWeight& w, const FracParams& params,
                            const VirialRhsOptions& opt = {}) {
  require_same_grid(u.grid, w.grid, "virial_rhs");
  const GridSpec& g = u.grid;
  const double alpha = params.alpha;
  const double c2 = std::sin(std::numbers::pi * alpha) / std::numbers::pi;
  detail::VirialForm form(w);
  const FrequencyTable& freq = form.freq;
  const SpectralField uh = transform_forward(u);
  const cplx mean_value = uh.coeffs[0] / static_cast<double>(g.size());
  const auto [m_min, m_max] = MQuadrature::range_for(g);

  VirialRhs out;
  if (alpha == 1.0) {
    // Classical commutator: 4 int conj(d_k u) H_kl d_l u - bilap |u|^2.
    out.linear = form(uh.coeffs, mean_value);
    out.converged = true;
  } else {
    auto evaluate = [&](const MQuadrature& rule) {
      double s = 0.0;
      std::vector<cplx> vh(uh.coeffs.size());
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double m = rule.nodes[q];
        for (std::size_t k = 0; k < vh.size(); ++k) vh[k] = uh.coeffs[k] / (freq.xi_sq[k] + m);
        s += rule.weights[q] * std::pow(m, alpha) * form(vh, mean_value / m);
      }
      return c2 * s;
    };
    // m -> inf: u_m ~ u / m.
    const double upper = c2 * std::pow(m_max, alpha - 1.0) / (1.0 - alpha) * form(uh.coeffs, mean_value);
    // m -> 0: u_m ~ (-Delta)^{-1} u off the zero mode plus mean/m on it.
    std::vector<cplx> inv_lap(uh.coeffs.size());
    for (std::size_t k = 1; k < inv_lap.size(); ++k) inv_lap[k] = uh.coeffs[k] / freq.xi_sq[k];
    const double q0 = form(inv_lap, 0.0);
    const double cross = form(inv_lap, mean_value) - q0; // linear in kappa
    const double lower =
        c2 * (std::pow(m_min, alpha + 1.0) / (alpha + 1.0) * q0 + std::pow(m_min, alpha) / alpha * cross);

    int panels = opt.start_panels;
    double prev = evaluate(MQuadrature(m_min, m_max, panels));
    out.achieved_tol = std::numeric_limits<double>::infinity();
    while (panels < opt.max_panels) {
      panels *= 2;
      const double next = evaluate(MQuadrature(m_min, m_max, panels));
      const double scale = std::max(std::abs(next), std::numeric_limits<double>::min());
      out.achieved_tol = std::abs(next - prev) / scale;
      prev = next;
      if (out.achieved_tol < opt.rel_tol) {
        out.converged = true;
        break;
      }
    }
    out.panels = panels;
    out.linear = prev + upper + lower;
  }

  const double sigma = params.sigma;
  double nl = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a2 = std::norm(u[i]);
    nl += w.lap[i] * (sigma == 1.0 ? a2 * a2 : std::pow(a2, sigma + 1.0));
  }
  out.nonlinear = -2.0 * sigma / (sigma + 1.0) * nl * g.cell();
  out.value = out.linear + out.nonlinear;
  return out;
}

/// Closed form of the virial drift for the quadratic weight:
/// 4 alpha ||(-Delta)^{alpha/2} u||^2 - (2 sigma n/(sigma+1)) ||u||_{2 sigma+2}^{2 sigma+2}.
inline double virial_rhs_quadratic(const ComplexField& u, const FracParams& params) {
  const auto e = energy(u, params);
  const double q = params.q();
  return 4.0 * params.alpha * e.kinetic - 2.0 * params.sigma * u.grid.n / (params.sigma + 1.0) * q * e.potential;
}

/// Per-mode coefficients of the virial martingale:
/// dN = sum_k c_k dbeta_k, c_k = -2 epsilon int |u|^2 grad(phi) . grad(Phi e_k) dx.
inline std::vector<double> virial_martingale_coefficients(const ComplexField& u, const VirialWeight& w,
                                                          const NoiseModel& noise) {
  std::vector<double> c(noise.size(), 0.0);
  const GridSpec& g = u.grid;
  std::vector<double> dens(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) dens[i] = std::norm(u[i]);
  for (std::size_t k = 0; k < noise.size(); ++k) {
    const auto& grad = noise.modes[k].gradient;
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      double dot = 0.0;
      for (int a = 0; a < g.n; ++a) dot += w.grad[a][i] * grad[a][i];
      s += dens[i] * dot;
    }
    c[k] = -2.0 * noise.epsilon * s * g.cell();
  }
  return c;
}

/// Centered time derivative of sampled values with one Richardson step:
/// (4 D(h) - D(2h)) / 3 at interior samples that have two neighbours on
/// each side; other entries are NaN.
inline std::vector<double> centered_rate(const std::vector<double>& values, double h) {
  std::vector<double> d(values.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 2; i + 2 < values.size(); ++i) {
    const double d1 = (values[i + 1] - values[i - 1]) / (2.0 * h);
    const double d2 = (values[i + 2] - values[i - 2]) / (4.0 * h);
    d[i] = (4.0 * d1 - d2) / 3.0;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Strichartz norms and admissibility
// ---------------------------------------------------------------------------

/// (int_0^T ||u(t)||_q^gamma dt)^{1/gamma} by the trapezoid rule over
/// equally spaced samples; gamma = inf gives the maximum.
inline double strichartz_from_norms(const std::vector<double>& lq_norms, double gamma, double dt_sample) {
  if (lq_norms.empty()) throw InvalidArgument("strichartz_norm: empty trajectory");
  if (!(gamma >= 1.0)) throw InvalidArgument("strichartz_norm: gamma must be >= 1");
  if (std::isinf(gamma)) return *std::max_element(lq_norms.begin(), lq_norms.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < lq_norms.size(); ++i)
    s += 0.5 * dt_sample * (std::pow(lq_norms[i], gamma) + std::pow(lq_norms[i + 1], gamma));
  return std::pow(s, 1.0 / gamma);
}

inline double strichartz_norm(const std::vector<ComplexField>& trajectory, double gamma, double q,
                              double dt_sample) {
  if (trajectory.empty()) throw InvalidArgument("strichartz_norm: empty trajectory");
  if (!(q >= 1.0)) throw InvalidArgument("strichartz_norm: q must be >= 1");
  std::vector<double> norms;
  norms.reserve(trajectory.size());
  for (const auto& u : trajectory) norms.push_back(lp_norm(u, q));
  return strichartz_from_norms(norms, gamma, dt_sample);
}

/// Exact rational exponent, or infinity.
class Exponent {
public:
  constexpr Exponent(std::int64_t num, std::int64_t den = 1) : num_(num), den_(den) { normalize(); }
  static constexpr Exponent infinity() {
    Exponent e(1, 1);
    e.inf_ = true;
    return e;
  }
  constexpr bool is_infinite() const { return inf_; }
  constexpr std::int64_t num() const { return num_; }
  constexpr std::int64_t den() const { return den_; }
  double value() const { return inf_ ? std::numeric_limits<double>::infinity() : double(num_) / double(den_); }

  friend constexpr bool operator==(const Exponent& a, const Exponent& b) {
    if (a.inf_ || b.inf_) return a.inf_ == b.inf_;
    return a.num_ == b.num_ && a.den_ == b.den_;
  }

private:
  constexpr void normalize() {
    if (den_ == 0) throw InvalidArgument("Exponent: zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const auto g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }
  std::int64_t num_;
  std::int64_t den_;
  bool inf_ = false;
};

struct AdmissibleVerdict {
  bool admissible = false;
  std::string reason;
};

/// p in [2, inf], q in [2, inf), (p,q) != (2, (4n-2)/(2n-3)) and
/// 2 alpha/p + n/q = n/2, evaluated in exact rational arithmetic.
inline AdmissibleVerdict admissible_check(Exponent p, Exponent q, int n, Exponent alpha) {
  using i128 = __int128;
  auto ge2 = [](const Exponent& e) { return e.is_infinite() || e.num() >= 2 * e.den(); };
  if (!ge2(p)) return {false, "p out of range [2, inf]"};
  if (q.is_infinite() || !ge2(q)) return {false, "q out of range [2, inf)"};
  if (2 * n - 3 != 0 && p == Exponent(2) && q == Exponent(4 * n - 2, 2 * n - 3))
    return {false, "excluded endpoint"};
  // 2 alpha/p + n/q - n/2 == 0  <=>  (4 a_n p_d q_n + 2 n q_d a_d p_n - n a_d p_n q_n) == 0
  const i128 an = alpha.num(), ad = alpha.den(), qn = q.num(), qd = q.den();
  i128 lhs;
  if (p.is_infinite()) {
    lhs = 2 * n * qd - n * qn; // n/q - n/2 over common denominator 2 qn
  } else {
    const i128 pn = p.num(), pd = p.den();
    lhs = 4 * an * pd * qn + 2 * i128(n) * qd * ad * pn - i128(n) * ad * pn * qn;
  }
  if (lhs != 0) return {false, "scaling"};
  return {true, "admissible"};
}

/// Floating-point variant; the scaling identity is tested to 1e-12 relative.
inline AdmissibleVerdict admissible_check(double p, double q, int n, double alpha) {
  if (!(p >= 2.0)) return {false, "p out of range [2, inf]"};
  if (!(q >= 2.0) || std::isinf(q)) return {false, "q out of range [2, inf)"};
  if (2 * n - 3 != 0 && p == 2.0 && std::abs(q - (4.0 * n - 2.0) / (2.0 * n - 3.0)) <= 1e-12 * q)
    return {false, "excluded endpoint"};
  const double lhs = (std::isinf(p) ? 0.0 : 2.0 * alpha / p) + n / q;
  if (std::abs(lhs - 0.5 * n) > 1e-12 * 0.5 * n) return {false, "scaling"};
  return {true, "admissible"};
}

// ---------------------------------------------------------------------------
// Dispersive decay
// ---------------------------------------------------------------------------

struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0; ///< RMS of the log-log residuals
  double expected = 0.0; ///< -(n/alpha)(1/p - 1/2)
  double max_relative_variation = 0.0; ///< max_t |norm(t)/norm(t0) - 1|
  std::vector<double> times;
  std::vector<double> norms;
};

/// Fit log ||S(t) phi||_{L^{p'}} against log t over the t >= 1 part of
/// t_grid, S(t) the exact free propagator. Raises WraparoundError when more
/// than 1% of the mass sits in the boundary band at any fitted time.
inline DecayFit dispersive_decay_fit(const ComplexField& initial, double alpha, double p,
                                     const std::vector<double>& t_grid) {
  if (!(p >= 1.0 && p <= 2.0)) throw InvalidArgument("dispersive_decay_fit: p must lie in [1,2]");
  const double p_dual = p == 1.0 ? std::numeric_limits<double>::infinity() : p / (p - 1.0);
  DecayFit fit;
  fit.expected = -(initial.grid.n / alpha) * (1.0 / p - 0.5);
  const double m0 = mass(initial);
  for (double t : t_grid) {
    if (t < 1.0) continue;
    const ComplexField ut = linear_step(initial, alpha, t);
    const double frac = tail_mass(ut) / m0;
    if (frac > 0.01)
      throw WraparoundError("dispersive_decay_fit: " + std::to_string(100.0 * frac) +
                            "% of the mass reached the boundary band at t=" + std::to_string(t) +
                            "; enlarge the box length L (keeping dx) or shorten t_grid");
    fit.times.push_back(t);
    fit.norms.push_back(lp_norm(ut, p_dual));
  }
  if (fit.times.size() < 2) throw InvalidArgument("dispersive_decay_fit: need two t >= 1 samples");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < fit.times.size(); ++i) {
    lx.push_back(std::log(fit.times[i]));
    ly.push_back(std::log(fit.norms[i]));
    fit.max_relative_variation =
        std::max(fit.max_relative_variation, std::abs(fit.norms[i] / fit.norms[0] - 1.0));
  }
  std::tie(fit.slope, fit.intercept) = detail::linear_fit(lx, ly);
  double r2 = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (fit.intercept + fit.slope * lx[i]);
    r2 += e * e;
  }
  fit.residual = std::sqrt(r2 / lx.size());
  return fit;
}

// ---------------------------------------------------------------------------
// Blow-up
// ---------------------------------------------------------------------------

struct Certificate {
  bool certified = false;
  double lhs = 0.0;    ///< E[H(u0)] + t C(n,alpha) R E[M(u0)] / 4
  double margin = 0.0; ///< -lhs
};

/// Strict test E[H(u0)] + (1/4) t C(n,alpha) R E[M(u0)] < 0.
inline Certificate blowup_certificate(double h0_mean, double m0_mean, double r_hat, int n, double alpha,
                                      double t) {
  if (!(r_hat >= 0.0)) throw InvalidArgument("blowup_certificate: r_hat must be >= 0");
  if (!(t > 0.0)) throw InvalidArgument("blowup_certificate: t must be positive");
  Certificate c;
  c.lhs = h0_mean + 0.25 * t * cn_alpha(n, alpha) * r_hat * m0_mean;
  c.margin = -c.lhs;
  c.certified = c.lhs < 0.0;
  return c;
}

/// t* = t1 + [(2 alpha - 1) A^{2 alpha} z1^{2 alpha - 1}]^{-1}, the time by
/// which z' >= A^{2 alpha} z^{2 alpha} forces z to infinity.
inline double blowup_time_bound(double z1, double t1, double A, double alpha) {
  if (!(alpha > 0.5)) throw InvalidArgument("blowup_time_bound: needs alpha > 1/2 (2 alpha - 1 <= 0)");
  if (!(A > 0.0) || !(z1 > 0.0)) throw InvalidArgument("blowup_time_bound: A and z1 must be positive");
  return t1 + 1.0 / ((2.0 * alpha - 1.0) * std::pow(A, 2.0 * alpha) * std::pow(z1, 2.0 * alpha - 1.0));
}

/// Thresholds for declaring a trajectory diverged.
struct BlowupGuard {
  bool enabled = true;
  double kinetic_ratio = 1e6; ///< on ||(-Delta)^{alpha/2} u|| relative to t = 0
  double mass_drift = 1e-6;   ///< relative
};

enum class BlowupCause { none, nan, kinetic, mass_drift };

inline const char* to_string(BlowupCause c) {
  switch (c) {
    case BlowupCause::nan: return "nan";
    case BlowupCause::kinetic: return "kinetic-threshold";
    case BlowupCause::mass_drift: return "mass-drift";
    default: return "none";
  }
}

struct BlowupReport {
  bool fired = false;
  double t_fire = std::numeric_limits<double>::quiet_NaN();
  BlowupCause cause = BlowupCause::none;
  std::size_t index = 0;
};

/// Check one record against the reference (first) record.
inline BlowupCause guard_check(const DiagnosticsRecord& ref, const DiagnosticsRecord& r, const BlowupGuard& g) {
  if (!g.enabled) return BlowupCause::none;
  if (!r.finite()) return BlowupCause::nan;
  if (ref.kinetic > 0.0 && std::sqrt(r.kinetic) > g.kinetic_ratio * std::sqrt(ref.kinetic))
    return BlowupCause::kinetic;
  if (ref.mass > 0.0 && std::abs(r.mass - ref.mass) > g.mass_drift * ref.mass) return BlowupCause::mass_drift;
  return BlowupCause::none;
}

/// First record tripping the guard (NaN before kinetic before mass drift).
inline BlowupReport detect_blowup(const std::vector<DiagnosticsRecord>& records, const BlowupGuard& guard) {
  BlowupReport rep;
  if (records.empty()) return rep;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto cause = guard_check(records.front(), records[i], guard);
    if (cause != BlowupCause::none) {
      rep.fired = true;
      rep.cause = cause;
      rep.t_fire = records[i].t;
      rep.index = i;
      break;
    }
  }
  return rep;
}

} // namespace sfnls

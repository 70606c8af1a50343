#pragma once

#include <array>

namespace sfnls {

/// Degree-9 smoothstep S(t) = 630 * int_0^t s^4 (1-s)^4 ds on [0,1]:
/// monotone, S(0)=0, S(1)=1, first four derivatives vanish at both ends.
/// derivative(t, j) returns S^{(j)}(t) for j <= 5, clamped outside [0,1].
struct Smoothstep9 {
  static constexpr std::array<double, 10> coeffs{0, 0, 0, 0, 0, 126, -420, 540, -315, 70};

  static double derivative(double t, int j) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return j == 0 ? 1.0 : 0.0;
    // Horner on the j-th derivative of the coefficient list.
    double acc = 0.0;
    for (int p = static_cast<int>(coeffs.size()) - 1; p >= j; --p) {
      double c = coeffs[p];
      for (int m = 0; m < j; ++m) c *= (p - m);
      acc = acc * t + c;
    }
    return acc;
  }
  static double value(double t) { return derivative(t, 0); }
};

} // namespace sfnls

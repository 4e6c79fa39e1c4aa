#include "sincos.hpp"

#include <algorithm>
#include <cmath>

namespace metato::detail {

namespace {

// pi/2 split for Cody-Waite reduction; exact for |k| below about 2^20
constexpr double kTwoOverPi = 0.63661977236758134308;
constexpr double kPio2a = 1.5707963267341256e+00;
constexpr double kPio2b = 6.0771005065061922e-11;
constexpr double kPio2c = 2.0222662487959506e-21;
constexpr double kReducedLimit = 1e5;

inline double sin_poly(double r, double z) {
  return r + r * z *
                 (-1.66666666666666307295e-1 +
                  z * (8.33333333332211858878e-3 +
                       z * (-1.98412698295895385996e-4 +
                            z * (2.75573136213857245213e-6 +
                                 z * (-2.50507477628578072866e-8 + z * 1.58962301576546568060e-10)))));
}

inline double cos_poly(double z) {
  return 1.0 - 0.5 * z +
         z * z *
             (4.16666666666665929218e-2 +
              z * (-1.38888888888730564116e-3 +
                   z * (2.48015872888517045348e-5 +
                        z * (-2.75573141792967388112e-7 +
                             z * (2.08757008419747316778e-9 + z * -1.13585365213876817300e-11)))));
}

inline double reduce(double a, double& q) {
  const double k = std::floor(a * kTwoOverPi + 0.5);
  q = k - 4.0 * std::floor(k * 0.25);
  return ((a - k * kPio2a) - k * kPio2b) - k * kPio2c;
}

// sin(r + q pi/2) from the reduced kernels, quadrant q in {0, 1, 2, 3}
inline double shift_sin(double sr, double cr, double q) {
  const double half = std::floor(q * 0.5);
  const double odd = q - 2.0 * half;
  return (1.0 - 2.0 * half) * (odd * cr + (1.0 - odd) * sr);
}

inline double shift_cos(double sr, double cr, double q) {
  const double half = std::floor(q * 0.5);
  const double odd = q - 2.0 * half;
  const double q1 = q + 1.0 - 4.0 * std::floor((q + 1.0) * 0.25);
  return (1.0 - 2.0 * std::floor(q1 * 0.5)) * (odd * sr + (1.0 - odd) * cr);
}

}  // namespace

void scaled_sincos(const double* x, double w, double* s, double* c, std::size_t n) {
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) peak = std::max(peak, std::abs(w * x[i]));
  if (!(peak < kReducedLimit)) {
    for (std::size_t i = 0; i < n; ++i) {
      const double a = w * x[i];
      if (c) c[i] = std::cos(a);
      s[i] = std::sin(a);
    }
    return;
  }
  if (c) {
    for (std::size_t i = 0; i < n; ++i) {
      double q;
      const double r = reduce(w * x[i], q);
      const double z = r * r;
      const double sr = sin_poly(r, z);
      const double cr = cos_poly(z);
      c[i] = shift_cos(sr, cr, q);
      s[i] = shift_sin(sr, cr, q);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      double q;
      const double r = reduce(w * x[i], q);
      const double z = r * r;
      s[i] = shift_sin(sin_poly(r, z), cos_poly(z), q);
    }
  }
}

}  // namespace metato::detail

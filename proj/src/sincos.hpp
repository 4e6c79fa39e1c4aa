#pragma once

#include <cstddef>

namespace metato::detail {

// s[i] = sin(w * x[i]), c[i] = cos(w * x[i]); c may be null. x may alias s.
// Accurate to about one ulp; very large arguments fall back to libm.
void scaled_sincos(const double* x, double w, double* s, double* c, std::size_t n);

}  // namespace metato::detail

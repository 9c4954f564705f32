#include "polymer_kernels.hpp"

#include <cmath>

namespace colltime::detail {

void exp_affine(const double* x, std::size_t n, double a, double b, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(a * x[i] + b);
}

}  // namespace colltime::detail

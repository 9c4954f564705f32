#pragma once

#include <cstddef>

namespace colltime::detail {

// out[i] = exp(a x[i] + b). Lives in its own translation unit built with
// relaxed floating-point flags so the loop maps onto the vector exp.
void exp_affine(const double* x, std::size_t n, double a, double b, double* out);

}  // namespace colltime::detail

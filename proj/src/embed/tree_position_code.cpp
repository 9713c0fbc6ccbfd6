// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "mathlm/embedder.hpp"
#include "mathlm/errors.hpp"

namespace mathlm {

std::vector<int> bin_active_indices(const TreePosition& p) {
  if (p.depth() > static_cast<std::size_t>(kMaxTreeDepth))
    throw CapExceeded("tree position " + p.to_string() + " deeper than " + std::to_string(kMaxTreeDepth));
  std::vector<int> active;
  active.reserve(p.depth() * kPositionBits);
  for (std::size_t level = 0; level < p.depth(); ++level) {
    int entry = p[level];
    if (entry >= kMaxChildren)
      throw CapExceeded("sibling index " + std::to_string(entry) + " exceeds " + std::to_string(kMaxChildren - 1));
    int block = static_cast<int>(level) * 2 * kPositionBits;
    for (int k = 0; k < kPositionBits; ++k) {
      int bit = (entry >> (kPositionBits - 1 - k)) & 1;
      active.push_back(block + 2 * k + bit);
    }
  }
  return active;
}

Vector bin_encode(const TreePosition& p) {
  Vector v = Vector::Zero(kTreeCodeSize);
  for (int i : bin_active_indices(p)) v[i] = 1.0;
  return v;
}

double gelu(double x) {
  constexpr double c = 0.7978845608028654;  // sqrt(2/pi)
  return 0.5 * x * (1.0 + std::tanh(c * (x + 0.044715 * x * x * x)));
}

double gelu_grad(double x) {
  constexpr double c = 0.7978845608028654;
  double inner = c * (x + 0.044715 * x * x * x);
  double t = std::tanh(inner);
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * c * (1.0 + 3.0 * 0.044715 * x * x);
}

}  // namespace mathlm

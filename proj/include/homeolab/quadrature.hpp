#pragma once

#include <vector>

namespace homeolab {

struct GaussRule {
  std::vector<double> nodes;    // on [0, 1]
  std::vector<double> weights;  // sum to 1
};

// Q-point Gauss-Legendre rule mapped to [0, 1].
const GaussRule& gauss_legendre01(int q);

}  // namespace homeolab

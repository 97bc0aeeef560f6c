#pragma once

#include <vector>

namespace layerpot {

struct GaussLegendre {
  std::vector<double> x;  // nodes on [-1, 1], descending
  std::vector<double> w;
};

/// n-point Gauss-Legendre rule by Newton iteration on the three-term recurrence.
GaussLegendre gauss_legendre(int n);

}  // namespace layerpot

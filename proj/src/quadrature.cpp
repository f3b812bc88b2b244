#include "homeolab/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "homeolab/errors.hpp"

namespace homeolab {

namespace {

GaussRule build_rule(int q) {
  GaussRule r;
  r.nodes.resize(static_cast<std::size_t>(q));
  r.weights.resize(static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i) {
    // Newton on P_q starting from the Chebyshev-like guess
    double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= q; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pq = (q == 1) ? x : p1;
      const double pq1 = (q == 1) ? 1.0 : p0;
      dp = q * (x * pq - pq1) / (x * x - 1.0);
      const double dx = pq / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // ascending order on [0, 1]
    r.nodes[static_cast<std::size_t>(q - 1 - i)] = 0.5 * (x + 1.0);
    r.weights[static_cast<std::size_t>(q - 1 - i)] = 0.5 * w;
  }
  return r;
}

}  // namespace

const GaussRule& gauss_legendre01(int q) {
  if (q < 1 || q > 64) throw ParameterError("Gauss-Legendre order must be in [1, 64]");
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(q);
  if (it == cache.end()) it = cache.emplace(q, build_rule(q)).first;
  return it->second;
}

}  // namespace homeolab

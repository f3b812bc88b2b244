#pragma once

#include <complex>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "homeolab/core_grid.hpp"

namespace homeolab {

/// Fourier coefficients c_k, |k| <= 2^(m-1), of a sampled function.
///
/// Characters are e^{2 pi i k t} on the circle of measure one. The two
/// Nyquist entries k = +-2^(m-1) alias the same grid frequency; each holds
/// half of that bin so the coefficient list stays conjugate-symmetric.
class FourierCoeffs {
 public:
  FourierCoeffs(int m, std::vector<std::complex<double>> c);

  int m() const { return m_; }
  int max_degree() const { return half_; }
  std::complex<double> operator[](int k) const { return c_[static_cast<std::size_t>(k + half_)]; }
  std::span<const std::complex<double>> all() const { return c_; }

  // Sum of |c|^2 over distinct grid frequencies (Nyquist bin counted once).
  double energy() const;

 private:
  int m_;
  int half_;
  std::vector<std::complex<double>> c_;
};

// sum_{|k| <= n} e^{2 pi i k t} = sin(pi (2n+1) t) / sin(pi t).
double dirichlet_kernel(int n, double t);

FourierCoeffs coeffs(const SampledFunction& f);

// Truncation of coeffs(f) to |k| <= n, resynthesized on f's grid.
SampledFunction partial_sum(const SampledFunction& f, int n);
SampledFunction synthesize(const FourierCoeffs& c, int n);

struct SupNormEntry {
  int n = 0;
  double sup_norm = 0.0;
};

// max over the grid of |S_n f| for every requested degree.
std::vector<SupNormEntry> sup_partial_sums(const SampledFunction& f, std::span<const int> degrees);

// Writes "n,sup_norm" rows at 12 significant digits.
void write_sup_norm_csv(std::ostream& os, std::span<const SupNormEntry> rows);

// sum_k |c_k|
double a_norm(const SampledFunction& f);

// Integral of D_n(j/n - t) over t in [k/n, (k+1)/n], adaptive Gauss-Kronrod.
double kernel_block_integral(int n, int k, int j);

int circular_distance(int k, int j, int n);

}  // namespace homeolab

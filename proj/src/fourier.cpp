#include "homeolab/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fftw3.h>
#include <fmt/format.h>

#include "homeolab/errors.hpp"

namespace homeolab {

namespace {

using cplx = std::complex<double>;

// Forward real transform: returns bins 0 .. N/2 of sum_i v_i e^{-2 pi i k i / N}.
std::vector<cplx> rfft(std::span<const double> v) {
  const int n = static_cast<int>(v.size());
  std::vector<double> in(v.begin(), v.end());
  std::vector<cplx> out(static_cast<std::size_t>(n / 2 + 1));
  fftw_plan plan = fftw_plan_dft_r2c_1d(n, in.data(), reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  return out;
}

// Inverse of rfft without normalization; the input is consumed.
std::vector<double> irfft(std::vector<cplx> bins, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  fftw_plan plan =
      fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(bins.data()), out.data(), FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  return out;
}

void require_degree(int m, int n) {
  if (n < 0) throw ParameterError(fmt::format("negative degree {}", n));
  if (m < 1 || n >= (1 << (m - 1))) {
    throw ResolutionError(fmt::format("degree {} needs a grid exponent m with n < 2^(m-1); have m = {}", n, m));
  }
}

}  // namespace

FourierCoeffs::FourierCoeffs(int m, std::vector<cplx> c) : m_(m), half_(m == 0 ? 0 : 1 << (m - 1)), c_(std::move(c)) {
  if (c_.size() != static_cast<std::size_t>(2 * half_ + 1)) throw ParameterError("coefficient count mismatch");
}

double FourierCoeffs::energy() const {
  if (half_ == 0) return std::norm(c_[0]);
  double s = 0.0;
  for (int k = -half_ + 1; k < half_; ++k) s += std::norm((*this)[k]);
  return s + std::norm((*this)[half_] + (*this)[-half_]);
}

double dirichlet_kernel(int n, double t) {
  if (n < 0) throw ParameterError("Dirichlet kernel degree must be nonnegative");
  const double r = t - std::round(t);
  if (r == 0.0) return 2.0 * n + 1.0;
  const double s = std::sin(std::numbers::pi * r);
  if (std::abs(s) < 1e-7) {
    // near the removable singularity: sum the cosines directly
    double acc = 1.0;
    for (int k = 1; k <= n; ++k) acc += 2.0 * std::cos(2.0 * std::numbers::pi * k * r);
    return acc;
  }
  return std::sin(std::numbers::pi * (2.0 * n + 1.0) * r) / s;
}

FourierCoeffs coeffs(const SampledFunction& f) {
  const int n = static_cast<int>(f.size());
  if (n == 1) return FourierCoeffs(0, {cplx(f[0], 0.0)});
  const int half = n / 2;
  const auto bins = rfft(f.values());
  const double scale = 1.0 / n;
  std::vector<cplx> c(static_cast<std::size_t>(n + 1));
  for (int k = 0; k < half; ++k) {
    c[static_cast<std::size_t>(half + k)] = bins[static_cast<std::size_t>(k)] * scale;
    c[static_cast<std::size_t>(half - k)] = std::conj(bins[static_cast<std::size_t>(k)]) * scale;
  }
  const cplx nyq = bins[static_cast<std::size_t>(half)] * (0.5 * scale);
  c[0] = nyq;
  c[static_cast<std::size_t>(n)] = nyq;
  return FourierCoeffs(f.m(), std::move(c));
}

SampledFunction synthesize(const FourierCoeffs& c, int n) {
  require_degree(c.m(), n);
  const int size = 1 << c.m();
  std::vector<cplx> bins(static_cast<std::size_t>(size / 2 + 1), cplx{});
  for (int k = 0; k <= n; ++k) bins[static_cast<std::size_t>(k)] = c[k];
  return SampledFunction(c.m(), irfft(std::move(bins), size));
}

SampledFunction partial_sum(const SampledFunction& f, int n) {
  require_degree(f.m(), n);
  return synthesize(coeffs(f), n);
}

std::vector<SupNormEntry> sup_partial_sums(const SampledFunction& f, std::span<const int> degrees) {
  for (int n : degrees) require_degree(f.m(), n);
  const auto c = coeffs(f);
  std::vector<SupNormEntry> out;
  out.reserve(degrees.size());
  for (int n : degrees) out.push_back({n, synthesize(c, n).sup_norm()});
  return out;
}

void write_sup_norm_csv(std::ostream& os, std::span<const SupNormEntry> rows) {
  os << "n,sup_norm\n";
  for (const auto& r : rows) os << fmt::format("{},{:.12g}\n", r.n, r.sup_norm);
}

double a_norm(const SampledFunction& f) {
  const auto c = coeffs(f);
  double s = 0.0;
  for (const auto& z : c.all()) s += std::abs(z);
  return s;
}

double kernel_block_integral(int n, int k, int j) {
  if (n < 1 || k < 0 || k >= n || j < 0 || j >= n) {
    throw ParameterError(fmt::format("kernel_block_integral: need 0 <= k, j < n (n={}, k={}, j={})", n, k, j));
  }
  const double x = static_cast<double>(j) / n;
  auto integrand = [n, x](double t) { return dirichlet_kernel(n, x - t); };
  const double a = static_cast<double>(k) / n;
  const double b = static_cast<double>(k + 1) / n;
  // Two kernel oscillations per block; split so each panel sees at most a few.
  constexpr int kPanels = 4;
  double total = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    const double lo = a + (b - a) * p / kPanels;
    const double hi = a + (b - a) * (p + 1) / kPanels;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, lo, hi, 8, 1e-12);
  }
  return total;
}

int circular_distance(int k, int j, int n) {
  const int d = std::abs(k - j) % n;
  return std::min(d, n - d);
}

}  // namespace homeolab

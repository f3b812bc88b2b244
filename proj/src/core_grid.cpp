#include "homeolab/core_grid.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "homeolab/errors.hpp"

namespace homeolab {

namespace {

double reduce_mod1(double t) {
  if (std::isnan(t)) throw ParameterError("evaluation point is NaN");
  if (t >= 0.0 && t <= 1.0) return t;
  double r = t - std::floor(t);
  if (r >= 1.0) r = 0.0;
  return r;
}

}  // namespace

SampledFunction::SampledFunction(int m, std::vector<double> values) : m_(m), values_(std::move(values)) {
  if (m < 0 || m > kMaxGridExponent) throw ParameterError(fmt::format("grid exponent {} out of range", m));
  if (values_.size() != (std::size_t{1} << m)) {
    throw ParameterError(fmt::format("expected 2^{} = {} samples, got {}", m, std::size_t{1} << m, values_.size()));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw ParameterError("sample values must be finite");
  }
}

SampledFunction SampledFunction::constant(int m, double c) {
  if (m < 0 || m > kMaxGridExponent) throw ParameterError(fmt::format("grid exponent {} out of range", m));
  return SampledFunction(m, std::vector<double>(std::size_t{1} << m, c));
}

double SampledFunction::at(double t) const {
  t = reduce_mod1(t);
  const double n = static_cast<double>(values_.size());
  const double x = t * n;
  double cell = std::floor(x);
  if (cell >= n) cell = n - 1.0;
  const double frac = x - cell;
  const auto i = static_cast<std::size_t>(cell);
  const std::size_t i1 = (i + 1 == values_.size()) ? 0 : i + 1;
  if (frac == 0.0) return values_[i];
  return values_[i] + frac * (values_[i1] - values_[i]);
}

double SampledFunction::sup_norm() const {
  double s = 0.0;
  for (double v : values_) s = std::max(s, std::abs(v));
  return s;
}

DyadicPoint::DyadicPoint(std::int64_t k_, int n_) : k(k_), n(n_) {
  if (n < 1 || n > 62) throw ParameterError(fmt::format("dyadic rank {} out of range", n));
  if (k % 2 == 0 || k < 1 || k > (std::int64_t{1} << n) - 1) {
    throw ParameterError(fmt::format("{}/2^{} is not a dyadic point of rank {}", k, n, n));
  }
}

DyadicPoint DyadicPoint::reduced(std::int64_t k, int n) {
  if (k <= 0 || n < 1 || k >= (std::int64_t{1} << n)) {
    throw ParameterError(fmt::format("{}/2^{} is not an interior dyadic point", k, n));
  }
  while (k % 2 == 0) {
    k /= 2;
    --n;
  }
  return DyadicPoint(k, n);
}

double DyadicPoint::value() const { return std::ldexp(static_cast<double>(k), -n); }
double DyadicPoint::left() const { return std::ldexp(static_cast<double>(k - 1), -n); }
double DyadicPoint::right() const { return std::ldexp(static_cast<double>(k + 1), -n); }

PLHomeo::PLHomeo(std::vector<Breakpoint> breakpoints) : bp_(std::move(breakpoints)) {
  if (bp_.size() < 2) throw ParameterError("a homeomorphism needs at least two breakpoints");
  if (bp_.front() != Breakpoint{0.0, 0.0} || bp_.back() != Breakpoint{1.0, 1.0}) {
    throw ParameterError("breakpoints must start at (0,0) and end at (1,1)");
  }
  for (std::size_t i = 1; i < bp_.size(); ++i) {
    if (!(bp_[i].t > bp_[i - 1].t) || !(bp_[i].y > bp_[i - 1].y)) {
      throw ParameterError(fmt::format("breakpoints not strictly increasing at index {} ({}, {}) -> ({}, {})", i,
                                       bp_[i - 1].t, bp_[i - 1].y, bp_[i].t, bp_[i].y));
    }
  }
}

PLHomeo PLHomeo::identity() { return PLHomeo({{0.0, 0.0}, {1.0, 1.0}}); }

PLHomeo PLHomeo::from_dyadic_images(int level, std::vector<double> images) {
  const std::size_t n = std::size_t{1} << level;
  if (images.size() != n + 1) throw ParameterError("need 2^level + 1 images");
  std::vector<Breakpoint> bp(n + 1);
  for (std::size_t i = 0; i <= n; ++i) bp[i] = {std::ldexp(static_cast<double>(i), -level), images[i]};
  return PLHomeo(std::move(bp));
}

double PLHomeo::operator()(double t) const {
  t = reduce_mod1(t);
  // first breakpoint with bp.t > t
  auto it = std::upper_bound(bp_.begin(), bp_.end(), t, [](double x, const Breakpoint& b) { return x < b.t; });
  if (it == bp_.end()) return 1.0;
  const Breakpoint& hi = *it;
  const Breakpoint& lo = *(it - 1);
  if (t == lo.t) return lo.y;
  const double lam = (t - lo.t) / (hi.t - lo.t);
  return lo.y + lam * (hi.y - lo.y);
}

double eval_pl(const PLHomeo& h, double t) { return h(t); }

PLHomeo invert(const PLHomeo& h) {
  std::vector<Breakpoint> bp(h.bp_.size());
  std::transform(h.bp_.begin(), h.bp_.end(), bp.begin(), [](const Breakpoint& b) { return Breakpoint{b.y, b.t}; });
  return PLHomeo(std::move(bp), PLHomeo::Unchecked{});
}

SampledFunction compose(const SampledFunction& f, const PLHomeo& h, int m_out) {
  return SampledFunction::from_fn(m_out, [&](double t) { return f.at(h(t)); });
}

SampledFunction normalize_to_unit(const SampledFunction& f) {
  const auto v = f.values();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  std::vector<double> out(v.size(), 0.0);
  if (*hi > *lo) {
    const double mid = 0.5 * (*hi + *lo);
    const double half = 0.5 * (*hi - *lo);
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::clamp((v[i] - mid) / half, -1.0, 1.0);
  }
  return SampledFunction(f.m(), std::move(out));
}

void to_json(nlohmann::json& j, const SampledFunction& f) {
  j = nlohmann::json{{"m", f.m()}, {"values", std::vector<double>(f.values().begin(), f.values().end())}};
}

void from_json(const nlohmann::json& j, SampledFunction& f) {
  f = SampledFunction(j.at("m").get<int>(), j.at("values").get<std::vector<double>>());
}

void to_json(nlohmann::json& j, const PLHomeo& h) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& b : h.breakpoints()) pts.push_back({b.t, b.y});
  j = nlohmann::json{{"breakpoints", std::move(pts)}};
}

void from_json(const nlohmann::json& j, PLHomeo& h) {
  std::vector<Breakpoint> bp;
  for (const auto& p : j.at("breakpoints")) {
    if (!p.is_array() || p.size() != 2) throw ParameterError("breakpoint must be a [t, y] pair");
    bp.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  h = PLHomeo(std::move(bp));
}

}  // namespace homeolab

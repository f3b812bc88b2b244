#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

namespace homeolab {

// Refinement added to the input grid exponent when composing with a
// homeomorphism that may compress intervals.
inline constexpr int kComposeRefinement = 4;

// Largest supported grid exponent.
inline constexpr int kMaxGridExponent = 24;

/// A real 1-periodic function sampled at t = i / 2^m, i = 0 .. 2^m - 1.
/// Between nodes the function is linear; the node after the last one is
/// node 0 of the next period.
class SampledFunction {
 public:
  SampledFunction() = default;
  SampledFunction(int m, std::vector<double> values);

  static SampledFunction constant(int m, double c);
  // Samples fn(i / 2^m).
  template <class Fn>
  static SampledFunction from_fn(int m, Fn&& fn) {
    std::vector<double> v(std::size_t{1} << m);
    const double step = 1.0 / static_cast<double>(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(static_cast<double>(i) * step);
    return SampledFunction(m, std::move(v));
  }

  int m() const { return m_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double node(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(size()); }

  // Piecewise-linear periodic evaluation; t is reduced mod 1.
  double at(double t) const;
  double sup_norm() const;

  friend bool operator==(const SampledFunction&, const SampledFunction&) = default;

 private:
  int m_ = 0;
  std::vector<double> values_{0.0};
};

/// d = k / 2^n with k odd and 0 < k < 2^n; n is the rank of d.
struct DyadicPoint {
  std::int64_t k = 1;
  int n = 1;

  DyadicPoint() = default;
  DyadicPoint(std::int64_t k_, int n_);

  // Reduces an arbitrary k / 2^n (0 < k < 2^n) to lowest terms.
  static DyadicPoint reduced(std::int64_t k, int n);

  double value() const;
  // Position of d among the 2^(n-1) points of its rank.
  std::size_t index_in_rank() const { return static_cast<std::size_t>((k - 1) / 2); }
  // Endpoints of the surrounding interval I = [(k-1)/2^n, (k+1)/2^n].
  double left() const;
  double right() const;

  friend bool operator==(const DyadicPoint&, const DyadicPoint&) = default;
  friend auto operator<=>(const DyadicPoint& a, const DyadicPoint& b) {
    if (auto c = a.n <=> b.n; c != 0) return c;
    return a.k <=> b.k;
  }
};

struct Breakpoint {
  double t = 0.0;
  double y = 0.0;
  friend bool operator==(const Breakpoint&, const Breakpoint&) = default;
};

/// Strictly increasing piecewise-linear homeomorphism of [0,1] fixing both
/// endpoints, extended 1-periodically to the circle.
class PLHomeo {
 public:
  PLHomeo() : PLHomeo(identity()) {}
  explicit PLHomeo(std::vector<Breakpoint> breakpoints);

  static PLHomeo identity();
  // Breakpoints at j / 2^level with the given images (size 2^level + 1).
  static PLHomeo from_dyadic_images(int level, std::vector<double> images);

  std::span<const Breakpoint> breakpoints() const { return bp_; }
  std::size_t size() const { return bp_.size(); }

  double operator()(double t) const;

  friend bool operator==(const PLHomeo&, const PLHomeo&) = default;

 private:
  struct Unchecked {};
  PLHomeo(std::vector<Breakpoint> breakpoints, Unchecked) : bp_(std::move(breakpoints)) {}
  friend PLHomeo invert(const PLHomeo& h);

  std::vector<Breakpoint> bp_;
};

double eval_pl(const PLHomeo& h, double t);

// Swaps the coordinates of every breakpoint; invert(invert(h)) == h exactly.
PLHomeo invert(const PLHomeo& h);

// Samples f(h(t)) on the grid of exponent m_out.
SampledFunction compose(const SampledFunction& f, const PLHomeo& h, int m_out);
inline SampledFunction compose(const SampledFunction& f, const PLHomeo& h) {
  return compose(f, h, f.m() + kComposeRefinement);
}

// Affine rescaling of f onto [-1, 1]; constant functions map to 0.
SampledFunction normalize_to_unit(const SampledFunction& f);

void to_json(nlohmann::json& j, const SampledFunction& f);
void from_json(const nlohmann::json& j, SampledFunction& f);
void to_json(nlohmann::json& j, const PLHomeo& h);
void from_json(const nlohmann::json& j, PLHomeo& h);

}  // namespace homeolab

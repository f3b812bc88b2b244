#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "homeolab/core_grid.hpp"

namespace homeolab {

/// Haar expansion f = mean + sum_I coef[I] chi_I, where chi_I is |I|^{-1/2}
/// on the left half of the dyadic interval I and -|I|^{-1/2} on the right.
/// Level l holds the 2^l intervals of length 2^-l.
class HaarCoeffs {
 public:
  HaarCoeffs() = default;
  HaarCoeffs(double mean, std::vector<std::vector<double>> levels);

  double mean() const { return mean_; }
  int levels() const { return static_cast<int>(coef_.size()); }
  double coef(int level, std::size_t index) const { return coef_[static_cast<std::size_t>(level)][index]; }
  double& coef(int level, std::size_t index) { return coef_[static_cast<std::size_t>(level)][index]; }
  std::span<const double> level(int l) const { return coef_[static_cast<std::size_t>(l)]; }

  // mean^2 + sum coef^2
  double energy() const;

 private:
  double mean_ = 0.0;
  std::vector<std::vector<double>> coef_;
};

// Exact analysis of the samples read as a step function on the 2^-m grid.
HaarCoeffs haar_transform(const SampledFunction& f);

// Synthesis onto the grid of exponent m (m >= levels).
SampledFunction haar_inverse(const HaarCoeffs& c, int m);

struct QMapConfig {
  // Clamp floor for a point of rank n is 2^{-n * floor_exponent}.
  double floor_exponent = 0.25;
};

/// Per-dyadic-point randomness budget q(d), raw and clamped to [floor, 1].
class QMap {
 public:
  QMap() = default;
  QMap(int max_rank, QMapConfig cfg);

  int max_rank() const { return max_rank_; }
  const QMapConfig& config() const { return cfg_; }
  double floor_at(int rank) const;

  double raw(const DyadicPoint& d) const;
  // Clamped value; ranks beyond max_rank get the floor.
  double operator()(const DyadicPoint& d) const;
  double at(int rank, std::size_t index) const;

  void set(const DyadicPoint& d, double raw_value);
  void set_clamped(const DyadicPoint& d, double raw_value, double clamped_value);

 private:
  int max_rank_ = 0;
  QMapConfig cfg_;
  std::vector<std::vector<double>> raw_;
  std::vector<std::vector<double>> q_;
};

/// q_f(d) = |I|^{-3/2} sum_{J subset I} <f, chi_J>^2 |J|^{1/2} for every dyadic
/// d of rank <= max_rank, I = [(k-1)/2^n, (k+1)/2^n]. Requires sup|f| <= 1.
QMap q_map(const SampledFunction& f, int max_rank, const QMapConfig& cfg = {});

// sign(sin(2^n pi t)) on the grid of exponent m >= n + 2.
SampledFunction rademacher(int n, int m);

/// +-1 square wave whose half-wave lengths are 2^-n + jitter (U - 2^-n) with
/// U uniform on [2^-n-1, 2^-n+1]; jitter = 0 gives rademacher(n).
SampledFunction perturbed_square_wave(int n, double jitter, std::uint64_t seed, int m);

void to_json(nlohmann::json& j, const QMap& q);
void from_json(const nlohmann::json& j, QMap& q);

}  // namespace homeolab

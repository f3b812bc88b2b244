#include "homeolab/haar.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "homeolab/errors.hpp"
#include "homeolab/rng.hpp"

namespace homeolab {

HaarCoeffs::HaarCoeffs(double mean, std::vector<std::vector<double>> levels) : mean_(mean), coef_(std::move(levels)) {
  for (std::size_t l = 0; l < coef_.size(); ++l) {
    if (coef_[l].size() != (std::size_t{1} << l)) throw ParameterError(fmt::format("Haar level {} has wrong size", l));
  }
}

double HaarCoeffs::energy() const {
  double s = mean_ * mean_;
  for (const auto& lvl : coef_) {
    for (double c : lvl) s += c * c;
  }
  return s;
}

HaarCoeffs haar_transform(const SampledFunction& f) {
  const int m = f.m();
  // integrals over the cells of the current level
  std::vector<double> ints(f.values().begin(), f.values().end());
  const double cell = std::ldexp(1.0, -m);
  for (double& v : ints) v *= cell;

  std::vector<std::vector<double>> levels(static_cast<std::size_t>(m));
  for (int l = m - 1; l >= 0; --l) {
    const std::size_t count = std::size_t{1} << l;
    const double inv_sqrt_len = std::sqrt(std::ldexp(1.0, l));  // |I|^{-1/2}
    auto& out = levels[static_cast<std::size_t>(l)];
    out.resize(count);
    std::vector<double> parent(count);
    for (std::size_t i = 0; i < count; ++i) {
      const double left = ints[2 * i];
      const double right = ints[2 * i + 1];
      out[i] = inv_sqrt_len * (left - right);
      parent[i] = left + right;
    }
    ints = std::move(parent);
  }
  return HaarCoeffs(ints[0], std::move(levels));
}

SampledFunction haar_inverse(const HaarCoeffs& c, int m) {
  if (m < c.levels()) {
    throw ResolutionError(fmt::format("Haar synthesis needs grid exponent >= {}, got {}", c.levels(), m));
  }
  std::vector<double> vals{c.mean()};
  for (int l = 0; l < c.levels(); ++l) {
    const double inv_sqrt_len = std::sqrt(std::ldexp(1.0, l));
    std::vector<double> next(vals.size() * 2);
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double delta = c.coef(l, i) * inv_sqrt_len;
      next[2 * i] = vals[i] + delta;
      next[2 * i + 1] = vals[i] - delta;
    }
    vals = std::move(next);
  }
  const std::size_t rep = std::size_t{1} << (m - c.levels());
  std::vector<double> out(vals.size() * rep);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = vals[i / rep];
  return SampledFunction(m, std::move(out));
}

QMap::QMap(int max_rank, QMapConfig cfg) : max_rank_(max_rank), cfg_(cfg) {
  if (max_rank < 0) throw ParameterError("QMap rank must be nonnegative");
  if (!(cfg.floor_exponent > 0.0)) throw ParameterError("QMap floor exponent must be positive");
  raw_.resize(static_cast<std::size_t>(max_rank) + 1);
  q_.resize(static_cast<std::size_t>(max_rank) + 1);
  for (int n = 1; n <= max_rank; ++n) {
    const std::size_t count = std::size_t{1} << (n - 1);
    raw_[static_cast<std::size_t>(n)].assign(count, 0.0);
    q_[static_cast<std::size_t>(n)].assign(count, floor_at(n));
  }
}

double QMap::floor_at(int rank) const { return std::exp2(-rank * cfg_.floor_exponent); }

double QMap::raw(const DyadicPoint& d) const {
  if (d.n > max_rank_) return 0.0;
  return raw_[static_cast<std::size_t>(d.n)][d.index_in_rank()];
}

double QMap::operator()(const DyadicPoint& d) const { return at(d.n, d.index_in_rank()); }

double QMap::at(int rank, std::size_t index) const {
  if (rank > max_rank_) return floor_at(rank);
  return q_[static_cast<std::size_t>(rank)][index];
}

void QMap::set(const DyadicPoint& d, double raw_value) {
  set_clamped(d, raw_value, std::clamp(raw_value, floor_at(d.n), 1.0));
}

void QMap::set_clamped(const DyadicPoint& d, double raw_value, double clamped_value) {
  if (d.n > max_rank_) throw ParameterError(fmt::format("rank {} exceeds QMap depth {}", d.n, max_rank_));
  if (!(raw_value >= 0.0) || !(clamped_value > 0.0 && clamped_value <= 1.0)) {
    throw ParameterError(fmt::format("invalid q value (raw {}, clamped {})", raw_value, clamped_value));
  }
  raw_[static_cast<std::size_t>(d.n)][d.index_in_rank()] = raw_value;
  q_[static_cast<std::size_t>(d.n)][d.index_in_rank()] = clamped_value;
}

QMap q_map(const SampledFunction& f, int max_rank, const QMapConfig& cfg) {
  if (f.sup_norm() > 1.0 + 1e-12) {
    throw ParameterError(
        fmt::format("q_map expects sup|f| <= 1 (got {}); normalize the function first", f.sup_norm()));
  }
  const HaarCoeffs c = haar_transform(f);
  const int levels = c.levels();

  // agg[l][i] = sum over J inside the level-l interval i of <f,chi_J>^2 |J|^{1/2}
  std::vector<std::vector<double>> agg(static_cast<std::size_t>(levels));
  for (int l = levels - 1; l >= 0; --l) {
    const std::size_t count = std::size_t{1} << l;
    const double sqrt_len = std::sqrt(std::ldexp(1.0, -l));
    auto& a = agg[static_cast<std::size_t>(l)];
    a.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      const double ci = c.coef(l, i);
      double below = 0.0;
      if (l + 1 < levels) below = agg[static_cast<std::size_t>(l + 1)][2 * i] + agg[static_cast<std::size_t>(l + 1)][2 * i + 1];
      a[i] = ci * ci * sqrt_len + below;
    }
  }

  QMap q(max_rank, cfg);
  for (int n = 1; n <= max_rank; ++n) {
    const int l = n - 1;  // level of I around a rank-n point
    const double len = std::ldexp(1.0, -l);
    const double norm = len * std::sqrt(len);
    for (std::size_t i = 0; i < (std::size_t{1} << (n - 1)); ++i) {
      const double raw = (l < levels) ? agg[static_cast<std::size_t>(l)][i] / norm : 0.0;
      q.set(DyadicPoint(static_cast<std::int64_t>(2 * i + 1), n), raw);
    }
  }
  return q;
}

SampledFunction rademacher(int n, int m) {
  if (n < 0) throw ParameterError("Rademacher rank must be nonnegative");
  if (m < n + 2) throw ResolutionError(fmt::format("rademacher({}) needs grid exponent >= {}, got {}", n, n + 2, m));
  std::vector<double> v(std::size_t{1} << m);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = ((i >> (m - n)) % 2 == 0) ? 1.0 : -1.0;
  return SampledFunction(m, std::move(v));
}

SampledFunction perturbed_square_wave(int n, double jitter, std::uint64_t seed, int m) {
  if (!(jitter >= 0.0 && jitter < 1.0)) throw ParameterError("jitter must lie in [0, 1)");
  if (n < 0) throw ParameterError("wave rank must be nonnegative");
  if (m < n + 2) {
    throw ResolutionError(fmt::format("perturbed_square_wave({}) needs grid exponent >= {}, got {}", n, n + 2, m));
  }
  const double base = std::ldexp(1.0, -n);
  SplitMix64 rng(seed);
  std::vector<double> ends;  // right end of each half-wave
  double pos = 0.0;
  while (pos < 1.0) {
    const double u = std::ldexp(1.0, -n - 1) + rng.uniform() * (std::ldexp(1.0, -n + 1) - std::ldexp(1.0, -n - 1));
    pos += base + jitter * (u - base);
    ends.push_back(pos);
  }
  std::vector<double> v(std::size_t{1} << m);
  std::size_t seg = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double t = std::ldexp(static_cast<double>(i), -m);
    while (t >= ends[seg]) ++seg;
    v[i] = (seg % 2 == 0) ? 1.0 : -1.0;
  }
  return SampledFunction(m, std::move(v));
}

void to_json(nlohmann::json& j, const QMap& q) {
  j = nlohmann::json::array();
  for (int n = 1; n <= q.max_rank(); ++n) {
    for (std::size_t i = 0; i < (std::size_t{1} << (n - 1)); ++i) {
      const DyadicPoint d(static_cast<std::int64_t>(2 * i + 1), n);
      j.push_back({{"k", d.k}, {"n", d.n}, {"q", q(d)}, {"raw", q.raw(d)}});
    }
  }
}

void from_json(const nlohmann::json& j, QMap& q) {
  if (!j.is_array()) throw ParameterError("QMap must be a JSON array");
  int max_rank = 0;
  for (const auto& e : j) max_rank = std::max(max_rank, e.at("n").get<int>());
  QMap out(max_rank, QMapConfig{});
  for (const auto& e : j) {
    const DyadicPoint d(e.at("k").get<std::int64_t>(), e.at("n").get<int>());
    const double qv = e.at("q").get<double>();
    out.set_clamped(d, e.contains("raw") ? e.at("raw").get<double>() : qv, qv);
  }
  q = std::move(out);
}

}  // namespace homeolab

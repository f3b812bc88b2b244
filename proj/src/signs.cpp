#include "homeolab/signs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "homeolab/errors.hpp"
#include "homeolab/fourier.hpp"
#include "homeolab/quadrature.hpp"
#include "homeolab/rng.hpp"

namespace homeolab {

int index_distance(int k, int j, int n, DistanceMode mode) {
  if (mode == DistanceMode::linear) return std::abs(k - j);
  return circular_distance(k, j, n);
}

SignMatrix::SignMatrix(std::size_t n_cols, std::vector<RowId> rows)
    : n_cols_(n_cols), rows_(std::move(rows)), data_(n_cols_ * rows_.size(), 0.0) {}

double SignMatrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

SignMatrix SignMatrix::drop_small_rows(double threshold) const {
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < n_rows(); ++r) {
    double m = 0.0;
    for (std::size_t c = 0; c < n_cols_; ++c) m = std::max(m, std::abs(at(r, c)));
    if (m >= threshold) keep.push_back(r);
  }
  std::vector<RowId> ids;
  ids.reserve(keep.size());
  for (std::size_t r : keep) ids.push_back(rows_[r]);
  SignMatrix out(n_cols_, std::move(ids));
  for (std::size_t c = 0; c < n_cols_; ++c) {
    for (std::size_t i = 0; i < keep.size(); ++i) out.at(i, c) = at(keep[i], c);
  }
  return out;
}

SignMatrix SignMatrix::scaled(double c) const {
  SignMatrix out = *this;
  for (double& v : out.data_) v *= c;
  if (decay_cert_) out.decay_cert_ = *decay_cert_ * std::abs(c);
  return out;
}

double SignMatrix::compute_decay_cert(DistanceMode mode) const {
  double cert = 0.0;
  const int n = static_cast<int>(n_cols_);
  for (std::size_t r = 0; r < n_rows(); ++r) {
    for (std::size_t c = 0; c < n_cols_; ++c) {
      const int d = index_distance(static_cast<int>(c), rows_[r].j, n, mode);
      cert = std::max(cert, std::abs(at(r, c)) * (d + 1));
    }
  }
  return cert;
}

SignVector::SignVector(std::vector<int> eps) : eps_(std::move(eps)) {
  for (int e : eps_) {
    if (e != 1 && e != -1) throw ParameterError("sign entries must be exactly +1 or -1");
  }
}

SignVector SignVector::operator-() const {
  std::vector<int> out(eps_.size());
  std::transform(eps_.begin(), eps_.end(), out.begin(), [](int e) { return -e; });
  return SignVector(std::move(out));
}

SignMatrix build_kernel_matrix(const SampledFunction& f, int n, DistanceMode mode) {
  if (n < 1 || (n & (n - 1)) != 0) throw ParameterError(fmt::format("block count {} is not a power of two", n));
  if (f.m() < 2 || n > (1 << (f.m() - 2))) {
    throw ResolutionError(fmt::format("kernel matrix with n = {} needs n <= 2^(m-2); grid exponent is {}", n, f.m()));
  }
  std::vector<RowId> rows(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) rows[static_cast<std::size_t>(j)] = {0, j};
  SignMatrix v(static_cast<std::size_t>(n), std::move(rows));

  const auto& rule = gauss_legendre01(10);
  const std::size_t cells_per_block = f.size() / static_cast<std::size_t>(n);
  const double h = 1.0 / static_cast<double>(f.size());
  std::vector<double> tq;  // nodes of one block
  std::vector<double> wq;  // weight * f(node)
  for (int k = 0; k < n; ++k) {
    tq.clear();
    wq.clear();
    for (std::size_t c = 0; c < cells_per_block; ++c) {
      const std::size_t cell = static_cast<std::size_t>(k) * cells_per_block + c;
      const double f0 = f[cell];
      const double f1 = f[(cell + 1) % f.size()];
      const double t0 = static_cast<double>(cell) * h;
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double x = rule.nodes[q];
        tq.push_back(t0 + x * h);
        wq.push_back(rule.weights[q] * h * (f0 + x * (f1 - f0)));
      }
    }
    for (int j = 0; j < n; ++j) {
      const double xj = static_cast<double>(j) / n;
      double s = 0.0;
      for (std::size_t q = 0; q < tq.size(); ++q) s += wq[q] * dirichlet_kernel(n, xj - tq[q]);
      v.at(static_cast<std::size_t>(j), static_cast<std::size_t>(k)) = s;
    }
  }
  v.certify(mode);
  return v;
}

SignMatrix build_synthetic_matrix(int n, SyntheticProfile profile, std::uint64_t seed, DistanceMode mode) {
  if (n < 1) throw ParameterError("synthetic matrix size must be positive");
  std::vector<RowId> rows(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) rows[static_cast<std::size_t>(j)] = {0, j};
  SignMatrix v(static_cast<std::size_t>(n), std::move(rows));
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      double e = 1.0 / (index_distance(k, j, n, mode) + 1);
      if (profile == SyntheticProfile::random_signs_decay && (hash_words(seed, 0x5167, k, j) >> 63) != 0) e = -e;
      v.at(static_cast<std::size_t>(j), static_cast<std::size_t>(k)) = e;
    }
  }
  v.certify(mode);
  return v;
}

double row_discrepancy(const SignMatrix& v, const SignVector& eps) {
  if (eps.size() != v.n_cols()) {
    throw ParameterError(fmt::format("sign vector has {} entries but the matrix has {} columns", eps.size(), v.n_cols()));
  }
  std::vector<double> s(v.n_rows(), 0.0);
  for (std::size_t k = 0; k < v.n_cols(); ++k) {
    const auto col = v.column(k);
    const double e = eps[k];
    for (std::size_t r = 0; r < s.size(); ++r) s[r] += e * col[r];
  }
  double m = 0.0;
  for (double x : s) m = std::max(m, std::abs(x));
  return m;
}

SignVector solve_iid(const SignMatrix& v, std::uint64_t seed) {
  SplitMix64 rng(hash_words(seed, 0x11D));
  std::vector<int> eps(v.n_cols());
  for (int& e : eps) e = rng.coin() ? -1 : 1;
  return SignVector(std::move(eps));
}

namespace {

struct Score {
  double first = 0.0;
  double second = 0.0;
  bool operator<(const Score& o) const { return first < o.first || (first == o.first && second < o.second); }
};

class Potential {
 public:
  Potential(double sigma, double lambda, bool final_level) : sigma_(sigma), lambda_(lambda), final_(final_level) {}

  // Returns false when the candidate cannot beat `best`.
  bool score(std::span<const double> s, const Score* best, Score& out) const {
    double mx = 0.0;
    for (double x : s) mx = std::max(mx, std::abs(x));
    if (best != nullptr && mx > best->first) return false;
    double acc = 0.0;
    for (double x : s) acc += std::cosh(x / sigma_) - 1.0;
    const double soft = lambda_ * sigma_ * acc / static_cast<double>(s.size());
    if (final_) {
      out = {mx, soft};
    } else {
      out = {mx + soft, 0.0};
    }
    return true;
  }

 private:
  double sigma_;
  double lambda_;
  bool final_;
};

struct Choice {
  std::vector<int> signs;
  std::vector<double> sums;
};

// Picks signs (first member fixed to +1) for a group of member vectors.
Choice choose_group(std::span<const std::span<const double>> members, std::size_t rows, const Potential& pot,
                    const HierarchicalConfig& cfg, std::uint64_t stream) {
  const std::size_t m = members.size();
  Choice best;
  best.signs.assign(m, 1);
  best.sums.assign(members[0].begin(), members[0].end());
  if (m == 1) return best;

  Score best_score;
  bool have = false;
  std::vector<int> cur(m, 1);

  if (static_cast<int>(m) <= cfg.exhaustive_limit) {
    // depth-first in lexicographic order, +1 before -1
    std::vector<std::vector<double>> partial(m, std::vector<double>(rows));
    std::copy(members[0].begin(), members[0].end(), partial[0].begin());
    auto rec = [&](auto&& self, std::size_t depth) -> void {
      if (depth == m) {
        Score sc;
        if (pot.score(partial[m - 1], have ? &best_score : nullptr, sc) && (!have || sc < best_score)) {
          best_score = sc;
          have = true;
          best.signs = cur;
          best.sums = partial[m - 1];
        }
        return;
      }
      for (int e : {1, -1}) {
        cur[depth] = e;
        const auto& prev = partial[depth - 1];
        auto& next = partial[depth];
        const auto col = members[depth];
        for (std::size_t r = 0; r < rows; ++r) next[r] = prev[r] + e * col[r];
        self(self, depth + 1);
      }
    };
    rec(rec, 1);
    return best;
  }

  SplitMix64 rng(stream);
  std::vector<double> sums(rows);
  for (int attempt = 0; attempt < std::max(1, cfg.retries); ++attempt) {
    cur[0] = 1;
    for (std::size_t i = 1; i < m; ++i) cur[i] = rng.coin() ? -1 : 1;
    std::copy(members[0].begin(), members[0].end(), sums.begin());
    for (std::size_t i = 1; i < m; ++i) {
      const auto col = members[i];
      for (std::size_t r = 0; r < rows; ++r) sums[r] += cur[i] * col[r];
    }
    Score sc;
    if (pot.score(sums, have ? &best_score : nullptr, sc) && (!have || sc < best_score)) {
      best_score = sc;
      have = true;
      best.signs = cur;
      best.sums = sums;
    }
  }
  return best;
}

}  // namespace

SignVector solve_hierarchical(const SignMatrix& v, const HierarchicalConfig& cfg, std::uint64_t seed) {
  if (cfg.block < 2) throw ParameterError("hierarchical block size must be at least 2");
  const std::size_t n = v.n_cols();
  const std::size_t rows = v.n_rows();
  if (n == 0) return SignVector{};
  const double sigma = v.max_abs();
  if (sigma == 0.0 || rows == 0) return SignVector::all_plus(n);

  const auto k = static_cast<std::size_t>(cfg.block);
  std::vector<int> eps(n, 1);

  struct Block {
    std::size_t begin;
    std::size_t end;
    std::vector<double> sums;
  };

  // level 0: members are the columns themselves
  std::vector<Block> blocks;
  {
    const std::size_t count = (n + k - 1) / k;
    const bool final_level = count == 1;
    const Potential pot(sigma, cfg.lambda, final_level);
    for (std::size_t b = 0; b < count; ++b) {
      const std::size_t lo = b * k;
      const std::size_t hi = std::min(n, lo + k);
      std::vector<std::span<const double>> members;
      for (std::size_t c = lo; c < hi; ++c) members.push_back(v.column(c));
      Choice ch = choose_group(members, rows, pot, cfg, hash_words(seed, 0, b));
      for (std::size_t c = lo; c < hi; ++c) eps[c] = ch.signs[c - lo];
      blocks.push_back({lo, hi, std::move(ch.sums)});
    }
  }

  // higher levels: members are whole sub-blocks, only their orientation changes
  for (std::uint64_t level = 1; blocks.size() > 1; ++level) {
    const std::size_t count = (blocks.size() + k - 1) / k;
    const Potential pot(sigma, cfg.lambda, count == 1);
    std::vector<Block> merged;
    for (std::size_t g = 0; g < count; ++g) {
      const std::size_t lo = g * k;
      const std::size_t hi = std::min(blocks.size(), lo + k);
      std::vector<std::span<const double>> members;
      for (std::size_t b = lo; b < hi; ++b) members.push_back(blocks[b].sums);
      Choice ch = choose_group(members, rows, pot, cfg, hash_words(seed, level, g));
      for (std::size_t b = lo; b < hi; ++b) {
        if (ch.signs[b - lo] < 0) {
          for (std::size_t c = blocks[b].begin; c < blocks[b].end; ++c) eps[c] = -eps[c];
        }
      }
      merged.push_back({blocks[lo].begin, blocks[hi - 1].end, std::move(ch.sums)});
    }
    blocks = std::move(merged);
  }
  return SignVector(std::move(eps));
}

BruteForceResult solve_bruteforce(const SignMatrix& v) {
  const std::size_t n = v.n_cols();
  if (n > kBruteForceMaxCols) {
    throw ParameterError(fmt::format("brute force supports at most {} columns, got {}", kBruteForceMaxCols, n));
  }
  if (n == 0) return {SignVector{}, 0.0};
  const std::size_t rows = v.n_rows();
  std::vector<std::vector<double>> partial(n, std::vector<double>(rows, 0.0));
  std::vector<int> cur(n, 1);
  std::vector<int> best(n, 1);
  double best_val = std::numeric_limits<double>::infinity();

  // sums are accumulated from zero in column order, exactly like row_discrepancy
  for (std::size_t r = 0; r < rows; ++r) partial[0][r] = 0.0 + v.at(r, 0);
  auto rec = [&](auto&& self, std::size_t depth) -> void {
    if (depth == n) {
      double mx = 0.0;
      for (double x : partial[n - 1]) mx = std::max(mx, std::abs(x));
      if (mx < best_val) {
        best_val = mx;
        best = cur;
      }
      return;
    }
    const auto col = v.column(depth);
    for (int e : {1, -1}) {
      cur[depth] = e;
      const auto& prev = partial[depth - 1];
      auto& next = partial[depth];
      for (std::size_t r = 0; r < rows; ++r) next[r] = prev[r] + e * col[r];
      self(self, depth + 1);
    }
  };
  if (n == 1) {
    double mx = 0.0;
    for (double x : partial[0]) mx = std::max(mx, std::abs(x));
    return {SignVector({1}), mx};
  }
  rec(rec, 1);
  return {SignVector(std::move(best)), best_val};
}

std::string to_string(DistanceMode m) { return m == DistanceMode::circular ? "circular" : "linear"; }

DistanceMode distance_mode_from_string(const std::string& s) {
  if (s == "circular") return DistanceMode::circular;
  if (s == "linear") return DistanceMode::linear;
  throw ParameterError(fmt::format("unknown distance mode '{}' (expected circular or linear)", s));
}

std::string to_string(SyntheticProfile p) {
  return p == SyntheticProfile::exact_decay ? "exact_decay" : "random_signs_decay";
}

SyntheticProfile synthetic_profile_from_string(const std::string& s) {
  if (s == "exact_decay") return SyntheticProfile::exact_decay;
  if (s == "random_signs_decay") return SyntheticProfile::random_signs_decay;
  throw ParameterError(fmt::format("unknown matrix profile '{}' (expected exact_decay or random_signs_decay)", s));
}

void to_json(nlohmann::json& j, const SignMatrix& v) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < v.n_rows(); ++r) {
    std::vector<double> vals(v.n_cols());
    for (std::size_t c = 0; c < v.n_cols(); ++c) vals[c] = v.at(r, c);
    rows.push_back({{"r", v.row_ids()[r].r}, {"j", v.row_ids()[r].j}, {"values", std::move(vals)}});
  }
  j = nlohmann::json{{"n_cols", v.n_cols()}, {"rows", std::move(rows)}};
  if (v.decay_cert()) j["decay_cert"] = *v.decay_cert();
}

void from_json(const nlohmann::json& j, SignMatrix& v) {
  const auto n_cols = j.at("n_cols").get<std::size_t>();
  std::vector<RowId> ids;
  for (const auto& r : j.at("rows")) ids.push_back({r.value("r", 0), r.at("j").get<int>()});
  SignMatrix out(n_cols, ids);
  std::size_t ri = 0;
  for (const auto& r : j.at("rows")) {
    const auto vals = r.at("values").get<std::vector<double>>();
    if (vals.size() != n_cols) throw ParameterError("matrix row length does not match n_cols");
    for (std::size_t c = 0; c < n_cols; ++c) {
      if (!std::isfinite(vals[c])) throw ParameterError("matrix entries must be finite");
      out.at(ri, c) = vals[c];
    }
    ++ri;
  }
  if (j.contains("decay_cert")) {
    // re-verified by full scan rather than trusted
    const double claimed = j.at("decay_cert").get<double>();
    const double actual = out.compute_decay_cert(DistanceMode::circular);
    if (actual > claimed * (1.0 + 1e-12)) {
      throw ParameterError(fmt::format("decay certificate {} does not hold (scan gives {})", claimed, actual));
    }
    out.certify(DistanceMode::circular);
  }
  v = std::move(out);
}

void to_json(nlohmann::json& j, const SignVector& e) { j = std::vector<int>(e.values().begin(), e.values().end()); }
void from_json(const nlohmann::json& j, SignVector& e) { e = SignVector(j.get<std::vector<int>>()); }

void to_json(nlohmann::json& j, const HierarchicalConfig& c) {
  j = nlohmann::json{
      {"block", c.block}, {"retries", c.retries}, {"lambda", c.lambda}, {"exhaustive_limit", c.exhaustive_limit}};
}

void from_json(const nlohmann::json& j, HierarchicalConfig& c) {
  HierarchicalConfig d;
  c.block = j.value("block", d.block);
  c.retries = j.value("retries", d.retries);
  c.lambda = j.value("lambda", d.lambda);
  c.exhaustive_limit = j.value("exhaustive_limit", d.exhaustive_limit);
}

}  // namespace homeolab

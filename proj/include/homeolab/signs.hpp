#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "homeolab/core_grid.hpp"

namespace homeolab {

enum class DistanceMode { circular, linear };

int index_distance(int k, int j, int n, DistanceMode mode);

// Row label: kernel degree r (0 when there is a single degree) and node j.
struct RowId {
  int r = 0;
  int j = 0;
  friend bool operator==(const RowId&, const RowId&) = default;
};

/// Dense matrix v_{k,j}: one column per sign variable k, one row per
/// constraint. Stored column-major so a whole column can be added to a
/// vector of row sums.
class SignMatrix {
 public:
  SignMatrix() = default;
  SignMatrix(std::size_t n_cols, std::vector<RowId> rows);

  std::size_t n_cols() const { return n_cols_; }
  std::size_t n_rows() const { return rows_.size(); }
  std::span<const RowId> row_ids() const { return rows_; }

  double at(std::size_t row, std::size_t col) const { return data_[col * rows_.size() + row]; }
  double& at(std::size_t row, std::size_t col) { return data_[col * rows_.size() + row]; }
  std::span<const double> column(std::size_t col) const {
    return {data_.data() + col * rows_.size(), rows_.size()};
  }
  std::span<double> column(std::size_t col) { return {data_.data() + col * rows_.size(), rows_.size()}; }

  double max_abs() const;

  // Keeps only rows whose largest entry reaches the threshold.
  SignMatrix drop_small_rows(double threshold) const;
  SignMatrix scaled(double c) const;

  // max |v_{k,j}| (dist(k, j) + 1) over the full matrix, using row node j.
  double compute_decay_cert(DistanceMode mode) const;
  const std::optional<double>& decay_cert() const { return decay_cert_; }
  void certify(DistanceMode mode) { decay_cert_ = compute_decay_cert(mode); }

 private:
  std::size_t n_cols_ = 0;
  std::vector<RowId> rows_;
  std::vector<double> data_;
  std::optional<double> decay_cert_;
};

/// A +-1 assignment.
class SignVector {
 public:
  SignVector() = default;
  explicit SignVector(std::vector<int> eps);
  static SignVector all_plus(std::size_t n) { return SignVector(std::vector<int>(n, 1)); }

  std::size_t size() const { return eps_.size(); }
  int operator[](std::size_t i) const { return eps_[i]; }
  std::span<const int> values() const { return eps_; }
  SignVector operator-() const;

  friend bool operator==(const SignVector&, const SignVector&) = default;

 private:
  std::vector<int> eps_;
};

// v_{k,j} = integral over [k/n, (k+1)/n] of f(t) D_n(j/n - t) dt, certified.
SignMatrix build_kernel_matrix(const SampledFunction& f, int n, DistanceMode mode = DistanceMode::circular);

enum class SyntheticProfile { exact_decay, random_signs_decay };

// |v_{k,j}| = 1 / (dist(k, j) + 1), optionally with seeded random signs.
SignMatrix build_synthetic_matrix(int n, SyntheticProfile profile, std::uint64_t seed,
                                  DistanceMode mode = DistanceMode::circular);

// max_j |sum_k eps_k v_{k,j}|, summing in column order.
double row_discrepancy(const SignMatrix& v, const SignVector& eps);

SignVector solve_iid(const SignMatrix& v, std::uint64_t seed);

struct HierarchicalConfig {
  int block = 8;              // K
  int retries = 64;           // random candidates when a block is too large to enumerate
  double lambda = 0.5;        // weight of the cosh term in the potential
  int exhaustive_limit = 12;  // enumerate all sign patterns up to this many members
};

/// Level-by-level block solver. Level 0 picks signs inside each block of K
/// columns; every later level merges K blocks and only chooses a global
/// flip per sub-block, until one block remains. Candidates are ranked by
///   Phi(s) = max_j |s_j| + lambda * sigma * mean_j (cosh(s_j / sigma) - 1),
/// sigma = max |v|; at the last level max_j |s_j| is compared first.
SignVector solve_hierarchical(const SignMatrix& v, const HierarchicalConfig& cfg, std::uint64_t seed);

struct BruteForceResult {
  SignVector eps;
  double optimum = 0.0;
};

inline constexpr std::size_t kBruteForceMaxCols = 22;

// Exact minimizer of row_discrepancy; ties go to the lexicographically first
// vector with +1 ordered before -1.
BruteForceResult solve_bruteforce(const SignMatrix& v);

std::string to_string(DistanceMode m);
DistanceMode distance_mode_from_string(const std::string& s);
std::string to_string(SyntheticProfile p);
SyntheticProfile synthetic_profile_from_string(const std::string& s);

void to_json(nlohmann::json& j, const SignMatrix& v);
void from_json(const nlohmann::json& j, SignMatrix& v);
void to_json(nlohmann::json& j, const SignVector& e);
void from_json(const nlohmann::json& j, SignVector& e);
void to_json(nlohmann::json& j, const HierarchicalConfig& c);
void from_json(const nlohmann::json& j, HierarchicalConfig& c);

}  // namespace homeolab

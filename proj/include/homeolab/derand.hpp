#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "homeolab/core_grid.hpp"
#include "homeolab/haar.hpp"
#include "homeolab/signs.hpp"

namespace homeolab {

struct DerandConfig {
  int n_max = 7;
  int ell_max = 6;
  double j_tol = 0x1.0p-20;  // relative to the parent image length
  int quad_nodes = 8;        // Gauss-Legendre nodes per uniform variable (per half for the active one)
  int active_panels = 2;     // composite panels per half of an active interval
  int depth_trunc = 4;       // untouched ranks integrated below the active one
  int m_out = 0;             // expectation grid exponent; 0 means the grid of f
  double row_threshold = 1e-6;
  HierarchicalConfig solver;
  std::uint64_t seed = 1;
  bool mc_check = true;
  int mc_samples = 10000;
  int mc_points = 64;
  double mc_z_limit = 3.0;
  QMapConfig q_cfg;

  void validate() const;
};

/// Randomness status of the dyadic points during the removal loop.
/// Points of rank < n_active are fixed (images at j / 2^(n_active-1)), each
/// rank-n_active point is uniform on its interval J, deeper points follow
/// the psi_q law. A state with n_active = 0 is fully fixed.
class DerandState {
 public:
  DerandState(SampledFunction f, QMap q, const DerandConfig& cfg);

  const SampledFunction& f() const { return f_; }
  const QMap& q() const { return q_; }
  const DerandConfig& config() const { return cfg_; }
  int n_active() const { return n_active_; }
  int ell() const { return ell_; }
  bool frozen() const { return n_active_ == 0; }

  // images of j / 2^(n_active - 1); for a frozen state, of j / 2^level
  const std::vector<double>& fixed() const { return fixed_; }
  struct Interval {
    double lo;
    double hi;
  };
  const std::vector<Interval>& active() const { return J_; }

  // Largest |J| relative to its parent image.
  double max_relative_width() const;

  void halve(const SignVector& eps);
  // Fixes the active points at their J midpoints and activates the next rank.
  void promote();
  // Fixes the active points and stops.
  void freeze();
  PLHomeo homeo() const;

  // Builds a state directly (tests and tools); intervals must be nested in
  // the gaps of `fixed`.
  static DerandState custom(SampledFunction f, QMap q, const DerandConfig& cfg, std::vector<double> fixed,
                            std::vector<Interval> active, int ell);

 private:
  SampledFunction f_;
  QMap q_;
  DerandConfig cfg_;
  int n_active_ = 1;
  int ell_ = 0;
  int frozen_level_ = 0;
  std::vector<double> fixed_;
  std::vector<Interval> J_;
};

// E[f(phi(t))] on the grid of exponent m_out.
SampledFunction expected_composition(const DerandState& s, int m_out);

struct DeviationRecord {
  int n = 0;
  int ell = 0;
  int r = 0;
  double sup_dev = 0.0;
};

struct Assembly {
  SignMatrix v;                 // rows below the threshold removed
  std::vector<int> degrees;     // all tracked degrees
  std::vector<double> half_diff;  // (E_up - E_down) / 2 per column, on the expectation grid
  int m_out = 0;
  double identity_residual = 0.0;  // max |(A_up + A_down)/2 - A_current| over all entries
  std::size_t rows_before_threshold = 0;
};

// 2^0 .. 2^top plus three intermediate degrees per octave.
std::vector<int> tracked_degrees(int top_exponent);

Assembly assemble_v_matrix(const DerandState& s, const std::vector<int>& degrees);

struct ChoiceResult {
  DerandState state;
  SignVector eps;
  std::vector<DeviationRecord> records;
  double identity_residual = 0.0;
  std::size_t rows = 0;
};

ChoiceResult choose_halves(const DerandState& s, const std::vector<int>& degrees);

struct MonteCarloCheck {
  double rms_z = 0.0;
  double max_abs_err = 0.0;
  int points = 0;
};

// Compares the quadrature expectation with seeded sampling from the same
// truncated law; throws NumericalAlarm when the RMS z-score is too large.
MonteCarloCheck monte_carlo_check(const DerandState& s, const SampledFunction& quad, std::uint64_t seed);

struct AdvanceLog {
  std::vector<DeviationRecord> records;
  double max_identity_residual = 0.0;
  int halvings = 0;
  std::vector<MonteCarloCheck> mc;
};

DerandState advance(const DerandState& s, const std::vector<int>& degrees, AdvanceLog& log);

struct DerandResult {
  PLHomeo h;
  QMap q;
  std::vector<DeviationRecord> records;
  double max_identity_residual = 0.0;
  std::vector<MonteCarloCheck> mc;
  int halvings = 0;
};

DerandResult run(const SampledFunction& f, const DerandConfig& cfg);

struct ShapeCheck {
  int conforming = 0;
  int bins = 0;
  double fraction() const { return bins == 0 ? 1.0 : static_cast<double>(conforming) / bins; }
};

// Bins the records of each (n, ell) by |n - floor(log2 r)|, keeping the
// largest sup_dev per bin; a bin conforms when it does not exceed the bin
// one step closer to n.
ShapeCheck deviation_shape(const std::vector<DeviationRecord>& records, double rel_tol = 1e-9);

void write_deviation_csv(std::ostream& os, const std::vector<DeviationRecord>& records);

void to_json(nlohmann::json& j, const DerandConfig& c);
void from_json(const nlohmann::json& j, DerandConfig& c);

}  // namespace homeolab

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "homeolab/core_grid.hpp"
#include "homeolab/haar.hpp"

namespace homeolab {

enum class Orientation { direct, inverse };

/// Parameters of the psi_q recursion. Either a constant q in (0, 1] or a
/// per-point QMap; the QMap wins when present.
struct DFParams {
  int depth = 10;
  double q = 1.0;
  std::optional<QMap> q_map;
  Orientation orientation = Orientation::direct;

  double q_at(const DyadicPoint& d) const;
  void validate() const;
};

// Images y[j] of j / 2^depth under the recursion; y[0] = 0, y.back() = 1.
// A rank-n midpoint lands at a + (b - a) * ((1 - q)/2 + q * u) where u is the
// counter draw for that point; q = 1 reproduces sample_df bit for bit.
std::vector<double> sample_dyadic_images(const DFParams& p, std::uint64_t seed);

// Dubins-Freedman: each midpoint uniform on the whole parent image.
PLHomeo sample_df(int depth, std::uint64_t seed);

PLHomeo sample_psi_q(const DFParams& p, std::uint64_t seed);

struct MassRatioReport {
  bool pass = true;
  double min_ratio = 1.0;  // smallest child / parent image ratio seen
  double max_ratio = 0.0;
  double worst_slack = 0.0;  // distance to the nearest bound; negative on violation
  std::optional<DyadicPoint> offending;
  // Deterministic Hoelder exponents implied by the bounds (constant q only).
  std::optional<std::pair<double, double>> holder_exponents;
};

MassRatioReport verify_mass_ratios(const PLHomeo& h, const DFParams& p, double tol = 1e-9);

// (log2(2 / (1 + q)), log2(2 / (1 - q))); the second is +inf at q = 1.
std::pair<double, double> holder_exponents(double q);

struct ACLevel {
  int level = 0;
  std::vector<double> norms;  // one per requested p
};

struct ACReport {
  std::vector<double> p_list;
  std::vector<ACLevel> levels;
  std::vector<double> top_ratios;  // largest successive-level ratio over the top three levels, per p
  bool ac_consistent = false;
};

// ||h'_l||_p of the level-l difference quotients for l = 1 .. max_level.
ACReport ac_diagnostics(const PLHomeo& h, const std::vector<double>& p_list, int max_level, double tol = 0.05);

std::string to_string(Orientation o);
Orientation orientation_from_string(const std::string& s);

void to_json(nlohmann::json& j, const MassRatioReport& r);
void to_json(nlohmann::json& j, const ACReport& r);

}  // namespace homeolab

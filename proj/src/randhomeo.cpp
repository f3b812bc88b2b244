#include "homeolab/randhomeo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "homeolab/errors.hpp"
#include "homeolab/rng.hpp"

namespace homeolab {

double DFParams::q_at(const DyadicPoint& d) const {
  if (q_map) return (*q_map)(d);
  return q;
}

void DFParams::validate() const {
  if (depth < 1 || depth > kMaxGridExponent) {
    throw ParameterError(fmt::format("depth must be in [1, {}], got {}", kMaxGridExponent, depth));
  }
  if (!q_map && !(q > 0.0 && q <= 1.0)) throw ParameterError(fmt::format("q must lie in (0, 1], got {}", q));
}

std::vector<double> sample_dyadic_images(const DFParams& p, std::uint64_t seed) {
  p.validate();
  const std::size_t size = std::size_t{1} << p.depth;
  std::vector<double> y(size + 1, 0.0);
  y[size] = 1.0;
  for (int n = 1; n <= p.depth; ++n) {
    const std::size_t stride = size >> n;  // grid steps between rank-n neighbours
    for (std::size_t k = 1; k < (std::size_t{1} << n); k += 2) {
      const double a = y[(k - 1) * stride];
      const double b = y[(k + 1) * stride];
      const DyadicPoint d(static_cast<std::int64_t>(k), n);
      const double q = p.q_at(d);
      const double u = counter_uniform(seed, k, static_cast<std::uint64_t>(n));
      double v = a + (b - a) * ((1.0 - q) / 2.0 + q * u);
      v = std::clamp(v, std::nextafter(a, b), std::nextafter(b, a));
      y[k * stride] = v;
    }
  }
  return y;
}

PLHomeo sample_df(int depth, std::uint64_t seed) {
  if (depth < 1 || depth > kMaxGridExponent) {
    throw ParameterError(fmt::format("depth must be in [1, {}], got {}", kMaxGridExponent, depth));
  }
  const std::size_t size = std::size_t{1} << depth;
  std::vector<double> y(size + 1, 0.0);
  y[size] = 1.0;
  for (int n = 1; n <= depth; ++n) {
    const std::size_t stride = size >> n;
    for (std::size_t k = 1; k < (std::size_t{1} << n); k += 2) {
      const double a = y[(k - 1) * stride];
      const double b = y[(k + 1) * stride];
      const double u = counter_uniform(seed, k, static_cast<std::uint64_t>(n));
      double v = a + (b - a) * u;
      v = std::clamp(v, std::nextafter(a, b), std::nextafter(b, a));
      y[k * stride] = v;
    }
  }
  return PLHomeo::from_dyadic_images(depth, std::move(y));
}

PLHomeo sample_psi_q(const DFParams& p, std::uint64_t seed) {
  PLHomeo g = PLHomeo::from_dyadic_images(p.depth, sample_dyadic_images(p, seed));
  if (p.orientation == Orientation::inverse) return invert(g);
  return g;
}

std::pair<double, double> holder_exponents(double q) {
  const double hi = (q >= 1.0) ? std::numeric_limits<double>::infinity() : std::log2(2.0 / (1.0 - q));
  return {std::log2(2.0 / (1.0 + q)), hi};
}

MassRatioReport verify_mass_ratios(const PLHomeo& h, const DFParams& p, double tol) {
  p.validate();
  const PLHomeo g = (p.orientation == Orientation::inverse) ? invert(h) : h;
  const std::size_t size = std::size_t{1} << p.depth;
  std::vector<double> y(size + 1);
  for (std::size_t i = 0; i <= size; ++i) y[i] = g(std::ldexp(static_cast<double>(i), -p.depth));

  MassRatioReport rep;
  rep.worst_slack = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= p.depth; ++n) {
    const std::size_t stride = size >> n;
    for (std::size_t k = 1; k < (std::size_t{1} << n); k += 2) {
      const DyadicPoint d(static_cast<std::int64_t>(k), n);
      const double q = p.q_at(d);
      const double a = y[(k - 1) * stride];
      const double mid = y[k * stride];
      const double b = y[(k + 1) * stride];
      const double lo = (1.0 - q) / 2.0;
      const double hi = (1.0 + q) / 2.0;
      for (double ratio : {(mid - a) / (b - a), (b - mid) / (b - a)}) {
        rep.min_ratio = std::min(rep.min_ratio, ratio);
        rep.max_ratio = std::max(rep.max_ratio, ratio);
        const double slack = std::min(ratio - lo, hi - ratio);
        rep.worst_slack = std::min(rep.worst_slack, slack);
        if (slack < -tol && rep.pass) {
          rep.pass = false;
          rep.offending = d;
        }
      }
    }
  }
  if (!p.q_map) rep.holder_exponents = holder_exponents(p.q);
  return rep;
}

ACReport ac_diagnostics(const PLHomeo& h, const std::vector<double>& p_list, int max_level, double tol) {
  if (max_level < 1 || max_level > kMaxGridExponent) throw ParameterError("ac_diagnostics level out of range");
  for (double p : p_list) {
    if (!(p >= 1.0)) throw ParameterError(fmt::format("exponent p must be >= 1, got {}", p));
  }
  ACReport rep;
  rep.p_list = p_list;
  const std::size_t size = std::size_t{1} << max_level;
  std::vector<double> y(size + 1);
  for (std::size_t i = 0; i <= size; ++i) y[i] = h(std::ldexp(static_cast<double>(i), -max_level));

  for (int l = 1; l <= max_level; ++l) {
    const std::size_t cells = std::size_t{1} << l;
    const std::size_t stride = size >> l;
    ACLevel lvl{l, {}};
    for (double p : p_list) {
      double acc = 0.0;
      for (std::size_t i = 0; i < cells; ++i) {
        const double slope = std::ldexp(y[(i + 1) * stride] - y[i * stride], l);
        acc += std::pow(slope, p);
      }
      lvl.norms.push_back(std::pow(std::ldexp(acc, -l), 1.0 / p));
    }
    rep.levels.push_back(std::move(lvl));
  }

  rep.ac_consistent = true;
  const std::size_t top = rep.levels.size();
  for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
    double worst = 1.0;
    for (std::size_t l = (top >= 3 ? top - 2 : 1); l < top; ++l) {
      worst = std::max(worst, rep.levels[l].norms[pi] / rep.levels[l - 1].norms[pi]);
    }
    rep.top_ratios.push_back(worst);
    if (worst > 1.0 + tol) rep.ac_consistent = false;
  }
  return rep;
}

std::string to_string(Orientation o) { return o == Orientation::direct ? "direct" : "inverse"; }

Orientation orientation_from_string(const std::string& s) {
  if (s == "direct") return Orientation::direct;
  if (s == "inverse") return Orientation::inverse;
  throw ParameterError(fmt::format("unknown orientation '{}' (expected direct or inverse)", s));
}

void to_json(nlohmann::json& j, const MassRatioReport& r) {
  j = nlohmann::json{{"pass", r.pass},
                     {"min_ratio", r.min_ratio},
                     {"max_ratio", r.max_ratio},
                     {"worst_slack", r.worst_slack}};
  j["offending"] = r.offending ? nlohmann::json{{"k", r.offending->k}, {"n", r.offending->n}} : nlohmann::json();
  if (r.holder_exponents) {
    const auto [lo, hi] = *r.holder_exponents;
    j["holder_exponents"] = {lo, std::isfinite(hi) ? nlohmann::json(hi) : nlohmann::json()};
  }
}

void to_json(nlohmann::json& j, const ACReport& r) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : r.levels) levels.push_back({{"level", l.level}, {"norms", l.norms}});
  j = nlohmann::json{
      {"p", r.p_list}, {"levels", levels}, {"top_ratios", r.top_ratios}, {"ac_consistent", r.ac_consistent}};
}

}  // namespace homeolab

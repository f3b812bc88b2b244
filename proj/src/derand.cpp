#include "homeolab/derand.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include <fmt/format.h>

#include "homeolab/errors.hpp"
#include "homeolab/fourier.hpp"
#include "homeolab/quadrature.hpp"
#include "homeolab/rng.hpp"

namespace homeolab {

void DerandConfig::validate() const {
  if (n_max < 1 || n_max > 16) throw ConfigError(fmt::format("n_max must be in [1, 16], got {}", n_max));
  if (ell_max < 0 || ell_max > 40) throw ConfigError(fmt::format("ell_max must be in [0, 40], got {}", ell_max));
  if (!(j_tol > 0.0)) throw ConfigError("j_tol must be positive");
  if (quad_nodes < 1 || quad_nodes > 64) throw ConfigError("quad_nodes must be in [1, 64]");
  if (active_panels < 1 || active_panels > 64) throw ConfigError("active_panels must be in [1, 64]");
  if (depth_trunc < 0 || depth_trunc > 8) throw ConfigError("depth_trunc must be in [0, 8]");
  if (m_out < 0 || m_out > kMaxGridExponent) throw ConfigError("m_out out of range");
  if (!(row_threshold >= 0.0)) throw ConfigError("row_threshold must be nonnegative");
  if (mc_samples < 2 || mc_points < 1) throw ConfigError("Monte Carlo check needs >= 2 samples and >= 1 point");
  if (solver.block < 2) throw ConfigError("solver block size must be at least 2");
}

namespace {

int effective_m_out(const DerandConfig& cfg, const SampledFunction& f) { return cfg.m_out > 0 ? cfg.m_out : f.m(); }

DerandState::Interval concentric(double a, double b, double q) {
  const double c = 0.5 * (a + b);
  const double half = 0.5 * q * (b - a);
  return {c - half, c + half};
}

struct Node {
  double y;
  double w;
};

enum class Part { full, upper, lower };

std::vector<Node> active_nodes(const DerandState::Interval& J, Part part, const GaussRule& rule, int panels) {
  const double mid = 0.5 * (J.lo + J.hi);
  std::vector<Node> out;
  auto panel = [&](double lo, double hi, double scale) {
    const double w = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
      const double plo = lo + w * p;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        out.push_back({plo + w * rule.nodes[i], scale * rule.weights[i] / panels});
      }
    }
  };
  // the full law is the even mixture of the two half panels, so that
  // (upper + lower) / 2 reproduces it term by term
  if (part != Part::upper) panel(J.lo, mid, part == Part::full ? 0.5 : 1.0);
  if (part != Part::lower) panel(mid, J.hi, part == Part::full ? 0.5 : 1.0);
  return out;
}

/// Nested quadrature over the untouched ranks below one fixed-gap interval.
class Engine {
 public:
  Engine(const SampledFunction& f, const QMap& q, const GaussRule& rule, int m_out, int depth_trunc)
      : f_(f), q_(q), rule_(rule), m_(m_out), depth_(depth_trunc), prefix_(f.size() + 1, 0.0) {
    const double h = 1.0 / static_cast<double>(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
      prefix_[i + 1] = prefix_[i] + 0.5 * h * (f[i] + f[(i + 1) % f.size()]);
    }
  }

  // Adds the expectation over the gap i of level n-1 into out[g - base].
  void gap(int n, std::size_t i, double a, double b, const std::vector<Node>& nodes, std::vector<double>& out,
           std::size_t base) const {
    for (const Node& nd : nodes) {
      rec(n, 2 * i, a, nd.y, depth_, nd.w, out, base);
      rec(n, 2 * i + 1, nd.y, b, depth_, nd.w, out, base);
    }
  }

  // Same gap with a fixed image (no randomness at the active point).
  void gap_fixed(int level, std::size_t i, double a, double b, std::vector<double>& out, std::size_t base) const {
    rec(level, i, a, b, depth_, 1.0, out, base);
  }

 private:
  void rec(int level, std::size_t idx, double a, double b, int remaining, double w, std::vector<double>& out,
           std::size_t base) const {
    const std::size_t npts = std::size_t{1} << (m_ - level);
    const std::size_t g0 = idx * npts;
    if (npts == 1) {
      out[g0 - base] += w * f_.at(a);
      return;
    }
    if (remaining == 0) {
      const double step = (b - a) / static_cast<double>(npts);
      for (std::size_t p = 0; p < npts; ++p) out[g0 + p - base] += w * f_.at(a + step * static_cast<double>(p));
      return;
    }
    const double q = q_.at(level + 1, idx);
    const double lo = a + (b - a) * (1.0 - q) / 2.0;
    const double width = (b - a) * q;
    if (remaining == 1) {
      // both children are affine in the last draw y, so E over y is an exact
      // average of f over an interval
      const double hi = lo + width;
      const std::size_t half = npts / 2;
      const double inv = 1.0 / static_cast<double>(half);
      out[g0 - base] += w * f_.at(a);
      for (std::size_t p = 1; p < half; ++p) {
        const double s = static_cast<double>(p) * inv;
        out[g0 + p - base] += w * mean_over(a + s * (lo - a), a + s * (hi - a));
      }
      for (std::size_t p = half; p < npts; ++p) {
        const double s = static_cast<double>(p - half) * inv;
        out[g0 + p - base] += w * mean_over(lo + s * (b - lo), hi + s * (b - hi));
      }
      return;
    }
    for (std::size_t k = 0; k < rule_.nodes.size(); ++k) {
      const double y = lo + width * rule_.nodes[k];
      const double wk = w * rule_.weights[k];
      rec(level + 1, 2 * idx, a, y, remaining - 1, wk, out, base);
      rec(level + 1, 2 * idx + 1, y, b, remaining - 1, wk, out, base);
    }
  }

  // integral of f over [0, x], x in [0, 1]
  double antiderivative(double x) const {
    const double n = static_cast<double>(f_.size());
    const double cell = std::min(std::floor(x * n), n - 1.0);
    const auto i = static_cast<std::size_t>(cell);
    const double frac = x * n - cell;
    const double f0 = f_[i];
    const double f1 = f_[(i + 1) % f_.size()];
    return prefix_[i] + frac / n * (f0 + 0.5 * frac * (f1 - f0));
  }

  double mean_over(double u1, double u2) const {
    const double n = static_cast<double>(f_.size());
    // f is linear inside one cell
    if (std::floor(u1 * n) == std::floor(u2 * n) || u2 - u1 < 1e-12) return f_.at(0.5 * (u1 + u2));
    return (antiderivative(u2) - antiderivative(u1)) / (u2 - u1);
  }

  const SampledFunction& f_;
  const QMap& q_;
  const GaussRule& rule_;
  int m_;
  int depth_;
  std::vector<double> prefix_;
};

void check_resolution(const DerandState& s, int m_out) {
  if (m_out < s.config().n_max + 1) {
    throw ResolutionError(fmt::format("expectation grid 2^{} is coarser than rank {}", m_out, s.config().n_max));
  }
}

}  // namespace

DerandState::DerandState(SampledFunction f, QMap q, const DerandConfig& cfg)
    : f_(std::move(f)), q_(std::move(q)), cfg_(cfg) {
  cfg_.validate();
  fixed_ = {0.0, 1.0};
  J_ = {concentric(0.0, 1.0, q_.at(1, 0))};
}

DerandState DerandState::custom(SampledFunction f, QMap q, const DerandConfig& cfg, std::vector<double> fixed,
                                std::vector<Interval> active, int ell) {
  DerandState s(std::move(f), std::move(q), cfg);
  const std::size_t gaps = fixed.size() - 1;
  if (fixed.size() < 2 || (gaps & (gaps - 1)) != 0 || active.size() != gaps) {
    throw ParameterError("custom state needs 2^k + 1 fixed images and 2^k active intervals");
  }
  for (std::size_t i = 0; i < gaps; ++i) {
    if (!(fixed[i] <= active[i].lo && active[i].lo < active[i].hi && active[i].hi <= fixed[i + 1])) {
      throw ParameterError(fmt::format("active interval {} is not inside its fixed gap", i));
    }
  }
  s.fixed_ = std::move(fixed);
  s.J_ = std::move(active);
  s.n_active_ = static_cast<int>(std::log2(static_cast<double>(gaps))) + 1;
  s.ell_ = ell;
  return s;
}

double DerandState::max_relative_width() const {
  double w = 0.0;
  for (std::size_t i = 0; i < J_.size(); ++i) w = std::max(w, (J_[i].hi - J_[i].lo) / (fixed_[i + 1] - fixed_[i]));
  return w;
}

void DerandState::halve(const SignVector& eps) {
  if (frozen()) throw ParameterError("cannot halve a fixed state");
  if (eps.size() != J_.size()) throw ParameterError("one sign per active point is required");
  for (std::size_t i = 0; i < J_.size(); ++i) {
    const double mid = 0.5 * (J_[i].lo + J_[i].hi);
    if (eps[i] > 0) {
      J_[i].lo = mid;
    } else {
      J_[i].hi = mid;
    }
  }
  ++ell_;
}

namespace {
std::vector<double> refine(const std::vector<double>& fixed, const std::vector<DerandState::Interval>& J) {
  std::vector<double> out(2 * J.size() + 1);
  for (std::size_t i = 0; i < J.size(); ++i) {
    out[2 * i] = fixed[i];
    out[2 * i + 1] = 0.5 * (J[i].lo + J[i].hi);
  }
  out.back() = 1.0;
  return out;
}
}  // namespace

void DerandState::promote() {
  if (frozen()) throw ParameterError("cannot promote a fixed state");
  fixed_ = refine(fixed_, J_);
  ++n_active_;
  ell_ = 0;
  J_.resize(fixed_.size() - 1);
  for (std::size_t i = 0; i < J_.size(); ++i) J_[i] = concentric(fixed_[i], fixed_[i + 1], q_.at(n_active_, i));
}

void DerandState::freeze() {
  if (frozen()) return;
  fixed_ = refine(fixed_, J_);
  frozen_level_ = n_active_;
  n_active_ = 0;
  ell_ = 0;
  J_.clear();
}

PLHomeo DerandState::homeo() const {
  const int level = frozen() ? frozen_level_ : n_active_ - 1;
  return PLHomeo::from_dyadic_images(level, fixed_);
}

SampledFunction expected_composition(const DerandState& s, int m_out) {
  if (s.frozen()) return compose(s.f(), s.homeo(), m_out);
  check_resolution(s, m_out);
  const auto& rule = gauss_legendre01(s.config().quad_nodes);
  const Engine eng(s.f(), s.q(), rule, m_out, s.config().depth_trunc);
  std::vector<double> out(std::size_t{1} << m_out, 0.0);
  const int n = s.n_active();
  for (std::size_t i = 0; i < s.active().size(); ++i) {
    const auto nodes = active_nodes(s.active()[i], Part::full, rule, s.config().active_panels);
    eng.gap(n, i, s.fixed()[i], s.fixed()[i + 1], nodes, out, 0);
  }
  return SampledFunction(m_out, std::move(out));
}

std::vector<int> tracked_degrees(int top_exponent) {
  std::vector<int> out;
  for (int b = 0; b <= top_exponent; ++b) {
    out.push_back(1 << b);
    if (b == top_exponent) break;
    for (int i = 1; i <= 3; ++i) {
      const int r = static_cast<int>(std::floor(std::ldexp(1.0 + i / 4.0, b)));
      if (r > out.back() && r < (1 << (b + 1))) out.push_back(r);
    }
  }
  return out;
}

Assembly assemble_v_matrix(const DerandState& s, const std::vector<int>& degrees) {
  if (s.frozen()) throw ParameterError("matrix assembly needs an active rank (state is fully fixed)");
  const int m = effective_m_out(s.config(), s.f());
  check_resolution(s, m);
  const std::size_t N = std::size_t{1} << m;
  for (int r : degrees) {
    if (r < 0 || static_cast<std::size_t>(r) >= N / 2) {
      throw ResolutionError(fmt::format("degree {} needs a finer expectation grid than 2^{}", r, m));
    }
  }
  const int n = s.n_active();
  const std::size_t cols = s.active().size();
  const std::size_t seg = N / cols;
  const std::size_t n_nodes = std::size_t{1} << n;  // x_j = j / 2^n
  const std::size_t node_step = N >> n;
  const auto& rule = gauss_legendre01(s.config().quad_nodes);
  const Engine eng(s.f(), s.q(), rule, m, s.config().depth_trunc);

  const SampledFunction current = expected_composition(s, m);

  Assembly as;
  as.m_out = m;
  as.degrees = degrees;
  as.half_diff.assign(N, 0.0);
  std::vector<double> resid(N, 0.0);
  std::vector<double> up(seg);
  std::vector<double> down(seg);
  for (std::size_t i = 0; i < cols; ++i) {
    const std::size_t base = i * seg;
    std::fill(up.begin(), up.end(), 0.0);
    std::fill(down.begin(), down.end(), 0.0);
    const double a = s.fixed()[i];
    const double b = s.fixed()[i + 1];
    eng.gap(n, i, a, b, active_nodes(s.active()[i], Part::upper, rule, s.config().active_panels), up, base);
    eng.gap(n, i, a, b, active_nodes(s.active()[i], Part::lower, rule, s.config().active_panels), down, base);
    for (std::size_t p = 0; p < seg; ++p) {
      as.half_diff[base + p] = 0.5 * (up[p] - down[p]);
      resid[base + p] = 0.5 * (up[p] + down[p]) - current[base + p];
    }
  }

  std::vector<RowId> ids;
  for (int r : degrees) {
    for (std::size_t j = 0; j < n_nodes; ++j) ids.push_back({r, static_cast<int>(j)});
  }
  SignMatrix full(cols, ids);
  const double inv_n = 1.0 / static_cast<double>(N);
  std::vector<double> kernel(N);
  std::size_t row = 0;
  for (int r : degrees) {
    for (std::size_t o = 0; o < N; ++o) kernel[o] = dirichlet_kernel(r, static_cast<double>(o) * inv_n);
    for (std::size_t j = 0; j < n_nodes; ++j, ++row) {
      const std::size_t x = j * node_step;
      for (std::size_t i = 0; i < cols; ++i) {
        double acc = 0.0;
        double acc_res = 0.0;
        for (std::size_t p = 0; p < seg; ++p) {
          const std::size_t g = i * seg + p;
          const double k = kernel[(x + N - g) % N];
          acc += as.half_diff[g] * k;
          acc_res += resid[g] * k;
        }
        full.at(row, i) = acc * inv_n;
        as.identity_residual = std::max(as.identity_residual, std::abs(acc_res * inv_n));
      }
    }
  }
  as.rows_before_threshold = full.n_rows();
  as.v = full.drop_small_rows(s.config().row_threshold);
  return as;
}

ChoiceResult choose_halves(const DerandState& s, const std::vector<int>& degrees) {
  Assembly as = assemble_v_matrix(s, degrees);
  const auto& cfg = s.config();
  SignVector eps = as.v.n_rows() == 0
                       ? SignVector::all_plus(as.v.n_cols())
                       : solve_hierarchical(as.v, cfg.solver,
                                            hash_words(cfg.seed, static_cast<std::uint64_t>(s.n_active()),
                                                       static_cast<std::uint64_t>(s.ell()), 0xD5));

  const std::size_t N = as.half_diff.size();
  const std::size_t seg = N / s.active().size();
  std::vector<double> F(N);
  for (std::size_t g = 0; g < N; ++g) F[g] = eps[g / seg] * as.half_diff[g];
  const FourierCoeffs c = coeffs(SampledFunction(as.m_out, std::move(F)));

  ChoiceResult res{s, eps, {}, as.identity_residual, as.v.n_rows()};
  for (int r : degrees) res.records.push_back({s.n_active(), s.ell(), r, synthesize(c, r).sup_norm()});
  res.state.halve(eps);
  return res;
}

MonteCarloCheck monte_carlo_check(const DerandState& s, const SampledFunction& quad, std::uint64_t seed) {
  const auto& cfg = s.config();
  const int m = quad.m();
  const std::size_t N = quad.size();
  const int n = s.n_active();
  const std::size_t seg = N / s.active().size();
  const double floor_se = 1e-4 * s.f().sup_norm() / 3.0;

  MonteCarloCheck out;
  out.points = cfg.mc_points;
  double sum_z2 = 0.0;
  for (int pt = 0; pt < cfg.mc_points; ++pt) {
    const auto g = static_cast<std::size_t>((pt + 0.5) * static_cast<double>(N) / cfg.mc_points);
    const std::size_t gap = g / seg;
    SplitMix64 rng(hash_words(seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(pt), 0x3C));
    double sum = 0.0;
    double sum2 = 0.0;
    for (int smp = 0; smp < cfg.mc_samples; ++smp) {
      const auto& J = s.active()[gap];
      const double y0 = J.lo + (J.hi - J.lo) * rng.uniform();
      // walk down the branch containing g, mirroring the quadrature recursion
      int level = n;
      std::size_t idx = 2 * gap;
      double a = s.fixed()[gap];
      double b = y0;
      if ((g >> (m - level)) != idx) {
        idx += 1;
        a = y0;
        b = s.fixed()[gap + 1];
      }
      int remaining = cfg.depth_trunc;
      double val = 0.0;
      while (true) {
        const std::size_t npts = std::size_t{1} << (m - level);
        const std::size_t g0 = idx * npts;
        if (npts == 1) {
          val = s.f().at(a);
          break;
        }
        if (remaining == 0) {
          val = s.f().at(a + (b - a) / static_cast<double>(npts) * static_cast<double>(g - g0));
          break;
        }
        const double q = s.q().at(level + 1, idx);
        const double y = a + (b - a) * (1.0 - q) / 2.0 + (b - a) * q * rng.uniform();
        ++level;
        --remaining;
        idx *= 2;
        if ((g >> (m - level)) != idx) {
          idx += 1;
          a = y;
        } else {
          b = y;
        }
      }
      sum += val;
      sum2 += val * val;
    }
    const double cnt = cfg.mc_samples;
    const double mean = sum / cnt;
    const double var = std::max(0.0, (sum2 - cnt * mean * mean) / (cnt - 1.0));
    const double se = std::max(std::sqrt(var / cnt), floor_se);
    const double err = quad[g] - mean;
    out.max_abs_err = std::max(out.max_abs_err, std::abs(err));
    if (se > 0.0) sum_z2 += (err / se) * (err / se);
  }
  out.rms_z = std::sqrt(sum_z2 / cfg.mc_points);
  if (out.rms_z > cfg.mc_z_limit) {
    throw NumericalAlarm(fmt::format(
        "derand expectation at rank {}: quadrature and Monte Carlo disagree (RMS z = {:.3g}, max error {:.3g})", n,
        out.rms_z, out.max_abs_err));
  }
  return out;
}

DerandState advance(const DerandState& s, const std::vector<int>& degrees, AdvanceLog& log) {
  if (s.frozen()) throw ParameterError("cannot advance a fixed state");
  const auto& cfg = s.config();
  DerandState st = s;
  if (cfg.mc_check && st.ell() == 0) {
    const SampledFunction quad = expected_composition(st, effective_m_out(cfg, st.f()));
    log.mc.push_back(monte_carlo_check(st, quad, cfg.seed));
  }
  while (st.ell() < cfg.ell_max && st.max_relative_width() >= cfg.j_tol) {
    ChoiceResult res = choose_halves(st, degrees);
    log.max_identity_residual = std::max(log.max_identity_residual, res.identity_residual);
    // nothing left above the row threshold: every choice is equivalent, keep the centres
    if (res.rows == 0) break;
    log.records.insert(log.records.end(), res.records.begin(), res.records.end());
    ++log.halvings;
    st = std::move(res.state);
  }
  if (st.n_active() >= cfg.n_max) {
    st.freeze();
  } else {
    st.promote();
  }
  return st;
}

DerandResult run(const SampledFunction& f, const DerandConfig& cfg) {
  cfg.validate();
  if (f.sup_norm() > 1.0 + 1e-12) {
    throw ParameterError(fmt::format("derand expects sup|f| <= 1 (got {}); normalize first", f.sup_norm()));
  }
  QMap q = q_map(f, cfg.n_max + cfg.depth_trunc, cfg.q_cfg);
  DerandState st(f, q, cfg);
  const std::vector<int> degrees = tracked_degrees(cfg.n_max + 2);
  AdvanceLog log;
  while (!st.frozen()) st = advance(st, degrees, log);
  return {st.homeo(), std::move(q), std::move(log.records), log.max_identity_residual, std::move(log.mc), log.halvings};
}

ShapeCheck deviation_shape(const std::vector<DeviationRecord>& records, double rel_tol) {
  // (n, ell) -> distance |n - floor(log2 r)| -> largest sup_dev
  std::map<std::pair<int, int>, std::map<int, double>> bins;
  for (const auto& r : records) {
    if (r.r < 1) continue;
    const int b = static_cast<int>(std::floor(std::log2(static_cast<double>(r.r)) + 1e-12));
    double& v = bins[{r.n, r.ell}][std::abs(r.n - b)];
    v = std::max(v, r.sup_dev);
  }
  ShapeCheck out;
  for (const auto& [key, by_dist] : bins) {
    for (const auto& [d, v] : by_dist) {
      const auto closer = by_dist.find(d - 1);
      if (d == 0 || closer == by_dist.end()) continue;
      ++out.bins;
      if (v <= closer->second * (1.0 + rel_tol)) ++out.conforming;
    }
  }
  return out;
}

void write_deviation_csv(std::ostream& os, const std::vector<DeviationRecord>& records) {
  os << "n,ell,r,sup_dev\n";
  for (const auto& r : records) os << fmt::format("{},{},{},{:.12g}\n", r.n, r.ell, r.r, r.sup_dev);
}

void to_json(nlohmann::json& j, const DerandConfig& c) {
  j = nlohmann::json{{"n_max", c.n_max},
                     {"ell_max", c.ell_max},
                     {"j_tol", c.j_tol},
                     {"quad_nodes", c.quad_nodes},
                     {"active_panels", c.active_panels},
                     {"depth_trunc", c.depth_trunc},
                     {"m_out", c.m_out},
                     {"row_threshold", c.row_threshold},
                     {"solver", c.solver},
                     {"seed", c.seed},
                     {"mc_check", c.mc_check},
                     {"mc_samples", c.mc_samples},
                     {"mc_points", c.mc_points},
                     {"mc_z_limit", c.mc_z_limit},
                     {"q_floor_exponent", c.q_cfg.floor_exponent}};
}

void from_json(const nlohmann::json& j, DerandConfig& c) {
  DerandConfig d;
  c.n_max = j.value("n_max", d.n_max);
  c.ell_max = j.value("ell_max", d.ell_max);
  c.j_tol = j.value("j_tol", d.j_tol);
  c.quad_nodes = j.value("quad_nodes", d.quad_nodes);
  c.active_panels = j.value("active_panels", d.active_panels);
  c.depth_trunc = j.value("depth_trunc", d.depth_trunc);
  c.m_out = j.value("m_out", d.m_out);
  c.row_threshold = j.value("row_threshold", d.row_threshold);
  c.solver = j.contains("solver") ? j.at("solver").get<HierarchicalConfig>() : d.solver;
  c.seed = j.value("seed", d.seed);
  c.mc_check = j.value("mc_check", d.mc_check);
  c.mc_samples = j.value("mc_samples", d.mc_samples);
  c.mc_points = j.value("mc_points", d.mc_points);
  c.mc_z_limit = j.value("mc_z_limit", d.mc_z_limit);
  c.q_cfg.floor_exponent = j.value("q_floor_exponent", d.q_cfg.floor_exponent);
  c.validate();
}

}  // namespace homeolab

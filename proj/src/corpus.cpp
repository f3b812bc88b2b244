#include "homeolab/corpus.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "homeolab/errors.hpp"
#include "homeolab/haar.hpp"

namespace homeolab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSiPi = 1.8519370519824661;  // integral of sin(x)/x over [0, pi]

void check_grid(int m) {
  if (m < 2 || m > kMaxGridExponent) throw ParameterError(fmt::format("grid exponent {} out of range", m));
}

double phase_scale(int N, PhaseConvention phase) {
  return phase == PhaseConvention::half_turns ? N * kPi : static_cast<double>(N);
}

}  // namespace

SampledFunction oscillation(int N, double gamma, const std::vector<double>& g, int m, PhaseConvention phase) {
  check_grid(m);
  if (N < 0) throw ParameterError("oscillation count must be nonnegative");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError(fmt::format("gamma must lie in (0, 1), got {}", gamma));
  if (g.size() < 2) throw ParameterError("g needs at least two samples");
  if (g.front() != 0.0 || std::abs(g.back() - 1.0) > 1e-12) throw ParameterError("g must run from 0 to 1");
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (!(g[i] >= g[i - 1])) throw ParameterError(fmt::format("g is not monotone at sample {}", i));
  }
  const double w = phase_scale(N, phase);
  const double cells = static_cast<double>(g.size() - 1);
  return SampledFunction::from_fn(m, [&](double t) {
    if (t > gamma) return 0.0;
    const double x = t / gamma * cells;
    const auto i = std::min(static_cast<std::size_t>(x), g.size() - 2);
    const double gt = g[i] + (x - static_cast<double>(i)) * (g[i + 1] - g[i]);
    return std::sin(w * gt);
  });
}

SampledFunction tapered_oscillation(int N, double gamma, int m, PhaseConvention phase) {
  SampledFunction base = oscillation(N, gamma, {0.0, 1.0}, m, phase);
  std::vector<double> v(base.values().begin(), base.values().end());
  const double start = 2.0 * gamma / 3.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double t = base.node(i);
    if (t > start && t <= gamma) v[i] *= 0.5 * (1.0 + std::cos(kPi * (t - start) / (gamma / 3.0)));
  }
  return SampledFunction(m, std::move(v));
}

double kk_scale(int k, double decay_power) { return std::pow(std::tgamma(k + 1.0), -decay_power); }

SampledFunction kk_example(int k_max, int m, double decay_power) {
  check_grid(m);
  if (k_max < 1) throw ParameterError("k_max must be at least 1");
  if (!(decay_power > 0.0)) throw ParameterError("decay power must be positive");
  for (int k = 3; k <= k_max; ++k) {
    if (!(k * kk_scale(k, decay_power) < kk_scale(k - 1, decay_power))) {
      throw ParameterError(fmt::format("packets {} and {} overlap", k - 1, k));
    }
  }
  if (2 * kk_scale(2, decay_power) > 1.0) throw ParameterError("first packet does not fit in [0, 1]");
  return SampledFunction::from_fn(m, [&](double t) {
    for (int k = 2; k <= k_max; ++k) {
      const double a = kk_scale(k, decay_power);
      if (t >= a && t <= k * a) return std::sin(k * kPi * (t - a) / ((k - 1) * a));
    }
    return 0.0;
  });
}

SampledFunction fejer_blocks(int block_count, int m) {
  check_grid(m);
  if (block_count < 0 || block_count > kMaxFejerBlocks) {
    throw ParameterError(fmt::format("block_count must be in [0, {}]", kMaxFejerBlocks));
  }
  if (block_count > 0 && (1 << (block_count + 4)) > (1 << (m - 1))) {
    throw ResolutionError(fmt::format("{} blocks need grid exponent >= {}", block_count, block_count + 5));
  }
  const double scale = 1.0 / (2.0 * kSiPi * kMaxFejerBlocks);
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  return SampledFunction::from_fn(m, [&](double t) {
    double sum = 0.0;
    for (int s = 1; s <= block_count; ++s) {
      const int n_s = (1 << (s + 2)) - 1;
      const int carrier = 3 * (1 << (s + 2));
      double tau = s * golden;
      tau -= std::floor(tau);
      const double x = t - tau;
      double inner = 0.0;
      for (int k = 1; k <= n_s; ++k) inner += std::sin(2.0 * kPi * k * x) / k;
      sum += 2.0 * std::sin(2.0 * kPi * carrier * x) * inner;
    }
    return scale * sum;
  });
}

SampledFunction generate(const CorpusSpec& c) {
  switch (c.kind) {
    case CorpusKind::oscillation:
      return oscillation(c.N, c.gamma, c.g, c.m, c.phase);
    case CorpusKind::tapered_oscillation:
      return tapered_oscillation(c.N, c.gamma, c.m, c.phase);
    case CorpusKind::kk_example:
      return kk_example(c.k_max, c.m, c.decay_power);
    case CorpusKind::fejer_blocks:
      return fejer_blocks(c.block_count, c.m);
    case CorpusKind::rademacher:
      return rademacher(c.rank, c.m);
    case CorpusKind::perturbed_square:
      return perturbed_square_wave(c.rank, c.jitter, c.seed, c.m);
  }
  throw ParameterError("unknown corpus kind");
}

std::string CorpusSpec::id() const {
  switch (kind) {
    case CorpusKind::oscillation:
      return fmt::format("oscillation_N{}_g{}_m{}", N, gamma, m);
    case CorpusKind::tapered_oscillation:
      return fmt::format("tapered_oscillation_N{}_g{}_m{}", N, gamma, m);
    case CorpusKind::kk_example:
      return fmt::format("kk_example_k{}_m{}", k_max, m);
    case CorpusKind::fejer_blocks:
      return fmt::format("fejer_blocks_B{}_m{}", block_count, m);
    case CorpusKind::rademacher:
      return fmt::format("rademacher_n{}_m{}", rank, m);
    case CorpusKind::perturbed_square:
      return fmt::format("perturbed_square_n{}_j{}_s{}_m{}", rank, jitter, seed, m);
  }
  return "unknown";
}

std::vector<std::string> corpus_kind_names() {
  return {"oscillation", "tapered_oscillation", "kk_example", "fejer_blocks", "rademacher", "perturbed_square"};
}

std::string to_string(CorpusKind k) { return corpus_kind_names()[static_cast<std::size_t>(k)]; }

CorpusKind corpus_kind_from_string(const std::string& s) {
  const auto names = corpus_kind_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == s) return static_cast<CorpusKind>(i);
  }
  throw ConfigError(fmt::format("unknown corpus kind '{}' (valid: {})", s, fmt::join(names, ", ")));
}

void to_json(nlohmann::json& j, const CorpusSpec& c) {
  j = nlohmann::json{{"kind", to_string(c.kind)}, {"m", c.m}};
  switch (c.kind) {
    case CorpusKind::oscillation:
      j["g"] = c.g;
      [[fallthrough]];
    case CorpusKind::tapered_oscillation:
      j["N"] = c.N;
      j["gamma"] = c.gamma;
      j["phase"] = c.phase == PhaseConvention::half_turns ? "half_turns" : "literal";
      break;
    case CorpusKind::kk_example:
      j["k_max"] = c.k_max;
      j["decay_power"] = c.decay_power;
      break;
    case CorpusKind::fejer_blocks:
      j["block_count"] = c.block_count;
      break;
    case CorpusKind::rademacher:
      j["rank"] = c.rank;
      break;
    case CorpusKind::perturbed_square:
      j["rank"] = c.rank;
      j["jitter"] = c.jitter;
      j["seed"] = c.seed;
      break;
  }
}

void from_json(const nlohmann::json& j, CorpusSpec& c) {
  if (!j.is_object()) throw ConfigError("corpus spec must be an object");
  CorpusSpec d;
  c.kind = corpus_kind_from_string(j.value("kind", to_string(d.kind)));
  c.m = j.value("m", d.m);
  c.N = j.value("N", d.N);
  c.gamma = j.value("gamma", d.gamma);
  c.g = j.value("g", d.g);
  const std::string phase = j.value("phase", std::string("half_turns"));
  if (phase == "half_turns") {
    c.phase = PhaseConvention::half_turns;
  } else if (phase == "literal") {
    c.phase = PhaseConvention::literal;
  } else {
    throw ConfigError(fmt::format("unknown phase convention '{}' (valid: half_turns, literal)", phase));
  }
  c.k_max = j.value("k_max", d.k_max);
  c.decay_power = j.value("decay_power", d.decay_power);
  c.block_count = j.value("block_count", d.block_count);
  c.rank = j.value("rank", d.rank);
  c.jitter = j.value("jitter", d.jitter);
  c.seed = j.value("seed", d.seed);
}

}  // namespace homeolab

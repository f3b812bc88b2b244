#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "homeolab/core_grid.hpp"

namespace homeolab {

enum class PhaseConvention {
  half_turns,  // sin(N pi g(t)): N zero crossings on [0, gamma]
  literal,     // sin(N g(t))
};

// sin(N pi g(t)) on [0, gamma], exactly zero after gamma. g is given by its
// samples on a uniform grid of [0, gamma] (linear between samples) and must
// be nondecreasing with g(0) = 0, g(gamma) = 1.
SampledFunction oscillation(int N, double gamma, const std::vector<double>& g, int m,
                            PhaseConvention phase = PhaseConvention::half_turns);

// Linear g; the last third of [0, gamma] is damped by a raised cosine.
SampledFunction tapered_oscillation(int N, double gamma, int m, PhaseConvention phase = PhaseConvention::half_turns);

// Packets sin(k pi s) on [a_k, k a_k], k = 2 .. k_max, with a_k = (k!)^-decay_power.
SampledFunction kk_example(int k_max, int m, double decay_power = 3.0);
double kk_scale(int k, double decay_power);

inline constexpr int kMaxFejerBlocks = 8;

// Lacunary blocks 2 sin(2 pi N_s (t - tau_s)) * sum_{k <= n_s} sin(2 pi k (t - tau_s)) / k,
// n_s = 2^(s+2) - 1, N_s = 3 * 2^(s+2), scaled by a fixed constant so that any
// number of blocks up to kMaxFejerBlocks stays within [-1, 1].
SampledFunction fejer_blocks(int block_count, int m);

enum class CorpusKind { oscillation, tapered_oscillation, kk_example, fejer_blocks, rademacher, perturbed_square };

struct CorpusSpec {
  CorpusKind kind = CorpusKind::perturbed_square;
  int m = 12;
  // oscillation family
  int N = 16;
  double gamma = 0.5;
  std::vector<double> g{0.0, 1.0};
  PhaseConvention phase = PhaseConvention::half_turns;
  // kk_example
  int k_max = 4;
  double decay_power = 3.0;
  // fejer_blocks
  int block_count = 4;
  // rademacher / perturbed_square
  int rank = 5;
  double jitter = 0.5;
  std::uint64_t seed = 1;

  std::string id() const;
};

SampledFunction generate(const CorpusSpec& spec);

std::string to_string(CorpusKind k);
CorpusKind corpus_kind_from_string(const std::string& s);
std::vector<std::string> corpus_kind_names();

void to_json(nlohmann::json& j, const CorpusSpec& c);
void from_json(const nlohmann::json& j, CorpusSpec& c);

}  // namespace homeolab

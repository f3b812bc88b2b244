#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "homeolab/errors.hpp"
#include "homeolab/fourier.hpp"
#include "homeolab/rng.hpp"
#include "homeolab/signs.hpp"

using namespace homeolab;

namespace {

// reverse column order; agrees with row_discrepancy up to rounding
double discrepancy_reversed(const SignMatrix& v, const SignVector& eps) {
  double worst = 0.0;
  for (std::size_t r = 0; r < v.n_rows(); ++r) {
    double s = 0.0;
    for (std::size_t k = v.n_cols(); k-- > 0;) s += eps[k] * v.at(r, k);
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

SignMatrix random_matrix(std::size_t cols, std::size_t rows, std::uint64_t seed) {
  std::vector<RowId> ids;
  for (std::size_t j = 0; j < rows; ++j) ids.push_back({0, static_cast<int>(j)});
  SignMatrix v(cols, ids);
  SplitMix64 rng(seed);
  for (std::size_t k = 0; k < cols; ++k)
    for (std::size_t j = 0; j < rows; ++j) v.at(j, k) = 2.0 * rng.uniform() - 1.0;
  return v;
}

}  // namespace

TEST_CASE("index distance") {
  CHECK(index_distance(0, 15, 16, DistanceMode::circular) == 1);
  CHECK(index_distance(0, 15, 16, DistanceMode::linear) == 15);
  CHECK(index_distance(4, 4, 16, DistanceMode::linear) == 0);
}

TEST_CASE("sign vectors reject anything but +-1") {
  CHECK_THROWS_AS(SignVector({1, 0, -1}), ParameterError);
  CHECK_NOTHROW(SignVector({1, -1}));
  CHECK((-SignVector({1, -1})) == SignVector({-1, 1}));
}

TEST_CASE("synthetic matrices") {
  const auto v = build_synthetic_matrix(16, SyntheticProfile::exact_decay, 0);
  CHECK(v.n_cols() == 16);
  CHECK(v.n_rows() == 16);
  CHECK(v.at(3, 3) == 1.0);
  CHECK(v.at(0, 15) == 0.5);
  CHECK(v.decay_cert().has_value());
  CHECK(*v.decay_cert() == doctest::Approx(1.0));
  const auto r = build_synthetic_matrix(16, SyntheticProfile::random_signs_decay, 4);
  bool any_negative = false;
  for (std::size_t k = 0; k < 16; ++k)
    for (std::size_t j = 0; j < 16; ++j) {
      CHECK(std::abs(r.at(j, k)) == v.at(j, k));
      any_negative = any_negative || r.at(j, k) < 0;
    }
  CHECK(any_negative);
}

TEST_CASE("kernel matrix") {
  const auto f = SampledFunction::constant(8, 1.0);
  const auto v = build_kernel_matrix(f, 16);
  // constant f: v_{k,j} is the plain block integral of the kernel
  for (int k = 0; k < 16; k += 3)
    for (int j = 0; j < 16; j += 5) {
      const double got = v.at(static_cast<std::size_t>(j), static_cast<std::size_t>(k));
      CHECK(got == doctest::Approx(kernel_block_integral(16, k, j)).epsilon(1e-9));
    }
  CHECK(*v.decay_cert() <= 4.0);
  CHECK_THROWS_AS(build_kernel_matrix(f, 12), ParameterError);
  CHECK_THROWS_AS(build_kernel_matrix(f, 128), ResolutionError);
}

TEST_CASE("row discrepancy is order independent up to rounding") {
  const auto v = random_matrix(40, 30, 2);
  SplitMix64 rng(7);
  std::vector<int> e(40);
  for (int& x : e) x = rng.coin() ? 1 : -1;
  const SignVector eps(e);
  CHECK(row_discrepancy(v, eps) == doctest::Approx(discrepancy_reversed(v, eps)).epsilon(1e-13));
  CHECK_THROWS_AS(row_discrepancy(v, SignVector::all_plus(39)), ParameterError);
}

TEST_CASE("brute force on the n=16 exact decay matrix") {
  const auto v = build_synthetic_matrix(16, SyntheticProfile::exact_decay, 0);
  const auto bf = solve_bruteforce(v);
  CHECK(bf.optimum == doctest::Approx(0.38015873015873025).epsilon(1e-12));
  std::vector<int> alt(16);
  for (std::size_t i = 0; i < 16; ++i) alt[i] = (i % 2 == 0) ? 1 : -1;
  CHECK(bf.eps == SignVector(alt));
  const auto v8 = build_synthetic_matrix(8, SyntheticProfile::exact_decay, 0);
  CHECK(solve_bruteforce(v8).optimum == doctest::Approx(11.0 / 30.0).epsilon(1e-12));
  CHECK_THROWS_AS(solve_bruteforce(build_synthetic_matrix(32, SyntheticProfile::exact_decay, 0)), ParameterError);
}

TEST_CASE("hierarchical solver against the brute-force optimum") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto v = random_matrix(12, 20, seed);
    const double opt = solve_bruteforce(v).optimum;
    HierarchicalConfig one_block;
    one_block.block = 12;
    const auto eps = solve_hierarchical(v, one_block, seed);
    CHECK(row_discrepancy(v, eps) >= opt - 1e-12);
    // a single block of 12 members is enumerated, so the optimum is found
    CHECK(row_discrepancy(v, eps) == doctest::Approx(opt).epsilon(1e-12));
  }
  const auto v = build_synthetic_matrix(16, SyntheticProfile::exact_decay, 0);
  HierarchicalConfig cfg;
  cfg.block = 4;
  CHECK(row_discrepancy(v, solve_hierarchical(v, cfg, 1)) <= 2.0);
}

TEST_CASE("hierarchical solver is deterministic and beats i.i.d. signs") {
  const auto v = build_synthetic_matrix(512, SyntheticProfile::exact_decay, 0);
  const auto a = solve_hierarchical(v, HierarchicalConfig{}, 3);
  CHECK(a == solve_hierarchical(v, HierarchicalConfig{}, 3));
  CHECK(solve_iid(v, 3) == solve_iid(v, 3));
  CHECK(row_discrepancy(v, a) < row_discrepancy(v, solve_iid(v, 3)));
}

TEST_CASE("degenerate inputs") {
  const SignMatrix zero(5, {{0, 0}, {0, 1}});
  CHECK(solve_hierarchical(zero, HierarchicalConfig{}, 1) == SignVector::all_plus(5));
  const SignMatrix no_rows(4, {});
  CHECK(solve_hierarchical(no_rows, HierarchicalConfig{}, 1) == SignVector::all_plus(4));
}

TEST_CASE("row truncation and scaling") {
  SignMatrix v(2, {{0, 0}, {0, 1}});
  v.at(0, 0) = 1.0;
  v.at(1, 1) = 1e-9;
  CHECK(v.drop_small_rows(1e-6).n_rows() == 1);
  CHECK(v.scaled(2.0).at(0, 0) == 2.0);
  CHECK(v.max_abs() == 1.0);
}

TEST_CASE("json round trip re-verifies the certificate") {
  const auto v = build_synthetic_matrix(8, SyntheticProfile::random_signs_decay, 2);
  nlohmann::json j = v;
  const auto back = j.get<SignMatrix>();
  for (std::size_t k = 0; k < 8; ++k)
    for (std::size_t r = 0; r < 8; ++r) CHECK(back.at(r, k) == v.at(r, k));
  CHECK(back.decay_cert() == v.decay_cert());
  j["decay_cert"] = 0.01;
  CHECK_THROWS(j.get<SignMatrix>());
  const SignVector e({1, -1, -1});
  CHECK(nlohmann::json(e).get<SignVector>() == e);
}

#include <cmath>

#include <doctest.h>

#include "homeolab/errors.hpp"
#include "homeolab/haar.hpp"
#include "homeolab/rng.hpp"

using namespace homeolab;

namespace {

// <f, chi_I> for I the level-l interval i, integrating the step function directly
double haar_oracle(const SampledFunction& f, int l, std::size_t i) {
  const std::size_t cells = f.size() >> l;
  const double h = 1.0 / static_cast<double>(f.size());
  double left = 0.0;
  double right = 0.0;
  for (std::size_t c = 0; c < cells; ++c) (c < cells / 2 ? left : right) += f[i * cells + c] * h;
  return std::pow(2.0, l / 2.0) * (left - right);
}

// q_f at a rank-n point straight from the definition
double q_oracle(const SampledFunction& f, int n, std::size_t index) {
  const int l0 = n - 1;
  double s = 0.0;
  for (int l = l0; l < f.m(); ++l) {
    const std::size_t per = std::size_t{1} << (l - l0);
    for (std::size_t i = index * per; i < (index + 1) * per; ++i) {
      const double c = haar_oracle(f, l, i);
      s += c * c * std::pow(2.0, -l / 2.0);
    }
  }
  return s / std::pow(2.0, -1.5 * l0);
}

}  // namespace

TEST_CASE("Haar coefficients match direct integration") {
  SplitMix64 rng(3);
  const auto f = SampledFunction::from_fn(6, [&](double) { return rng.uniform() - 0.5; });
  const auto c = haar_transform(f);
  CHECK(c.levels() == 6);
  for (int l = 0; l < 6; ++l) {
    for (std::size_t i = 0; i < (std::size_t{1} << l); ++i) CHECK(c.coef(l, i) == doctest::Approx(haar_oracle(f, l, i)).epsilon(1e-12));
  }
  double mean_sq = 0.0;
  for (double v : f.values()) mean_sq += v * v / 64.0;
  CHECK(c.energy() == doctest::Approx(mean_sq).epsilon(1e-12));
}

TEST_CASE("Haar synthesis inverts analysis") {
  SplitMix64 rng(8);
  const auto f = SampledFunction::from_fn(7, [&](double) { return rng.uniform(); });
  const auto back = haar_inverse(haar_transform(f), 7);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(back[i] == doctest::Approx(f[i]).epsilon(1e-13));
  CHECK_THROWS_AS(haar_inverse(haar_transform(f), 6), ResolutionError);
}

TEST_CASE("q map against the definition") {
  const auto f = SampledFunction::from_fn(8, [](double t) { return std::sin(6.0 * t) * std::cos(17.0 * t * t); });
  const auto q = q_map(f, 6);
  for (int n = 1; n <= 6; ++n) {
    for (std::size_t i = 0; i < (std::size_t{1} << (n - 1)); ++i) {
      const DyadicPoint d(static_cast<std::int64_t>(2 * i + 1), n);
      CHECK(q.raw(d) == doctest::Approx(q_oracle(f, n, i)).epsilon(1e-10));
      CHECK(q(d) >= q.floor_at(n));
      CHECK(q(d) <= 1.0);
    }
  }
}

TEST_CASE("q map of Rademacher functions") {
  for (int n = 3; n <= 8; ++n) {
    const auto f = rademacher(n, n + 4);
    const auto q = q_map(f, n + 2);
    CHECK(std::abs(q.raw(DyadicPoint(1, 1)) - std::pow(2.0, -(n - 1) / 2.0)) < 1e-12);
    for (std::int64_t k = 1; k < (std::int64_t{1} << n); k += 2) CHECK(std::abs(q.raw(DyadicPoint(k, n)) - 1.0) < 1e-12);
    CHECK(q.raw(DyadicPoint(1, n + 1)) < 1e-12);
    CHECK(q(DyadicPoint(1, n + 1)) == q.floor_at(n + 1));
  }
}

TEST_CASE("q map preconditions and json") {
  CHECK_THROWS_AS(q_map(SampledFunction::constant(4, 2.0), 3), ParameterError);
  const auto q0 = q_map(SampledFunction::constant(5, 0.5), 3);
  CHECK(q0(DyadicPoint(1, 1)) == q0.floor_at(1));
  const auto q = q_map(rademacher(3, 6), 4);
  const auto back = nlohmann::json(q).get<QMap>();
  for (std::int64_t k = 1; k < 16; k += 2) {
    CHECK(back(DyadicPoint::reduced(k, 4)) == q(DyadicPoint::reduced(k, 4)));
    CHECK(back.raw(DyadicPoint::reduced(k, 4)) == q.raw(DyadicPoint::reduced(k, 4)));
  }
}

TEST_CASE("Rademacher and perturbed square waves") {
  const auto r = rademacher(2, 5);
  CHECK(r[0] == 1.0);
  CHECK(r[8] == -1.0);
  CHECK(r[16] == 1.0);
  CHECK_THROWS_AS(rademacher(4, 5), ResolutionError);
  CHECK(perturbed_square_wave(4, 0.0, 99, 8) == rademacher(4, 8));
  const auto p = perturbed_square_wave(4, 0.5, 99, 10);
  CHECK(p == perturbed_square_wave(4, 0.5, 99, 10));
  CHECK(p != rademacher(4, 10));
  CHECK(p.sup_norm() == 1.0);
  CHECK_THROWS_AS(perturbed_square_wave(4, 1.0, 1, 8), ParameterError);
}

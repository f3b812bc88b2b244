#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <doctest.h>

#include "homeolab/errors.hpp"
#include "homeolab/haar.hpp"
#include "homeolab/randhomeo.hpp"

using namespace homeolab;

namespace {

// two-sided Kolmogorov-Smirnov distance to U(0, 1)
double ks_uniform(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - xs[i]));
    d = std::max(d, std::abs(xs[i] - static_cast<double>(i) / n));
  }
  return d;
}

}  // namespace

TEST_CASE("Dubins-Freedman samples are homeomorphisms") {
  const PLHomeo h = sample_df(8, 5);
  CHECK(h.size() == 257);
  CHECK(h(0.0) == 0.0);
  CHECK(h(1.0) == 1.0);
  const auto bp = h.breakpoints();
  for (std::size_t i = 1; i < bp.size(); ++i) CHECK(bp[i].y > bp[i - 1].y);
  CHECK(sample_df(8, 5) == h);
  CHECK(sample_df(8, 6) != h);
  CHECK_THROWS_AS(sample_df(0, 1), ParameterError);
}

TEST_CASE("q = 1 reproduces Dubins-Freedman bit for bit") {
  for (std::uint64_t seed : {1u, 2u, 77u}) {
    DFParams p;
    p.depth = 9;
    const auto y = sample_dyadic_images(p, seed);
    const PLHomeo h = sample_df(9, seed);
    const auto bp = h.breakpoints();
    REQUIRE(y.size() == bp.size());
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == bp[i].y);
  }
}

TEST_CASE("image of 1/2 under Dubins-Freedman is uniform") {
  std::vector<double> mids;
  for (std::uint64_t s = 0; s < 10000; ++s) mids.push_back(sample_df(1, s)(0.5));
  CHECK(ks_uniform(mids) <= 0.02);
}

TEST_CASE("mass ratios hold for constant q") {
  for (double q : {0.25, 0.5, 0.9}) {
    DFParams p;
    p.depth = 10;
    p.q = q;
    const auto rep = verify_mass_ratios(sample_psi_q(p, 3), p);
    CHECK(rep.pass);
    CHECK(rep.min_ratio >= (1.0 - q) / 2.0 - 1e-9);
    CHECK(rep.max_ratio <= (1.0 + q) / 2.0 + 1e-9);
    CHECK(rep.worst_slack >= -1e-9);
    REQUIRE(rep.holder_exponents.has_value());
    CHECK(rep.holder_exponents->first == doctest::Approx(std::log2(2.0 / (1.0 + q))));
  }
}

TEST_CASE("mass ratio violations are located") {
  DFParams p;
  p.depth = 2;
  p.q = 0.5;
  const PLHomeo h({{0.0, 0.0}, {0.5, 0.9}, {1.0, 1.0}});
  const auto rep = verify_mass_ratios(h, p);
  CHECK_FALSE(rep.pass);
  REQUIRE(rep.offending.has_value());
  CHECK(*rep.offending == DyadicPoint(1, 1));
  CHECK(rep.worst_slack < 0.0);
}

TEST_CASE("inverse orientation") {
  DFParams p;
  p.depth = 7;
  p.q = 0.6;
  const PLHomeo direct = sample_psi_q(p, 9);
  p.orientation = Orientation::inverse;
  const PLHomeo inv = sample_psi_q(p, 9);
  CHECK(inv == invert(direct));
  CHECK(verify_mass_ratios(inv, p).pass);
  CHECK(orientation_from_string(to_string(Orientation::inverse)) == Orientation::inverse);
}

TEST_CASE("per-point q from a q map") {
  const auto f = rademacher(3, 10);
  DFParams p;
  p.depth = 6;
  p.q_map = q_map(f, 6);
  // raw q(1/2) = 1/2 is below the rank-1 floor 2^{-1/4}
  CHECK(p.q_map->raw(DyadicPoint(1, 1)) == doctest::Approx(0.5));
  CHECK(p.q_at(DyadicPoint(1, 1)) == doctest::Approx(std::pow(2.0, -0.25)));
  const auto rep = verify_mass_ratios(sample_psi_q(p, 4), p);
  CHECK(rep.pass);
  CHECK_FALSE(rep.holder_exponents.has_value());
}

TEST_CASE("Hoelder exponents") {
  const auto e = holder_exponents(0.5);
  CHECK(e.first == doctest::Approx(std::log2(4.0 / 3.0)));
  CHECK(e.second == doctest::Approx(2.0));
  CHECK(holder_exponents(1.0).second == std::numeric_limits<double>::infinity());
}

TEST_CASE("parameter validation") {
  DFParams p;
  p.q = 0.0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p.q = 1.5;
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p.q = 0.5;
  p.depth = 0;
  CHECK_THROWS_AS(p.validate(), ParameterError);
}

TEST_CASE("absolute-continuity diagnostics") {
  const auto id = ac_diagnostics(PLHomeo::identity(), {1.0, 2.0}, 8);
  CHECK(id.ac_consistent);
  for (const auto& lv : id.levels)
    for (double v : lv.norms) CHECK(v == doctest::Approx(1.0));
  // a DF sample is singular: the 2-norms of the difference quotients blow up
  const auto df = ac_diagnostics(sample_df(12, 1), {2.0}, 12);
  CHECK_FALSE(df.ac_consistent);
  CHECK(df.levels.back().norms[0] > 3.0 * df.levels.front().norms[0]);
  CHECK_THROWS_AS(ac_diagnostics(PLHomeo::identity(), {0.5}, 4), ParameterError);
}

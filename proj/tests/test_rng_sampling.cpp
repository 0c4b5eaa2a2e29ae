#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <span>

#include "basin/models/fish.hpp"
#include "basin/sample.hpp"

using namespace basin;

namespace {

bool positive_orthant(std::span<const double> x) {
  for (double v : x)
    if (v <= 0.0) return false;
  return true;
}

// Mean of a normal(mu, sigma) truncated to (0, inf), by composite Simpson on
// [0, mu + 12 sigma]; independent of the sampler under test.
double truncated_mean_oracle(double mu, double sigma) {
  auto density = [&](double x) {
    double z = (x - mu) / sigma;
    return std::exp(-0.5 * z * z);
  };
  const double hi = mu + 12.0 * sigma;
  const int n = 40000;
  double h = hi / n;
  double mass = 0.0, moment = 0.0;
  for (int i = 0; i <= n; ++i) {
    double x = i * h;
    double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    mass += w * density(x);
    moment += w * x * density(x);
  }
  return moment / mass;
}

}  // namespace

TEST_CASE("draw is deterministic in the seed", "[sample]") {
  PerturbationPlan plan;
  plan.center = {1.0, 1.0};
  plan.std_dev = {0.5, 0.5};
  plan.count = 200;
  plan.seed = 42;
  plan.domain_filter = [](std::span<const double> x) { return x[0] > 0.0; };

  auto a = draw(plan);
  auto b = draw(plan);
  REQUIRE(a.size() == 200);
  CHECK(a == b);

  plan.seed = 43;
  CHECK(draw(plan) != a);
}

TEST_CASE("draw output is invariant under the worker count", "[sample]") {
  PerturbationPlan plan;
  plan.center = {0.4, 0.1, 0.5};
  plan.std_dev = {0.2, 0.05, 0.25};
  plan.count = 1000;
  plan.seed = 7;
  plan.domain_filter = positive_orthant;

  auto serial = draw(plan, 1);
  for (int workers : {2, 3, 8}) {
    INFO("workers = " << workers);
    CHECK(draw(plan, workers) == serial);
  }
}

TEST_CASE("sample index owns its substream", "[sample]") {
  // The k-th sample must not depend on how many samples are requested.
  PerturbationPlan plan;
  plan.center = {0.0};
  plan.std_dev = {1.0};
  plan.count = 10;
  plan.seed = 99;
  auto small = draw(plan);
  plan.count = 1000;
  auto large = draw(plan);
  for (int i = 0; i < 10; ++i) CHECK(small[i] == large[i]);
}

TEST_CASE("zero spread degenerates to the center", "[sample]") {
  PerturbationPlan plan;
  plan.center = {2.0, -1.0};
  plan.std_dev = {0.0, 0.0};
  plan.count = 50;
  plan.seed = 1;
  for (const auto& s : draw(plan)) CHECK(s == plan.center);
}

TEST_CASE("frozen dimensions stay at the center and keep streams aligned",
          "[sample]") {
  PerturbationPlan plan;
  plan.center = {1.0, 1.0};
  plan.std_dev = {0.5, 0.5};
  plan.count = 100;
  plan.seed = 5;

  auto open = draw(plan);
  plan.frozen_dims = {0};
  auto frozen = draw(plan);
  for (int i = 0; i < 100; ++i) {
    CHECK(frozen[i][0] == 1.0);
    // Freezing consumes the same stream positions, so the other dimension's
    // draws are unchanged.
    CHECK(frozen[i][1] == open[i][1]);
  }

  plan.frozen_dims = {2};
  CHECK_THROWS_AS(plan.validate(), ConfigError);
}

TEST_CASE("plan validation", "[sample]") {
  PerturbationPlan plan;
  CHECK_THROWS_AS(plan.validate(), ConfigError);  // empty center
  plan.center = {1.0};
  plan.std_dev = {1.0, 2.0};
  CHECK_THROWS_AS(plan.validate(), ConfigError);  // dimension mismatch
  plan.std_dev = {-1.0};
  CHECK_THROWS_AS(plan.validate(), ConfigError);  // negative spread
  plan.std_dev = {1.0};
  plan.count = -1;
  CHECK_THROWS_AS(plan.validate(), ConfigError);
  plan.count = 3;
  CHECK_NOTHROW(plan.validate());
}

TEST_CASE("impossible domain reports a configuration error", "[sample]") {
  PerturbationPlan plan;
  plan.center = {0.0};
  plan.std_dev = {1.0};
  plan.count = 1;
  plan.domain_filter = [](std::span<const double>) { return false; };
  CHECK_THROWS_AS(draw(plan), ConfigError);
}

TEST_CASE("rejection sampling matches the truncated-normal mean oracle",
          "[sample][statistical]") {
  // The stock population plan: center at the equilibrium under equal harvest
  // 0.5, spread half the equilibrium, samples confined to the positive
  // orthant. The accepted marginals are 1-d truncated normals because the
  // dimensions are drawn independently.
  models::FishParams fp;
  fp.juvenile_harvest = fp.adult_harvest = 0.5;
  auto eq = models::fish_equilibrium(fp);
  REQUIRE_FALSE(eq.extinct);

  PerturbationPlan plan;
  plan.center = eq.state;
  plan.std_dev = eq.state;
  for (double& s : plan.std_dev) s *= 0.5;
  plan.count = 100000;
  plan.seed = 11;
  plan.domain_filter = positive_orthant;

  auto samples = draw(plan, 8);
  for (std::size_t d = 0; d < 3; ++d) {
    double mean = 0.0;
    for (const auto& s : samples) mean += s[d];
    mean /= static_cast<double>(samples.size());
    double want = truncated_mean_oracle(plan.center[d], plan.std_dev[d]);
    // 3 standard errors of the sample mean (truncated sd < raw sd).
    double slack = 3.0 * plan.std_dev[d] / std::sqrt(double(plan.count));
    INFO("dimension " << d << ": mean " << mean << " oracle " << want);
    CHECK(std::abs(mean - want) < slack);
  }
}

TEST_CASE("restricted set membership", "[sample]") {
  RestrictedSet set;
  set.center = {1.0, 1.0, 1.0};
  set.scale = {1.0, 1.0, 1.0};
  set.radius_sq = 0.25;

  CHECK(restrict_to(set, {}).empty());

  std::vector<State> samples = {{1.4, 1.0, 1.0}, {1.6, 1.0, 1.0}};
  auto kept = restrict_to(set, samples);
  REQUIRE(kept.size() == 1);  // 0.16 <= 0.25 kept, 0.36 > 0.25 dropped
  CHECK(kept[0] == samples[0]);

  set.scale = {1.0, 0.0, 1.0};
  CHECK_THROWS_AS(set.validate(), ConfigError);
}

TEST_CASE("restricted set volume fraction", "[sample][statistical]") {
  // Uniform samples on [0,2]^3: the kept fraction estimates the ellipsoid
  // (here: ball of radius 1/2) volume over the cube volume, ~ 0.0654.
  RestrictedSet set;
  set.center = {1.0, 1.0, 1.0};
  set.scale = {1.0, 1.0, 1.0};
  set.radius_sq = 0.25;

  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::vector<State> samples(100000);
  for (auto& s : samples) s = {u(gen), u(gen), u(gen)};

  double fraction =
      double(restrict_to(set, samples).size()) / double(samples.size());
  double want = (4.0 / 3.0) * std::numbers::pi * 0.125 / 8.0;
  CHECK(std::abs(fraction - want) < 0.005);
}

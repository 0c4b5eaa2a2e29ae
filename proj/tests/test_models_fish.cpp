#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <vector>

#include "basin/integrate.hpp"
#include "basin/models/fish.hpp"

using namespace basin;
using namespace basin::models;

namespace {

State rhs_at(const SystemModel& m, const State& x) {
  State out(3, 0.0);
  m.rhs(std::span<const double>(x), 0.0, 0, std::span<double>(out));
  return out;
}

}  // namespace

TEST_CASE("net production rates", "[fish]") {
  FishParams p;
  CHECK(fish_w_juvenile(p, 1.0) == 1.5);  // 0.5 * 10 / 2 - 1
  CHECK(fish_w_adult(p, 1.0) == Catch::Approx(1.125).margin(1e-12));

  // Starvation clamps to zero rather than going negative.
  CHECK(fish_w_juvenile(p, 0.1) == 0.0);
  CHECK(fish_w_adult(p, 0.1) == 0.0);
  CHECK(fish_w_juvenile(p, 0.0) == 0.0);

  // Adults ingest a fraction q of what juveniles do.
  CHECK(fish_w_adult(p, 1.5) < fish_w_juvenile(p, 1.5));
}

TEST_CASE("maturation rate", "[fish]") {
  FishParams p;
  const double m = p.juvenile_mortality + p.juvenile_harvest;  // 0.1

  // Generic arguments against high-precision references.
  CHECK(fish_maturation(p, 1.5) ==
        Catch::Approx(1.41929325354740440).margin(1e-12));
  CHECK(fish_maturation(p, 0.3) ==
        Catch::Approx(0.20973503810904284).margin(1e-12));
  // Below m the closed form stays positive: v(0.05) = 0.05 / 99.
  CHECK(fish_maturation(p, 0.05) ==
        Catch::Approx(0.05 / 99.0).margin(1e-15));

  // At the removable singularity x = m the limit is -m / ln z.
  CHECK(fish_maturation(p, m) ==
        Catch::Approx(-m / std::log(p.size_ratio)).margin(1e-15));
  CHECK(fish_maturation(p, m) == Catch::Approx(0.021715).margin(1e-6));

  // The series patch joins the closed form continuously.
  for (double u : {2e-8, -2e-8, 0.5e-8, -0.5e-8})
    CHECK(fish_maturation(p, m + u) ==
          Catch::Approx(fish_maturation(p, m)).margin(1e-10));

  // No production means no maturation.
  CHECK(fish_maturation(p, 0.0) == 0.0);
}

TEST_CASE("extinction state is an equilibrium", "[fish]") {
  FishParams p;
  auto m = make_fish(p);
  auto out = rhs_at(m, {0.0, 0.0, p.resource_max});
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 0.0);
  CHECK(out[2] == 0.0);
}

TEST_CASE("flows never point out of the positive orthant", "[fish]") {
  FishParams p;
  p.juvenile_harvest = p.adult_harvest = 0.5;
  auto m = make_fish(p);
  for (const auto& x : std::vector<State>{{0.0, 0.4, 0.8},
                                          {0.0, 2.0, 0.1},
                                          {0.3, 0.0, 1.2},
                                          {2.0, 0.0, 0.05},
                                          {0.0, 0.0, 0.5}}) {
    auto out = rhs_at(m, x);
    INFO("state " << x[0] << "," << x[1] << "," << x[2]);
    if (x[0] == 0.0) CHECK(out[0] >= 0.0);
    if (x[1] == 0.0) CHECK(out[1] >= 0.0);
  }
  CHECK(rhs_at(m, {1.0, 1.0, 0.0})[2] > 0.0);
}

TEST_CASE("unharvested equilibrium", "[fish]") {
  FishParams p;
  auto eq = fish_equilibrium(p);
  REQUIRE_FALSE(eq.extinct);
  CHECK(eq.state[0] > 0.0);
  CHECK(eq.state[1] > 0.0);
  CHECK(eq.state[2] > 0.0);
  CHECK(eq.state[2] < p.resource_max);

  auto m = make_fish(p);
  auto out = rhs_at(m, eq.state);
  for (double f : out) CHECK(std::abs(f) < 1e-10);

  // Independent check: the flow itself settles onto the same point.
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-12;
  auto settled = advance(m, {0.5, 0.5, 1.5}, 0.0, 200.0, cfg);
  for (int i = 0; i < 3; ++i)
    CHECK(settled[i] == Catch::Approx(eq.state[i]).margin(1e-6));
}

TEST_CASE("equilibrium under equal harvesting", "[fish]") {
  FishParams p;
  p.juvenile_harvest = p.adult_harvest = 0.5;
  auto eq = fish_equilibrium(p);
  REQUIRE_FALSE(eq.extinct);
  CHECK(eq.state[0] == Catch::Approx(0.36571).margin(1e-4));
  CHECK(eq.state[1] == Catch::Approx(0.10464).margin(1e-4));
  CHECK(eq.state[2] == Catch::Approx(0.49488).margin(1e-4));
}

TEST_CASE("overharvesting collapses to extinction", "[fish]") {
  FishParams p;
  p.juvenile_harvest = p.adult_harvest = 2.14;
  auto eq = fish_equilibrium(p);
  CHECK(eq.extinct);
  CHECK(eq.state == State{0.0, 0.0, p.resource_max});
}

TEST_CASE("extinction thresholds", "[fish]") {
  FishParams p;
  double h_star = fish_extinction_threshold(p);
  CHECK(h_star == Catch::Approx(2.13333539923).margin(1e-6));
  p.juvenile_harvest = p.adult_harvest = 0.999 * h_star;
  CHECK_FALSE(fish_equilibrium(p).extinct);
  p.juvenile_harvest = p.adult_harvest = 1.001 * h_star;
  CHECK(fish_equilibrium(p).extinct);

  // Harvesting adults alone can never touch juvenile recruitment, so the
  // population survives absurdly high rates.
  auto adult_alive = [](double h) {
    FishParams q;
    q.adult_harvest = h;
    return models::detail::fish_phi(q, q.resource_max) > 0.0;
  };
  double lo = 1.0, hi = 1024.0;
  REQUIRE(adult_alive(lo));
  REQUIRE_FALSE(adult_alive(hi));
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    (adult_alive(mid) ? lo : hi) = mid;
  }
  CHECK(0.5 * (lo + hi) == Catch::Approx(150.397).margin(1e-2));
}

TEST_CASE("equilibrium yield", "[fish]") {
  CHECK(fish_yield(0.5, 0.5, 2.0, 1.0) == 1.5);
  CHECK(fish_yield(0.0, 3.0, 1.0, 0.0) == 0.0);
  CHECK_THROWS_AS(fish_yield(-0.1, 0.0, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(fish_yield(0.0, 0.0, -1.0, 1.0), ConfigError);

  // Along the equal-harvest ray: nothing at h = 0, something near the
  // threshold, nothing past it.
  auto yield_at = [](double h) {
    FishParams p;
    p.juvenile_harvest = p.adult_harvest = h;
    auto eq = fish_equilibrium(p);
    return fish_yield(h, h, eq.state[0], eq.state[1]);
  };
  CHECK(yield_at(0.0) == 0.0);
  CHECK(yield_at(1.0) > 0.0);
  CHECK(yield_at(2.13) > 0.0);
  CHECK(yield_at(2.14) == 0.0);
}

TEST_CASE("parameter validation", "[fish]") {
  auto bad = FishParams{};
  bad.size_ratio = 1.0;
  CHECK_THROWS_AS(make_fish(bad), ConfigError);
  bad = FishParams{};
  bad.efficiency = 0.0;
  CHECK_THROWS_AS(make_fish(bad), ConfigError);
  bad = FishParams{};
  bad.half_saturation = 0.0;
  CHECK_THROWS_AS(make_fish(bad), ConfigError);
  bad = FishParams{};
  bad.juvenile_harvest = -0.5;
  CHECK_THROWS_AS(make_fish(bad), ConfigError);

  // The scalar reduction divides by d_A + h_A.
  auto no_loss = FishParams{};
  no_loss.adult_mortality = 0.0;
  CHECK_THROWS_AS(fish_equilibrium(no_loss), ConfigError);
}

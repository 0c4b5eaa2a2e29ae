#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <limits>

#include "basin/measures.hpp"
#include "basin/models/wagon.hpp"

using namespace basin;
using namespace basin::models;

namespace {

std::array<double, 2> rhs_at(const SystemModel& m, double x, double y,
                             int mode = 0) {
  std::array<double, 2> in{x, y}, out{};
  m.rhs(std::span<const double>(in), 0.0, mode, std::span<double>(out));
  return out;
}

}  // namespace

TEST_CASE("fold stiffness", "[wagon]") {
  WagonParams p;
  CHECK(wagon_fold_stiffness(p) == 0.054);  // 27 / (4 * 5^3), exactly

  // Scaling: doubling the magnet doubles the fold, growing a shrinks it.
  p.magnetic_stiffness = 2.0;
  CHECK(wagon_fold_stiffness(p) == 0.108);
  p = WagonParams{};
  p.magnet_position = 10.0;
  CHECK(wagon_fold_stiffness(p) == Catch::Approx(0.00675).margin(1e-15));
}

TEST_CASE("rest position of the spring-magnet balance", "[wagon]") {
  WagonParams p;
  auto x_eq = wagon_equilibrium_x(p);
  REQUIRE(x_eq.has_value());
  // x_eq satisfies k x (x-a)^2 = k_m to bisection accuracy.
  double a = p.magnet_position;
  CHECK(std::abs(p.stiffness * *x_eq * (*x_eq - a) * (*x_eq - a) -
                 p.magnetic_stiffness) < 1e-12);
  CHECK(*x_eq == Catch::Approx(0.058504).margin(1e-5));

  // Below the fold no balance exists; with no magnet the spring rests at 0.
  p.stiffness = 0.05;
  CHECK_FALSE(wagon_equilibrium_x(p).has_value());
  p.stiffness = 0.0;
  CHECK_FALSE(wagon_equilibrium_x(p).has_value());
  p = WagonParams{};
  p.magnetic_stiffness = 0.0;
  CHECK(wagon_equilibrium_x(p) == 0.0);
}

TEST_CASE("vector field at the origin", "[wagon]") {
  auto m = make_wagon(WagonParams{});
  auto out = rhs_at(m, 0.0, 0.0);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 0.04);  // k_m / a^2 = 1/25

  // Damping and spring enter with their signs.
  auto moving = rhs_at(m, 1.0, 2.0);
  CHECK(moving[0] == 2.0);
  CHECK(moving[1] == Catch::Approx(-0.7 - 2.0 + 1.0 / 16.0).margin(1e-15));
}

TEST_CASE("snapped spring removes only the restoring term", "[wagon]") {
  WagonParams p;
  auto m = make_wagon(p);
  for (double x : {0.5, 1.0, 3.0}) {
    auto intact = rhs_at(m, x, 0.7, 0);
    auto snapped = rhs_at(m, x, 0.7, 1);
    CHECK(snapped[0] == intact[0]);
    CHECK(snapped[1] - intact[1] ==
          Catch::Approx(p.stiffness * x / p.mass).margin(1e-15));
  }
}

TEST_CASE("validity region stops at the magnet", "[wagon]") {
  auto m = make_wagon(WagonParams{});
  REQUIRE(m.domain);
  std::array<double, 2> inside{4.9, 0.0}, at{5.0, 0.0}, past{5.1, 0.0};
  CHECK(m.domain(std::span<const double>(inside)));
  CHECK_FALSE(m.domain(std::span<const double>(at)));
  CHECK_FALSE(m.domain(std::span<const double>(past)));
}

TEST_CASE("speed limit installs the latch", "[wagon]") {
  CHECK_FALSE(static_cast<bool>(make_wagon(WagonParams{}).latch));

  WagonParams p;
  p.speed_limit = 2.0;
  auto m = make_wagon(p);
  REQUIRE(m.latch);
  std::array<double, 2> slow{1.0, 1.0}, fast{1.0, 2.5};
  CHECK(m.latch(std::span<const double>(slow)) == -1.0);
  CHECK(m.latch(std::span<const double>(fast)) == 0.5);
}

TEST_CASE("local rate at the rest position", "[wagon]") {
  WagonParams p;
  auto m = make_wagon(p);
  auto x_eq = wagon_equilibrium_x(p);
  REQUIRE(x_eq.has_value());
  State rest = {*x_eq, 0.0};
  auto lam = lambda_max(m, rest);
  // Underdamped: the pair is complex with real part -c / (2m).
  CHECK(lam.value == Catch::Approx(-0.5).margin(1e-9));
  CHECK_FALSE(lam.condition_warning);
}

TEST_CASE("critically damped spring flags its repeated rate", "[wagon]") {
  WagonParams p;
  p.stiffness = 0.25;
  p.magnetic_stiffness = 0.0;
  auto m = make_wagon(p);
  State rest = {0.0, 0.0};
  auto lam = lambda_max(m, rest);
  CHECK(lam.value == Catch::Approx(-0.5).margin(1e-6));
  CHECK(lam.condition_warning);
}

TEST_CASE("parameter validation", "[wagon]") {
  auto bad = WagonParams{};
  bad.mass = 0.0;
  CHECK_THROWS_AS(make_wagon(bad), ConfigError);
  bad = WagonParams{};
  bad.damping = -1.0;
  CHECK_THROWS_AS(make_wagon(bad), ConfigError);
  bad = WagonParams{};
  bad.magnet_position = 0.0;
  CHECK_THROWS_AS(wagon_equilibrium_x(bad), ConfigError);
}

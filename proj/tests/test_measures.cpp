#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <optional>
#include <vector>

#include "basin/measures.hpp"

using namespace basin;

namespace {

TrajectoryOutcome safe_at(State ic, double t) {
  TrajectoryOutcome o;
  o.initial_condition = std::move(ic);
  o.verdict = Verdict::Safe;
  o.return_time = t;
  o.terminal_state = o.initial_condition;
  return o;
}

TrajectoryOutcome unsafe_at(State ic) {
  TrajectoryOutcome o;
  o.initial_condition = std::move(ic);
  o.verdict = Verdict::Unsafe;
  o.terminal_state = o.initial_condition;
  return o;
}

TrajectoryOutcome undetermined_at(State ic) {
  TrajectoryOutcome o;
  o.initial_condition = std::move(ic);
  o.verdict = Verdict::Undetermined;
  o.terminal_state = o.initial_condition;
  return o;
}

DistanceSpec euclid_around_zero(std::size_t dim) {
  DistanceSpec spec;
  spec.reference = State(dim, 0.0);
  return spec;
}

// The worked four-outcome example: three returns (T = 0, 1, 4) and one
// non-return at distance 0.5.
std::vector<TrajectoryOutcome> worked_example() {
  return {safe_at({0.0}, 0.0), safe_at({0.1}, 1.0), safe_at({-0.2}, 4.0),
          unsafe_at({0.5})};
}

}  // namespace

TEST_CASE("return fraction with binomial error", "[measures]") {
  auto p = estimate_p(worked_example());
  CHECK(p.p_hat == 0.75);
  CHECK(p.std_err == Catch::Approx(std::sqrt(0.75 * 0.25 / 4.0))
                         .margin(1e-15));

  std::vector<TrajectoryOutcome> all_safe = {safe_at({0.0}, 1.0),
                                             safe_at({0.1}, 2.0)};
  CHECK(estimate_p(all_safe).p_hat == 1.0);
  CHECK(estimate_p(all_safe).std_err == 0.0);

  std::vector<TrajectoryOutcome> all_unsafe = {unsafe_at({1.0})};
  CHECK(estimate_p(all_unsafe).p_hat == 0.0);

  // Undetermined counts on the not-safe side.
  std::vector<TrajectoryOutcome> mixed = {safe_at({0.0}, 1.0),
                                          undetermined_at({1.0})};
  CHECK(estimate_p(mixed).p_hat == 0.5);

  CHECK_THROWS_AS(estimate_p({}), UsageError);
}

TEST_CASE("smallest dangerous perturbation", "[measures]") {
  auto spec = euclid_around_zero(1);

  std::vector<TrajectoryOutcome> all_safe = {safe_at({3.0}, 1.0)};
  CHECK_FALSE(estimate_d(all_safe, spec).has_value());

  std::vector<TrajectoryOutcome> outcomes = {
      unsafe_at({3.0}), unsafe_at({-1.5}), unsafe_at({7.0}),
      safe_at({0.1}, 1.0)};
  auto d = estimate_d(outcomes, spec);
  REQUIRE(d.has_value());
  CHECK(d->value == 1.5);
  CHECK(d->argmin == State{-1.5});

  // Undetermined outcomes are treated as dangerous too.
  outcomes.push_back(undetermined_at({0.5}));
  CHECK(estimate_d(outcomes, spec)->value == 0.5);
}

TEST_CASE("mean return rate", "[measures]") {
  CHECK(estimate_r(worked_example(), 1.0) ==
        Catch::Approx((1.0 + 0.5 + 0.2) / 4.0).margin(1e-15));

  std::vector<TrajectoryOutcome> two_instant = {safe_at({0.0}, 0.0),
                                                safe_at({0.1}, 0.0)};
  CHECK(estimate_r(two_instant, 1.0) == 1.0);

  std::vector<TrajectoryOutcome> pair = {safe_at({0.0}, 0.0),
                                         safe_at({0.1}, 1.0)};
  CHECK(estimate_r(pair, 1.0) == 0.75);

  std::vector<TrajectoryOutcome> with_loss = {safe_at({0.0}, 0.0),
                                              unsafe_at({1.0})};
  CHECK(estimate_r(with_loss, 1.0) == 0.5);

  CHECK_THROWS_AS(estimate_r(worked_example(), 0.0), ConfigError);
  CHECK_THROWS_AS(estimate_r({}, 1.0), UsageError);
}

TEST_CASE("rate standard error is the sample-mean error", "[measures]") {
  auto outcomes = worked_example();
  double rates[] = {1.0, 0.5, 0.2, 0.0};
  double mean = 0.425, ss = 0.0;
  for (double r : rates) ss += (r - mean) * (r - mean);
  double want = std::sqrt(ss / 3.0 / 4.0);
  CHECK(estimate_r_std_err(outcomes, 1.0) == Catch::Approx(want).margin(1e-15));
}

TEST_CASE("worst-case rate over the restricted set", "[measures]") {
  RestrictedSet set;
  set.center = {0.0};
  set.scale = {1.0};
  set.radius_sq = 0.25;  // keeps |x| <= 0.5

  // Members T = {1, 4} -> min of {1/2, 1/5}.
  std::vector<TrajectoryOutcome> outcomes = {
      safe_at({0.1}, 1.0), safe_at({-0.2}, 4.0), safe_at({3.0}, 50.0)};
  auto worst = estimate_r_worst(outcomes, set, 1.0);
  REQUIRE(worst.has_value());
  CHECK(*worst == Catch::Approx(0.2).margin(1e-15));

  // Any non-returning member forces zero.
  outcomes.push_back(unsafe_at({0.4}));
  CHECK(estimate_r_worst(outcomes, set, 1.0) == 0.0);

  // No member at all: absent.
  std::vector<TrajectoryOutcome> far = {safe_at({3.0}, 1.0)};
  CHECK_FALSE(estimate_r_worst(far, set, 1.0).has_value());

  // Membership includes the boundary (closed ellipsoid).
  std::vector<TrajectoryOutcome> boundary = {safe_at({0.5}, 3.0)};
  auto edge = estimate_r_worst(boundary, set, 1.0);
  REQUIRE(edge.has_value());
  CHECK(*edge == 0.25);
}

TEST_CASE("basin-time measures", "[measures]") {
  auto spec = euclid_around_zero(1);

  std::vector<TrajectoryOutcome> outcomes = {
      safe_at({0.2}, 1.0), safe_at({0.9}, 3.0), safe_at({1.5}, 9.0)};
  auto bt = estimate_basin_time(outcomes, 5.0, spec);
  CHECK(bt.p_tau == Catch::Approx(2.0 / 3.0).margin(1e-15));
  REQUIRE(bt.d_tau.has_value());
  CHECK(bt.d_tau->value == 1.5);  // the T=9 straggler

  // All within budget: certain, and no dangerous distance to report.
  auto quick = estimate_basin_time(outcomes, 10.0, spec);
  CHECK(quick.p_tau == 1.0);
  CHECK_FALSE(quick.d_tau.has_value());

  CHECK_THROWS_AS(estimate_basin_time(outcomes, 0.0, spec), ConfigError);
  CHECK_THROWS_AS(estimate_basin_time({}, 5.0, spec), UsageError);
}

TEST_CASE("basin-time distance in the relative norm", "[measures]") {
  DistanceSpec spec;
  spec.kind = DistanceKind::Relative;
  spec.reference = {1.0, 1.0, 1.0};
  spec.relative_scale = State{1.0, 1.0, 1.0};

  std::vector<TrajectoryOutcome> outcomes = {
      safe_at({1.5, 1.0, 1.0}, 9.0),   // tau-unsafe at 0.5
      safe_at({1.0, 1.8, 1.0}, 20.0),  // tau-unsafe at 0.8
      safe_at({1.1, 1.0, 1.0}, 1.0)};
  auto bt = estimate_basin_time(outcomes, 5.0, spec);
  REQUIRE(bt.d_tau.has_value());
  CHECK(bt.d_tau->value == Catch::Approx(0.5).margin(1e-15));
}

TEST_CASE("monotonicity in the time budget", "[measures]") {
  auto spec = euclid_around_zero(1);
  std::vector<TrajectoryOutcome> outcomes = {
      safe_at({0.3}, 0.5), safe_at({0.8}, 2.0),  safe_at({1.2}, 6.0),
      safe_at({2.5}, 14.0), unsafe_at({3.0}),
  };
  double prev_p = -1.0, prev_d = -1.0;
  for (double tau : {1.0, 3.0, 7.0, 20.0, 1e6}) {
    auto bt = estimate_basin_time(outcomes, tau, spec);
    CHECK(bt.p_tau >= prev_p);
    prev_p = bt.p_tau;
    if (bt.d_tau) {
      CHECK(bt.d_tau->value >= prev_d);
      prev_d = bt.d_tau->value;
    }
    // The time-limited set never beats the unconstrained one.
    CHECK(bt.p_tau <= estimate_p(outcomes).p_hat);
    if (auto d = estimate_d(outcomes, spec); d && bt.d_tau)
      CHECK(bt.d_tau->value <= d->value);
  }
  // tau -> infinity recovers the plain estimators exactly.
  auto bt = estimate_basin_time(outcomes, 1e6, spec);
  CHECK(bt.p_tau == estimate_p(outcomes).p_hat);
  CHECK(bt.d_tau->value == estimate_d(outcomes, spec)->value);
}

TEST_CASE("rate is bounded by the return fraction", "[measures]") {
  auto outcomes = worked_example();
  for (double t_eps : {0.5, 1.0, 2.0})
    CHECK(estimate_r(outcomes, t_eps) <=
          estimate_p(outcomes).p_hat / t_eps + 1e-15);
}

TEST_CASE("full report assembles every estimator once", "[measures]") {
  auto spec = euclid_around_zero(1);
  RestrictedSet set;
  set.center = {0.0};
  set.scale = {1.0};
  set.radius_sq = 0.25;

  auto outcomes = worked_example();
  auto rep = build_report(outcomes, spec, &set, 5.0, 1.0,
                          LambdaResult{-0.25, false}, 77);
  CHECK(rep.p_hat == 0.75);
  CHECK(rep.r_hat == Catch::Approx(0.425).margin(1e-15));
  REQUIRE(rep.d_hat.has_value());
  CHECK(*rep.d_hat == 0.5);
  CHECK(rep.p_tau == 0.75);
  REQUIRE(rep.d_tau.has_value());
  CHECK(*rep.d_tau == 0.5);
  REQUIRE(rep.r_worst.has_value());
  // Members: 0, 0.1, -0.2 (safe, rates 1, 0.5, 0.2) and 0.5 on the boundary
  // (unsafe) -> forced zero.
  CHECK(*rep.r_worst == 0.0);
  CHECK(rep.lambda == -0.25);
  CHECK(rep.n_safe == 3);
  CHECK(rep.n_unsafe == 1);
  CHECK(rep.n_undetermined == 0);
  CHECK(rep.n_tot == 4);
  CHECK(rep.seed == 77);
  CHECK(rep.tau == 5.0);
  CHECK(rep.t_eps == 1.0);

  // Counts always add up.
  CHECK(rep.n_safe + rep.n_unsafe + rep.n_undetermined == rep.n_tot);

  // Without a restricted set the worst-rate slot stays absent.
  auto rep2 = build_report(outcomes, spec, nullptr, 5.0, 1.0, std::nullopt, 1);
  CHECK_FALSE(rep2.r_worst.has_value());
  CHECK_FALSE(rep2.lambda.has_value());

  // Pure function: recomputation is bit-identical.
  auto rep3 = build_report(outcomes, spec, &set, 5.0, 1.0,
                           LambdaResult{-0.25, false}, 77);
  CHECK(rep3.p_hat == rep.p_hat);
  CHECK(rep3.r_hat == rep.r_hat);
  CHECK(rep3.d_hat == rep.d_hat);
  CHECK(rep3.r_worst == rep.r_worst);
  CHECK(rep3.p_tau == rep.p_tau);
  CHECK(rep3.d_tau == rep.d_tau);
}

#include "ehcoop/rates.hpp"

#include <cmath>
#include <random>

#include "doctest.h"

using namespace ehcoop;

namespace {

ScenarioParams fig1_point() {
  ScenarioParams p;
  p.p_out_ps_pd = 0.2;
  p.p_out_ps_ss = 0.1;
  p.p_out_ss_sd = 0.2;
  p.p_out_ss_pd = 0.1;
  p.lambda_p = 0.5;
  p.lambda_s = 0.1;
  p.lambda_e = 0.8;
  p.f = 1.0;
  p.beta = 1.0;
  return p;
}

}  // namespace

TEST_CASE("bound chain at a hand-evaluated operating point") {
  const RateBounds b = bound_rates(fig1_point());
  CHECK(b.mu_p.outer == doctest::Approx(0.98).epsilon(1e-14));
  CHECK(b.mu_e.inner == doctest::Approx(0.510204081632653).epsilon(1e-14));
  CHECK(b.mu_e.outer == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(b.mu_p.inner == doctest::Approx(0.944).epsilon(1e-14));
  CHECK(b.mu_s.outer == doctest::Approx(0.39183673469387764).epsilon(1e-13));
  CHECK(b.mu_s.inner == doctest::Approx(0.30101694915254246).epsilon(1e-13));
  CHECK(b.mu_ps.outer == doctest::Approx(0.44081632653061237).epsilon(1e-13));
  CHECK(b.mu_ps.inner == 0.0);  // beta = 1 starves the relay queue
  CHECK(b.lambda_ps.inner == doctest::Approx(0.07346938775510203).epsilon(1e-13));
  CHECK(b.lambda_ps.outer == doctest::Approx(0.09533898305084745).epsilon(1e-13));
}

TEST_CASE("cooperation disabled collapses the primary pair") {
  ScenarioParams p = fig1_point();
  p.f = 0.0;
  p.lambda_p = 0.4;
  const RateBounds b = bound_rates(p);
  CHECK(b.mu_p.inner == 0.8);
  CHECK(b.mu_p.outer == 0.8);
  CHECK(b.lambda_ps.inner == 0.0);
  CHECK(b.lambda_ps.outer == 0.0);
  CHECK(b.mu_e.inner == 0.0);
}

TEST_CASE("md1_unity at lambda_e = 1 coincides with the coupled model") {
  for (double lp : {0.0, 0.3, 0.7, 0.9}) {
    for (double f : {0.0, 0.4, 1.0}) {
      if (lp > 0.8 + f * 0.18) continue;  // primary queue not stabilizable
      ScenarioParams p = fig1_point();
      p.lambda_p = lp;
      p.lambda_e = 1.0;
      p.f = f;
      p.beta = 0.6;
      const RateBounds coupled = bound_rates(p);
      p.energy_model = EnergyModel::md1_unity;
      const RateBounds md1 = bound_rates(p);
      CHECK(md1.mu_p.inner == coupled.mu_p.inner);
      CHECK(md1.mu_p.outer == coupled.mu_p.outer);
      CHECK(md1.mu_s.inner == coupled.mu_s.inner);
      CHECK(md1.mu_s.outer == coupled.mu_s.outer);
      CHECK(md1.mu_ps.inner == coupled.mu_ps.inner);
      CHECK(md1.mu_ps.outer == coupled.mu_ps.outer);
      CHECK(md1.lambda_ps.inner == coupled.lambda_ps.inner);
      CHECK(md1.lambda_ps.outer == coupled.lambda_ps.outer);
      CHECK(md1.mu_e.inner == 1.0);
      CHECK(md1.mu_e.outer == 1.0);
    }
  }
}

TEST_CASE("md1_unity energy factors scale with lambda_e") {
  ScenarioParams p = fig1_point();
  p.energy_model = EnergyModel::md1_unity;
  const RateBounds b = bound_rates(p);
  // both occupancy factors are lambda_e = 0.8 under unit service
  CHECK(b.mu_p.inner == doctest::Approx(0.8 + 0.2 * 0.9 * 0.8).epsilon(1e-14));
  CHECK(b.mu_s.outer ==
        doctest::Approx(0.8 * (1.0 - 0.5 / 0.98) * 0.8).epsilon(1e-13));
}

TEST_CASE("primary overload is rejected") {
  ScenarioParams p = fig1_point();
  p.lambda_p = 0.99;
  CHECK_THROWS_AS(bound_rates(p), InfeasiblePrimaryError);
  p.lambda_p = 0.98;  // boundary itself is allowed
  CHECK_NOTHROW(bound_rates(p));
  p.f = 2.0;
  CHECK_THROWS_AS(bound_rates(p), std::invalid_argument);
}

TEST_CASE("bound ordering and range over random feasible parameters") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int tested = 0;
  while (tested < 20000) {
    ScenarioParams p;
    p.p_out_ps_pd = u(rng);
    p.p_out_ps_ss = u(rng);
    p.p_out_ss_sd = u(rng);
    p.p_out_ss_pd = u(rng);
    p.lambda_e = u(rng);
    p.f = u(rng);
    p.beta = u(rng);
    p.energy_model = u(rng) < 0.5 ? EnergyModel::coupled : EnergyModel::md1_unity;
    const double cap = 1.0 - p.p_out_ps_pd + p.f * p.p_out_ps_pd * (1.0 - p.p_out_ps_ss);
    p.lambda_p = u(rng) * std::min(cap, 1.0);
    const RateBounds b = bound_rates(p);
    ++tested;
    const Bound pairs[] = {b.mu_p, b.mu_s, b.mu_ps, b.mu_e, b.lambda_ps};
    for (const Bound& pr : pairs) {
      CHECK(pr.inner <= pr.outer + kFeasibilityTol);
      CHECK(pr.inner >= -kFeasibilityTol);
      CHECK(pr.outer <= 1.0 + kFeasibilityTol);
    }
    // outer primary rate ignores arrivals and beta; inner grows with energy
    ScenarioParams q = p;
    q.lambda_e = std::min(1.0, p.lambda_e + 0.1);
    CHECK(bound_rates(q).mu_p.inner >= b.mu_p.inner - kFeasibilityTol);
  }
}

TEST_CASE("exact rates reproduce the written expressions") {
  ScenarioParams p = fig1_point();
  OccupancyProbs occ;
  occ.e_nonempty = 1.0;
  // saturated energy queue makes mu_p exact: 0.8 + 0.2 * 0.9
  CHECK(exact_rates(p, occ).mu_p == doctest::Approx(0.98).epsilon(1e-14));

  p.f = 0.0;
  occ.pe_nonempty = 0.7;
  const ExactRates r0 = exact_rates(p, occ);
  CHECK(r0.mu_p == 0.8);
  CHECK(r0.lambda_ps == 0.0);

  const ExactRates zero = exact_rates(p, OccupancyProbs{});
  CHECK(zero.mu_s == 0.0);
  CHECK(zero.mu_ps == 0.0);
  CHECK(zero.mu_e == 0.0);

  OccupancyProbs bad;
  bad.p_nonempty = 1.5;
  CHECK_THROWS_AS(exact_rates(p, bad), std::invalid_argument);
}

TEST_CASE("exact rates at bound-extreme occupancies recover the bound table") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    ScenarioParams p;
    p.p_out_ps_pd = u(rng);
    p.p_out_ps_ss = u(rng);
    p.p_out_ss_sd = u(rng);
    p.p_out_ss_pd = u(rng);
    p.lambda_e = u(rng);
    p.f = u(rng);
    p.beta = u(rng);
    const double cap = 1.0 - p.p_out_ps_pd + p.f * p.p_out_ps_pd * (1.0 - p.p_out_ps_ss);
    p.lambda_p = u(rng) * std::min(cap, 1.0);
    const RateBounds b = bound_rates(p);
    if (p.lambda_p > b.mu_p.inner) continue;  // extremes below need a stable inner side

    const double busy_o = b.mu_p.outer > 0.0 ? p.lambda_p / b.mu_p.outer : 0.0;
    const double busy_i = b.mu_p.inner > 0.0 ? p.lambda_p / b.mu_p.inner : 0.0;
    const auto [e_low, e_high] =
        saturated_occupancy_bounds(p.lambda_e, b.mu_e.inner, b.mu_e.outer);

    OccupancyProbs occ;
    occ.e_nonempty = e_low;
    CHECK(exact_rates(p, occ).mu_p == doctest::Approx(b.mu_p.inner).epsilon(1e-12));
    occ.e_nonempty = 1.0;
    CHECK(exact_rates(p, occ).mu_p == doctest::Approx(b.mu_p.outer).epsilon(1e-12));

    occ = OccupancyProbs{};
    occ.pe_nonempty = busy_o * e_low;
    CHECK(exact_rates(p, occ).lambda_ps ==
          doctest::Approx(b.lambda_ps.inner).epsilon(1e-12));
    occ.pe_nonempty = busy_i * e_high;
    CHECK(exact_rates(p, occ).lambda_ps ==
          doctest::Approx(b.lambda_ps.outer).epsilon(1e-12));

    // inner service bounds: the other data queue is saturated by dummy
    // packets, the energy and idle factors sit at their low extremes
    occ = OccupancyProbs{};
    occ.idle_ps_e = (1.0 - busy_i) * e_low;
    CHECK(exact_rates(p, occ).mu_s == doctest::Approx(b.mu_s.inner).epsilon(1e-12));
    occ = OccupancyProbs{};
    occ.idle_s_e = (1.0 - busy_i) * e_low;
    CHECK(exact_rates(p, occ).mu_ps ==
          doctest::Approx(b.mu_ps.inner).epsilon(1e-12));

    // outer service bounds: every idle slot offered to the queue alone
    occ = OccupancyProbs{};
    occ.idle_ps0_e = (1.0 - busy_o) * e_high;
    CHECK(exact_rates(p, occ).mu_s == doctest::Approx(b.mu_s.outer).epsilon(1e-12));
    occ = OccupancyProbs{};
    occ.idle_s0_e = (1.0 - busy_o) * e_high;
    CHECK(exact_rates(p, occ).mu_ps ==
          doctest::Approx(b.mu_ps.outer).epsilon(1e-12));

    // energy bounds: busy share at its extremes, idle consumption all-or-none
    occ = OccupancyProbs{};
    occ.p_nonempty = busy_o;
    CHECK(exact_rates(p, occ).mu_e == doctest::Approx(b.mu_e.inner).epsilon(1e-12));
    occ.idle_s0_ps = 1.0 - busy_o;
    CHECK(exact_rates(p, occ).mu_e == doctest::Approx(b.mu_e.outer).epsilon(1e-12));
  }
}

TEST_CASE("occupancy bounds") {
  CHECK(occupancy_bounds(0.0, 0.5, 0.9) == std::pair{0.0, 0.0});
  const auto [lo, hi] = occupancy_bounds(0.5, 0.9, 0.98);
  CHECK(lo == doctest::Approx(0.5102040816326531).epsilon(1e-14));
  CHECK(hi == doctest::Approx(0.5555555555555556).epsilon(1e-14));
  // saturated upper side
  const auto [elo, ehi] = saturated_occupancy_bounds(0.8, 0.510204081632653, 1.0);
  CHECK(elo == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(ehi == 1.0);
  // zero service bound saturates, absorbing queue is never drained
  CHECK(saturated_occupancy_bounds(0.0, 0.0, 0.0) == std::pair{1.0, 1.0});

  CHECK_THROWS_AS(occupancy_bounds(0.5, 0.2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(occupancy_bounds(0.7, 0.2, 0.6), std::invalid_argument);
  CHECK_THROWS_AS(occupancy_bounds(0.5, 0.9, 0.8), std::invalid_argument);
}

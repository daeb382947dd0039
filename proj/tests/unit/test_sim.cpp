#include "ehcoop/sim.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"

using namespace ehcoop;

namespace {

ScenarioParams interior_point() {
  ScenarioParams p;
  p.p_out_ps_pd = 0.2;
  p.p_out_ps_ss = 0.1;
  p.p_out_ss_sd = 0.2;
  p.p_out_ss_pd = 0.1;
  p.lambda_p = 0.5;
  p.lambda_s = 0.1;
  p.lambda_e = 0.8;
  p.f = 1.0;
  p.beta = 0.8;
  return p;
}

bool within(double value, double target, double se, double k) {
  return std::fabs(value - target) <= k * se + 1e-12;
}

}  // namespace

TEST_CASE("step keeps the balance equation and never goes negative") {
  NetworkState st(123);
  ScenarioParams p = interior_point();
  for (int t = 0; t < 5000; ++t) {
    const NetworkState before = st;
    const StepEvent ev = step(st, p);
    CHECK(st.q_p == before.q_p - ev.dep_p + ev.arr_p);
    CHECK(st.q_s == before.q_s - ev.dep_s + ev.arr_s);
    CHECK(st.q_ps == before.q_ps - ev.dep_ps + ev.adm_ps);
    CHECK(st.q_e == before.q_e - ev.energy_used + ev.arr_e);
    CHECK(ev.busy_p == (before.q_p > 0));
    if (ev.dep_p) CHECK(before.q_p > 0);
    if (ev.energy_used) CHECK(before.q_e > 0);
    if (ev.dep_s || ev.dep_ps) CHECK(before.q_p == 0);
    // collision-free: at most one data packet moved per slot
    CHECK(int(ev.dep_p) + int(ev.dep_s) + int(ev.dep_ps) <= 1);
  }
  CHECK(st.slot_index == 5000);
}

TEST_CASE("deterministic relaying path") {
  // direct link always fails, decoding never does: every primary packet
  // hops through the relay queue and costs one energy packet
  ScenarioParams p;
  p.p_out_ps_pd = 1.0;
  p.p_out_ps_ss = 0.0;
  p.p_out_ss_sd = 0.0;
  p.p_out_ss_pd = 0.0;
  p.lambda_p = 1.0;
  p.lambda_s = 0.0;
  p.lambda_e = 1.0;
  p.f = 1.0;
  p.beta = 1.0;
  RunConfig cfg;
  cfg.horizon = 2000;
  cfg.burn_in = 0;
  cfg.seed = 9;
  cfg.trace_slots = 3;
  std::vector<TraceRecord> trace;
  const SimReport rep = run(p, cfg, &trace);

  CHECK(rep.counts.dep_p == rep.counts.adm_ps);
  CHECK(rep.counts.secondary_tx == 0);  // the primary never leaves the air
  CHECK(rep.counts.energy_used == rep.counts.decode_attempts);
  CHECK(rep.occupancy.pe_nonempty == rep.occupancy.p_nonempty);

  REQUIRE(trace.size() == 3);
  CHECK(trace[0].q_p == 0);
  CHECK(trace[0].action == SlotAction::none);
  CHECK(trace[1].q_p == 1);
  CHECK(trace[1].q_e == 1);
  CHECK(trace[1].action == SlotAction::primary_decode);
  CHECK(trace[1].outcome == SlotOutcome::relayed);
}

TEST_CASE("identical seeds reproduce the report bit for bit") {
  RunConfig cfg;
  cfg.horizon = 30000;
  cfg.burn_in = 2000;
  cfg.seed = 777;
  const SimReport a = run(interior_point(), cfg);
  const SimReport b = run(interior_point(), cfg);
  CHECK(a.mu_p.value == b.mu_p.value);
  CHECK(a.mu_s.se == b.mu_s.se);
  CHECK(a.counts.dep_p == b.counts.dep_p);
  CHECK(a.counts.energy_used == b.counts.energy_used);
  CHECK(a.mean_len_ps == b.mean_len_ps);
  cfg.seed = 778;
  const SimReport c2 = run(interior_point(), cfg);
  CHECK(a.counts.dep_p != c2.counts.dep_p);
}

TEST_CASE("energy conservation across modes") {
  RunConfig cfg;
  cfg.horizon = 50000;
  cfg.burn_in = 0;
  cfg.seed = 4;
  for (bool dummy : {false, true}) {
    cfg.dummy_packets = dummy;
    const SimReport rep = run(interior_point(), cfg);
    CHECK(rep.counts.energy_used == rep.counts.decode_attempts +
                                        rep.counts.secondary_tx +
                                        rep.counts.dummy_tx);
    CHECK(rep.counts.adm_ps == rep.counts.coop_dep_p);
    if (!dummy) CHECK(rep.counts.dummy_tx == 0);
  }
}

TEST_CASE("isolated primary behaves like a single discrete-time queue") {
  ScenarioParams p = interior_point();
  p.f = 0.0;
  p.lambda_p = 0.4;
  p.lambda_s = 0.0;
  RunConfig cfg;
  cfg.horizon = 400000;
  cfg.burn_in = 40000;
  cfg.seed = 21;
  const SimReport rep = run(p, cfg);
  CHECK(rep.verdict_p == Verdict::stable);
  CHECK(within(rep.mu_p.value, 0.8, rep.mu_p.se, 3.0));
  CHECK(within(rep.occ_p.value, 0.5, rep.occ_p.se, 3.0));
  CHECK(rep.mu_e.value == 0.0);  // nothing ever spends energy
  CHECK(rep.counts.decode_attempts == 0);
}

TEST_CASE("saturated energy arrivals pin the battery occupancy") {
  ScenarioParams p = interior_point();
  p.lambda_e = 1.0;
  RunConfig cfg;
  cfg.horizon = 20000;
  cfg.burn_in = 1000;
  cfg.seed = 5;
  const SimReport rep = run(p, cfg);
  CHECK(rep.occ_e.value == 1.0);
  CHECK(within(rep.mu_p.value, 0.98, rep.mu_p.se, 3.5));
}

TEST_CASE("md1_unity drains one energy packet per busy slot") {
  ScenarioParams p = interior_point();
  p.energy_model = EnergyModel::md1_unity;
  RunConfig cfg;
  cfg.horizon = 30000;
  cfg.burn_in = 1000;
  cfg.seed = 13;
  const SimReport rep = run(p, cfg);
  CHECK(rep.mu_e.value == 1.0);
  CHECK(rep.counts.energy_used == rep.counts.busy_e);
  // battery occupancy settles near its arrival rate under unit service
  CHECK(within(rep.occ_e.value, p.lambda_e, rep.occ_e.se, 4.0));
}

TEST_CASE("slot estimators match the closed-form rate expressions") {
  const ScenarioParams p = interior_point();
  RunConfig cfg;
  cfg.horizon = 500000;
  cfg.burn_in = 50000;
  cfg.seed = 31;
  const SimReport rep = run(p, cfg);
  const SimCounts& c = rep.counts;
  const auto ratio = [](std::uint64_t a, std::uint64_t b) {
    return b > 0 ? double(a) / double(b) : 0.0;
  };

  // per-busy-slot primary service, with the battery seen from Q_p's side
  OccupancyProbs occ;
  occ.e_nonempty = ratio(c.ev_pe, c.busy_p);
  occ.pe_nonempty = rep.occupancy.pe_nonempty;
  const ExactRates ex = exact_rates(p, occ);
  CHECK(within(rep.mu_p.value, ex.mu_p, rep.mu_p.se, 5.0));
  CHECK(within(rep.lambda_ps.value, ex.lambda_ps, rep.lambda_ps.se, 5.0));

  OccupancyProbs occ_s;
  occ_s.idle_ps0_e = ratio(c.ev_s_busy_idle_ps0_e, c.busy_s);
  occ_s.idle_ps_e = ratio(c.ev_s_busy_idle_ps_e, c.busy_s);
  CHECK(within(rep.mu_s.value, exact_rates(p, occ_s).mu_s, rep.mu_s.se, 5.0));

  OccupancyProbs occ_ps;
  occ_ps.idle_s0_e = ratio(c.ev_ps_busy_idle_s0_e, c.busy_ps);
  occ_ps.idle_s_e = ratio(c.ev_ps_busy_idle_s_e, c.busy_ps);
  CHECK(within(rep.mu_ps.value, exact_rates(p, occ_ps).mu_ps, rep.mu_ps.se, 5.0));

  const double mu_e_pred =
      (p.f * double(c.ev_pe) + double(c.ev_idle_data_e)) / double(c.busy_e);
  CHECK(within(rep.mu_e.value, mu_e_pred, rep.mu_e.se, 5.0));
}

TEST_CASE("stability detector separates load regimes") {
  ScenarioParams p = interior_point();
  RunConfig cfg;
  cfg.seed = 57;

  p.lambda_s = 0.5;  // far above any achievable secondary service
  cfg.horizon = 200000;
  cfg.burn_in = 0;
  const SimReport hot = run(p, cfg);
  CHECK(hot.verdict_s == Verdict::unstable);

  p.lambda_s = 0.1;
  cfg.horizon = 400000;
  cfg.burn_in = 40000;
  const SimReport cool = run(p, cfg);
  CHECK(cool.verdict_p == Verdict::stable);
  CHECK(cool.verdict_s == Verdict::stable);
  CHECK(cool.verdict_ps == Verdict::stable);

  const RateBounds b = bound_rates(p);
  const RateCheckReport rc = empirical_rate_check(cool, b);
  CHECK(rc.data_queues_stable);
  CHECK(rc.all_within());
  CHECK(empirical_rate_check(hot, b).data_queues_stable == false);
}

TEST_CASE("dummy mode saturates free slots") {
  ScenarioParams p = interior_point();
  p.lambda_s = 0.0;
  p.lambda_p = 0.2;
  RunConfig cfg;
  cfg.horizon = 50000;
  cfg.burn_in = 0;
  cfg.seed = 8;
  cfg.dummy_packets = true;
  const SimReport rep = run(p, cfg);
  CHECK(rep.counts.dummy_tx > 0);
  // with padding, every primary-idle slot with energy costs a packet
  CHECK(rep.counts.energy_used ==
        rep.counts.decode_attempts + rep.counts.secondary_tx +
            rep.counts.dummy_tx);
}

TEST_CASE("merged replications pool counts and keep verdicts conservative") {
  const ScenarioParams p = interior_point();
  RunConfig cfg;
  cfg.horizon = 60000;
  cfg.burn_in = 6000;
  std::vector<SimReport> reps;
  for (std::uint64_t s : {1ull, 2ull, 3ull}) {
    cfg.seed = s;
    reps.push_back(run(p, cfg));
  }
  const SimReport merged = merge_reports(reps);
  CHECK(merged.counts.dep_p ==
        reps[0].counts.dep_p + reps[1].counts.dep_p + reps[2].counts.dep_p);
  CHECK(merged.slots_run == 180000);
  CHECK(merged.mu_p.value ==
        doctest::Approx(double(merged.counts.dep_p) / double(merged.counts.busy_p))
            .epsilon(1e-14));
  CHECK(merged.mu_p.se < reps[0].mu_p.se);
  CHECK(merged.verdict_p == Verdict::stable);
}

TEST_CASE("run rejects a degenerate horizon") {
  RunConfig cfg;
  cfg.horizon = 100;
  cfg.burn_in = 100;
  CHECK_THROWS_AS(run(interior_point(), cfg), std::invalid_argument);
}

#pragma once

#include <cstdint>
#include <vector>

#include "ehcoop/random.hpp"
#include "ehcoop/rates.hpp"

namespace ehcoop {

// Four queues plus six decoupled randomness sources: one per arrival
// process, one decision stream (decode coin and own-vs-relay selection),
// and two channel streams (the transmitted packet's link, and the
// primary-to-SU decode link). Streams are seeded from one master seed,
// so a (seed, params) pair fully determines the trace.
struct NetworkState {
  std::uint64_t q_p = 0;
  std::uint64_t q_s = 0;
  std::uint64_t q_ps = 0;
  std::uint64_t q_e = 0;
  std::uint64_t slot_index = 0;
  RandomStream arrival_p;
  RandomStream arrival_s;
  RandomStream arrival_e;
  RandomStream decision;
  RandomStream channel_a;
  RandomStream channel_b;

  explicit NetworkState(std::uint64_t seed);
};

enum class SlotAction : std::uint8_t {
  none,            // nobody transmitted
  primary,         // primary transmitted, SU idle
  primary_decode,  // primary transmitted, SU spent energy on decoding
  own,             // SU sent an own-data packet
  relay,           // SU sent a relayed packet
  dummy,           // SU sent a dummy packet (dominant-system mode)
};

enum class SlotOutcome : std::uint8_t {
  none,       // no transmission
  delivered,  // transmitted packet left its queue
  failed,     // transmission lost to outage
  relayed,    // primary packet handed over to the relaying queue
};

// What happened in one slot; occupancy flags are sampled at slot start,
// before departures.
struct StepEvent {
  bool busy_p = false;
  bool busy_s = false;
  bool busy_ps = false;
  bool busy_e = false;
  bool dep_p = false;
  bool dep_s = false;
  bool dep_ps = false;
  bool adm_ps = false;       // primary packet admitted to the relay queue
  bool energy_used = false;
  bool decode_attempt = false;
  bool arr_p = false;
  bool arr_s = false;
  bool arr_e = false;
  SlotAction action = SlotAction::none;
  SlotOutcome outcome = SlotOutcome::none;
};

// Advances one slot: departures resolve before arrivals, queue contents
// are measured at slot start. dummy_packets makes the SU transmit in
// every free slot with energy, substituting dummies for empty queues
// (used to validate the inner-bound construction).
StepEvent step(NetworkState& state, const ScenarioParams& params,
               bool dummy_packets = false);

// Raw slot tallies over the measurement window.
struct SimCounts {
  std::uint64_t slots = 0;
  std::uint64_t busy_p = 0, busy_s = 0, busy_ps = 0, busy_e = 0;
  std::uint64_t dep_p = 0, dep_s = 0, dep_ps = 0;
  std::uint64_t adm_ps = 0;
  std::uint64_t coop_dep_p = 0;  // primary departures via the decode path
  std::uint64_t decode_attempts = 0;
  std::uint64_t secondary_tx = 0;
  std::uint64_t dummy_tx = 0;
  std::uint64_t energy_used = 0;
  std::uint64_t arr_p = 0, arr_s = 0, arr_e = 0;
  // joint occupancy events of the exact rate expressions
  std::uint64_t ev_pe = 0;
  std::uint64_t ev_idle_s0_e = 0, ev_idle_s_e = 0;
  std::uint64_t ev_idle_ps0_e = 0, ev_idle_ps_e = 0;
  std::uint64_t ev_idle_s0_ps = 0, ev_idle_s_ps0 = 0, ev_idle_s_ps = 0;
  std::uint64_t ev_idle_data_e = 0;
  // service events conditioned on the serving queue being nonempty
  std::uint64_t ev_s_busy_idle_ps0_e = 0, ev_s_busy_idle_ps_e = 0;
  std::uint64_t ev_ps_busy_idle_s0_e = 0, ev_ps_busy_idle_s_e = 0;
};

enum class Verdict : std::uint8_t { stable, unstable, inconclusive };

struct RateEstimate {
  double value = 0.0;
  double se = 0.0;            // batch-means standard error
  std::uint64_t trials = 0;   // denominator slot count
};

struct SimReport {
  RateEstimate mu_p, mu_s, mu_ps, mu_e, lambda_ps;
  RateEstimate occ_p, occ_s, occ_ps, occ_e;
  OccupancyProbs occupancy;  // unconditional event frequencies
  double idle_data_e = 0.0;  // Pr{Q_p = 0, Q_e != 0, some data queued}
  double mean_len_p = 0.0, mean_len_s = 0.0, mean_len_ps = 0.0,
         mean_len_e = 0.0;
  Verdict verdict_p = Verdict::inconclusive;
  Verdict verdict_s = Verdict::inconclusive;
  Verdict verdict_ps = Verdict::inconclusive;
  Verdict verdict_e = Verdict::inconclusive;
  std::uint64_t slots_run = 0;
  std::uint64_t burn_in = 0;
  std::uint64_t seed = 0;
  SimCounts counts;
};

struct TraceRecord {
  std::uint64_t slot = 0;
  std::uint64_t q_p = 0, q_s = 0, q_ps = 0, q_e = 0;
  SlotAction action = SlotAction::none;
  SlotOutcome outcome = SlotOutcome::none;
};

struct RunConfig {
  std::uint64_t horizon = 1'000'000;
  std::uint64_t burn_in = 100'000;
  std::uint64_t seed = 1;
  bool dummy_packets = false;
  std::uint64_t trace_slots = 0;  // leading slots copied into the trace
};

// Steps the chain from empty queues, discards the burn-in, estimates
// rates and occupancies over the rest, and classifies each queue's
// growth. Identical (params, cfg) reproduce the report bit for bit.
SimReport run(const ScenarioParams& params, const RunConfig& cfg,
              std::vector<TraceRecord>* trace = nullptr);

// Weighted combination of independent replications of one scenario.
SimReport merge_reports(const std::vector<SimReport>& reports);

enum class RateCheck : std::uint8_t { within, below_inner, above_outer };

struct RateCheckReport {
  RateCheck mu_p = RateCheck::within;
  RateCheck mu_s = RateCheck::within;
  RateCheck mu_ps = RateCheck::within;
  RateCheck mu_e = RateCheck::within;
  RateCheck lambda_ps = RateCheck::within;
  bool data_queues_stable = true;  // service estimates are biased if not

  bool all_within() const {
    return mu_p == RateCheck::within && mu_s == RateCheck::within &&
           mu_ps == RateCheck::within && mu_e == RateCheck::within &&
           lambda_ps == RateCheck::within;
  }
};

// Compares each empirical rate against its bound pair with a three
// standard error margin. Rates that never had a trial pass vacuously.
RateCheckReport empirical_rate_check(const SimReport& report,
                                     const RateBounds& bounds);

}  // namespace ehcoop

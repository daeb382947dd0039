#include "ehcoop/sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace ehcoop {

NetworkState::NetworkState(std::uint64_t seed)
    : arrival_p(derive_seed(seed, 0)),
      arrival_s(derive_seed(seed, 1)),
      arrival_e(derive_seed(seed, 2)),
      decision(derive_seed(seed, 3)),
      channel_a(derive_seed(seed, 4)),
      channel_b(derive_seed(seed, 5)) {}

StepEvent step(NetworkState& st, const ScenarioParams& params,
               bool dummy_packets) {
  StepEvent ev;
  ev.busy_p = st.q_p > 0;
  ev.busy_s = st.q_s > 0;
  ev.busy_ps = st.q_ps > 0;
  ev.busy_e = st.q_e > 0;

  bool consumed = false;
  if (ev.busy_p) {
    // Primary transmits; the destination and the SU listen on independent
    // channels, and the SU's decode attempt does not wait for the ACK.
    const bool direct_ok = st.channel_a.bernoulli(1.0 - params.p_out_ps_pd);
    bool decoded = false;
    if (ev.busy_e && st.decision.bernoulli(params.f)) {
      ev.decode_attempt = true;
      consumed = true;
      decoded = st.channel_b.bernoulli(1.0 - params.p_out_ps_ss);
    }
    ev.action =
        ev.decode_attempt ? SlotAction::primary_decode : SlotAction::primary;
    if (direct_ok) {
      // destination ACK wins; the packet never enters the relay queue
      ev.dep_p = true;
      ev.outcome = SlotOutcome::delivered;
    } else if (decoded) {
      ev.dep_p = true;
      ev.adm_ps = true;
      ev.outcome = SlotOutcome::relayed;
    } else {
      ev.outcome = SlotOutcome::failed;
    }
  } else if (ev.busy_e) {
    // Sensing is perfect, so the SU sees the free slot.
    bool transmit = false;
    bool pick_own = false;
    if (dummy_packets) {
      transmit = true;
      pick_own = st.decision.bernoulli(params.beta);
    } else if (ev.busy_s && ev.busy_ps) {
      transmit = true;
      pick_own = st.decision.bernoulli(params.beta);
    } else if (ev.busy_s || ev.busy_ps) {
      transmit = true;
      pick_own = ev.busy_s;
    }
    if (transmit) {
      consumed = true;
      const bool real = pick_own ? ev.busy_s : ev.busy_ps;
      const double p_out = pick_own ? params.p_out_ss_sd : params.p_out_ss_pd;
      const bool ok = st.channel_a.bernoulli(1.0 - p_out);
      if (!real) {
        ev.action = SlotAction::dummy;
      } else if (pick_own) {
        ev.action = SlotAction::own;
        ev.dep_s = ok;
        ev.outcome = ok ? SlotOutcome::delivered : SlotOutcome::failed;
      } else {
        ev.action = SlotAction::relay;
        ev.dep_ps = ok;
        ev.outcome = ok ? SlotOutcome::delivered : SlotOutcome::failed;
      }
    }
  }

  if (params.energy_model == EnergyModel::md1_unity) {
    // decoupled battery: one packet drains every slot it is nonempty
    ev.energy_used = ev.busy_e;
  } else {
    ev.energy_used = consumed;
  }

  ev.arr_p = st.arrival_p.bernoulli(params.lambda_p);
  ev.arr_s = st.arrival_s.bernoulli(params.lambda_s);
  ev.arr_e = st.arrival_e.bernoulli(params.lambda_e);

  if (ev.dep_p) --st.q_p;
  if (ev.arr_p) ++st.q_p;
  if (ev.dep_s) --st.q_s;
  if (ev.arr_s) ++st.q_s;
  if (ev.dep_ps) --st.q_ps;
  if (ev.adm_ps) ++st.q_ps;
  if (ev.energy_used) --st.q_e;
  if (ev.arr_e) ++st.q_e;
  ++st.slot_index;
  return ev;
}

namespace {

constexpr int kBatches = 50;
constexpr int kWindows = 10;

struct BatchTally {
  std::uint64_t slots = 0;
  std::uint64_t busy_p = 0, dep_p = 0;
  std::uint64_t busy_s = 0, dep_s = 0;
  std::uint64_t busy_ps = 0, dep_ps = 0;
  std::uint64_t busy_e = 0, energy = 0;
  std::uint64_t adm = 0;
};

// Ratio estimate num/den with a batch-means standard error. Batches with
// an empty denominator carry no information and are skipped.
RateEstimate ratio_estimate(std::uint64_t num, std::uint64_t den,
                            const std::array<BatchTally, kBatches>& batches,
                            std::uint64_t BatchTally::* bnum,
                            std::uint64_t BatchTally::* bden) {
  RateEstimate est;
  est.trials = den;
  est.value = den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
  double sum = 0.0, sum2 = 0.0;
  int n = 0;
  for (const BatchTally& b : batches) {
    const std::uint64_t d = b.*bden;
    if (d == 0) continue;
    const double r = static_cast<double>(b.*bnum) / static_cast<double>(d);
    sum += r;
    sum2 += r * r;
    ++n;
  }
  if (n >= 2) {
    const double mean = sum / n;
    const double var = std::max(0.0, (sum2 - n * mean * mean) / (n - 1));
    est.se = std::sqrt(var / n);
  }
  return est;
}

Verdict classify_growth(const std::array<double, kWindows>& mean) {
  double ybar = 0.0;
  for (double m : mean) ybar += m;
  ybar /= kWindows;
  double sxy = 0.0, sxx = 0.0;
  for (int x = 0; x < kWindows; ++x) {
    const double dx = x - (kWindows - 1) / 2.0;
    sxx += dx * dx;
    sxy += dx * (mean[x] - ybar);
  }
  const double slope = sxy / sxx;
  double rss = 0.0;
  for (int x = 0; x < kWindows; ++x) {
    const double dx = x - (kWindows - 1) / 2.0;
    const double resid = mean[x] - ybar - slope * dx;
    rss += resid * resid;
  }
  const double se = std::sqrt(rss / (kWindows - 2) / sxx);
  const double t = se > 0.0 ? slope / se : (slope > 0.0 ? 1e12 : 0.0);
  const bool growing = slope > 0.0 && t > 3.0;
  if (!growing) return Verdict::stable;
  // a genuine divergence has to dwarf the first window, not just wiggle
  if (mean[kWindows - 1] > 10.0 * mean[0] && mean[kWindows - 1] > 1.0) {
    return Verdict::unstable;
  }
  return Verdict::inconclusive;
}

RateCheck check_rate(const RateEstimate& est, const Bound& bound) {
  if (est.trials == 0) return RateCheck::within;
  if (est.value < bound.inner - 3.0 * est.se) return RateCheck::below_inner;
  if (est.value > bound.outer + 3.0 * est.se) return RateCheck::above_outer;
  return RateCheck::within;
}

}  // namespace

SimReport run(const ScenarioParams& params, const RunConfig& cfg,
              std::vector<TraceRecord>* trace) {
  params.validate();
  if (cfg.horizon == 0 || cfg.burn_in >= cfg.horizon) {
    throw std::invalid_argument("run: need horizon > burn_in >= 0");
  }
  NetworkState st(cfg.seed);
  const std::uint64_t span = cfg.horizon - cfg.burn_in;

  std::array<BatchTally, kBatches> batches{};
  std::array<std::array<std::uint64_t, kWindows>, 4> win_sum{};
  std::array<std::uint64_t, kWindows> win_slots{};
  std::array<std::uint64_t, 4> len_sum{};
  SimCounts c;

  for (std::uint64_t t = 0; t < cfg.horizon; ++t) {
    if (t >= cfg.burn_in) {
      const std::uint64_t m = t - cfg.burn_in;
      const auto w = static_cast<std::size_t>(m * kWindows / span);
      win_sum[0][w] += st.q_p;
      win_sum[1][w] += st.q_s;
      win_sum[2][w] += st.q_ps;
      win_sum[3][w] += st.q_e;
      ++win_slots[w];
      len_sum[0] += st.q_p;
      len_sum[1] += st.q_s;
      len_sum[2] += st.q_ps;
      len_sum[3] += st.q_e;
    }
    const bool traced = trace != nullptr && t < cfg.trace_slots;
    if (traced) {
      trace->push_back({t, st.q_p, st.q_s, st.q_ps, st.q_e, SlotAction::none,
                        SlotOutcome::none});
    }
    const StepEvent ev = step(st, params, cfg.dummy_packets);
    if (traced) {
      trace->back().action = ev.action;
      trace->back().outcome = ev.outcome;
    }
    if (t < cfg.burn_in) continue;

    const std::uint64_t m = t - cfg.burn_in;
    BatchTally& b = batches[static_cast<std::size_t>(m * kBatches / span)];
    ++b.slots;
    ++c.slots;
    b.busy_p += ev.busy_p;
    b.dep_p += ev.dep_p;
    b.busy_s += ev.busy_s;
    b.dep_s += ev.dep_s;
    b.busy_ps += ev.busy_ps;
    b.dep_ps += ev.dep_ps;
    b.busy_e += ev.busy_e;
    b.energy += ev.energy_used;
    b.adm += ev.adm_ps;

    c.busy_p += ev.busy_p;
    c.busy_s += ev.busy_s;
    c.busy_ps += ev.busy_ps;
    c.busy_e += ev.busy_e;
    c.dep_p += ev.dep_p;
    c.dep_s += ev.dep_s;
    c.dep_ps += ev.dep_ps;
    c.adm_ps += ev.adm_ps;
    c.coop_dep_p += ev.adm_ps;
    c.decode_attempts += ev.decode_attempt;
    c.secondary_tx +=
        ev.action == SlotAction::own || ev.action == SlotAction::relay;
    c.dummy_tx += ev.action == SlotAction::dummy;
    c.energy_used += ev.energy_used;
    c.arr_p += ev.arr_p;
    c.arr_s += ev.arr_s;
    c.arr_e += ev.arr_e;

    c.ev_pe += ev.busy_p && ev.busy_e;
    if (!ev.busy_p) {
      if (ev.busy_e) {
        ++(ev.busy_s ? c.ev_idle_s_e : c.ev_idle_s0_e);
        ++(ev.busy_ps ? c.ev_idle_ps_e : c.ev_idle_ps0_e);
        if (ev.busy_s || ev.busy_ps) ++c.ev_idle_data_e;
        if (ev.busy_s) {
          ++(ev.busy_ps ? c.ev_s_busy_idle_ps_e : c.ev_s_busy_idle_ps0_e);
        }
        if (ev.busy_ps) {
          ++(ev.busy_s ? c.ev_ps_busy_idle_s_e : c.ev_ps_busy_idle_s0_e);
        }
      }
      if (ev.busy_s && ev.busy_ps) {
        ++c.ev_idle_s_ps;
      } else if (ev.busy_s) {
        ++c.ev_idle_s_ps0;
      } else if (ev.busy_ps) {
        ++c.ev_idle_s0_ps;
      }
    }
  }

  SimReport rep;
  rep.seed = cfg.seed;
  rep.slots_run = cfg.horizon;
  rep.burn_in = cfg.burn_in;
  rep.counts = c;

  rep.mu_p = ratio_estimate(c.dep_p, c.busy_p, batches, &BatchTally::dep_p,
                            &BatchTally::busy_p);
  rep.mu_s = ratio_estimate(c.dep_s, c.busy_s, batches, &BatchTally::dep_s,
                            &BatchTally::busy_s);
  rep.mu_ps = ratio_estimate(c.dep_ps, c.busy_ps, batches, &BatchTally::dep_ps,
                             &BatchTally::busy_ps);
  rep.mu_e = ratio_estimate(c.energy_used, c.busy_e, batches,
                            &BatchTally::energy, &BatchTally::busy_e);
  rep.lambda_ps = ratio_estimate(c.adm_ps, c.slots, batches, &BatchTally::adm,
                                 &BatchTally::slots);
  rep.occ_p = ratio_estimate(c.busy_p, c.slots, batches, &BatchTally::busy_p,
                             &BatchTally::slots);
  rep.occ_s = ratio_estimate(c.busy_s, c.slots, batches, &BatchTally::busy_s,
                             &BatchTally::slots);
  rep.occ_ps = ratio_estimate(c.busy_ps, c.slots, batches, &BatchTally::busy_ps,
                              &BatchTally::slots);
  rep.occ_e = ratio_estimate(c.busy_e, c.slots, batches, &BatchTally::busy_e,
                             &BatchTally::slots);

  const auto frac = [&](std::uint64_t n) {
    return static_cast<double>(n) / static_cast<double>(c.slots);
  };
  rep.occupancy.p_nonempty = frac(c.busy_p);
  rep.occupancy.e_nonempty = frac(c.busy_e);
  rep.occupancy.pe_nonempty = frac(c.ev_pe);
  rep.occupancy.idle_s0_e = frac(c.ev_idle_s0_e);
  rep.occupancy.idle_s_e = frac(c.ev_idle_s_e);
  rep.occupancy.idle_ps0_e = frac(c.ev_idle_ps0_e);
  rep.occupancy.idle_ps_e = frac(c.ev_idle_ps_e);
  rep.occupancy.idle_s0_ps = frac(c.ev_idle_s0_ps);
  rep.occupancy.idle_s_ps0 = frac(c.ev_idle_s_ps0);
  rep.occupancy.idle_s_ps = frac(c.ev_idle_s_ps);
  rep.idle_data_e = frac(c.ev_idle_data_e);

  rep.mean_len_p = static_cast<double>(len_sum[0]) / static_cast<double>(span);
  rep.mean_len_s = static_cast<double>(len_sum[1]) / static_cast<double>(span);
  rep.mean_len_ps = static_cast<double>(len_sum[2]) / static_cast<double>(span);
  rep.mean_len_e = static_cast<double>(len_sum[3]) / static_cast<double>(span);

  const auto window_means = [&](int q) {
    std::array<double, kWindows> m{};
    for (int w = 0; w < kWindows; ++w) {
      m[w] = win_slots[w] > 0 ? static_cast<double>(win_sum[q][w]) /
                                    static_cast<double>(win_slots[w])
                              : 0.0;
    }
    return m;
  };
  rep.verdict_p = classify_growth(window_means(0));
  rep.verdict_s = classify_growth(window_means(1));
  rep.verdict_ps = classify_growth(window_means(2));
  rep.verdict_e = classify_growth(window_means(3));
  return rep;
}

SimReport merge_reports(const std::vector<SimReport>& reports) {
  if (reports.empty()) {
    throw std::invalid_argument("merge_reports: nothing to merge");
  }
  if (reports.size() == 1) return reports.front();

  SimReport out;
  out.seed = reports.front().seed;
  out.burn_in = reports.front().burn_in;
  SimCounts& c = out.counts;
  for (const SimReport& r : reports) {
    out.slots_run += r.slots_run;
    const SimCounts& rc = r.counts;
    c.slots += rc.slots;
    c.busy_p += rc.busy_p;
    c.busy_s += rc.busy_s;
    c.busy_ps += rc.busy_ps;
    c.busy_e += rc.busy_e;
    c.dep_p += rc.dep_p;
    c.dep_s += rc.dep_s;
    c.dep_ps += rc.dep_ps;
    c.adm_ps += rc.adm_ps;
    c.coop_dep_p += rc.coop_dep_p;
    c.decode_attempts += rc.decode_attempts;
    c.secondary_tx += rc.secondary_tx;
    c.dummy_tx += rc.dummy_tx;
    c.energy_used += rc.energy_used;
    c.arr_p += rc.arr_p;
    c.arr_s += rc.arr_s;
    c.arr_e += rc.arr_e;
    c.ev_pe += rc.ev_pe;
    c.ev_idle_s0_e += rc.ev_idle_s0_e;
    c.ev_idle_s_e += rc.ev_idle_s_e;
    c.ev_idle_ps0_e += rc.ev_idle_ps0_e;
    c.ev_idle_ps_e += rc.ev_idle_ps_e;
    c.ev_idle_s0_ps += rc.ev_idle_s0_ps;
    c.ev_idle_s_ps0 += rc.ev_idle_s_ps0;
    c.ev_idle_s_ps += rc.ev_idle_s_ps;
    c.ev_idle_data_e += rc.ev_idle_data_e;
    c.ev_s_busy_idle_ps0_e += rc.ev_s_busy_idle_ps0_e;
    c.ev_s_busy_idle_ps_e += rc.ev_s_busy_idle_ps_e;
    c.ev_ps_busy_idle_s0_e += rc.ev_ps_busy_idle_s0_e;
    c.ev_ps_busy_idle_s_e += rc.ev_ps_busy_idle_s_e;
  }

  // Combined ratio estimate: pooled value, SEs composed by denominator
  // weight across independent replications.
  const auto pool = [&](RateEstimate SimReport::* field, std::uint64_t num,
                        std::uint64_t den) {
    RateEstimate est;
    est.trials = den;
    est.value =
        den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
    double var = 0.0;
    for (const SimReport& r : reports) {
      const RateEstimate& e = r.*field;
      if (den == 0) continue;
      const double w =
          static_cast<double>(e.trials) / static_cast<double>(den);
      var += w * w * e.se * e.se;
    }
    est.se = std::sqrt(var);
    return est;
  };
  out.mu_p = pool(&SimReport::mu_p, c.dep_p, c.busy_p);
  out.mu_s = pool(&SimReport::mu_s, c.dep_s, c.busy_s);
  out.mu_ps = pool(&SimReport::mu_ps, c.dep_ps, c.busy_ps);
  out.mu_e = pool(&SimReport::mu_e, c.energy_used, c.busy_e);
  out.lambda_ps = pool(&SimReport::lambda_ps, c.adm_ps, c.slots);
  out.occ_p = pool(&SimReport::occ_p, c.busy_p, c.slots);
  out.occ_s = pool(&SimReport::occ_s, c.busy_s, c.slots);
  out.occ_ps = pool(&SimReport::occ_ps, c.busy_ps, c.slots);
  out.occ_e = pool(&SimReport::occ_e, c.busy_e, c.slots);

  const auto frac = [&](std::uint64_t n) {
    return c.slots > 0 ? static_cast<double>(n) / static_cast<double>(c.slots)
                       : 0.0;
  };
  out.occupancy.p_nonempty = frac(c.busy_p);
  out.occupancy.e_nonempty = frac(c.busy_e);
  out.occupancy.pe_nonempty = frac(c.ev_pe);
  out.occupancy.idle_s0_e = frac(c.ev_idle_s0_e);
  out.occupancy.idle_s_e = frac(c.ev_idle_s_e);
  out.occupancy.idle_ps0_e = frac(c.ev_idle_ps0_e);
  out.occupancy.idle_ps_e = frac(c.ev_idle_ps_e);
  out.occupancy.idle_s0_ps = frac(c.ev_idle_s0_ps);
  out.occupancy.idle_s_ps0 = frac(c.ev_idle_s_ps0);
  out.occupancy.idle_s_ps = frac(c.ev_idle_s_ps);
  out.idle_data_e = frac(c.ev_idle_data_e);

  double wsum = 0.0;
  for (const SimReport& r : reports) {
    const double w = static_cast<double>(r.counts.slots);
    out.mean_len_p += w * r.mean_len_p;
    out.mean_len_s += w * r.mean_len_s;
    out.mean_len_ps += w * r.mean_len_ps;
    out.mean_len_e += w * r.mean_len_e;
    wsum += w;
  }
  out.mean_len_p /= wsum;
  out.mean_len_s /= wsum;
  out.mean_len_ps /= wsum;
  out.mean_len_e /= wsum;

  const auto worst = [](Verdict a, Verdict b) {
    if (a == Verdict::unstable || b == Verdict::unstable) {
      return Verdict::unstable;
    }
    if (a == Verdict::inconclusive || b == Verdict::inconclusive) {
      return Verdict::inconclusive;
    }
    return Verdict::stable;
  };
  out.verdict_p = Verdict::stable;
  out.verdict_s = Verdict::stable;
  out.verdict_ps = Verdict::stable;
  out.verdict_e = Verdict::stable;
  for (const SimReport& r : reports) {
    out.verdict_p = worst(out.verdict_p, r.verdict_p);
    out.verdict_s = worst(out.verdict_s, r.verdict_s);
    out.verdict_ps = worst(out.verdict_ps, r.verdict_ps);
    out.verdict_e = worst(out.verdict_e, r.verdict_e);
  }
  return out;
}

RateCheckReport empirical_rate_check(const SimReport& report,
                                     const RateBounds& bounds) {
  RateCheckReport rc;
  rc.mu_p = check_rate(report.mu_p, bounds.mu_p);
  rc.mu_s = check_rate(report.mu_s, bounds.mu_s);
  rc.mu_ps = check_rate(report.mu_ps, bounds.mu_ps);
  rc.mu_e = check_rate(report.mu_e, bounds.mu_e);
  rc.lambda_ps = check_rate(report.lambda_ps, bounds.lambda_ps);
  rc.data_queues_stable = report.verdict_p != Verdict::unstable &&
                          report.verdict_s != Verdict::unstable &&
                          report.verdict_ps != Verdict::unstable;
  return rc;
}

}  // namespace ehcoop

#pragma once

namespace ehcoop {

// One directed link: rate, bandwidth, mean received SNR (linear scale).
struct LinkBudget {
  double rate_bits_per_sec = 0.0;
  double bandwidth_hz = 1.0;
  double mean_snr = 0.0;
};

// Slot layout and radio constants shared by all links.
struct SlotGeometry {
  double packet_bits = 0.0;
  double slot_seconds = 0.0;
  double sensing_seconds = 0.0;
  double energy_per_packet = 0.0;
  double noise_power = 0.0;
  double bandwidth_hz = 0.0;
};

// Mean channel power gains per directed link.
struct LinkGains {
  double ps_pd = 0.0;
  double ps_ss = 0.0;
  double ss_sd = 0.0;
  double ss_pd = 0.0;
};

struct LinkOutages {
  double ps_pd = 0.0;
  double ps_ss = 0.0;
  double ss_sd = 0.0;
  double ss_pd = 0.0;
};

// Rayleigh block-fading outage 1 - exp(-(2^(r/W) - 1)/snr). Zero rate
// never fails; zero SNR with positive rate always fails. Throws
// std::invalid_argument on non-finite or out-of-range inputs.
double outage_probability(const LinkBudget& link);

// Full geometry path. The primary transmits at r_p = b/T with the given
// power; the secondary defers tau seconds for sensing, so it transmits at
// r_s = b/(T - tau) with power E/(T - tau).
LinkOutages scenario_links(const SlotGeometry& geom, const LinkGains& gains,
                           double primary_power_watts);

// Direct-SNR path for parameter studies that sweep spectral efficiency
// R = b/(T W): the four SNRs are given, only the rates differ between
// primary links (R) and secondary links (R / (1 - tau/T)).
LinkOutages scenario_links(double spectral_efficiency, double tau_over_t,
                           double snr_ps_pd, double snr_ps_ss,
                           double snr_ss_sd, double snr_ss_pd);

}  // namespace ehcoop

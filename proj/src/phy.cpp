#include "ehcoop/phy.hpp"

#include <cmath>
#include <stdexcept>

namespace ehcoop {

double outage_probability(const LinkBudget& link) {
  if (!std::isfinite(link.rate_bits_per_sec) ||
      !std::isfinite(link.bandwidth_hz) || !std::isfinite(link.mean_snr)) {
    throw std::invalid_argument("outage_probability: non-finite link budget");
  }
  if (link.bandwidth_hz <= 0.0 || link.mean_snr < 0.0 ||
      link.rate_bits_per_sec < 0.0) {
    throw std::invalid_argument("outage_probability: link budget out of range");
  }
  if (link.rate_bits_per_sec == 0.0) return 0.0;
  if (link.mean_snr == 0.0) return 1.0;
  const double threshold =
      std::exp2(link.rate_bits_per_sec / link.bandwidth_hz) - 1.0;
  return -std::expm1(-threshold / link.mean_snr);
}

LinkOutages scenario_links(const SlotGeometry& geom, const LinkGains& gains,
                           double primary_power_watts) {
  if (!(geom.packet_bits > 0.0) || !(geom.slot_seconds > 0.0) ||
      !(geom.energy_per_packet > 0.0) || !(geom.noise_power > 0.0) ||
      !(geom.bandwidth_hz > 0.0)) {
    throw std::invalid_argument("scenario_links: geometry out of range");
  }
  if (!(geom.sensing_seconds >= 0.0) ||
      geom.sensing_seconds >= geom.slot_seconds) {
    throw std::invalid_argument(
        "scenario_links: sensing time must satisfy 0 <= tau < T");
  }
  if (!(primary_power_watts >= 0.0) || !(gains.ps_pd >= 0.0) ||
      !(gains.ps_ss >= 0.0) || !(gains.ss_sd >= 0.0) || !(gains.ss_pd >= 0.0)) {
    throw std::invalid_argument("scenario_links: negative power or gain");
  }
  const double r_p = geom.packet_bits / geom.slot_seconds;
  const double data_time = geom.slot_seconds - geom.sensing_seconds;
  const double r_s = geom.packet_bits / data_time;
  const double secondary_power = geom.energy_per_packet / data_time;
  const auto snr = [&](double gain, double power) {
    return gain * power / geom.noise_power;
  };
  LinkOutages out;
  out.ps_pd = outage_probability(
      {r_p, geom.bandwidth_hz, snr(gains.ps_pd, primary_power_watts)});
  out.ps_ss = outage_probability(
      {r_p, geom.bandwidth_hz, snr(gains.ps_ss, primary_power_watts)});
  out.ss_sd = outage_probability(
      {r_s, geom.bandwidth_hz, snr(gains.ss_sd, secondary_power)});
  out.ss_pd = outage_probability(
      {r_s, geom.bandwidth_hz, snr(gains.ss_pd, secondary_power)});
  return out;
}

LinkOutages scenario_links(double spectral_efficiency, double tau_over_t,
                           double snr_ps_pd, double snr_ps_ss,
                           double snr_ss_sd, double snr_ss_pd) {
  if (!std::isfinite(spectral_efficiency) || spectral_efficiency < 0.0) {
    throw std::invalid_argument("scenario_links: bad spectral efficiency");
  }
  if (!(tau_over_t >= 0.0) || tau_over_t >= 1.0) {
    throw std::invalid_argument("scenario_links: tau/T must lie in [0, 1)");
  }
  const double r_s_eff = spectral_efficiency / (1.0 - tau_over_t);
  LinkOutages out;
  out.ps_pd = outage_probability({spectral_efficiency, 1.0, snr_ps_pd});
  out.ps_ss = outage_probability({spectral_efficiency, 1.0, snr_ps_ss});
  out.ss_sd = outage_probability({r_s_eff, 1.0, snr_ss_sd});
  out.ss_pd = outage_probability({r_s_eff, 1.0, snr_ss_pd});
  return out;
}

}  // namespace ehcoop

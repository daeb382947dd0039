#include "ehcoop/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ehcoop {

namespace {

bool in_unit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

// min{lambda/mu, 1} with the zero-service convention: an unserved queue
// is "nonempty with probability at most 1", so the factor saturates.
double saturated_ratio(double lambda, double mu) {
  if (mu <= 0.0) return 1.0;
  return std::min(lambda / mu, 1.0);
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

void ScenarioParams::validate() const {
  const double fields[] = {p_out_ps_pd, p_out_ps_ss, p_out_ss_sd, p_out_ss_pd,
                           lambda_p,    lambda_s,    lambda_e,    f,
                           beta};
  for (double v : fields) {
    if (!in_unit(v)) {
      throw std::invalid_argument(
          "ScenarioParams: probabilities and rates must lie in [0, 1]");
    }
  }
}

ExactRates exact_rates(const ScenarioParams& params,
                       const OccupancyProbs& occ) {
  params.validate();
  const double events[] = {occ.p_nonempty, occ.e_nonempty, occ.pe_nonempty,
                           occ.idle_s0_e,  occ.idle_s_e,   occ.idle_ps0_e,
                           occ.idle_ps_e,  occ.idle_s0_ps, occ.idle_s_ps0,
                           occ.idle_s_ps};
  for (double v : events) {
    if (!in_unit(v)) {
      throw std::invalid_argument(
          "exact_rates: occupancy probabilities must lie in [0, 1]");
    }
  }
  const double succ_pd = 1.0 - params.p_out_ps_pd;
  const double succ_decode = 1.0 - params.p_out_ps_ss;
  const double relay_gain = params.f * params.p_out_ps_pd * succ_decode;

  ExactRates r;
  r.mu_p = succ_pd + relay_gain * occ.e_nonempty;
  r.lambda_ps = relay_gain * occ.pe_nonempty;
  r.mu_ps = (1.0 - params.p_out_ss_pd) *
            (occ.idle_s0_e + (1.0 - params.beta) * occ.idle_s_e);
  r.mu_s = (1.0 - params.p_out_ss_sd) *
           (occ.idle_ps0_e + params.beta * occ.idle_ps_e);
  r.mu_e = params.f * occ.p_nonempty + occ.idle_s0_ps + occ.idle_s_ps0 +
           occ.idle_s_ps;
  return r;
}

RateBounds bound_rates(const ScenarioParams& params) {
  params.validate();
  const double succ_pd = 1.0 - params.p_out_ps_pd;
  const double succ_sd = 1.0 - params.p_out_ss_sd;
  const double succ_spd = 1.0 - params.p_out_ss_pd;
  const double relay_gain = params.f * params.p_out_ps_pd *
                            (1.0 - params.p_out_ps_ss);

  RateBounds b;
  b.mu_p.outer = succ_pd + relay_gain;
  if (params.lambda_p > b.mu_p.outer + kFeasibilityTol) {
    throw InfeasiblePrimaryError(
        "bound_rates: lambda_p exceeds the outer primary service bound");
  }
  // Primary occupancy ratio under the fastest admissible service.
  const double busy_outer =
      b.mu_p.outer > 0.0 ? clamp01(params.lambda_p / b.mu_p.outer) : 0.0;

  b.mu_e.inner = params.f * busy_outer;
  b.mu_e.outer = 1.0 - (1.0 - params.f) * busy_outer;
  double energy_low;   // lower bound on Pr{Q_e != 0}
  double energy_high;  // upper bound on Pr{Q_e != 0}
  if (params.energy_model == EnergyModel::md1_unity) {
    b.mu_e.inner = 1.0;
    b.mu_e.outer = 1.0;
  }
  energy_low = saturated_ratio(params.lambda_e, b.mu_e.outer);
  energy_high = saturated_ratio(params.lambda_e, b.mu_e.inner);

  b.mu_p.inner = succ_pd + relay_gain * energy_low;

  const double idle_outer = 1.0 - busy_outer;
  double busy_inner;  // lambda_p / inner mu_p, may exceed 1
  if (b.mu_p.inner > 0.0) {
    busy_inner = params.lambda_p / b.mu_p.inner;
  } else {
    busy_inner = params.lambda_p > 0.0
                     ? std::numeric_limits<double>::infinity()
                     : 0.0;
  }
  const double idle_inner = clamp01(1.0 - busy_inner);

  b.mu_s.outer = succ_sd * idle_outer * energy_high;
  b.mu_s.inner = succ_sd * params.beta * idle_inner * energy_low;
  b.mu_ps.outer = succ_spd * idle_outer * energy_high;
  b.mu_ps.inner = succ_spd * (1.0 - params.beta) * idle_inner * energy_low;
  b.lambda_ps.inner = relay_gain * energy_low * busy_outer;
  const double admitted_high = relay_gain * energy_high;
  // Guard 0 * inf when both the admission term and busy_inner degenerate.
  b.lambda_ps.outer = admitted_high == 0.0 ? 0.0 : admitted_high * busy_inner;
  return b;
}

std::pair<double, double> occupancy_bounds(double lambda, double mu_inner,
                                           double mu_outer) {
  if (!in_unit(lambda) || !in_unit(mu_inner) || !in_unit(mu_outer) ||
      mu_inner > mu_outer + kFeasibilityTol) {
    throw std::invalid_argument("occupancy_bounds: need 0 <= mu_i <= mu_o <= 1");
  }
  if (lambda == 0.0) return {0.0, 0.0};
  if (mu_outer == 0.0 || lambda > mu_outer + kFeasibilityTol) {
    throw std::invalid_argument(
        "occupancy_bounds: queue unstable, lambda exceeds mu_outer");
  }
  const double lower = std::min(lambda / mu_outer, 1.0);
  const double upper =
      mu_inner > 0.0 ? std::min(lambda / mu_inner, 1.0) : 1.0;
  return {lower, upper};
}

std::pair<double, double> saturated_occupancy_bounds(double lambda,
                                                     double mu_inner,
                                                     double mu_outer) {
  if (!in_unit(lambda) || !in_unit(mu_inner) || !in_unit(mu_outer) ||
      mu_inner > mu_outer + kFeasibilityTol) {
    throw std::invalid_argument(
        "saturated_occupancy_bounds: need 0 <= mu_i <= mu_o <= 1");
  }
  return {saturated_ratio(lambda, mu_outer), saturated_ratio(lambda, mu_inner)};
}

}  // namespace ehcoop

#pragma once

#include <optional>
#include <vector>

#include "ehcoop/rates.hpp"

namespace ehcoop {

enum class BoundSide { inner, outer };

// One point of a stability-region boundary: the largest secondary arrival
// rate compatible with the chosen bound at the given primary rate, plus
// the maximizing controls. beta_opt is absent on the outer side (its
// objective does not depend on beta).
struct EnvelopePoint {
  double lambda_p = 0.0;
  double lambda_s_max = 0.0;
  double f_opt = 0.0;
  std::optional<double> beta_opt;
  bool feasible = false;
  BoundSide bound_side = BoundSide::outer;
};

// Maximizes the outer secondary service bound over a uniform f grid.
// f is searched from f_min = max{(lambda_p - succ_pd)/(P_ps_pd * succ_decode), 0}
// up to 1; below f_min the primary queue cannot be stabilized. The
// relaying queue constraint (inner arrival bound <= outer service bound)
// prunes the grid further. f_fixed restricts the search to a single
// admission probability.
EnvelopePoint outer_envelope_point(const ScenarioParams& base, double lambda_p,
                                   double f_grid_step = 1e-3,
                                   std::optional<double> f_fixed = {});

// Maximizes the inner secondary service bound over f, with the own-data
// share set to the closed-form optimum beta* (the largest beta leaving
// the relaying queue stable). Grid points with lambda_p above the inner
// primary bound, or with beta* < 0, are infeasible.
EnvelopePoint inner_envelope_point(const ScenarioParams& base, double lambda_p,
                                   double f_grid_step = 1e-3,
                                   std::optional<double> f_fixed = {});

struct EnvelopeSweep {
  std::vector<EnvelopePoint> points;
  double max_feasible_lambda_p = 0.0;
};

// Evaluates the chosen envelope on a shared lambda_p grid: `points`
// uniform samples of [0, outer mu_p at f = 1]. The shared grid makes
// sweeps of one scenario family directly comparable point by point.
EnvelopeSweep sweep_envelope(const ScenarioParams& base, BoundSide side,
                             int lambda_p_points = 200,
                             double f_grid_step = 1e-3,
                             std::optional<double> f_fixed = {});

// Scenario family for the rate-versus-spectral-efficiency study: link
// SNRs fixed, outages recomputed per R.
struct PrimaryRateFamily {
  double snr_ps_pd = 0.0;
  double snr_ps_ss = 0.0;
  double snr_ss_sd = 0.0;
  double snr_ss_pd = 0.0;
  double tau_over_t = 0.0;
  double lambda_p = 0.0;
  double lambda_e = 0.0;
};

struct PrimaryRatePoint {
  double spectral_efficiency = 0.0;
  double mu_p_inner = 0.0;    // best inner primary bound over feasible f
  double mu_p_outer = 0.0;    // best outer primary bound over feasible f
  double mu_p_noncoop = 0.0;  // direct-link service rate without an SU
};

// For each spectral efficiency, maximizes the primary service bounds over
// f subject to each problem's own stability constraints at the family's
// (lambda_p, lambda_e). Infeasible points (including a non-cooperative
// link that cannot carry lambda_p) report rate 0.
std::vector<PrimaryRatePoint> max_primary_rate(const PrimaryRateFamily& family,
                                               const std::vector<double>& r_grid,
                                               double f_grid_step = 1e-3);

}  // namespace ehcoop

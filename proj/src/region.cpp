#include "ehcoop/region.hpp"

#include <algorithm>
#include <cmath>

#include "ehcoop/phy.hpp"

namespace ehcoop {

namespace {

void check_point_args(const ScenarioParams& base, double lambda_p,
                      double f_grid_step,
                      const std::optional<double>& f_fixed) {
  base.validate();
  if (!std::isfinite(lambda_p) || lambda_p < 0.0 || lambda_p > 1.0) {
    throw std::invalid_argument("envelope: lambda_p must lie in [0, 1]");
  }
  if (!(f_grid_step > 0.0) || f_grid_step > 0.01) {
    throw std::invalid_argument("envelope: f grid step must lie in (0, 0.01]");
  }
  if (f_fixed && (!std::isfinite(*f_fixed) || *f_fixed < 0.0 || *f_fixed > 1.0)) {
    throw std::invalid_argument("envelope: fixed f must lie in [0, 1]");
  }
}

// Uniform grid lo, lo + step, ... with 1.0 always included.
std::vector<double> f_grid(double lo, double step,
                           const std::optional<double>& f_fixed) {
  if (f_fixed) {
    if (*f_fixed < lo - kFeasibilityTol) return {};
    return {*f_fixed};
  }
  std::vector<double> grid;
  const auto n = static_cast<long>(std::floor((1.0 - lo) / step));
  grid.reserve(static_cast<size_t>(n) + 2);
  for (long k = 0; k <= n; ++k) {
    grid.push_back(std::min(lo + static_cast<double>(k) * step, 1.0));
  }
  if (grid.empty() || grid.back() < 1.0) grid.push_back(1.0);
  return grid;
}

// Admission probabilities below this leave the primary queue unstable.
// Returns an empty optional when even f = 1 is not enough.
std::optional<double> min_admission(const ScenarioParams& base,
                                    double lambda_p) {
  const double succ_pd = 1.0 - base.p_out_ps_pd;
  if (lambda_p <= succ_pd + kFeasibilityTol) return 0.0;
  const double relay_slope = base.p_out_ps_pd * (1.0 - base.p_out_ps_ss);
  if (relay_slope <= 0.0) return std::nullopt;
  const double f_min = (lambda_p - succ_pd) / relay_slope;
  if (f_min > 1.0 + kFeasibilityTol) return std::nullopt;
  return std::min(f_min, 1.0);
}

struct InnerEval {
  double beta_star = 1.0;
  double objective = 0.0;
};

// Feasibility and closed-form beta* of the inner problem at one f.
// beta* is the largest own-data share that still leaves the relaying
// queue stable: 1 - (relay arrivals upper bound)/(relay service at beta=0).
std::optional<InnerEval> eval_inner(const ScenarioParams& p,
                                    const RateBounds& b) {
  if (p.lambda_p > b.mu_p.inner + kFeasibilityTol) return std::nullopt;
  const auto [e_low, e_high] =
      saturated_occupancy_bounds(p.lambda_e, b.mu_e.inner, b.mu_e.outer);
  (void)e_high;
  const double busy_i = b.mu_p.inner > 0.0 ? p.lambda_p / b.mu_p.inner : 0.0;
  const double idle_i = std::clamp(1.0 - busy_i, 0.0, 1.0);
  const double relay_in = b.lambda_ps.outer;
  const double relay_cap = (1.0 - p.p_out_ss_pd) * idle_i * e_low;
  InnerEval ev;
  if (relay_in <= kFeasibilityTol) {
    ev.beta_star = 1.0;
  } else if (relay_cap <= 0.0) {
    return std::nullopt;
  } else {
    const double beta_star = 1.0 - relay_in / relay_cap;
    if (beta_star < -kFeasibilityTol) return std::nullopt;
    ev.beta_star = std::clamp(beta_star, 0.0, 1.0);
  }
  ev.objective = (1.0 - p.p_out_ss_sd) * ev.beta_star * idle_i * e_low;
  return ev;
}

}  // namespace

EnvelopePoint outer_envelope_point(const ScenarioParams& base, double lambda_p,
                                   double f_grid_step,
                                   std::optional<double> f_fixed) {
  check_point_args(base, lambda_p, f_grid_step, f_fixed);
  EnvelopePoint pt;
  pt.lambda_p = lambda_p;
  pt.bound_side = BoundSide::outer;
  const std::optional<double> f_min = min_admission(base, lambda_p);
  if (!f_min) return pt;
  ScenarioParams p = base;
  p.lambda_p = lambda_p;
  for (double f : f_grid(*f_min, f_grid_step, f_fixed)) {
    p.f = f;
    RateBounds b;
    try {
      b = bound_rates(p);
    } catch (const InfeasiblePrimaryError&) {
      continue;
    }
    if (b.lambda_ps.inner > b.mu_ps.outer + kFeasibilityTol) continue;
    if (!pt.feasible || b.mu_s.outer > pt.lambda_s_max) {
      pt.feasible = true;
      pt.lambda_s_max = b.mu_s.outer;
      pt.f_opt = f;
    }
  }
  return pt;
}

EnvelopePoint inner_envelope_point(const ScenarioParams& base, double lambda_p,
                                   double f_grid_step,
                                   std::optional<double> f_fixed) {
  check_point_args(base, lambda_p, f_grid_step, f_fixed);
  EnvelopePoint pt;
  pt.lambda_p = lambda_p;
  pt.bound_side = BoundSide::inner;
  ScenarioParams p = base;
  p.lambda_p = lambda_p;
  for (double f : f_grid(0.0, f_grid_step, f_fixed)) {
    p.f = f;
    RateBounds b;
    try {
      b = bound_rates(p);
    } catch (const InfeasiblePrimaryError&) {
      continue;
    }
    const std::optional<InnerEval> ev = eval_inner(p, b);
    if (!ev) continue;
    if (!pt.feasible || ev->objective > pt.lambda_s_max) {
      pt.feasible = true;
      pt.lambda_s_max = ev->objective;
      pt.f_opt = f;
      pt.beta_opt = ev->beta_star;
    }
  }
  return pt;
}

EnvelopeSweep sweep_envelope(const ScenarioParams& base, BoundSide side,
                             int lambda_p_points, double f_grid_step,
                             std::optional<double> f_fixed) {
  if (lambda_p_points < 2) {
    throw std::invalid_argument("sweep_envelope: need at least 2 grid points");
  }
  base.validate();
  const double edge =
      (1.0 - base.p_out_ps_pd) +
      base.p_out_ps_pd * (1.0 - base.p_out_ps_ss);  // outer mu_p at f = 1
  EnvelopeSweep sweep;
  sweep.points.reserve(static_cast<size_t>(lambda_p_points));
  for (int j = 0; j < lambda_p_points; ++j) {
    const double lp = edge * static_cast<double>(j) /
                      static_cast<double>(lambda_p_points - 1);
    EnvelopePoint pt = side == BoundSide::inner
                           ? inner_envelope_point(base, lp, f_grid_step, f_fixed)
                           : outer_envelope_point(base, lp, f_grid_step, f_fixed);
    if (pt.feasible) sweep.max_feasible_lambda_p = lp;
    sweep.points.push_back(std::move(pt));
  }
  return sweep;
}

std::vector<PrimaryRatePoint> max_primary_rate(const PrimaryRateFamily& family,
                                               const std::vector<double>& r_grid,
                                               double f_grid_step) {
  if (!(f_grid_step > 0.0) || f_grid_step > 0.01) {
    throw std::invalid_argument(
        "max_primary_rate: f grid step must lie in (0, 0.01]");
  }
  std::vector<PrimaryRatePoint> out;
  out.reserve(r_grid.size());
  for (double r : r_grid) {
    const LinkOutages links =
        scenario_links(r, family.tau_over_t, family.snr_ps_pd,
                       family.snr_ps_ss, family.snr_ss_sd, family.snr_ss_pd);
    ScenarioParams base;
    base.p_out_ps_pd = links.ps_pd;
    base.p_out_ps_ss = links.ps_ss;
    base.p_out_ss_sd = links.ss_sd;
    base.p_out_ss_pd = links.ss_pd;
    base.lambda_p = family.lambda_p;
    base.lambda_e = family.lambda_e;

    PrimaryRatePoint pt;
    pt.spectral_efficiency = r;
    const double succ_pd = 1.0 - links.ps_pd;
    if (family.lambda_p <= succ_pd + kFeasibilityTol) {
      pt.mu_p_noncoop = succ_pd;
    }

    if (const std::optional<double> f_min = min_admission(base, family.lambda_p)) {
      ScenarioParams p = base;
      bool have = false;
      for (double f : f_grid(*f_min, f_grid_step, {})) {
        p.f = f;
        RateBounds b;
        try {
          b = bound_rates(p);
        } catch (const InfeasiblePrimaryError&) {
          continue;
        }
        if (b.lambda_ps.inner > b.mu_ps.outer + kFeasibilityTol) continue;
        if (!have || b.mu_p.outer > pt.mu_p_outer) {
          have = true;
          pt.mu_p_outer = b.mu_p.outer;
        }
      }
    }
    {
      ScenarioParams p = base;
      bool have = false;
      for (double f : f_grid(0.0, f_grid_step, {})) {
        p.f = f;
        RateBounds b;
        try {
          b = bound_rates(p);
        } catch (const InfeasiblePrimaryError&) {
          continue;
        }
        if (!eval_inner(p, b)) continue;
        if (!have || b.mu_p.inner > pt.mu_p_inner) {
          have = true;
          pt.mu_p_inner = b.mu_p.inner;
        }
      }
    }
    out.push_back(pt);
  }
  return out;
}

}  // namespace ehcoop

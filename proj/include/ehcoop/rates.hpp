#pragma once

#include <stdexcept>
#include <utility>

namespace ehcoop {

// Absolute tolerance for feasibility comparisons; every rate is O(1).
inline constexpr double kFeasibilityTol = 1e-12;

// coupled: the energy queue drains only when the SU actually spends a
// packet (decode attempt or transmission). md1_unity: decoupled model
// where one energy packet is consumed every slot the queue is nonempty,
// i.e. unit service rate on both bound sides.
enum class EnergyModel { coupled, md1_unity };

struct ScenarioParams {
  double p_out_ps_pd = 0.0;
  double p_out_ps_ss = 0.0;
  double p_out_ss_sd = 0.0;
  double p_out_ss_pd = 0.0;
  double lambda_p = 0.0;
  double lambda_s = 0.0;
  double lambda_e = 0.0;
  double f = 0.0;
  double beta = 1.0;
  EnergyModel energy_model = EnergyModel::coupled;

  // Throws std::invalid_argument unless every field lies in [0, 1].
  void validate() const;
};

struct Bound {
  double inner = 0.0;
  double outer = 0.0;
};

// Inner/outer pairs for the four service rates and the relay-queue
// arrival rate. inner <= outer holds for every pair whenever the primary
// queue is stabilizable (lambda_p <= outer mu_p).
struct RateBounds {
  Bound mu_p;
  Bound mu_s;
  Bound mu_ps;
  Bound mu_e;
  Bound lambda_ps;
};

// Raised when lambda_p exceeds the outer primary service bound: no
// admission policy can stabilize the primary queue at these parameters.
class InfeasiblePrimaryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Stationary queue-event probabilities feeding the exact coupled rate
// expressions. "idle" means the primary queue is empty; s/ps/e refer to
// the own-data, relaying and energy queues; a trailing 0 marks an empty
// queue in the joint event.
struct OccupancyProbs {
  double p_nonempty = 0.0;   // Pr{Q_p != 0}
  double e_nonempty = 0.0;   // Pr{Q_e != 0}
  double pe_nonempty = 0.0;  // Pr{Q_p != 0, Q_e != 0}
  double idle_s0_e = 0.0;    // Pr{Q_p = 0, Q_s = 0, Q_e != 0}
  double idle_s_e = 0.0;     // Pr{Q_p = 0, Q_s != 0, Q_e != 0}
  double idle_ps0_e = 0.0;   // Pr{Q_p = 0, Q_ps = 0, Q_e != 0}
  double idle_ps_e = 0.0;    // Pr{Q_p = 0, Q_ps != 0, Q_e != 0}
  double idle_s0_ps = 0.0;   // Pr{Q_p = 0, Q_s = 0, Q_ps != 0}
  double idle_s_ps0 = 0.0;   // Pr{Q_p = 0, Q_s != 0, Q_ps = 0}
  double idle_s_ps = 0.0;    // Pr{Q_p = 0, Q_s != 0, Q_ps != 0}
};

struct ExactRates {
  double mu_p = 0.0;
  double mu_s = 0.0;
  double mu_ps = 0.0;
  double mu_e = 0.0;
  double lambda_ps = 0.0;
};

// The exact coupled mean rates as closed forms in the supplied occupancy
// probabilities. The coupled chain's stationary probabilities are not
// analytically available, so this is a test harness: callers feed
// simulation-estimated (or bound-derived) occupancies.
ExactRates exact_rates(const ScenarioParams& params,
                       const OccupancyProbs& occupancy);

// All inner/outer rate bounds, evaluated in dependency order. Throws
// InfeasiblePrimaryError when lambda_p > outer mu_p + kFeasibilityTol.
RateBounds bound_rates(const ScenarioParams& params);

// Nonempty-probability bounds (lambda/mu_outer, min{lambda/mu_inner, 1})
// for a data queue with arrival rate lambda. Requires lambda <= mu_outer.
std::pair<double, double> occupancy_bounds(double lambda, double mu_inner,
                                           double mu_outer);

// Energy-queue variant: both sides saturate at 1, and a zero service
// bound yields factor 1 (the queue absorbs arrivals and never drains).
std::pair<double, double> saturated_occupancy_bounds(double lambda,
                                                     double mu_inner,
                                                     double mu_outer);

}  // namespace ehcoop

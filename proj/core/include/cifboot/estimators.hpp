#pragma once

#include <span>
#include <vector>

#include "cifboot/data_model.hpp"
#include "cifboot/step_function.hpp"

namespace cifboot {

/// Left limits and values of the basic estimators at every grid time of a
/// panel. Index k refers to panel.times()[k].
struct EstimatorTrace {
  std::vector<double> survival_before;  // Kaplan-Meier P(T > t_k-)
  std::vector<double> survival;         // Kaplan-Meier P(T > t_k)
  std::vector<double> cif1_before;
  std::vector<double> cif1;
  std::vector<double> cif2_before;
  std::vector<double> cif2;
  std::vector<double> hazard1_before;  // Nelson-Aalen
  std::vector<double> hazard1;
  std::vector<double> hazard2_before;
  std::vector<double> hazard2;
};

EstimatorTrace trace_estimators(const CountingProcessPanel& panel);

/// Product-limit estimate of P(T > t) over all causes. Censoring-only times
/// produce no jump; once the risk set is exhausted by events the curve stays 0.
StepFunction kaplan_meier(const CountingProcessPanel& panel);

/// A_j(t) = sum_{s <= t} d_j(s) / Y(s).
StepFunction nelson_aalen(const CountingProcessPanel& panel, int cause);

/// F_j(t) = sum_{s <= t} P(T > s-) d_j(s) / Y(s).
StepFunction aalen_johansen(const CountingProcessPanel& panel, int cause);

/// sigma_j^2(t) = sum_{s <= t} d_j(s) / Y(s)^2.
StepFunction sigma_hat(const CountingProcessPanel& panel, int cause);

/// Plug-in estimate of the covariance function of sqrt(n)(F1_hat - F1),
/// evaluated on `grid` (strictly increasing):
///
///   zeta(s1,s2) = sum_{u <= s1^s2} (S2(u-) - F1(s1))(S2(u-) - F1(s2)) n d1(u)/Y(u)^2
///               + sum_{u <= s1^s2} (F1(u-) - F1(s1))(F1(u-) - F1(s2)) n d2(u)/Y(u)^2
///
/// Diagonal entries are accumulated as sums of squares and are never negative.
CovarianceSurface zeta_hat(const CountingProcessPanel& panel, std::span<const double> grid);

/// xi(s) = sum_{u <= s} (1 - A1(u-) - A2(u-)) dF1(u).
StepFunction xi_hat(const CountingProcessPanel& panel);

}  // namespace cifboot

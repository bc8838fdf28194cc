#pragma once

#include <span>
#include <vector>

namespace survaudit {

enum class Side { Left, Right };

// Right-continuous step function: survival[j] and cumhaz[j] hold the value on
// [times[j], times[j+1]); before the first step S = 1 and H = 0.
struct SurvivalCurve {
  std::vector<double> times;     // strictly increasing step locations
  std::vector<double> survival;  // non-increasing, in [0,1]
  std::vector<double> cumhaz;    // non-decreasing, >= 0

  double eval_survival(double t, Side side = Side::Right) const;
  double eval_cumhaz(double t, Side side = Side::Right) const;
};

// Kaplan-Meier product-limit estimate with Nelson-Aalen cumulative hazard.
// Steps occur at distinct event times; at ties between events and censorings
// the events are processed first (censored rows stay in the risk set).
SurvivalCurve fit_km(std::span<const double> time, std::span<const int> status);

// Censoring-distribution estimator G_KM: fit_km on (T, 1 - status).
SurvivalCurve fit_censoring_km(std::span<const double> time,
                               std::span<const int> status);

}  // namespace survaudit

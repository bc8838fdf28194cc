#include "survaudit/km.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace survaudit {

namespace {

// Largest index j with times[j] <= t (Right) or times[j] < t (Left), or -1.
std::ptrdiff_t step_index(const std::vector<double>& times, double t, Side side) {
  auto it = (side == Side::Right)
                ? std::upper_bound(times.begin(), times.end(), t)
                : std::lower_bound(times.begin(), times.end(), t);
  return it - times.begin() - 1;
}

}  // namespace

double SurvivalCurve::eval_survival(double t, Side side) const {
  if (t < 0.0) throw std::invalid_argument("curve evaluation at negative time");
  const auto j = step_index(times, t, side);
  return j < 0 ? 1.0 : survival[static_cast<std::size_t>(j)];
}

double SurvivalCurve::eval_cumhaz(double t, Side side) const {
  if (t < 0.0) throw std::invalid_argument("curve evaluation at negative time");
  const auto j = step_index(times, t, side);
  return j < 0 ? 0.0 : cumhaz[static_cast<std::size_t>(j)];
}

SurvivalCurve fit_km(std::span<const double> time, std::span<const int> status) {
  if (time.empty() || time.size() != status.size()) {
    throw std::invalid_argument("fit_km: empty input or length mismatch");
  }
  const std::size_t n = time.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return time[a] < time[b]; });

  SurvivalCurve curve;
  double s = 1.0;
  double h = 0.0;
  std::size_t at_risk = n;
  std::size_t i = 0;
  while (i < n) {
    const double t = time[order[i]];
    std::size_t events = 0;
    std::size_t total = 0;
    while (i < n && time[order[i]] == t) {
      events += static_cast<std::size_t>(status[order[i]]);
      ++total;
      ++i;
    }
    if (events > 0) {
      const double d = static_cast<double>(events);
      const double r = static_cast<double>(at_risk);
      s *= 1.0 - d / r;
      h += d / r;
      curve.times.push_back(t);
      curve.survival.push_back(s);
      curve.cumhaz.push_back(h);
    }
    at_risk -= total;
  }
  return curve;
}

SurvivalCurve fit_censoring_km(std::span<const double> time,
                               std::span<const int> status) {
  std::vector<int> flipped(status.size());
  for (std::size_t i = 0; i < status.size(); ++i) flipped[i] = 1 - status[i];
  return fit_km(time, flipped);
}

}  // namespace survaudit

#pragma once

#include "priming/numerics.hpp"

namespace priming {

/// Sensitivity in units of the within-trial standard deviation.
struct DPrime {
  double value = 0.0;

  constexpr DPrime() = default;
  constexpr explicit DPrime(double v) : value(v) {}

  auto operator<=>(const DPrime&) const = default;
};

struct RatePair {
  Probability hit_rate;
  Probability false_alarm_rate;
  // Trials behind each rate; drives the 1/(2M) edge correction.
  double trials_per_condition = 1.0;
};

/// Replaces a rate of 0 with 1/(2M) and a rate of 1 with 1 - 1/(2M).
Probability edge_corrected(Probability rate, double trials);

/// Phi^-1(HR) - Phi^-1(FA) after edge correction.
DPrime dprime_from_rates(const RatePair& rates);

/// 2 Phi^-1(pc), the unbiased-observer relation. Throws for pc in {0, 1}.
DPrime dprime_from_accuracy(Probability pc);
Probability accuracy_from_dprime(DPrime d);

/// Linear approximation h(x) = 5 (x - 0.5) to 2 Phi^-1(x), accurate near chance.
constexpr DPrime h_approx(Probability pc) { return DPrime(5.0 * (pc.value() - 0.5)); }

/// h^-1(d) = d / 5 + 0.5. Not clamped; leaves [0, 1] for |d| > 2.5.
constexpr double h_inverse(DPrime d) { return d.value / 5.0 + 0.5; }

}  // namespace priming

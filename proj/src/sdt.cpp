#include "priming/sdt.hpp"

#include <string>

#include "priming/errors.hpp"

namespace priming {

Probability edge_corrected(Probability rate, double trials) {
  if (!(trials >= 1.0)) {
    fail(ErrorKind::domain, "edge correction needs at least one trial, got " +
                                std::to_string(trials));
  }
  const double correction = 1.0 / (2.0 * trials);
  if (rate.value() <= 0.0) return Probability(correction);
  if (rate.value() >= 1.0) return Probability(1.0 - correction);
  return rate;
}

DPrime dprime_from_rates(const RatePair& rates) {
  const auto hit = edge_corrected(rates.hit_rate, rates.trials_per_condition);
  const auto false_alarm = edge_corrected(rates.false_alarm_rate, rates.trials_per_condition);
  return DPrime(std_normal_quantile(hit) - std_normal_quantile(false_alarm));
}

DPrime dprime_from_accuracy(Probability pc) {
  if (pc.value() <= 0.0 || pc.value() >= 1.0) {
    fail(ErrorKind::domain, "accuracy must lie strictly between 0 and 1, got " +
                                std::to_string(pc.value()));
  }
  return DPrime(2.0 * std_normal_quantile(pc));
}

Probability accuracy_from_dprime(DPrime d) { return std_normal_cdf(d.value / 2.0); }

}  // namespace priming

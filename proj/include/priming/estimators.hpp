#pragma once

#include <string_view>

#include "priming/numerics.hpp"
#include "priming/sdt.hpp"

namespace priming {

/// Default ratio of between-subject effect variance to trial noise variance
/// (q = 0.15). 0.01 and 0.09 are the usual sensitivity checks.
inline constexpr double kDefaultQ2 = 0.0225;

enum class EstimateSource { direct_dprime, direct_accuracy, indirect_t, indirect_f };

std::string_view to_string(EstimateSource source) noexcept;

struct SensitivityEstimate {
  double d_est = 0.0;
  double se = 0.0;
  int n_participants = 0;
  double m_per_condition = 0.0;
  double q_squared = 0.0;
  EstimateSource source = EstimateSource::direct_dprime;
};

enum class Verdict { ita, dta, inconclusive };

std::string_view to_string(Verdict verdict) noexcept;

/// Verdict implied by a confidence interval for indirect minus direct.
constexpr Verdict verdict_from_interval(double ci_low, double ci_high) noexcept {
  if (ci_low > 0.0) return Verdict::ita;
  if (ci_high < 0.0) return Verdict::dta;
  return Verdict::inconclusive;
}

struct DifferenceResult {
  double d_diff = 0.0;
  double se_diff = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double alpha = 0.05;
  Verdict verdict = Verdict::inconclusive;
};

/// Constant turning a repeated-measures t value into an unbiased d' estimate:
///
///   kappa = Gamma((N-1)/2) / (sqrt((N-1)/2) Gamma((N-2)/2)) * sqrt((M q^2 + 2) / (N M))
///
/// Requires n >= 3 and m > 0.
double kappa(int n, double m, double q2);

SensitivityEstimate estimate_direct_from_dprime(DPrime d, int n, double m, double q2 = kDefaultQ2);
SensitivityEstimate estimate_direct_from_accuracy(Probability pc, int n, double m,
                                                  double q2 = kDefaultQ2);

/// d_est = t * kappa; SE from the variance of the non-central t with the
/// plug-in non-centrality. Requires n >= 4.
SensitivityEstimate estimate_indirect_from_t(double t, int n, double m, double q2 = kDefaultQ2);

/// Same as estimate_indirect_from_t with t = +sqrt(F).
SensitivityEstimate estimate_indirect_from_f(double f, int n, double m, double q2 = kDefaultQ2);

/// |t| = sqrt(F) for a two-level within-subject factor; returns the positive root.
double t_from_f(double f_value);

/// One-sample t for a mean effect with standard deviation sd_diff over n participants.
double t_from_effect(double mean_diff, double sd_diff, int n);

/// Indirect minus direct with a normal-quantile confidence interval.
DifferenceResult difference(const SensitivityEstimate& direct,
                            const SensitivityEstimate& indirect, double alpha = 0.05);

/// Builds a DifferenceResult from a point estimate, its SE and a critical value.
DifferenceResult make_difference(double d_diff, double se_diff, double critical, double alpha);

double q2_from_variances(double sigma_effect, double sigma_eps);

/// sqrt(sd_observed^2 - (2/M) sigma_eps^2): splits the observed spread of
/// individual effects into its between-subject part.
double sigma_effect_from_observed(double sd_observed, double m, double sigma_eps);

/// Trial noise implied by an observed effect SD and an assumed q^2:
/// sd_observed / sqrt(q^2 + 2/M).
double sigma_eps_from_observed(double sd_observed, double m, double q2);

}  // namespace priming

#include "priming/estimators.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "priming/errors.hpp"

namespace priming {

std::string_view to_string(EstimateSource source) noexcept {
  switch (source) {
    case EstimateSource::direct_dprime: return "direct_dprime";
    case EstimateSource::direct_accuracy: return "direct_accuracy";
    case EstimateSource::indirect_t: return "indirect_t";
    case EstimateSource::indirect_f: return "indirect_f";
  }
  return "unknown";
}

std::string_view to_string(Verdict verdict) noexcept {
  switch (verdict) {
    case Verdict::ita: return "ITA";
    case Verdict::dta: return "DTA";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

namespace {

void require_positive_trials(double m) {
  if (!(m > 0.0) || !std::isfinite(m)) {
    fail(ErrorKind::domain, "trials per condition must be positive, got " + std::to_string(m));
  }
}

void require_q2(double q2) {
  if (!(q2 >= 0.0) || !std::isfinite(q2)) {
    fail(ErrorKind::domain, "q2 must be >= 0, got " + std::to_string(q2));
  }
}

// Gamma((N-1)/2) / Gamma((N-2)/2).
double gamma_ratio(int n) {
  return std::exp(ln_gamma(0.5 * (n - 1)) - ln_gamma(0.5 * (n - 2)));
}

// Between-subject variance plus the binomial noise of accuracy mapped through
// the slope of h (5, squared).
double direct_standard_error(double accuracy, int n, double m, double q2) {
  return std::sqrt(q2 + 25.0 * accuracy * (1.0 - accuracy) / (2.0 * m)) /
         std::sqrt(static_cast<double>(n));
}

}  // namespace

double kappa(int n, double m, double q2) {
  if (n < 3) {
    fail(ErrorKind::unsupported_sample_size,
         "kappa requires N >= 3, got N = " + std::to_string(n));
  }
  require_positive_trials(m);
  require_q2(q2);
  const double half_df = 0.5 * (n - 1);
  return gamma_ratio(n) / std::sqrt(half_df) * std::sqrt((m * q2 + 2.0) / (n * m));
}

SensitivityEstimate estimate_direct_from_dprime(DPrime d, int n, double m, double q2) {
  if (n < 1) {
    fail(ErrorKind::unsupported_sample_size, "direct estimate requires N >= 1");
  }
  require_positive_trials(m);
  require_q2(q2);
  const double accuracy = h_inverse(d);
  if (!(accuracy > 0.0 && accuracy < 1.0)) {
    fail(ErrorKind::out_of_regime,
         "d' = " + std::to_string(d.value) + " maps outside (0, 1) under h^-1; |d'| must be < 2.5");
  }
  return {d.value, direct_standard_error(accuracy, n, m, q2), n, m, q2,
          EstimateSource::direct_dprime};
}

SensitivityEstimate estimate_direct_from_accuracy(Probability pc, int n, double m, double q2) {
  if (n < 1) {
    fail(ErrorKind::unsupported_sample_size, "direct estimate requires N >= 1");
  }
  require_positive_trials(m);
  require_q2(q2);
  const DPrime d = dprime_from_accuracy(pc);
  return {d.value, direct_standard_error(pc.value(), n, m, q2), n, m, q2,
          EstimateSource::direct_accuracy};
}

SensitivityEstimate estimate_indirect_from_t(double t, int n, double m, double q2) {
  if (n <= 3) {
    fail(ErrorKind::unsupported_sample_size,
         "indirect estimate requires N >= 4, got N = " + std::to_string(n));
  }
  if (!std::isfinite(t)) fail(ErrorKind::domain, "t value must be finite");
  const double k = kappa(n, m, q2);
  const double g = gamma_ratio(n);
  const double t2 = t * t;
  const double radicand =
      (1.0 + 2.0 * t2 / (n - 1) * g * g) * (static_cast<double>(n - 1) / (n - 3)) - t2;
  if (radicand < 0.0) {
    std::ostringstream msg;
    msg << "negative variance for indirect estimate (t = " << t << ", N = " << n
        << ", M = " << m << ", q2 = " << q2 << ")";
    fail(ErrorKind::numerical_domain, msg.str());
  }
  return {t * k, k * std::sqrt(radicand), n, m, q2, EstimateSource::indirect_t};
}

SensitivityEstimate estimate_indirect_from_f(double f, int n, double m, double q2) {
  auto estimate = estimate_indirect_from_t(t_from_f(f), n, m, q2);
  estimate.source = EstimateSource::indirect_f;
  return estimate;
}

double t_from_f(double f_value) {
  if (!(f_value >= 0.0) || !std::isfinite(f_value)) {
    fail(ErrorKind::domain, "F must be >= 0, got " + std::to_string(f_value));
  }
  return std::sqrt(f_value);
}

double t_from_effect(double mean_diff, double sd_diff, int n) {
  if (!(sd_diff > 0.0)) {
    fail(ErrorKind::domain, "effect SD must be > 0, got " + std::to_string(sd_diff));
  }
  if (n < 2) fail(ErrorKind::unsupported_sample_size, "t from effect requires N >= 2");
  return mean_diff * std::sqrt(static_cast<double>(n)) / sd_diff;
}

DifferenceResult make_difference(double d_diff, double se_diff, double critical, double alpha) {
  const double half_width = critical * se_diff;
  const double low = d_diff - half_width;
  const double high = d_diff + half_width;
  return {d_diff, se_diff, low, high, alpha, verdict_from_interval(low, high)};
}

DifferenceResult difference(const SensitivityEstimate& direct,
                            const SensitivityEstimate& indirect, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    fail(ErrorKind::domain, "alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
  if (!std::isfinite(direct.d_est) || !std::isfinite(indirect.d_est) ||
      !std::isfinite(direct.se) || !std::isfinite(indirect.se)) {
    fail(ErrorKind::domain, "difference requires finite estimates");
  }
  const double z = std_normal_quantile(Probability(1.0 - alpha / 2.0));
  return make_difference(indirect.d_est - direct.d_est, std::hypot(direct.se, indirect.se), z,
                         alpha);
}

double q2_from_variances(double sigma_effect, double sigma_eps) {
  if (!(sigma_eps > 0.0)) {
    fail(ErrorKind::domain, "sigma_eps must be > 0, got " + std::to_string(sigma_eps));
  }
  if (!(sigma_effect >= 0.0)) {
    fail(ErrorKind::domain, "sigma_effect must be >= 0, got " + std::to_string(sigma_effect));
  }
  const double ratio = sigma_effect / sigma_eps;
  return ratio * ratio;
}

double sigma_effect_from_observed(double sd_observed, double m, double sigma_eps) {
  if (!(sd_observed > 0.0) || !(sigma_eps > 0.0)) {
    fail(ErrorKind::domain, "standard deviations must be > 0");
  }
  require_positive_trials(m);
  const double observed = sd_observed * sd_observed;
  double radicand = observed - (2.0 / m) * sigma_eps * sigma_eps;
  // Rounding at the exact boundary.
  if (radicand < 0.0 && radicand > -1e-12 * observed) radicand = 0.0;
  if (radicand < 0.0) {
    std::ostringstream msg;
    msg << "observed SD " << sd_observed << " is smaller than the trial-noise share implied by "
        << "sigma_eps = " << sigma_eps << " at M = " << m;
    fail(ErrorKind::infeasible_decomposition, msg.str());
  }
  return std::sqrt(radicand);
}

double sigma_eps_from_observed(double sd_observed, double m, double q2) {
  if (!(sd_observed > 0.0)) fail(ErrorKind::domain, "observed SD must be > 0");
  require_positive_trials(m);
  require_q2(q2);
  return sd_observed / std::sqrt(q2 + 2.0 / m);
}

}  // namespace priming

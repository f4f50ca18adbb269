#include "priming/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "priming/errors.hpp"

namespace priming {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::domain: return "domain error";
    case ErrorKind::unsupported_sample_size: return "unsupported sample size";
    case ErrorKind::out_of_regime: return "out of regime";
    case ErrorKind::numerical_domain: return "numerical domain error";
    case ErrorKind::infeasible_decomposition: return "infeasible decomposition";
    case ErrorKind::degenerate_input: return "degenerate input";
    case ErrorKind::insufficient_data: return "insufficient data";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::linkage: return "linkage error";
    case ErrorKind::usage: return "usage error";
    case ErrorKind::simulation: return "simulation error";
  }
  return "error";
}

Probability::Probability(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    fail(ErrorKind::domain,
         "probability must lie in [0, 1], got " + std::to_string(value));
  }
}

double std_normal_pdf(double x) noexcept {
  constexpr double inv_sqrt_2pi = 0.3989422804014326779399460599343818684758586;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

Probability std_normal_cdf(double x) {
  if (!std::isfinite(x)) {
    fail(ErrorKind::domain, "std_normal_cdf requires a finite argument");
  }
  return Probability(0.5 * std::erfc(-x / std::numbers::sqrt2));
}

namespace {

// Acklam's rational approximation to the normal quantile, |rel err| < 1.15e-9.
double acklam_quantile(double p) {
  static constexpr std::array<double, 6> a = {
      -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b = {
      -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr std::array<double, 6> c = {
      -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d = {
      7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  constexpr double p_high = 1.0 - p_low;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > p_high) {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double std_normal_quantile(Probability p) {
  const double pv = p.value();
  if (!(pv > 0.0 && pv < 1.0)) {
    fail(ErrorKind::domain,
         "std_normal_quantile requires 0 < p < 1, got " + std::to_string(pv));
  }
  double x = acklam_quantile(pv);
  // One Newton step on the CDF. Both branches compute Phi(x) - p; the upper
  // tail uses the complementary CDF to avoid cancellation against 1 - p.
  const double density = std_normal_pdf(x);
  if (density > 0.0) {
    const double residual = pv > 0.5
                                ? (1.0 - pv) - 0.5 * std::erfc(x / std::numbers::sqrt2)
                                : 0.5 * std::erfc(-x / std::numbers::sqrt2) - pv;
    x -= residual / density;
  }
  return x;
}

double ln_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    fail(ErrorKind::domain, "ln_gamma requires x > 0, got " + std::to_string(x));
  }
  static constexpr std::array<double, 9> coefficients = {
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  constexpr double g = 7.0;

  if (x < 0.5) {
    // Reflection: Gamma(x) Gamma(1 - x) = pi / sin(pi x).
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) -
           ln_gamma(1.0 - x);
  }
  const double z = x - 1.0;
  double series = coefficients[0];
  for (std::size_t i = 1; i < coefficients.size(); ++i) {
    series += coefficients[i] / (z + static_cast<double>(i));
  }
  const double t = z + g + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t +
         std::log(series);
}

namespace {

// Continued fraction for the incomplete beta, modified Lentz evaluation.
double incomplete_beta_fraction(double a, double b, double x) {
  constexpr int max_iterations = 100000;
  constexpr double epsilon = 1e-16;
  constexpr double tiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < epsilon) return h;
  }
  fail(ErrorKind::numerical_domain, "incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    fail(ErrorKind::domain, "incomplete beta requires a, b > 0");
  }
  if (!(x >= 0.0 && x <= 1.0)) {
    fail(ErrorKind::domain, "incomplete beta requires x in [0, 1]");
  }
  if (x == 0.0 || x == 1.0) return x;
  const double log_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * incomplete_beta_fraction(a, b, x) / a;
  }
  return 1.0 - front * incomplete_beta_fraction(b, a, 1.0 - x) / b;
}

namespace {

void require_df(double df) {
  if (!(df >= 1.0) || !std::isfinite(df)) {
    fail(ErrorKind::domain, "Student t requires df >= 1, got " + std::to_string(df));
  }
}

}  // namespace

Probability student_t_cdf(double t, double df) {
  require_df(df);
  if (std::isnan(t)) fail(ErrorKind::domain, "student_t_cdf argument is NaN");
  if (std::isinf(t)) return Probability(t > 0 ? 1.0 : 0.0);
  if (t == 0.0) return Probability(0.5);
  // Tail mass P(|T| > |t|) = I_{df/(df+t^2)}(df/2, 1/2).
  const double x = df / (df + t * t);
  const double two_tail = regularized_incomplete_beta(0.5 * df, 0.5, x);
  return Probability(t > 0 ? 1.0 - 0.5 * two_tail : 0.5 * two_tail);
}

double student_t_pdf(double t, double df) {
  require_df(df);
  const double log_norm = ln_gamma(0.5 * (df + 1.0)) - ln_gamma(0.5 * df) -
                          0.5 * std::log(df * std::numbers::pi);
  return std::exp(log_norm - 0.5 * (df + 1.0) * std::log1p(t * t / df));
}

double student_t_quantile(Probability p, double df) {
  require_df(df);
  const double pv = p.value();
  if (!(pv > 0.0 && pv < 1.0)) {
    fail(ErrorKind::domain, "student_t_quantile requires 0 < p < 1");
  }
  if (pv == 0.5) return 0.0;
  // Work in the upper half and mirror.
  const bool lower = pv < 0.5;
  const double target = lower ? 1.0 - pv : pv;

  double lo = 0.0;
  double hi = 1.0;
  while (student_t_cdf(hi, df).value() < target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) fail(ErrorKind::numerical_domain, "t quantile bracket overflow");
  }
  double x = std_normal_quantile(Probability(target));
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
  for (int iteration = 0; iteration < 200; ++iteration) {
    const double f = student_t_cdf(x, df).value() - target;
    if (f > 0.0) hi = x; else lo = x;
    const double step = f / student_t_pdf(x, df);
    double next = x - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::fabs(next - x) <= 1e-14 * std::max(1.0, std::fabs(x))) {
      x = next;
      break;
    }
    x = next;
  }
  return lower ? -x : x;
}

}  // namespace priming

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "priming/errors.hpp"
#include "priming/estimators.hpp"
#include "priming/rng.hpp"

using namespace priming;
using Catch::Approx;

namespace {

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::usage;
}

// Mean and variance of a non-central t with nu df and non-centrality delta.
struct NctMoments {
  double mean, var;
};
NctMoments nct_moments(double nu, double delta) {
  const double c = std::sqrt(nu / 2.0) * std::tgamma((nu - 1.0) / 2.0) / std::tgamma(nu / 2.0);
  const double mean = delta * c;
  return {mean, nu * (1.0 + delta * delta) / (nu - 2.0) - mean * mean};
}

}  // namespace

TEST_CASE("kappa matches the gamma-function definition", "[estimators]") {
  auto oracle = [](int n, double m, double q2) {
    return std::tgamma((n - 1) / 2.0) / (std::sqrt((n - 1) / 2.0) * std::tgamma((n - 2) / 2.0)) *
           std::sqrt((m * q2 + 2.0) / (n * m));
  };
  for (int n : {3, 4, 7, 12, 24, 40}) {
    for (double m : {1.0, 28.0, 256.0}) {
      for (double q2 : {0.0, 0.01, 0.0225, 0.09}) {
        CHECK(kappa(n, m, q2) == Approx(oracle(n, m, q2)).epsilon(1e-12));
      }
    }
  }
  CHECK(kappa(12, 256, 0.0225) == Approx(0.04674).margin(5e-6));
  CHECK(kappa(3, 1, 0.0) == Approx(0.460659).margin(1e-6));
  CHECK(kind_of([] { kappa(2, 10, 0.0); }) == ErrorKind::unsupported_sample_size);
  CHECK(kind_of([] { kappa(5, 0, 0.0); }) == ErrorKind::domain);
  CHECK(kind_of([] { kappa(5, 10, -0.1); }) == ErrorKind::domain);
}

TEST_CASE("Indirect estimate uses non-central t moments", "[estimators]") {
  for (int n : {5, 10, 12, 24}) {
    for (double t : {0.0, 1.3, 2.68, 6.16}) {
      const double m = 128.0, q2 = 0.0225;
      const double nu = n - 1.0;
      const double c = nct_moments(nu, 1.0).mean;
      const double delta_hat = t / c;
      const auto e = estimate_indirect_from_t(t, n, m, q2);
      CHECK(e.d_est == Approx(t * kappa(n, m, q2)).margin(1e-12));
      CHECK(e.se == Approx(kappa(n, m, q2) * std::sqrt(nct_moments(nu, delta_hat).var)).epsilon(1e-9));
      CHECK(e.source == EstimateSource::indirect_t);
    }
  }
}

TEST_CASE("Indirect estimate is unbiased under the repeated-measures model", "[estimators]") {
  // Per-participant mean congruency effects in units of trial noise:
  // effect_i ~ N(d, q^2 + 2/M).
  const int n = 12, reps = 40000;
  const double m = 64.0, q2 = 0.0225, d = 0.3;
  SeededRng rng(2024);
  double sum = 0.0, sum_sq = 0.0, se2 = 0.0;
  std::vector<double> effects(n);
  for (int r = 0; r < reps; ++r) {
    double mean = 0.0;
    for (auto& x : effects) {
      x = sample_normal(rng, d, std::sqrt(q2 + 2.0 / m));
      mean += x / n;
    }
    double ss = 0.0;
    for (double x : effects) ss += (x - mean) * (x - mean);
    const double t = mean / std::sqrt(ss / (n - 1) / n);
    const auto e = estimate_indirect_from_t(t, n, m, q2);
    sum += e.d_est;
    sum_sq += e.d_est * e.d_est;
    se2 += e.se * e.se;
  }
  const double mean = sum / reps;
  const double sd = std::sqrt(sum_sq / reps - mean * mean);
  CHECK(mean == Approx(d).margin(0.004));
  CHECK(std::sqrt(se2 / reps) == Approx(sd).margin(0.004));
}

TEST_CASE("Indirect estimate from F uses the positive root", "[estimators]") {
  const auto f = estimate_indirect_from_f(36.0, 10, 240, kDefaultQ2);
  const auto t = estimate_indirect_from_t(6.0, 10, 240, kDefaultQ2);
  CHECK(f.d_est == t.d_est);
  CHECK(f.se == t.se);
  CHECK(f.source == EstimateSource::indirect_f);
  CHECK(f.d_est == Approx(0.30).margin(0.005));
  CHECK(f.se == Approx(0.10).margin(0.005));
  CHECK(kind_of([] { estimate_indirect_from_f(-1.0, 10, 240); }) == ErrorKind::domain);
  CHECK(kind_of([] { estimate_indirect_from_t(2.0, 3, 240); }) == ErrorKind::unsupported_sample_size);
}

TEST_CASE("Direct estimate SE combines q^2 and binomial noise", "[estimators]") {
  const auto e = estimate_direct_from_dprime(DPrime(0.2), 7, 56, kDefaultQ2);
  const double p = 0.2 / 5.0 + 0.5;
  CHECK(e.se == Approx(std::sqrt((0.0225 + 25.0 * p * (1 - p) / 112.0) / 7.0)).epsilon(1e-12));
  CHECK(e.se == Approx(0.11).margin(0.005));
  CHECK(e.d_est == 0.2);

  const auto a = estimate_direct_from_accuracy(Probability(0.529), 27, 18, kDefaultQ2);
  CHECK(a.d_est == Approx(dprime_from_accuracy(Probability(0.529)).value));
  CHECK(a.se == Approx(std::sqrt((0.0225 + 25.0 * 0.529 * 0.471 / 36.0) / 27.0)).epsilon(1e-12));
  CHECK(estimate_direct_from_accuracy(Probability(0.5), 10, 50).d_est == Approx(0.0).margin(1e-12));

  CHECK(kind_of([] { estimate_direct_from_dprime(DPrime(2.5), 10, 50); }) == ErrorKind::out_of_regime);
  CHECK(kind_of([] { estimate_direct_from_dprime(DPrime(-3.0), 10, 50); }) == ErrorKind::out_of_regime);
  CHECK(kind_of([] { estimate_direct_from_dprime(DPrime(0.1), 0, 50); }) ==
        ErrorKind::unsupported_sample_size);
}

TEST_CASE("Difference test: normal interval and verdicts", "[estimators]") {
  const SensitivityEstimate direct{0.2, 0.11, 7, 56, kDefaultQ2, EstimateSource::direct_dprime};
  const SensitivityEstimate indirect{0.29, 0.09, 12, 256, kDefaultQ2, EstimateSource::indirect_t};
  const auto r = difference(direct, indirect);
  CHECK(r.d_diff == Approx(0.09));
  CHECK(r.se_diff == Approx(std::sqrt(0.11 * 0.11 + 0.09 * 0.09)));
  CHECK(r.ci_low == Approx(0.09 - 1.959963985 * r.se_diff));
  CHECK(r.verdict == Verdict::inconclusive);

  CHECK(make_difference(0.3, 0.1, 1.96, 0.05).verdict == Verdict::ita);
  CHECK(make_difference(-0.3, 0.1, 1.96, 0.05).verdict == Verdict::dta);
  CHECK(to_string(Verdict::ita) == "ITA");
  CHECK(kind_of([&] { difference(direct, indirect, 1.5); }) == ErrorKind::domain);
}

TEST_CASE("Larger q^2 never lowers the indirect estimate", "[estimators]") {
  double previous = -1.0;
  for (double q2 = 0.0; q2 <= 0.2; q2 += 0.005) {
    const double d = estimate_indirect_from_t(3.0, 12, 256, q2).d_est;
    CHECK(d >= previous);
    previous = d;
  }
}

TEST_CASE("Variance decompositions", "[estimators]") {
  CHECK(q2_from_variances(11.63, 78) == Approx(0.02223).margin(1e-5));
  CHECK(q2_from_variances(0.0, 5.0) == 0.0);
  CHECK(sigma_effect_from_observed(13.5, 256, 92) == Approx(std::sqrt(13.5 * 13.5 - 92.0 * 92.0 / 128.0)));
  CHECK(sigma_effect_from_observed(std::sqrt(2.0 / 8.0), 8, 1.0) == 0.0);
  CHECK(kind_of([] { sigma_effect_from_observed(5.0, 8, 20.0); }) == ErrorKind::infeasible_decomposition);
  const double eps = sigma_eps_from_observed(13.5, 256, 0.0225);
  CHECK(q2_from_variances(sigma_effect_from_observed(13.5, 256, eps), eps) == Approx(0.0225).epsilon(1e-9));
  CHECK(t_from_effect(2.0, 4.0, 16) == Approx(2.0));
  CHECK(kind_of([] { t_from_effect(1.0, 0.0, 16); }) == ErrorKind::domain);
}

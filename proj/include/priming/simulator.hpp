#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "priming/classifier.hpp"
#include "priming/estimators.hpp"

namespace priming {

struct SimConfig {
  int n_direct = 12;
  int n_indirect = 12;
  int m_direct = 256;  // trials per condition
  int m_indirect = 256;
  double d_true_direct = 0.0;
  double d_true_indirect = 0.25;
  double q_gen = 0.15;       // SD of individual true sensitivities
  double q_analysis = 0.15;  // q assumed by the summary-statistic reanalysis
  Family distribution = Family::normal;
  // Log-scale SD of the indirect measure under the log-normal family.
  double lognormal_sigma = 0.25;
  Pairing pairing = Pairing::within_subject;
  int reps = 10000;
  double alpha = 0.05;
  std::uint64_t seed = 42;
};

/// Throws ErrorKind::usage for inconsistent configurations.
void validate(const SimConfig& config);

/// One simulated experiment. Individual sensitivities are drawn per task from
/// N(d_true, q_gen); trials come from two unit-variance distributions whose
/// means sit at -d_i/2 and +d_i/2. A direct-task response is correct when the
/// draw falls on its own distribution's side of the true midpoint; indirect
/// trials keep the raw draw (congruent at the lower mean).
///
/// The draw sequence is keyed by (config.seed, rep_index) only.
TrialDataset generate_dataset(const SimConfig& config, std::uint64_t rep_index);

struct TraditionalResult {
  double t_direct = 0.0;
  double p_direct = 1.0;
  double t_indirect = 0.0;
  double p_indirect = 1.0;
  // Non-significant direct task together with a significant indirect effect.
  bool standard_reasoning_claims_ita = false;
  std::vector<double> direct_dprimes;
  std::vector<double> indirect_effects;  // incongruent minus congruent mean
};

/// One-sample t test of per-participant direct d' against zero and paired t
/// test of per-participant indirect condition means, both two-sided.
TraditionalResult run_traditional(const TrialDataset& dataset, double alpha);

struct SimOptions {
  bool run_appropriate = true;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct SimOutcome {
  int reps = 0;
  double rate_direct_significant = 0.0;
  double rate_indirect_significant = 0.0;
  double rate_standard_reasoning_ita = 0.0;
  double rate_reanalysis_ita = 0.0;
  double rate_reanalysis_dta = 0.0;
  double rate_reanalysis_difference = 0.0;  // ITA or DTA
  bool appropriate_evaluated = false;
  double rate_appropriate_ita = 0.0;
  double rate_appropriate_dta = 0.0;
  double rate_appropriate_difference = 0.0;
  double mean_estimate_direct = 0.0;
  double mean_estimate_indirect = 0.0;
  double mean_bias_direct = 0.0;  // mean(d_est) - d_true
  double mean_bias_indirect = 0.0;
  double sd_estimate_direct = 0.0;
  double sd_estimate_indirect = 0.0;
  double rms_se_direct = 0.0;  // sqrt(mean(SE^2))
  double rms_se_indirect = 0.0;
  double se_calibration_direct = 0.0;  // rms_se - sd_estimate
  double se_calibration_indirect = 0.0;
};

/// Names accepted by metric(); the order is the export order.
const std::vector<std::string_view>& outcome_metric_names();

/// Looks up a SimOutcome field by name. Throws ErrorKind::usage if unknown.
double metric(const SimOutcome& outcome, std::string_view name);

/// Runs config.reps repetitions. Repetitions are independent streams and the
/// reduction runs in repetition order, so results do not depend on threads.
SimOutcome run_simulation(const SimConfig& config, const SimOptions& options = {});

/// The six published validation scenarios.
SimConfig named_scenario(int id);

struct PublishedRate {
  std::string metric;
  double value = 0.0;
  double tolerance = 0.0;
};

/// Reported rates for a named scenario with their acceptance tolerances.
std::vector<PublishedRate> published_rates(int scenario_id);

enum class PowerAnalysis { reanalysis, appropriate };

/// Fraction of repetitions whose chosen analysis yields an ITA verdict.
double estimate_power(const SimConfig& config, PowerAnalysis analysis = PowerAnalysis::reanalysis,
                      const SimOptions& options = {});

struct GridCell {
  int n = 0;
  int m = 0;
  double d_true = 0.0;
  double q = 0.0;
  SimOutcome outcome;

  double abs_bias_direct() const;
  double abs_bias_indirect() const;
  double abs_se_calibration_direct() const;
  double abs_se_calibration_indirect() const;
};

struct GridReport {
  int reps = 0;
  std::uint64_t seed = 0;
  std::vector<GridCell> cells;
};

/// Every (N, M, d', q) combination, generated and analysed with the same q and
/// equal sensitivities in both tasks. Each cell gets its own derived seed.
GridReport run_calibration_grid(const std::vector<int>& n_set, const std::vector<int>& m_set,
                                const std::vector<double>& d_set,
                                const std::vector<double>& q_set, int reps, std::uint64_t seed,
                                const SimOptions& options = {});

/// CSV rows: scenario_id,metric,value,reps,seed.
std::string outcome_csv(std::string_view scenario_id, const SimConfig& config,
                        const SimOutcome& outcome, bool header = true);
std::string outcome_json(std::string_view scenario_id, const SimConfig& config,
                         const SimOutcome& outcome);
std::string grid_csv(const GridReport& report);
std::string grid_json(const GridReport& report);

std::string config_to_json(const SimConfig& config);
/// Missing fields keep their defaults. Throws ErrorKind::parse on bad input.
SimConfig config_from_json(std::string_view text);

}  // namespace priming

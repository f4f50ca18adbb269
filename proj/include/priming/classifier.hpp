#pragma once

#include <span>
#include <string>
#include <vector>

#include "priming/estimators.hpp"
#include "priming/numerics.hpp"
#include "priming/sdt.hpp"

namespace priming {

enum class Condition { congruent, incongruent };
enum class Stimulus { a, b };
enum class Pairing { within_subject, between_groups };
enum class Family { normal, lognormal };

std::string_view to_string(Pairing pairing) noexcept;
std::string_view to_string(Family family) noexcept;

struct IndirectTrial {
  Condition condition = Condition::congruent;
  double measure = 0.0;
};

struct DirectTrial {
  Stimulus stimulus = Stimulus::a;
  Stimulus response = Stimulus::a;
};

struct ParticipantData {
  std::string id;
  std::vector<DirectTrial> direct;
  std::vector<IndirectTrial> indirect;
};

struct TrialDataset {
  std::vector<ParticipantData> participants;
  Pairing pairing = Pairing::within_subject;
};

/// Throws ErrorKind::degenerate_input when the dataset breaks its invariants
/// (participant without trials; within-subject participant missing a task).
void validate(const TrialDataset& dataset);

struct HistogramPair {
  std::vector<double> bin_edges;
  std::vector<double> congruent_counts;
  std::vector<double> incongruent_counts;
};

struct MedianSplitResult {
  Probability accuracy;
  DPrime dprime;
  double median = 0.0;
};

/// Per-participant median classifier: trials at or below the sample median are
/// predicted congruent, the rest incongruent. The reported accuracy is raw;
/// d' = 2 Phi^-1(accuracy) after a 1/(2T) edge correction.
MedianSplitResult median_split_dprime(std::span<const IndirectTrial> trials);

/// Sample median, midpoint of the middle two values for even counts.
double sample_median(std::vector<double> values);

/// Threshold between two equal-weight, equal-variance distributions with
/// location parameters mu1 and mu2 (log-scale for the log-normal family).
double optimal_threshold(Family family, double mu1, double mu2);

struct GrandMedianResult {
  DPrime dprime;
  double se = 0.0;
  double accuracy = 0.0;
  double median = 0.0;
  double total = 0.0;
};

/// Median split over pooled histograms: the median is interpolated linearly
/// within its bin and mass is assumed uniform inside every bin.
GrandMedianResult grand_median_dprime(const HistogramPair& hist);

/// HR = P(respond A | A), FA = P(respond A | B), each edge-corrected with its
/// own class count.
DPrime direct_dprime(std::span<const DirectTrial> trials);

struct TaskSummary {
  int n = 0;
  double mean_dprime = 0.0;
  double sd_dprime = 0.0;
};

struct AppropriateResult {
  TaskSummary direct;
  TaskSummary indirect;
  // Degrees of freedom of the t reference used for the interval.
  double df = 0.0;
  DifferenceResult difference;
};

/// Indirect minus direct on per-participant d' values. Paired t interval for
/// within-subject data, Welch interval for between-groups data.
AppropriateResult appropriate_analysis(const TrialDataset& dataset, double alpha = 0.05);

/// Same test from per-participant sensitivities that were already computed.
/// Paired input must have equal lengths with matching order.
AppropriateResult compare_sensitivities(std::span<const double> direct,
                                        std::span<const double> indirect, Pairing pairing,
                                        double alpha);

}  // namespace priming

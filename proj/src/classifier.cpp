#include "priming/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "priming/errors.hpp"

namespace priming {

std::string_view to_string(Pairing pairing) noexcept {
  return pairing == Pairing::within_subject ? "within_subject" : "between_groups";
}

std::string_view to_string(Family family) noexcept {
  return family == Family::normal ? "normal" : "lognormal";
}

void validate(const TrialDataset& dataset) {
  for (const auto& participant : dataset.participants) {
    if (participant.direct.empty() && participant.indirect.empty()) {
      fail(ErrorKind::degenerate_input, "participant '" + participant.id + "' has no trials");
    }
    if (dataset.pairing == Pairing::within_subject &&
        (participant.direct.empty() || participant.indirect.empty())) {
      fail(ErrorKind::degenerate_input, "within-subject participant '" + participant.id +
                                            "' needs both direct and indirect trials");
    }
  }
}

double sample_median(std::vector<double> values) {
  if (values.empty()) fail(ErrorKind::degenerate_input, "median of an empty sample");
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  const double upper = *mid;
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

MedianSplitResult median_split_dprime(std::span<const IndirectTrial> trials) {
  if (trials.size() < 2) {
    fail(ErrorKind::degenerate_input, "median split needs at least two trials");
  }
  const auto congruent = std::count_if(trials.begin(), trials.end(), [](const IndirectTrial& t) {
    return t.condition == Condition::congruent;
  });
  if (congruent == 0 || congruent == static_cast<std::ptrdiff_t>(trials.size())) {
    fail(ErrorKind::degenerate_input, "median split needs both conditions");
  }

  std::vector<double> measures(trials.size());
  std::transform(trials.begin(), trials.end(), measures.begin(),
                 [](const IndirectTrial& t) { return t.measure; });
  const double median = sample_median(std::move(measures));

  std::size_t correct = 0;
  for (const auto& trial : trials) {
    const bool predicted_congruent = trial.measure <= median;
    correct += predicted_congruent == (trial.condition == Condition::congruent);
  }
  const double total = static_cast<double>(trials.size());
  const Probability accuracy(static_cast<double>(correct) / total);
  const DPrime dprime = dprime_from_accuracy(edge_corrected(accuracy, total));
  return {accuracy, dprime, median};
}

double optimal_threshold(Family family, double mu1, double mu2) {
  const double midpoint = 0.5 * (mu1 + mu2);
  return family == Family::normal ? midpoint : std::exp(midpoint);
}

GrandMedianResult grand_median_dprime(const HistogramPair& hist) {
  const auto& edges = hist.bin_edges;
  const std::size_t bins = hist.congruent_counts.size();
  if (edges.size() < 2 || bins != edges.size() - 1 || hist.incongruent_counts.size() != bins) {
    fail(ErrorKind::degenerate_input,
         "histogram needs edges.size() - 1 counts per condition and at least one bin");
  }
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (!(edges[i] < edges[i + 1])) {
      fail(ErrorKind::degenerate_input, "histogram bin edges must be strictly increasing");
    }
  }
  const auto nonnegative = [](double c) { return c >= 0.0 && std::isfinite(c); };
  if (!std::all_of(hist.congruent_counts.begin(), hist.congruent_counts.end(), nonnegative) ||
      !std::all_of(hist.incongruent_counts.begin(), hist.incongruent_counts.end(), nonnegative)) {
    fail(ErrorKind::degenerate_input, "histogram counts must be finite and non-negative");
  }
  const double congruent_total =
      std::accumulate(hist.congruent_counts.begin(), hist.congruent_counts.end(), 0.0);
  const double incongruent_total =
      std::accumulate(hist.incongruent_counts.begin(), hist.incongruent_counts.end(), 0.0);
  if (!(congruent_total > 0.0) || !(incongruent_total > 0.0)) {
    fail(ErrorKind::degenerate_input, "histogram needs mass in both conditions");
  }
  const double total = congruent_total + incongruent_total;

  // Locate the pooled median by linear interpolation in its bin.
  const double half = 0.5 * total;
  double cumulative = 0.0;
  std::size_t median_bin = bins - 1;
  double fraction = 1.0;
  for (std::size_t i = 0; i < bins; ++i) {
    const double pooled = hist.congruent_counts[i] + hist.incongruent_counts[i];
    if (pooled > 0.0 && cumulative + pooled >= half) {
      median_bin = i;
      fraction = (half - cumulative) / pooled;
      break;
    }
    cumulative += pooled;
  }
  const double median =
      edges[median_bin] + fraction * (edges[median_bin + 1] - edges[median_bin]);

  double congruent_below = 0.0;
  double incongruent_above = 0.0;
  for (std::size_t i = 0; i < bins; ++i) {
    if (i < median_bin) {
      congruent_below += hist.congruent_counts[i];
    } else if (i == median_bin) {
      congruent_below += fraction * hist.congruent_counts[i];
      incongruent_above += (1.0 - fraction) * hist.incongruent_counts[i];
    } else {
      incongruent_above += hist.incongruent_counts[i];
    }
  }
  const double accuracy = (congruent_below + incongruent_above) / total;
  const DPrime dprime = dprime_from_accuracy(edge_corrected(Probability(accuracy), total));
  // Binomial SE of accuracy through the slope of h.
  const double se = 5.0 * std::sqrt(accuracy * (1.0 - accuracy) / total);
  return {dprime, se, accuracy, median, total};
}

DPrime direct_dprime(std::span<const DirectTrial> trials) {
  double a_trials = 0.0, a_hits = 0.0, b_trials = 0.0, b_false_alarms = 0.0;
  for (const auto& trial : trials) {
    const bool said_a = trial.response == Stimulus::a;
    if (trial.stimulus == Stimulus::a) {
      a_trials += 1.0;
      a_hits += said_a;
    } else {
      b_trials += 1.0;
      b_false_alarms += said_a;
    }
  }
  if (a_trials == 0.0 || b_trials == 0.0) {
    fail(ErrorKind::degenerate_input, "direct d' needs trials from both stimulus classes");
  }
  const auto hit = edge_corrected(Probability(a_hits / a_trials), a_trials);
  const auto false_alarm = edge_corrected(Probability(b_false_alarms / b_trials), b_trials);
  return DPrime(std_normal_quantile(hit) - std_normal_quantile(false_alarm));
}

namespace {

TaskSummary summarize_task(std::span<const double> values) {
  TaskSummary summary;
  summary.n = static_cast<int>(values.size());
  if (values.empty()) return summary;
  const double n = static_cast<double>(values.size());
  summary.mean_dprime = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - summary.mean_dprime) * (v - summary.mean_dprime);
    summary.sd_dprime = std::sqrt(ss / (n - 1.0));
  }
  return summary;
}

}  // namespace

AppropriateResult compare_sensitivities(std::span<const double> direct,
                                        std::span<const double> indirect, Pairing pairing,
                                        double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    fail(ErrorKind::domain, "alpha must lie in (0, 1)");
  }
  if (direct.size() < 2 || indirect.size() < 2) {
    fail(ErrorKind::insufficient_data,
         "difference test needs at least two participants per task (direct: " +
             std::to_string(direct.size()) + ", indirect: " + std::to_string(indirect.size()) +
             ")");
  }
  AppropriateResult result;
  result.direct = summarize_task(direct);
  result.indirect = summarize_task(indirect);
  const double d_diff = result.indirect.mean_dprime - result.direct.mean_dprime;

  double se = 0.0;
  if (pairing == Pairing::within_subject) {
    if (direct.size() != indirect.size()) {
      fail(ErrorKind::insufficient_data, "paired comparison needs equal participant counts");
    }
    std::vector<double> differences(direct.size());
    for (std::size_t i = 0; i < direct.size(); ++i) differences[i] = indirect[i] - direct[i];
    const auto paired = summarize_task(differences);
    se = paired.sd_dprime / std::sqrt(static_cast<double>(paired.n));
    result.df = paired.n - 1.0;
  } else {
    const double v_direct = result.direct.sd_dprime * result.direct.sd_dprime / result.direct.n;
    const double v_indirect =
        result.indirect.sd_dprime * result.indirect.sd_dprime / result.indirect.n;
    se = std::sqrt(v_direct + v_indirect);
    const double denominator = v_direct * v_direct / (result.direct.n - 1.0) +
                               v_indirect * v_indirect / (result.indirect.n - 1.0);
    // Welch-Satterthwaite; with zero spread in both groups fall back to the
    // smaller group's df.
    result.df = denominator > 0.0
                    ? (v_direct + v_indirect) * (v_direct + v_indirect) / denominator
                    : std::min(result.direct.n, result.indirect.n) - 1.0;
    result.df = std::max(result.df, 1.0);
  }
  const double critical = student_t_quantile(Probability(1.0 - alpha / 2.0), result.df);
  result.difference = make_difference(d_diff, se, critical, alpha);
  return result;
}

AppropriateResult appropriate_analysis(const TrialDataset& dataset, double alpha) {
  validate(dataset);
  std::vector<double> direct;
  std::vector<double> indirect;
  for (const auto& participant : dataset.participants) {
    if (!participant.direct.empty()) direct.push_back(direct_dprime(participant.direct).value);
    if (!participant.indirect.empty()) {
      indirect.push_back(median_split_dprime(participant.indirect).dprime.value);
    }
  }
  return compare_sensitivities(direct, indirect, dataset.pairing, alpha);
}

}  // namespace priming

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "priming/estimators.hpp"

namespace priming {

enum class Task { direct, indirect };
enum class StatKind { dprime, percent_correct, t_value, f_value };

std::string_view to_string(Task task) noexcept;
std::string_view to_string(StatKind kind) noexcept;

/// One reported statistic from a published study.
struct StudyRecord {
  std::string study_id;
  std::string row_label;
  Task task = Task::direct;
  StatKind stat_kind = StatKind::dprime;
  double stat_value = 0.0;
  int n_participants = 0;
  double total_trials = 0.0;  // per participant, both conditions together
  std::string group_key;      // links indirect rows to their direct row
  std::string notes;

  double trials_per_condition() const noexcept { return total_trials / 2.0; }
};

/// Schema-checks a record list: field ranges, task/statistic compatibility,
/// unique (study_id, row_label), and exactly one direct row per group_key that
/// an indirect row refers to.
void validate(const std::vector<StudyRecord>& records);

/// {"schema_version": 1, "records": [...]}; empty input yields no records.
std::vector<StudyRecord> parse_records_json(std::string_view text);

/// Header row with the StudyRecord field names; notes may be omitted.
std::vector<StudyRecord> parse_records_csv(std::string_view text);

/// Reads a .csv file as CSV and anything else as JSON, then validates.
std::vector<StudyRecord> load_records(const std::string& path);

struct ReanalysisRow {
  StudyRecord direct;
  StudyRecord indirect;
  SensitivityEstimate direct_estimate;
  SensitivityEstimate indirect_estimate;
  DifferenceResult difference;
  double q_squared_used = 0.0;
};

/// Pairs each indirect row with its direct row, in fixture order.
std::vector<ReanalysisRow> reanalyze(const std::vector<StudyRecord>& records, double q2,
                                     double alpha = 0.05);

SensitivityEstimate estimate_record(const StudyRecord& record, double q2);

struct VerdictSummary {
  std::map<Verdict, int> counts;
  int total = 0;

  int count(Verdict v) const;
};

VerdictSummary summarize(const std::vector<ReanalysisRow>& rows);

/// "ITA: 8  inconclusive: 35  DTA: 1"
std::string summary_line(const VerdictSummary& summary);

/// format: "csv", "json" or "markdown". Throws ErrorKind::usage otherwise.
std::string export_report(const std::vector<ReanalysisRow>& rows, const VerdictSummary& summary,
                          std::string_view format);

}  // namespace priming

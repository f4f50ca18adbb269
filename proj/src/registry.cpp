#include "priming/registry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cctype>
#include <cstdio>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "priming/errors.hpp"
#include "priming/trial_io.hpp"

namespace priming {

namespace {

Task parse_task(const std::string& s, const std::string& where) {
  if (s == "direct") return Task::direct;
  if (s == "indirect") return Task::indirect;
  fail(ErrorKind::parse, where + ": task must be 'direct' or 'indirect', got '" + s + "'");
}

StatKind parse_stat_kind(const std::string& s, const std::string& where) {
  if (s == "dprime") return StatKind::dprime;
  if (s == "percent_correct") return StatKind::percent_correct;
  if (s == "t_value") return StatKind::t_value;
  if (s == "f_value") return StatKind::f_value;
  fail(ErrorKind::parse, where + ": unknown stat_kind '" + s + "'");
}

std::string where_of(const StudyRecord& r) { return r.study_id + " / " + r.row_label; }

void check_record(const StudyRecord& r, const std::string& where) {
  auto bad = [&](const std::string& field, const std::string& what) {
    fail(ErrorKind::parse, where + ", field '" + field + "': " + what);
  };
  if (r.study_id.empty()) bad("study_id", "must not be empty");
  if (r.row_label.empty()) bad("row_label", "must not be empty");
  if (r.group_key.empty()) bad("group_key", "must not be empty");
  if (!std::isfinite(r.stat_value)) bad("stat_value", "must be finite");
  if (r.n_participants < 1) bad("n_participants", "must be >= 1");
  if (!(r.total_trials > 0.0) || !std::isfinite(r.total_trials)) bad("total_trials", "must be > 0");
  const bool direct_kind = r.stat_kind == StatKind::dprime || r.stat_kind == StatKind::percent_correct;
  if ((r.task == Task::direct) != direct_kind) {
    bad("stat_kind", std::string(to_string(r.stat_kind)) + " does not fit a " +
                         std::string(to_string(r.task)) + " row");
  }
  if (r.stat_kind == StatKind::f_value && r.stat_value < 0.0) bad("stat_value", "F must be >= 0");
  if (r.stat_kind == StatKind::percent_correct && !(r.stat_value > 0.0 && r.stat_value < 1.0)) {
    bad("stat_value", "proportion correct must lie in (0, 1)");
  }
}

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  if (quoted) fail(ErrorKind::parse, "line " + std::to_string(line_no) + ": unterminated quote");
  return fields;
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || s.empty()) {
    fail(ErrorKind::parse, where + ": '" + s + "' is not a number");
  }
  return v;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v == 0.0 ? 0.0 : v);
  return buf;
}

nlohmann::ordered_json record_json(const StudyRecord& r) {
  nlohmann::ordered_json j{{"study_id", r.study_id},
                           {"row_label", r.row_label},
                           {"task", std::string(to_string(r.task))},
                           {"stat_kind", std::string(to_string(r.stat_kind))},
                           {"stat_value", r.stat_value},
                           {"n_participants", r.n_participants},
                           {"total_trials", r.total_trials},
                           {"group_key", r.group_key}};
  if (!r.notes.empty()) j["notes"] = r.notes;
  return j;
}

std::string statistic_text(const StudyRecord& r) {
  std::ostringstream out;
  out << std::setprecision(6);
  switch (r.stat_kind) {
    case StatKind::dprime:
      out << "d' = " << r.stat_value;
      break;
    case StatKind::percent_correct:
      out << r.stat_value * 100.0 << "% correct";
      break;
    case StatKind::t_value:
      out << "t(" << r.n_participants - 1 << ") = " << r.stat_value;
      break;
    case StatKind::f_value:
      out << "F(1," << r.n_participants - 1 << ") = " << r.stat_value;
      break;
  }
  return out.str();
}

std::string csv_report(const std::vector<ReanalysisRow>& rows) {
  std::ostringstream out;
  out << "study_id,row_label,d_direct,se_direct,d_indirect,se_indirect,d_diff,se_diff,ci_low,"
         "ci_high,verdict,q2\n";
  for (const auto& r : rows) {
    out << csv_escape(r.indirect.study_id) << ',' << csv_escape(r.indirect.row_label) << ','
        << fixed(r.direct_estimate.d_est, 6) << ',' << fixed(r.direct_estimate.se, 6) << ','
        << fixed(r.indirect_estimate.d_est, 6) << ',' << fixed(r.indirect_estimate.se, 6) << ','
        << fixed(r.difference.d_diff, 6) << ',' << fixed(r.difference.se_diff, 6) << ','
        << fixed(r.difference.ci_low, 6) << ',' << fixed(r.difference.ci_high, 6) << ','
        << to_string(r.difference.verdict) << ',' << fixed(r.q_squared_used, 6) << '\n';
  }
  return out.str();
}

nlohmann::ordered_json estimate_json(const SensitivityEstimate& e) {
  return {{"d_est", e.d_est}, {"se", e.se}, {"source", std::string(to_string(e.source))}};
}

std::string json_report(const std::vector<ReanalysisRow>& rows, const VerdictSummary& summary) {
  using nlohmann::ordered_json;
  ordered_json records = ordered_json::array();
  std::set<std::pair<std::string, std::string>> seen;
  auto add = [&](const StudyRecord& r) {
    if (seen.insert({r.study_id, r.row_label}).second) records.push_back(record_json(r));
  };
  ordered_json out_rows = ordered_json::array();
  for (const auto& r : rows) {
    add(r.direct);
    add(r.indirect);
    out_rows.push_back({{"study_id", r.indirect.study_id},
                        {"row_label", r.indirect.row_label},
                        {"direct_row_label", r.direct.row_label},
                        {"direct", estimate_json(r.direct_estimate)},
                        {"indirect", estimate_json(r.indirect_estimate)},
                        {"d_diff", r.difference.d_diff},
                        {"se_diff", r.difference.se_diff},
                        {"ci_low", r.difference.ci_low},
                        {"ci_high", r.difference.ci_high},
                        {"verdict", std::string(to_string(r.difference.verdict))},
                        {"q2", r.q_squared_used}});
  }
  ordered_json j{{"schema_version", 1},
                 {"summary",
                  {{"ITA", summary.count(Verdict::ita)},
                   {"inconclusive", summary.count(Verdict::inconclusive)},
                   {"DTA", summary.count(Verdict::dta)},
                   {"total", summary.total}}},
                 {"rows", out_rows},
                 {"records", records}};
  return j.dump(2) + "\n";
}

std::string pm(double d, double se) { return fixed(d, 2) + " ± " + fixed(se, 2); }

std::string markdown_report(const std::vector<ReanalysisRow>& rows,
                            const VerdictSummary& summary) {
  std::ostringstream out;
  out << "# Reanalysis (q² = " << fixed(rows.front().q_squared_used, 4) << ")\n";
  std::string study;
  std::string direct_key;
  for (const auto& r : rows) {
    if (r.indirect.study_id != study) {
      study = r.indirect.study_id;
      direct_key.clear();
      out << "\n## " << study << "\n\n"
          << "| Task | N | no. of trials | Statistic | d' estimated ± SE | d' diff ± SE diff "
             "| 95% CI | Verdict |\n"
          << "|---|---|---|---|---|---|---|---|\n";
    }
    if (r.direct.row_label != direct_key) {
      direct_key = r.direct.row_label;
      out << "| " << r.direct.row_label << " | " << r.direct.n_participants << " | "
          << r.direct.total_trials << " | " << statistic_text(r.direct) << " | "
          << pm(r.direct_estimate.d_est, r.direct_estimate.se) << " | | | |\n";
    }
    out << "| " << r.indirect.row_label << " | " << r.indirect.n_participants << " | "
        << r.indirect.total_trials << " | " << statistic_text(r.indirect) << " | "
        << pm(r.indirect_estimate.d_est, r.indirect_estimate.se) << " | "
        << pm(r.difference.d_diff, r.difference.se_diff) << " | [" << fixed(r.difference.ci_low, 2)
        << ", " << fixed(r.difference.ci_high, 2) << "] | " << to_string(r.difference.verdict)
        << " |\n";
  }
  out << "\n" << summary_line(summary) << "\n";
  return out.str();
}

}  // namespace

std::string_view to_string(Task task) noexcept {
  return task == Task::direct ? "direct" : "indirect";
}

std::string_view to_string(StatKind kind) noexcept {
  switch (kind) {
    case StatKind::dprime: return "dprime";
    case StatKind::percent_correct: return "percent_correct";
    case StatKind::t_value: return "t_value";
    case StatKind::f_value: return "f_value";
  }
  return "unknown";
}

void validate(const std::vector<StudyRecord>& records) {
  std::set<std::pair<std::string, std::string>> keys;
  std::map<std::string, int> direct_rows;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    check_record(r, "record " + std::to_string(i + 1));
    if (!keys.insert({r.study_id, r.row_label}).second) {
      fail(ErrorKind::parse, "record " + std::to_string(i + 1) + ": duplicate (study_id, row_label) " +
                                 where_of(r));
    }
    if (r.task == Task::direct) ++direct_rows[r.group_key];
  }
  for (const auto& r : records) {
    if (r.task != Task::indirect) continue;
    const auto it = direct_rows.find(r.group_key);
    const int hits = it == direct_rows.end() ? 0 : it->second;
    if (hits != 1) {
      fail(ErrorKind::linkage, where_of(r) + ": group_key '" + r.group_key + "' matches " +
                                   std::to_string(hits) + " direct rows (expected 1)");
    }
  }
}

std::vector<StudyRecord> parse_records_json(std::string_view text) {
  if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) {
    return {};
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("studies JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("records") || !doc["records"].is_array()) {
    fail(ErrorKind::parse, "studies JSON: expected an object with a 'records' array");
  }
  if (doc.contains("schema_version") && doc["schema_version"] != 1) {
    fail(ErrorKind::parse, "studies JSON: unsupported schema_version");
  }
  std::vector<StudyRecord> out;
  std::size_t index = 0;
  for (const auto& item : doc["records"]) {
    const std::string where = "record " + std::to_string(++index);
    if (!item.is_object()) fail(ErrorKind::parse, where + ": not an object");
    auto field = [&](const char* key) -> const nlohmann::json& {
      if (!item.contains(key)) fail(ErrorKind::parse, where + ": missing field '" + key + "'");
      return item.at(key);
    };
    auto text_field = [&](const char* key) {
      const auto& v = field(key);
      if (!v.is_string()) fail(ErrorKind::parse, where + ", field '" + key + "': expected a string");
      return v.get<std::string>();
    };
    auto number_field = [&](const char* key) {
      const auto& v = field(key);
      if (!v.is_number()) fail(ErrorKind::parse, where + ", field '" + key + "': expected a number");
      return v.get<double>();
    };
    StudyRecord r;
    r.study_id = text_field("study_id");
    r.row_label = text_field("row_label");
    r.task = parse_task(text_field("task"), where);
    r.stat_kind = parse_stat_kind(text_field("stat_kind"), where);
    r.stat_value = number_field("stat_value");
    const double n = number_field("n_participants");
    if (n != std::floor(n) || n < 1 || n > 1e9) {
      fail(ErrorKind::parse, where + ", field 'n_participants': expected a positive integer");
    }
    r.n_participants = static_cast<int>(n);
    r.total_trials = number_field("total_trials");
    r.group_key = text_field("group_key");
    if (item.contains("notes") && !item["notes"].is_null()) r.notes = text_field("notes");
    check_record(r, where);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<StudyRecord> parse_records_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  std::vector<StudyRecord> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_csv_line(line, line_no);
    if (header.empty()) {
      header = std::move(fields);
      for (const char* required : {"study_id", "row_label", "task", "stat_kind", "stat_value",
                                   "n_participants", "total_trials", "group_key"}) {
        if (std::find(header.begin(), header.end(), required) == header.end()) {
          fail(ErrorKind::parse, "line " + std::to_string(line_no) + ": header lacks '" +
                                     required + "'");
        }
      }
      continue;
    }
    const std::string where = "line " + std::to_string(line_no);
    if (fields.size() != header.size()) {
      fail(ErrorKind::parse, where + ": expected " + std::to_string(header.size()) +
                                 " fields, got " + std::to_string(fields.size()));
    }
    auto get = [&](const std::string& name) {
      const auto it = std::find(header.begin(), header.end(), name);
      return it == header.end() ? std::string() : fields[it - header.begin()];
    };
    StudyRecord r;
    r.study_id = get("study_id");
    r.row_label = get("row_label");
    r.task = parse_task(get("task"), where);
    r.stat_kind = parse_stat_kind(get("stat_kind"), where);
    r.stat_value = parse_double(get("stat_value"), where + ", field 'stat_value'");
    const double n = parse_double(get("n_participants"), where + ", field 'n_participants'");
    if (n != std::floor(n) || n < 1 || n > 1e9) {
      fail(ErrorKind::parse, where + ", field 'n_participants': expected a positive integer");
    }
    r.n_participants = static_cast<int>(n);
    r.total_trials = parse_double(get("total_trials"), where + ", field 'total_trials'");
    r.group_key = get("group_key");
    r.notes = get("notes");
    check_record(r, where);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<StudyRecord> load_records(const std::string& path) {
  const std::string text = read_text_file(path);
  const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  auto records = csv ? parse_records_csv(text) : parse_records_json(text);
  validate(records);
  return records;
}

SensitivityEstimate estimate_record(const StudyRecord& r, double q2) {
  const double m = r.trials_per_condition();
  switch (r.stat_kind) {
    case StatKind::dprime:
      return estimate_direct_from_dprime(DPrime(r.stat_value), r.n_participants, m, q2);
    case StatKind::percent_correct:
      return estimate_direct_from_accuracy(Probability(r.stat_value), r.n_participants, m, q2);
    case StatKind::t_value:
      return estimate_indirect_from_t(r.stat_value, r.n_participants, m, q2);
    case StatKind::f_value:
      return estimate_indirect_from_f(r.stat_value, r.n_participants, m, q2);
  }
  fail(ErrorKind::parse, "unknown stat_kind");
}

std::vector<ReanalysisRow> reanalyze(const std::vector<StudyRecord>& records, double q2,
                                     double alpha) {
  validate(records);
  std::map<std::string, const StudyRecord*> direct_by_key;
  for (const auto& r : records) {
    if (r.task == Task::direct) direct_by_key[r.group_key] = &r;
  }
  std::vector<ReanalysisRow> rows;
  for (const auto& r : records) {
    if (r.task != Task::indirect) continue;
    const StudyRecord& direct = *direct_by_key.at(r.group_key);
    try {
      ReanalysisRow row;
      row.direct = direct;
      row.indirect = r;
      row.direct_estimate = estimate_record(direct, q2);
      row.indirect_estimate = estimate_record(r, q2);
      row.difference = difference(row.direct_estimate, row.indirect_estimate, alpha);
      row.q_squared_used = q2;
      rows.push_back(std::move(row));
    } catch (const Error& e) {
      throw Error(e.kind(), where_of(r) + ": " + e.what());
    }
  }
  return rows;
}

int VerdictSummary::count(Verdict v) const {
  const auto it = counts.find(v);
  return it == counts.end() ? 0 : it->second;
}

VerdictSummary summarize(const std::vector<ReanalysisRow>& rows) {
  if (rows.empty()) fail(ErrorKind::insufficient_data, "no reanalysis rows to summarize");
  VerdictSummary s;
  for (Verdict v : {Verdict::ita, Verdict::inconclusive, Verdict::dta}) s.counts[v] = 0;
  for (const auto& r : rows) ++s.counts[r.difference.verdict];
  s.total = static_cast<int>(rows.size());
  return s;
}

std::string summary_line(const VerdictSummary& s) {
  return "ITA: " + std::to_string(s.count(Verdict::ita)) +
         "  inconclusive: " + std::to_string(s.count(Verdict::inconclusive)) +
         "  DTA: " + std::to_string(s.count(Verdict::dta));
}

std::string export_report(const std::vector<ReanalysisRow>& rows, const VerdictSummary& summary,
                          std::string_view format) {
  if (format != "csv" && format != "json" && format != "markdown") {
    fail(ErrorKind::usage, "unknown report format '" + std::string(format) +
                               "' (expected csv, json or markdown)");
  }
  if (rows.empty()) fail(ErrorKind::insufficient_data, "no reanalysis rows to export");
  if (format == "csv") return csv_report(rows);
  if (format == "json") return json_report(rows, summary);
  return markdown_report(rows, summary);
}

}  // namespace priming

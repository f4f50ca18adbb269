#include "priming/trial_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "priming/errors.hpp"

namespace priming {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

[[noreturn]] void parse_failure(std::size_t line, std::string_view field, const std::string& what) {
  std::ostringstream msg;
  msg << "line " << line << ", field '" << field << "': " << what;
  fail(ErrorKind::parse, msg.str());
}

double parse_number(std::string_view text, std::size_t line, std::string_view field) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    parse_failure(line, field, "expected a finite number, got '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::usage, "cannot open file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

TrialDataset parse_trial_csv(std::string_view text, std::optional<Pairing> pairing) {
  static constexpr std::array<std::string_view, 4> required = {"participant_id", "task",
                                                               "condition", "value"};
  std::array<std::size_t, 4> column{};
  bool have_header = false;

  TrialDataset dataset;
  std::map<std::string, std::size_t, std::less<>> index_of;

  std::size_t line_number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto newline = text.find('\n', pos);
    if (newline == std::string_view::npos) newline = text.size();
    const auto line = trim(text.substr(pos, newline - pos));
    pos = newline + 1;
    ++line_number;
    if (line.empty() || line.front() == '#') continue;

    const auto fields = split_fields(line);
    if (!have_header) {
      for (std::size_t r = 0; r < required.size(); ++r) {
        const auto it = std::find(fields.begin(), fields.end(), required[r]);
        if (it == fields.end()) parse_failure(line_number, required[r], "missing header column");
        column[r] = static_cast<std::size_t>(it - fields.begin());
      }
      have_header = true;
      continue;
    }
    const std::size_t needed = *std::max_element(column.begin(), column.end()) + 1;
    if (fields.size() < needed) {
      parse_failure(line_number, "row", "expected at least " + std::to_string(needed) + " fields");
    }
    const auto id = fields[column[0]];
    const auto task = fields[column[1]];
    const auto condition = fields[column[2]];
    const auto value = fields[column[3]];
    if (id.empty()) parse_failure(line_number, "participant_id", "empty identifier");

    auto [it, inserted] = index_of.try_emplace(std::string(id), dataset.participants.size());
    if (inserted) dataset.participants.push_back(ParticipantData{std::string(id), {}, {}});
    auto& participant = dataset.participants[it->second];

    if (task == "direct") {
      const auto parse_stimulus = [&](std::string_view s, std::string_view field) {
        if (s == "A" || s == "a") return Stimulus::a;
        if (s == "B" || s == "b") return Stimulus::b;
        parse_failure(line_number, field, "expected A or B, got '" + std::string(s) + "'");
      };
      participant.direct.push_back(
          {parse_stimulus(condition, "condition"), parse_stimulus(value, "value")});
    } else if (task == "indirect") {
      Condition c{};
      if (condition == "congruent") {
        c = Condition::congruent;
      } else if (condition == "incongruent") {
        c = Condition::incongruent;
      } else {
        parse_failure(line_number, "condition",
                      "expected congruent or incongruent, got '" + std::string(condition) + "'");
      }
      participant.indirect.push_back({c, parse_number(value, line_number, "value")});
    } else {
      parse_failure(line_number, "task",
                    "expected direct or indirect, got '" + std::string(task) + "'");
    }
  }
  if (!have_header && !text.empty()) parse_failure(line_number, "header", "no header row");

  if (pairing) {
    dataset.pairing = *pairing;
  } else {
    const bool all_both = std::all_of(
        dataset.participants.begin(), dataset.participants.end(),
        [](const ParticipantData& p) { return !p.direct.empty() && !p.indirect.empty(); });
    dataset.pairing = all_both ? Pairing::within_subject : Pairing::between_groups;
  }
  return dataset;
}

TrialDataset load_trial_csv(const std::filesystem::path& path, std::optional<Pairing> pairing) {
  return parse_trial_csv(read_text_file(path), pairing);
}

HistogramPair parse_histogram_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::parse, std::string("histogram JSON: ") + e.what());
  }
  HistogramPair hist;
  const auto read_array = [&](const char* key, std::vector<double>& out) {
    if (!doc.is_object() || !doc.contains(key) || !doc[key].is_array()) {
      fail(ErrorKind::parse, std::string("histogram JSON: field '") + key + "' must be an array");
    }
    for (const auto& v : doc[key]) {
      if (!v.is_number()) {
        fail(ErrorKind::parse, std::string("histogram JSON: field '") + key +
                                   "' must contain numbers only");
      }
      out.push_back(v.get<double>());
    }
  };
  read_array("bin_edges", hist.bin_edges);
  read_array("congruent_counts", hist.congruent_counts);
  read_array("incongruent_counts", hist.incongruent_counts);
  return hist;
}

HistogramPair load_histogram_json(const std::filesystem::path& path) {
  return parse_histogram_json(read_text_file(path));
}

}  // namespace priming

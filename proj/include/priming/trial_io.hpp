#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "priming/classifier.hpp"

namespace priming {

/// Parses delimited trial data. The header must name the columns
/// participant_id, task, condition and value (in any order). Direct rows carry
/// condition A|B and value A|B (the response); indirect rows carry
/// condition congruent|incongruent and a numeric value.
///
/// Without an explicit pairing the dataset is within-subject when every
/// participant has both tasks, between-groups otherwise.
TrialDataset parse_trial_csv(std::string_view text, std::optional<Pairing> pairing = {});
TrialDataset load_trial_csv(const std::filesystem::path& path,
                            std::optional<Pairing> pairing = {});

/// {"bin_edges": [...], "congruent_counts": [...], "incongruent_counts": [...]}
HistogramPair parse_histogram_json(std::string_view text);
HistogramPair load_histogram_json(const std::filesystem::path& path);

/// Reads a whole file; missing files raise ErrorKind::usage.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace priming

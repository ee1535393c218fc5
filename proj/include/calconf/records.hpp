// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace calconf {

/// Slack allowed above zero for stored log-probabilities.
inline constexpr double kLogProbTolerance = 1e-6;
/// Maximum |seq_log_prob - sum(token log_probs)|.
inline constexpr double kSequenceSumTolerance = 1e-4;
/// Dropout sample count a record must carry when it carries any.
inline constexpr std::size_t kDropoutSampleCount = 10;

struct AltEntry {
  std::string token;
  double prob = 0.0;

  friend bool operator==(const AltEntry&, const AltEntry&) = default;
};

/// One decoded position. Log-probabilities and entropies are in nats.
struct TokenInfo {
  std::string token;
  double log_prob = 0.0;
  std::optional<double> entropy;
  /// Top-V vocabulary entries at this position, sorted by descending probability.
  std::optional<std::vector<AltEntry>> alt_dist;

  friend bool operator==(const TokenInfo&, const TokenInfo&) = default;
};

/// A decoded sequence: a beam-search hypothesis or a dropout sample.
struct Beam {
  std::string text;
  std::vector<TokenInfo> tokens;
  double seq_log_prob = 0.0;

  friend bool operator==(const Beam&, const Beam&) = default;
};

using DropoutSample = Beam;

struct GenerationRecord {
  std::string id;
  std::string input;
  std::vector<std::string> references;
  std::string task;
  /// Sorted by seq_log_prob, non-increasing.
  std::vector<Beam> beams;
  /// Empty, or exactly kDropoutSampleCount entries.
  std::vector<DropoutSample> dropout_samples;

  const Beam& top_beam() const { return beams.front(); }

  friend bool operator==(const GenerationRecord&, const GenerationRecord&) = default;
};

/// Counters accumulated while parsing.
struct ParseStats {
  std::size_t reordered_records = 0;
  std::size_t skipped_lines = 0;
};

/// Parses one record line. `line_number` is used in error messages only. Beams that are
/// out of order are re-sorted and counted in `stats`.
/// Throws ParseError on malformed syntax, ValidationError on invariant violations.
GenerationRecord parse_record(std::string_view line, std::size_t line_number = 1,
                              ParseStats* stats = nullptr);

/// Single-line JSON encoding; doubles are written with round-trip precision.
std::string serialize_record(const GenerationRecord& record);

/// Checks every record invariant except beam order. Throws ValidationError.
void validate_record(const GenerationRecord& record);

struct Dataset {
  std::vector<GenerationRecord> records;
  ParseStats stats;
};

/// Reads one record per line. Blank lines and lines starting with '#' (the harvester's
/// `#meta` header) are skipped. Throws IoError, ParseError, ValidationError.
Dataset load_dataset(const std::string& path);

/// Parses an in-memory stream of lines; same rules as load_dataset.
Dataset parse_dataset(std::string_view text);

void write_dataset(const std::string& path, const std::vector<GenerationRecord>& records);

struct Split {
  std::vector<GenerationRecord> validation;
  std::vector<GenerationRecord> test;
};

/// Seeded Fisher-Yates shuffle, then the first `val_size` records form the validation set.
/// Requires 0 < val_size < records.size(); throws UsageError otherwise.
Split split_dataset(const std::vector<GenerationRecord>& records, std::size_t val_size,
                    std::uint64_t seed);

}  // namespace calconf

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "calconf/calibration.hpp"
#include "calconf/confidence.hpp"
#include "calconf/quality.hpp"

namespace calconf {

// Line formats shared by the pipeline stages. Every line is one JSON object keyed by
// record id:
//   score:   {"id", "scores": {method: {"value", "higher_is_confident"} | {"skipped": reason}}}
//   quality: {"id", "metric", "value"}

struct ScoreEntry {
  std::string method;
  std::optional<double> value;
  bool higher_is_confident = true;
  std::string skip_reason;
};

struct ScoreRow {
  std::string id;
  std::vector<ScoreEntry> entries;
};

struct QualityRow {
  std::string id;
  std::string metric;
  double value = 0.0;
};

ScoreRow to_score_row(const std::string& id, std::span<const MethodOutcome> outcomes);
std::string score_row_to_json(const ScoreRow& row);
std::string quality_row_to_json(const QualityRow& row);

/// Throw ParseError with the offending line number.
std::vector<ScoreRow> parse_scores(std::string_view text);
std::vector<QualityRow> parse_qualities(std::string_view text);
std::vector<CalibrationReport> parse_reports(std::string_view text);

/// Whole-file helpers; IoError on open/read/write failure.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

/// translation -> bleu, qa -> f1, summarization -> rouge_l.
/// Throws ValidationError naming the tag for anything else.
QualityMetric metric_for_task(std::string_view task);

/// Quality of each record's top beam; `override_metric` replaces the task routing.
std::vector<QualityRow> score_quality(std::span<const GenerationRecord> records,
                                      std::optional<QualityMetric> override_metric);

/// Per-method series in order of first appearance; skipped entries are dropped.
std::vector<MethodSeries> method_series(const std::vector<ScoreRow>& scores);
KeyedSeries quality_series(const std::vector<QualityRow>& qualities);

/// Correlates a score file with a quality file. The two must cover exactly the same ids
/// (ValidationError otherwise).
CalibrationReport correlate(const std::vector<ScoreRow>& scores, const std::vector<QualityRow>& qualities,
                            std::string dataset, std::string model, const BootstrapOptions& options);

/// Qualities reordered to follow `records`; ValidationError when a record has none.
std::vector<double> qualities_for(std::span<const GenerationRecord> records,
                                  const std::vector<QualityRow>& qualities);

}  // namespace calconf

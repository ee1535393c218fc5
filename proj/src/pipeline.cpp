// SPDX-License-Identifier: Apache-2.0
#include "calconf/pipeline.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "calconf/errors.hpp"
#include "json.hpp"

namespace calconf {
namespace {

using nlohmann::ordered_json;

// Calls fn(line, line_number) for each non-blank line that does not start with '#'.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_number = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos || line.front() == '#') continue;
    fn(line, line_number);
  }
}

ordered_json parse_object(std::string_view line, std::size_t line_number) {
  ordered_json doc = ordered_json::parse(line.begin(), line.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw ParseError(line_number, "malformed JSON object");
  return doc;
}

}  // namespace

ScoreRow to_score_row(const std::string& id, std::span<const MethodOutcome> outcomes) {
  ScoreRow row{id, {}};
  for (const auto& outcome : outcomes) {
    ScoreEntry entry;
    entry.method = std::string(method_name(outcome.method));
    entry.higher_is_confident = higher_is_confident(outcome.method);
    if (outcome.score) {
      entry.value = outcome.score->value;
    } else {
      entry.skip_reason = outcome.skip_reason;
    }
    row.entries.push_back(std::move(entry));
  }
  return row;
}

std::string score_row_to_json(const ScoreRow& row) {
  ordered_json scores = ordered_json::object();
  for (const auto& entry : row.entries) {
    if (entry.value) {
      scores[entry.method] = {{"value", *entry.value}, {"higher_is_confident", entry.higher_is_confident}};
    } else {
      scores[entry.method] = {{"skipped", entry.skip_reason}};
    }
  }
  return ordered_json{{"id", row.id}, {"scores", std::move(scores)}}.dump();
}

std::string quality_row_to_json(const QualityRow& row) {
  return ordered_json{{"id", row.id}, {"metric", row.metric}, {"value", row.value}}.dump();
}

std::vector<ScoreRow> parse_scores(std::string_view text) {
  std::vector<ScoreRow> rows;
  for_each_line(text, [&](std::string_view line, std::size_t line_number) {
    const ordered_json doc = parse_object(line, line_number);
    try {
      ScoreRow row;
      row.id = doc.at("id").get<std::string>();
      for (const auto& [method, value] : doc.at("scores").items()) {
        ScoreEntry entry;
        entry.method = method;
        if (value.contains("skipped")) {
          entry.skip_reason = value.at("skipped").get<std::string>();
          entry.higher_is_confident = higher_is_confident(parse_method(method));
        } else {
          entry.value = value.at("value").get<double>();
          entry.higher_is_confident = value.at("higher_is_confident").get<bool>();
        }
        row.entries.push_back(std::move(entry));
      }
      rows.push_back(std::move(row));
    } catch (const ordered_json::exception& e) {
      throw ParseError(line_number, std::string("score line: ") + e.what());
    } catch (const UsageError& e) {
      throw ParseError(line_number, e.what());
    }
  });
  return rows;
}

std::vector<QualityRow> parse_qualities(std::string_view text) {
  std::vector<QualityRow> rows;
  for_each_line(text, [&](std::string_view line, std::size_t line_number) {
    const ordered_json doc = parse_object(line, line_number);
    try {
      rows.push_back({doc.at("id").get<std::string>(), doc.at("metric").get<std::string>(),
                      doc.at("value").get<double>()});
    } catch (const ordered_json::exception& e) {
      throw ParseError(line_number, std::string("quality line: ") + e.what());
    }
  });
  return rows;
}

std::vector<CalibrationReport> parse_reports(std::string_view text) {
  std::vector<CalibrationReport> reports;
  for_each_line(text, [&](std::string_view line, std::size_t line_number) {
    reports.push_back(report_from_json(line, line_number));
  });
  return reports;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("read failure on '" + path + "'");
  return buffer.str();
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failure on '" + path + "'");
}

QualityMetric metric_for_task(std::string_view task) {
  if (task == "translation") return QualityMetric::kBleu;
  if (task == "qa") return QualityMetric::kF1;
  if (task == "summarization") return QualityMetric::kRougeL;
  throw ValidationError("unknown task tag '" + std::string(task) +
                        "' (expected translation, qa or summarization; or pass a metric)");
}

std::vector<QualityRow> score_quality(std::span<const GenerationRecord> records,
                                      std::optional<QualityMetric> override_metric) {
  std::vector<QualityRow> rows;
  rows.reserve(records.size());
  for (const auto& record : records) {
    const QualityMetric metric = override_metric ? *override_metric : metric_for_task(record.task);
    rows.push_back({record.id, std::string(quality_metric_name(metric)),
                    quality_of_record(record, metric).value});
  }
  return rows;
}

std::vector<MethodSeries> method_series(const std::vector<ScoreRow>& scores) {
  std::vector<MethodSeries> series;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& row : scores) {
    for (const auto& entry : row.entries) {
      auto [it, inserted] = index.emplace(entry.method, series.size());
      if (inserted) series.push_back({entry.method, entry.higher_is_confident, {}});
      if (entry.value) series[it->second].scores.emplace_back(row.id, *entry.value);
    }
  }
  return series;
}

KeyedSeries quality_series(const std::vector<QualityRow>& qualities) {
  KeyedSeries series;
  series.reserve(qualities.size());
  for (const auto& row : qualities) series.emplace_back(row.id, row.value);
  return series;
}

CalibrationReport correlate(const std::vector<ScoreRow>& scores, const std::vector<QualityRow>& qualities,
                            std::string dataset, std::string model, const BootstrapOptions& options) {
  std::unordered_set<std::string_view> quality_ids;
  for (const auto& row : qualities) {
    if (!quality_ids.insert(row.id).second) throw ValidationError(row.id, "id", "duplicate quality line");
  }
  std::unordered_set<std::string_view> score_ids;
  for (const auto& row : scores) {
    if (!score_ids.insert(row.id).second) throw ValidationError(row.id, "id", "duplicate score line");
    if (!quality_ids.count(row.id)) throw ValidationError(row.id, "id", "score has no matching quality line");
  }
  for (const auto& row : qualities) {
    if (!score_ids.count(row.id)) throw ValidationError(row.id, "id", "quality has no matching score line");
  }
  return build_report(std::move(dataset), std::move(model), method_series(scores), quality_series(qualities),
                      options);
}

std::vector<double> qualities_for(std::span<const GenerationRecord> records,
                                  const std::vector<QualityRow>& qualities) {
  std::unordered_map<std::string_view, double> by_id;
  for (const auto& row : qualities) by_id.emplace(row.id, row.value);
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& record : records) {
    auto it = by_id.find(record.id);
    if (it == by_id.end()) throw ValidationError(record.id, "id", "no quality score for this record");
    out.push_back(it->second);
  }
  return out;
}

}  // namespace calconf

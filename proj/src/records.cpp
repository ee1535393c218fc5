// SPDX-License-Identifier: Apache-2.0
#include "calconf/records.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>

#include "calconf/errors.hpp"
#include "calconf/rng.hpp"
#include "json.hpp"

namespace calconf {
namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line, std::string("missing field '") + key + "'");
  return *it;
}

std::string as_string(const json& value, const char* key, std::size_t line) {
  if (!value.is_string()) throw ParseError(line, std::string("field '") + key + "' must be a string");
  return value.get<std::string>();
}

double as_number(const json& value, const char* key, std::size_t line) {
  if (!value.is_number()) throw ParseError(line, std::string("field '") + key + "' must be a number");
  return value.get<double>();
}

TokenInfo parse_token(const json& obj, std::size_t line) {
  if (!obj.is_object()) throw ParseError(line, "token entries must be objects");
  TokenInfo token;
  token.token = as_string(require(obj, "token", line), "token", line);
  token.log_prob = as_number(require(obj, "log_prob", line), "log_prob", line);
  if (auto it = obj.find("entropy"); it != obj.end() && !it->is_null()) {
    token.entropy = as_number(*it, "entropy", line);
  }
  if (auto it = obj.find("alt_dist"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) throw ParseError(line, "field 'alt_dist' must be an array");
    std::vector<AltEntry> dist;
    dist.reserve(it->size());
    for (const auto& pair : *it) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_number()) {
        throw ParseError(line, "alt_dist entries must be [token, prob] pairs");
      }
      dist.push_back({pair[0].get<std::string>(), pair[1].get<double>()});
    }
    token.alt_dist = std::move(dist);
  }
  return token;
}

Beam parse_beam(const json& obj, std::size_t line) {
  if (!obj.is_object()) throw ParseError(line, "beam entries must be objects");
  Beam beam;
  beam.text = as_string(require(obj, "text", line), "text", line);
  beam.seq_log_prob = as_number(require(obj, "seq_log_prob", line), "seq_log_prob", line);
  const json& tokens = require(obj, "tokens", line);
  if (!tokens.is_array()) throw ParseError(line, "field 'tokens' must be an array");
  beam.tokens.reserve(tokens.size());
  for (const auto& token : tokens) beam.tokens.push_back(parse_token(token, line));
  return beam;
}

std::vector<Beam> parse_beams(const json& array, const char* key, std::size_t line) {
  if (!array.is_array()) throw ParseError(line, std::string("field '") + key + "' must be an array");
  std::vector<Beam> beams;
  beams.reserve(array.size());
  for (const auto& beam : array) beams.push_back(parse_beam(beam, line));
  return beams;
}

json beam_to_json(const Beam& beam) {
  json tokens = json::array();
  for (const auto& token : beam.tokens) {
    json entry = {{"token", token.token}, {"log_prob", token.log_prob}};
    if (token.entropy) entry["entropy"] = *token.entropy;
    if (token.alt_dist) {
      json dist = json::array();
      for (const auto& alt : *token.alt_dist) dist.push_back(json::array({alt.token, alt.prob}));
      entry["alt_dist"] = std::move(dist);
    }
    tokens.push_back(std::move(entry));
  }
  return {{"text", beam.text}, {"seq_log_prob", beam.seq_log_prob}, {"tokens", std::move(tokens)}};
}

void validate_beam(const Beam& beam, const std::string& id, const std::string& where) {
  if (beam.tokens.empty()) throw ValidationError(id, where + ".tokens", "token list is empty");
  if (!std::isfinite(beam.seq_log_prob) || beam.seq_log_prob > kLogProbTolerance) {
    throw ValidationError(id, where + ".seq_log_prob", "must be a finite value <= 0");
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < beam.tokens.size(); ++t) {
    const TokenInfo& token = beam.tokens[t];
    const std::string field = where + ".tokens[" + std::to_string(t) + "]";
    if (!std::isfinite(token.log_prob) || token.log_prob > kLogProbTolerance) {
      throw ValidationError(id, field + ".log_prob",
                            "must be a finite value <= 0, got " + std::to_string(token.log_prob));
    }
    sum += token.log_prob;
    if (token.entropy && (!std::isfinite(*token.entropy) || *token.entropy < 0.0)) {
      throw ValidationError(id, field + ".entropy", "must be finite and >= 0");
    }
    if (token.alt_dist) {
      double mass = 0.0;
      double previous = 1.0;
      for (const auto& alt : *token.alt_dist) {
        if (!(alt.prob > 0.0 && alt.prob <= 1.0)) {
          throw ValidationError(id, field + ".alt_dist", "probabilities must lie in (0, 1]");
        }
        if (alt.prob > previous) {
          throw ValidationError(id, field + ".alt_dist", "entries must be sorted descending");
        }
        previous = alt.prob;
        mass += alt.prob;
      }
      if (mass > 1.0 + 1e-6) {
        throw ValidationError(id, field + ".alt_dist", "probabilities sum above 1");
      }
    }
  }
  if (std::abs(sum - beam.seq_log_prob) > kSequenceSumTolerance) {
    std::ostringstream msg;
    msg << "seq_log_prob " << beam.seq_log_prob << " differs from token sum " << sum;
    throw ValidationError(id, where + ".seq_log_prob", msg.str());
  }
}

bool beams_sorted(const std::vector<Beam>& beams) {
  return std::is_sorted(beams.begin(), beams.end(), [](const Beam& a, const Beam& b) {
    return a.seq_log_prob > b.seq_log_prob;
  });
}

}  // namespace

void validate_record(const GenerationRecord& record) {
  const std::string& id = record.id;
  if (id.empty()) throw ValidationError(id, "id", "must be non-empty");
  if (record.references.empty()) throw ValidationError(id, "references", "at least one reference required");
  if (record.beams.empty()) throw ValidationError(id, "beams", "at least one beam required");
  for (std::size_t i = 0; i < record.beams.size(); ++i) {
    validate_beam(record.beams[i], id, "beams[" + std::to_string(i) + "]");
  }
  if (!record.dropout_samples.empty() && record.dropout_samples.size() != kDropoutSampleCount) {
    throw ValidationError(id, "dropout_samples",
                          "expected 0 or " + std::to_string(kDropoutSampleCount) + " samples, got " +
                              std::to_string(record.dropout_samples.size()));
  }
  for (std::size_t i = 0; i < record.dropout_samples.size(); ++i) {
    validate_beam(record.dropout_samples[i], id, "dropout_samples[" + std::to_string(i) + "]");
  }
}

GenerationRecord parse_record(std::string_view line, std::size_t line_number, ParseStats* stats) {
  json doc = json::parse(line.begin(), line.end(), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw ParseError(line_number, "malformed JSON");
  if (!doc.is_object()) throw ParseError(line_number, "record must be a JSON object");

  GenerationRecord record;
  record.id = as_string(require(doc, "id", line_number), "id", line_number);
  record.input = as_string(require(doc, "input", line_number), "input", line_number);
  record.task = as_string(require(doc, "task", line_number), "task", line_number);
  const json& refs = require(doc, "references", line_number);
  if (!refs.is_array()) throw ParseError(line_number, "field 'references' must be an array");
  for (const auto& ref : refs) record.references.push_back(as_string(ref, "references", line_number));
  record.beams = parse_beams(require(doc, "beams", line_number), "beams", line_number);
  if (auto it = doc.find("dropout_samples"); it != doc.end() && !it->is_null()) {
    record.dropout_samples = parse_beams(*it, "dropout_samples", line_number);
  }

  validate_record(record);
  if (!beams_sorted(record.beams)) {
    std::stable_sort(record.beams.begin(), record.beams.end(), [](const Beam& a, const Beam& b) {
      return a.seq_log_prob > b.seq_log_prob;
    });
    if (stats) ++stats->reordered_records;
  }
  return record;
}

std::string serialize_record(const GenerationRecord& record) {
  json doc = {{"id", record.id},
              {"input", record.input},
              {"references", record.references},
              {"task", record.task}};
  json beams = json::array();
  for (const auto& beam : record.beams) beams.push_back(beam_to_json(beam));
  doc["beams"] = std::move(beams);
  if (!record.dropout_samples.empty()) {
    json samples = json::array();
    for (const auto& sample : record.dropout_samples) samples.push_back(beam_to_json(sample));
    doc["dropout_samples"] = std::move(samples);
  }
  return doc.dump();
}

Dataset parse_dataset(std::string_view text) {
  Dataset dataset;
  std::unordered_map<std::string, std::size_t> first_seen;
  std::size_t line_number = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos || line.front() == '#') {
      ++dataset.stats.skipped_lines;
      continue;
    }
    GenerationRecord record = parse_record(line, line_number, &dataset.stats);
    auto [it, inserted] = first_seen.emplace(record.id, line_number);
    if (!inserted) {
      throw ValidationError(record.id, "id",
                            "duplicate id on lines " + std::to_string(it->second) + " and " +
                                std::to_string(line_number));
    }
    dataset.records.push_back(std::move(record));
  }
  if (dataset.records.empty()) throw ValidationError("dataset contains no records");
  return dataset;
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("read failure on '" + path + "'");
  return parse_dataset(buffer.str());
}

void write_dataset(const std::string& path, const std::vector<GenerationRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (const auto& record : records) out << serialize_record(record) << '\n';
  if (!out) throw IoError("write failure on '" + path + "'");
}

Split split_dataset(const std::vector<GenerationRecord>& records, std::size_t val_size,
                    std::uint64_t seed) {
  if (val_size == 0 || val_size >= records.size()) {
    throw UsageError("val_size must satisfy 0 < val_size < " + std::to_string(records.size()) +
                     ", got " + std::to_string(val_size));
  }
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[uniform_index(rng, i + 1)]);
  }
  Split split;
  split.validation.reserve(val_size);
  split.test.reserve(records.size() - val_size);
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < val_size ? split.validation : split.test).push_back(records[order[i]]);
  }
  return split;
}

}  // namespace calconf

// SPDX-License-Identifier: Apache-2.0
#include "calconf/quality.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>

#include "calconf/errors.hpp"
#include "calconf/records.hpp"

namespace calconf {
namespace {

bool is_space(char ch) { return std::isspace(static_cast<unsigned char>(ch)) != 0; }

bool is_ascii_punct(char ch) {
  const auto byte = static_cast<unsigned char>(ch);
  return byte < 0x80 && std::ispunct(byte) != 0;
}

char ascii_lower(char ch) {
  const auto byte = static_cast<unsigned char>(ch);
  return byte < 0x80 ? static_cast<char>(std::tolower(byte)) : ch;
}

// Multiset of n-grams keyed by the tokens joined with a unit separator.
std::unordered_map<std::string, int> ngram_counts(TokenSpan tokens, std::size_t n) {
  std::unordered_map<std::string, int> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t j = 1; j < n; ++j) {
      key += '\x1f';
      key += tokens[i + j];
    }
    ++counts[key];
  }
  return counts;
}

std::size_t lcs_length(TokenSpan a, TokenSpan b) {
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diagonal = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t above = row[j];
      row[j] = a[i - 1] == b[j - 1] ? diagonal + 1 : std::max(row[j], row[j - 1]);
      diagonal = above;
    }
  }
  return row[b.size()];
}

}  // namespace

std::string_view quality_metric_name(QualityMetric metric) {
  switch (metric) {
    case QualityMetric::kBleu: return "bleu";
    case QualityMetric::kRougeL: return "rouge_l";
    case QualityMetric::kF1: return "f1";
    case QualityMetric::kMeteor: return "meteor";
  }
  return "unknown";
}

QualityMetric parse_quality_metric(std::string_view name) {
  if (name == "bleu") return QualityMetric::kBleu;
  if (name == "rouge_l") return QualityMetric::kRougeL;
  if (name == "f1") return QualityMetric::kF1;
  if (name == "meteor") return QualityMetric::kMeteor;
  throw UsageError("unknown quality metric '" + std::string(name) + "'");
}

Tokens tokenize(std::string_view text) {
  Tokens tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char ch : text) {
    if (is_space(ch)) {
      flush();
    } else if (is_ascii_punct(ch)) {
      flush();
      tokens.emplace_back(1, ch);
    } else {
      current += ascii_lower(ch);
    }
  }
  flush();
  return tokens;
}

Tokens normalize_answer(std::string_view text) {
  Tokens tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty() && current != "a" && current != "an" && current != "the") {
      tokens.push_back(current);
    }
    current.clear();
  };
  for (char ch : text) {
    if (is_space(ch)) {
      flush();
    } else if (!is_ascii_punct(ch)) {
      current += ascii_lower(ch);
    }
  }
  flush();
  return tokens;
}

QualityScore sentence_bleu(TokenSpan candidate, TokenSpan reference) {
  const QualityScore zero{QualityMetric::kBleu, 0.0};
  if (candidate.empty() || reference.empty()) return zero;
  double log_precision = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto cand = ngram_counts(candidate, n);
    const auto ref = ngram_counts(reference, n);
    long matched = 0;
    long total = 0;
    for (const auto& [gram, count] : cand) {
      total += count;
      if (auto it = ref.find(gram); it != ref.end()) matched += std::min(count, it->second);
    }
    double precision;
    if (n == 1) {
      if (matched == 0) return zero;
      precision = static_cast<double>(matched) / static_cast<double>(total);
    } else {
      precision = static_cast<double>(matched + 1) / static_cast<double>(total + 1);
    }
    log_precision += 0.25 * std::log(precision);
  }
  const auto c = static_cast<double>(candidate.size());
  const auto r = static_cast<double>(reference.size());
  const double brevity = c > r ? 1.0 : std::exp(1.0 - r / c);
  return {QualityMetric::kBleu, std::clamp(brevity * std::exp(log_precision), 0.0, 1.0)};
}

QualityScore rouge_l(TokenSpan candidate, TokenSpan reference) {
  if (candidate.empty() || reference.empty()) return {QualityMetric::kRougeL, 0.0};
  const auto m = static_cast<double>(lcs_length(candidate, reference));
  if (m == 0.0) return {QualityMetric::kRougeL, 0.0};
  const double precision = m / static_cast<double>(candidate.size());
  const double recall = m / static_cast<double>(reference.size());
  return {QualityMetric::kRougeL, 2.0 * precision * recall / (precision + recall)};
}

QualityScore token_f1(TokenSpan candidate, TokenSpan reference) {
  if (candidate.empty() && reference.empty()) return {QualityMetric::kF1, 1.0};
  if (candidate.empty() || reference.empty()) return {QualityMetric::kF1, 0.0};
  std::unordered_map<std::string_view, int> ref_counts;
  for (const auto& token : reference) ++ref_counts[token];
  long common = 0;
  for (const auto& token : candidate) {
    auto it = ref_counts.find(token);
    if (it != ref_counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return {QualityMetric::kF1, 0.0};
  const double precision = static_cast<double>(common) / static_cast<double>(candidate.size());
  const double recall = static_cast<double>(common) / static_cast<double>(reference.size());
  return {QualityMetric::kF1, 2.0 * precision * recall / (precision + recall)};
}

QualityScore meteor(TokenSpan candidate, TokenSpan reference) {
  const QualityScore zero{QualityMetric::kMeteor, 0.0};
  if (candidate.empty() || reference.empty()) return zero;

  // cand_to_ref[i] = aligned reference position or npos.
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::vector<std::size_t> cand_to_ref(candidate.size(), npos);
  std::vector<bool> ref_used(reference.size(), false);

  auto align_stage = [&](auto&& same) {
    for (std::size_t i = 0; i < candidate.size(); ++i) {
      if (cand_to_ref[i] != npos) continue;
      for (std::size_t j = 0; j < reference.size(); ++j) {
        if (!ref_used[j] && same(i, j)) {
          cand_to_ref[i] = j;
          ref_used[j] = true;
          break;
        }
      }
    }
  };
  align_stage([&](std::size_t i, std::size_t j) { return candidate[i] == reference[j]; });

  std::vector<std::string> cand_stems(candidate.size());
  std::vector<std::string> ref_stems(reference.size());
  for (std::size_t i = 0; i < candidate.size(); ++i) cand_stems[i] = porter_stem(candidate[i]);
  for (std::size_t j = 0; j < reference.size(); ++j) ref_stems[j] = porter_stem(reference[j]);
  align_stage([&](std::size_t i, std::size_t j) { return cand_stems[i] == ref_stems[j]; });

  std::size_t matches = 0;
  std::size_t chunks = 0;
  std::size_t prev_ref = npos;
  bool in_chunk = false;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    const std::size_t j = cand_to_ref[i];
    if (j == npos) {
      in_chunk = false;
      continue;
    }
    ++matches;
    if (!in_chunk || j != prev_ref + 1) ++chunks;
    in_chunk = true;
    prev_ref = j;
  }
  if (matches == 0) return zero;

  const double m = static_cast<double>(matches);
  const double precision = m / static_cast<double>(candidate.size());
  const double recall = m / static_cast<double>(reference.size());
  const double f_mean = 10.0 * precision * recall / (recall + 9.0 * precision);
  const double fragmentation = static_cast<double>(chunks) / m;
  const double penalty = 0.5 * fragmentation * fragmentation * fragmentation;
  return {QualityMetric::kMeteor, f_mean * (1.0 - penalty)};
}

QualityScore score_text(QualityMetric metric, std::string_view candidate,
                        std::string_view reference) {
  switch (metric) {
    case QualityMetric::kBleu: return sentence_bleu(tokenize(candidate), tokenize(reference));
    case QualityMetric::kRougeL: return rouge_l(tokenize(candidate), tokenize(reference));
    case QualityMetric::kF1:
      return token_f1(normalize_answer(candidate), normalize_answer(reference));
    case QualityMetric::kMeteor: return meteor(tokenize(candidate), tokenize(reference));
  }
  throw UsageError("unknown quality metric");
}

QualityScore quality_of_record(const GenerationRecord& record, QualityMetric metric) {
  if (record.beams.empty() || record.references.empty()) {
    throw ValidationError(record.id, "beams", "quality needs a beam and a reference");
  }
  QualityScore best{metric, 0.0};
  for (const auto& reference : record.references) {
    const QualityScore score = score_text(metric, record.top_beam().text, reference);
    best.value = std::max(best.value, score.value);
  }
  return best;
}

QualityScore quality_of_record(const GenerationRecord& record, std::string_view metric) {
  return quality_of_record(record, parse_quality_metric(metric));
}

}  // namespace calconf

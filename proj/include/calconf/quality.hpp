// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace calconf {

struct GenerationRecord;

enum class QualityMetric { kBleu, kRougeL, kF1, kMeteor };

struct QualityScore {
  QualityMetric metric;
  double value;  // in [0, 1]
};

std::string_view quality_metric_name(QualityMetric metric);
/// Accepts "bleu", "rouge_l", "f1", "meteor". Throws UsageError otherwise.
QualityMetric parse_quality_metric(std::string_view name);

using Tokens = std::vector<std::string>;
using TokenSpan = std::span<const std::string>;

/// Lowercases ASCII letters, splits on whitespace, and emits each ASCII punctuation
/// character as its own token. Non-ASCII bytes are kept inside words.
Tokens tokenize(std::string_view text);

/// SQuAD-style answer normalization: lowercase, drop punctuation, drop the articles
/// a/an/the, split on whitespace.
Tokens normalize_answer(std::string_view text);

/// Porter (1980) suffix-stripping stemmer for lowercase ASCII words.
std::string porter_stem(std::string_view word);

/// BLEU-4 with uniform weights, brevity penalty, and add-one smoothing on the 2..4-gram
/// precisions. Returns 0 when either side is empty or no unigram matches.
QualityScore sentence_bleu(TokenSpan candidate, TokenSpan reference);

/// LCS-based F-measure with equal precision/recall weight.
QualityScore rouge_l(TokenSpan candidate, TokenSpan reference);

/// Bag-of-tokens overlap F1 on the given tokens. Both empty gives 1, one empty gives 0.
QualityScore token_f1(TokenSpan candidate, TokenSpan reference);

/// Simplified METEOR: exact then stemmed unigram alignment, no synonym stage.
/// F_mean = 10PR/(R+9P), penalty = 0.5 (chunks/matches)^3.
QualityScore meteor(TokenSpan candidate, TokenSpan reference);

/// Text-level scoring of one hypothesis against one reference, using the tokenization
/// each metric expects (normalize_answer for f1, tokenize otherwise).
QualityScore score_text(QualityMetric metric, std::string_view candidate, std::string_view reference);

/// Top beam against every reference; the maximum wins.
QualityScore quality_of_record(const GenerationRecord& record, QualityMetric metric);
/// Throws UsageError on an unknown metric id.
QualityScore quality_of_record(const GenerationRecord& record, std::string_view metric);

}  // namespace calconf

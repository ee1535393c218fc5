// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "calconf/records.hpp"

namespace calconf {

enum class Method {
  kRatio,
  kTail,
  kAtp,
  kAte,
  kDae,
  kWtp,
  kDsm,
  kDvb,
  kDvk,
  kBeamEntropy,
  kSumTopK,
};

inline constexpr std::array<Method, 11> kAllMethods = {
    Method::kRatio, Method::kTail, Method::kAtp, Method::kAte, Method::kDae,        Method::kWtp,
    Method::kDsm,   Method::kDvb,  Method::kDvk, Method::kBeamEntropy, Method::kSumTopK,
};

/// "ratio", "tail", "atp", ..., "beam_entropy", "sum_top_k".
std::string_view method_name(Method method);
/// Throws UsageError for an unknown id.
Method parse_method(std::string_view name);
/// True when larger values mean more confidence.
bool higher_is_confident(Method method);

/// Number of top beams WTP averages over, and the default k of sum_top_k.
inline constexpr int kWtpBeams = 10;

struct MethodConfig {
  /// Ratio compares beam 1 against beam k+1; sum_top_k sums beams 1..k.
  int k = 1;
  /// Softmax temperature for tail thinness and beam entropy.
  double temperature = 1.0;
  /// Beams consumed from the record (the first n_beams).
  int n_beams = 100;

  friend bool operator==(const MethodConfig&, const MethodConfig&) = default;
};

/// Per-method configuration. beam_entropy shares the tail temperature.
struct MethodConfigs {
  MethodConfig ratio{};
  MethodConfig tail{};
  MethodConfig sum_top_k{kWtpBeams, 1.0, 100};

  const MethodConfig& for_method(Method method) const;
};

/// Throws UsageError when `config` violates the invariants `method` relies on.
void check_config(Method method, const MethodConfig& config);

struct ConfidenceScore {
  Method method;
  double value;
  bool higher_is_confident;
};

/// Temperature softmax over the first min(n_beams, available) sequence log-probs.
std::vector<double> normalized_beam_dist(const GenerationRecord& record, const MethodConfig& config);

/// log p(1) - log p(k+1).
ConfidenceScore ratio(const GenerationRecord& record, const MethodConfig& config);
/// Sum of squared normalized beam probabilities.
ConfidenceScore tail_thinness(const GenerationRecord& record, const MethodConfig& config);
/// Mean token probability of the top beam.
ConfidenceScore atp(const GenerationRecord& record);
/// Mean token entropy of the top beam.
ConfidenceScore ate(const GenerationRecord& record);
/// Mean over dropout samples of each sample's mean token entropy.
ConfidenceScore dae(const GenerationRecord& record);
/// Softmax-weighted per-token log-probability of the top ten beams, negated.
ConfidenceScore wtp(const GenerationRecord& record);
/// Mean pairwise METEOR over ordered pairs of distinct dropout samples.
ConfidenceScore dsm(const GenerationRecord& record);
/// Sum over all ordered dropout pairs of (1 - BLEU)^2.
ConfidenceScore dvb(const GenerationRecord& record);
/// Summed KL divergence of each dropout sample's per-position distribution from the mean.
ConfidenceScore dvk(const GenerationRecord& record);
/// Shannon entropy (nats) of the normalized beam distribution.
ConfidenceScore beam_entropy(const GenerationRecord& record, const MethodConfig& config);
/// Sum of the top-k sequence probabilities.
ConfidenceScore sum_top_k(const GenerationRecord& record, const MethodConfig& config);

/// Dispatches to the metric for `method`.
ConfidenceScore score_method(const GenerationRecord& record, Method method,
                             const MethodConfigs& configs);

struct MethodOutcome {
  Method method;
  std::optional<ConfidenceScore> score;
  /// Set when score is empty.
  std::string skip_reason;
};

/// Scores every requested method. Missing data, too few beams and degenerate
/// distributions become skip markers; an invalid config still throws UsageError.
std::vector<MethodOutcome> score_all(const GenerationRecord& record, const MethodConfigs& configs,
                                     std::span<const Method> methods = kAllMethods);

/// score_all over many records on up to `workers` threads; output order follows input.
std::vector<std::vector<MethodOutcome>> score_records(std::span<const GenerationRecord> records,
                                                      const MethodConfigs& configs,
                                                      std::span<const Method> methods,
                                                      unsigned workers = 1);

}  // namespace calconf

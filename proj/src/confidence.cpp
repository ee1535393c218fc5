// SPDX-License-Identifier: Apache-2.0
#include "calconf/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "calconf/errors.hpp"
#include "calconf/quality.hpp"
#include "parallel.hpp"

namespace calconf {
namespace {

std::size_t consumed_beams(const GenerationRecord& record, const MethodConfig& config) {
  return std::min(record.beams.size(), static_cast<std::size_t>(std::max(config.n_beams, 0)));
}

std::string record_tag(const GenerationRecord& record) { return "record '" + record.id + "'"; }

// exp(z_i - max z) / sum_j exp(z_j - max z)
std::vector<double> softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    total += out[i];
  }
  for (double& value : out) value /= total;
  return out;
}

const std::vector<DropoutSample>& require_dropout(const GenerationRecord& record) {
  if (record.dropout_samples.size() != kDropoutSampleCount) {
    throw MissingDataError(record_tag(record) + " has " +
                           std::to_string(record.dropout_samples.size()) + " dropout samples, needs " +
                           std::to_string(kDropoutSampleCount));
  }
  return record.dropout_samples;
}

double mean_entropy(const Beam& beam, const GenerationRecord& record) {
  double total = 0.0;
  for (const auto& token : beam.tokens) {
    if (!token.entropy) throw MissingDataError(record_tag(record) + " lacks token entropy");
    total += *token.entropy;
  }
  return total / static_cast<double>(beam.tokens.size());
}

ConfidenceScore make_score(Method method, double value) {
  return {method, value, higher_is_confident(method)};
}

}  // namespace

std::string_view method_name(Method method) {
  switch (method) {
    case Method::kRatio: return "ratio";
    case Method::kTail: return "tail";
    case Method::kAtp: return "atp";
    case Method::kAte: return "ate";
    case Method::kDae: return "dae";
    case Method::kWtp: return "wtp";
    case Method::kDsm: return "dsm";
    case Method::kDvb: return "dvb";
    case Method::kDvk: return "dvk";
    case Method::kBeamEntropy: return "beam_entropy";
    case Method::kSumTopK: return "sum_top_k";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method method : kAllMethods) {
    if (method_name(method) == name) return method;
  }
  throw UsageError("unknown method '" + std::string(name) + "'");
}

bool higher_is_confident(Method method) {
  switch (method) {
    case Method::kRatio:
    case Method::kTail:
    case Method::kAtp:
    case Method::kDsm:
    case Method::kSumTopK:
      return true;
    default:
      return false;
  }
}

const MethodConfig& MethodConfigs::for_method(Method method) const {
  switch (method) {
    case Method::kRatio: return ratio;
    case Method::kSumTopK: return sum_top_k;
    default: return tail;
  }
}

void check_config(Method method, const MethodConfig& config) {
  const std::string name(method_name(method));
  switch (method) {
    case Method::kRatio:
      if (config.n_beams < 2) throw UsageError(name + ": n_beams must be >= 2");
      if (config.k < 1 || config.k > config.n_beams - 1) {
        throw UsageError(name + ": k must satisfy 1 <= k <= n_beams - 1, got k=" +
                         std::to_string(config.k));
      }
      break;
    case Method::kTail:
    case Method::kBeamEntropy:
      if (config.n_beams < 2) throw UsageError(name + ": n_beams must be >= 2");
      if (!(config.temperature > 0.0) || !std::isfinite(config.temperature)) {
        throw UsageError(name + ": temperature must be positive");
      }
      break;
    case Method::kSumTopK:
      if (config.k < 1 || config.k > config.n_beams) {
        throw UsageError(name + ": k must satisfy 1 <= k <= n_beams");
      }
      break;
    default:
      break;
  }
}

std::vector<double> normalized_beam_dist(const GenerationRecord& record, const MethodConfig& config) {
  if (!(config.temperature > 0.0)) throw UsageError("temperature must be positive");
  const std::size_t n = consumed_beams(record, config);
  if (n < 2) {
    throw InsufficientBeamsError(record_tag(record) + " needs at least 2 beams, has " +
                                 std::to_string(n));
  }
  std::vector<double> logits(n);
  for (std::size_t i = 0; i < n; ++i) logits[i] = record.beams[i].seq_log_prob / config.temperature;
  return softmax(logits);
}

ConfidenceScore ratio(const GenerationRecord& record, const MethodConfig& config) {
  if (config.k < 1) throw UsageError("ratio: k must be >= 1");
  const auto k = static_cast<std::size_t>(config.k);
  if (consumed_beams(record, config) < k + 1) {
    throw InsufficientBeamsError(record_tag(record) + " needs " + std::to_string(k + 1) +
                                 " beams for ratio at k=" + std::to_string(k));
  }
  return make_score(Method::kRatio, record.beams[0].seq_log_prob - record.beams[k].seq_log_prob);
}

ConfidenceScore tail_thinness(const GenerationRecord& record, const MethodConfig& config) {
  double total = 0.0;
  for (double q : normalized_beam_dist(record, config)) total += q * q;
  return make_score(Method::kTail, total);
}

ConfidenceScore atp(const GenerationRecord& record) {
  const Beam& top = record.top_beam();
  double total = 0.0;
  for (const auto& token : top.tokens) total += std::exp(token.log_prob);
  return make_score(Method::kAtp, total / static_cast<double>(top.tokens.size()));
}

ConfidenceScore ate(const GenerationRecord& record) {
  return make_score(Method::kAte, mean_entropy(record.top_beam(), record));
}

ConfidenceScore dae(const GenerationRecord& record) {
  const auto& samples = require_dropout(record);
  double total = 0.0;
  for (const auto& sample : samples) total += mean_entropy(sample, record);
  return make_score(Method::kDae, total / static_cast<double>(samples.size()));
}

ConfidenceScore wtp(const GenerationRecord& record) {
  if (record.beams.size() < static_cast<std::size_t>(kWtpBeams)) {
    throw InsufficientBeamsError(record_tag(record) + " needs " + std::to_string(kWtpBeams) +
                                 " beams for wtp, has " + std::to_string(record.beams.size()));
  }
  std::vector<double> per_token(kWtpBeams);
  for (int i = 0; i < kWtpBeams; ++i) {
    const Beam& beam = record.beams[i];
    double sum = 0.0;
    for (const auto& token : beam.tokens) sum += token.log_prob;
    per_token[i] = sum / static_cast<double>(beam.tokens.size());
  }
  const std::vector<double> weights = softmax(per_token);
  double value = 0.0;
  for (int i = 0; i < kWtpBeams; ++i) value -= weights[i] * per_token[i];
  return make_score(Method::kWtp, value);
}

ConfidenceScore dsm(const GenerationRecord& record) {
  const auto& samples = require_dropout(record);
  std::vector<Tokens> tokens;
  tokens.reserve(samples.size());
  for (const auto& sample : samples) tokens.push_back(tokenize(sample.text));
  double total = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (std::size_t j = 0; j < tokens.size(); ++j) {
      if (i != j) total += meteor(tokens[i], tokens[j]).value;
    }
  }
  const auto n = static_cast<double>(tokens.size());
  return make_score(Method::kDsm, total / (n * (n - 1.0)));
}

ConfidenceScore dvb(const GenerationRecord& record) {
  const auto& samples = require_dropout(record);
  std::vector<Tokens> tokens;
  tokens.reserve(samples.size());
  for (const auto& sample : samples) tokens.push_back(tokenize(sample.text));
  double total = 0.0;
  for (const auto& candidate : tokens) {
    for (const auto& reference : tokens) {
      const double gap = 1.0 - sentence_bleu(candidate, reference).value;
      total += gap * gap;
    }
  }
  return make_score(Method::kDvb, total);
}

ConfidenceScore dvk(const GenerationRecord& record) {
  const auto& samples = require_dropout(record);
  std::size_t length = samples.front().tokens.size();
  for (const auto& sample : samples) {
    length = std::min(length, sample.tokens.size());
    for (const auto& token : sample.tokens) {
      if (!token.alt_dist) throw MissingDataError(record_tag(record) + " lacks alt_dist");
    }
  }

  double total = 0.0;
  for (std::size_t t = 0; t < length; ++t) {
    // Union of supports at position t, in first-seen order.
    std::map<std::string, std::size_t> support;
    for (const auto& sample : samples) {
      for (const auto& alt : *sample.tokens[t].alt_dist) support.emplace(alt.token, support.size());
    }
    if (support.empty()) {
      throw DegenerateDistributionError(record_tag(record) + " has an empty alt_dist support at position " +
                                        std::to_string(t));
    }
    std::vector<std::vector<double>> dists(samples.size(), std::vector<double>(support.size(), 0.0));
    std::vector<double> mean(support.size(), 0.0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      double mass = 0.0;
      for (const auto& alt : *samples[i].tokens[t].alt_dist) {
        dists[i][support.at(alt.token)] += alt.prob;
        mass += alt.prob;
      }
      if (!(mass > 0.0)) {
        throw DegenerateDistributionError(record_tag(record) + " dropout sample " + std::to_string(i) +
                                          " has no probability mass at position " + std::to_string(t));
      }
      for (std::size_t v = 0; v < support.size(); ++v) {
        dists[i][v] /= mass;
        mean[v] += dists[i][v] / static_cast<double>(samples.size());
      }
    }
    for (const auto& dist : dists) {
      for (std::size_t v = 0; v < support.size(); ++v) {
        if (dist[v] > 0.0) total += dist[v] * std::log(dist[v] / mean[v]);
      }
    }
  }
  // Rounding can leave -1e-17 on identical distributions.
  return make_score(Method::kDvk, std::max(total, 0.0));
}

ConfidenceScore beam_entropy(const GenerationRecord& record, const MethodConfig& config) {
  double entropy = 0.0;
  for (double q : normalized_beam_dist(record, config)) {
    if (q > 0.0) entropy -= q * std::log(q);
  }
  return make_score(Method::kBeamEntropy, std::max(entropy, 0.0));
}

ConfidenceScore sum_top_k(const GenerationRecord& record, const MethodConfig& config) {
  if (config.k < 1) throw UsageError("sum_top_k: k must be >= 1");
  const auto k = static_cast<std::size_t>(config.k);
  if (consumed_beams(record, config) < k) {
    throw InsufficientBeamsError(record_tag(record) + " needs " + std::to_string(k) +
                                 " beams for sum_top_k");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) total += std::exp(record.beams[i].seq_log_prob);
  return make_score(Method::kSumTopK, total);
}

ConfidenceScore score_method(const GenerationRecord& record, Method method,
                             const MethodConfigs& configs) {
  switch (method) {
    case Method::kRatio: return ratio(record, configs.ratio);
    case Method::kTail: return tail_thinness(record, configs.tail);
    case Method::kAtp: return atp(record);
    case Method::kAte: return ate(record);
    case Method::kDae: return dae(record);
    case Method::kWtp: return wtp(record);
    case Method::kDsm: return dsm(record);
    case Method::kDvb: return dvb(record);
    case Method::kDvk: return dvk(record);
    case Method::kBeamEntropy: return beam_entropy(record, configs.tail);
    case Method::kSumTopK: return sum_top_k(record, configs.sum_top_k);
  }
  throw UsageError("unknown method");
}

std::vector<MethodOutcome> score_all(const GenerationRecord& record, const MethodConfigs& configs,
                                     std::span<const Method> methods) {
  std::vector<MethodOutcome> outcomes;
  outcomes.reserve(methods.size());
  for (Method method : methods) check_config(method, configs.for_method(method));
  for (Method method : methods) {
    MethodOutcome outcome{method, std::nullopt, {}};
    try {
      ConfidenceScore score = score_method(record, method, configs);
      if (std::isfinite(score.value)) {
        outcome.score = score;
      } else {
        outcome.skip_reason = "non-finite value";
      }
    } catch (const MissingDataError& e) {
      outcome.skip_reason = std::string("missing data: ") + e.what();
    } catch (const InsufficientBeamsError& e) {
      outcome.skip_reason = std::string("insufficient beams: ") + e.what();
    } catch (const DegenerateDistributionError& e) {
      outcome.skip_reason = std::string("degenerate distribution: ") + e.what();
    }
    outcomes.push_back(std::move(outcome));
  }
  return outcomes;
}

std::vector<std::vector<MethodOutcome>> score_records(std::span<const GenerationRecord> records,
                                                      const MethodConfigs& configs,
                                                      std::span<const Method> methods,
                                                      unsigned workers) {
  for (Method method : methods) check_config(method, configs.for_method(method));
  std::vector<std::vector<MethodOutcome>> out(records.size());
  detail::parallel_for(records.size(), workers,
                       [&](std::size_t i) { out[i] = score_all(records[i], configs, methods); });
  return out;
}

}  // namespace calconf

// SPDX-License-Identifier: Apache-2.0
#include "calconf/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "calconf/errors.hpp"
#include "calconf/rng.hpp"
#include "json.hpp"

namespace calconf {
namespace {

// Words in the synthetic reference; the top beam copies round(quality * kReferenceWords).
constexpr int kReferenceWords = 40;
constexpr int kMaxSynthTokens = 8;

std::string reference_text() {
  std::string text;
  for (int j = 0; j < kReferenceWords; ++j) {
    if (j) text += ' ';
    text += "w" + std::to_string(j);
  }
  return text;
}

std::string hypothesis_text(double quality) {
  const int copied = static_cast<int>(std::lround(std::clamp(quality, 0.0, 1.0) * kReferenceWords));
  std::string text;
  for (int j = 0; j < kReferenceWords; ++j) {
    if (j) text += ' ';
    text += (j < copied ? "w" : "f") + std::to_string(j);
  }
  return text;
}

Beam make_beam(std::string text, double seq_log_prob, bool synthesize_tokens, std::mt19937_64& rng) {
  Beam beam;
  beam.text = std::move(text);
  beam.seq_log_prob = seq_log_prob;
  if (!synthesize_tokens) {
    beam.tokens.push_back({"t0", seq_log_prob, std::nullopt, std::nullopt});
    return beam;
  }
  const int count = 1 + static_cast<int>(uniform_index(rng, kMaxSynthTokens));
  const double share = seq_log_prob / count;
  for (int t = 0; t < count; ++t) {
    // Entropy grows with token uncertainty; any non-negative value is valid.
    const double entropy = -share * (1.0 + uniform_unit(rng));
    beam.tokens.push_back({"t" + std::to_string(t), share, entropy, std::nullopt});
  }
  double sum = 0.0;
  for (const auto& token : beam.tokens) sum += token.log_prob;
  beam.seq_log_prob = sum;
  return beam;
}

GenerationRecord make_record(std::size_t index, const std::string& task, const std::vector<double>& log_probs,
                             double quality, bool synthesize_tokens, std::mt19937_64& rng) {
  GenerationRecord record;
  record.id = "syn-" + std::to_string(index);
  record.input = "synthetic input " + std::to_string(index);
  record.references = {reference_text()};
  record.task = task;
  record.beams.reserve(log_probs.size());
  for (std::size_t i = 0; i < log_probs.size(); ++i) {
    std::string text = i == 0 ? hypothesis_text(quality) : "alternative " + std::to_string(i);
    record.beams.push_back(make_beam(std::move(text), log_probs[i], synthesize_tokens, rng));
  }
  // Splitting into tokens can perturb the last bits of equal sequence scores.
  std::stable_sort(record.beams.begin(), record.beams.end(),
                   [](const Beam& a, const Beam& b) { return a.seq_log_prob > b.seq_log_prob; });
  return record;
}

}  // namespace

std::string_view archetype_name(Archetype archetype) {
  switch (archetype) {
    case Archetype::kUniform: return "uniform";
    case Archetype::kDegenerate: return "degenerate";
    case Archetype::kKModalThinTail: return "k_modal_thin_tail";
    case Archetype::kHeavyTail: return "heavy_tail";
  }
  return "unknown";
}

Archetype parse_archetype(std::string_view name) {
  for (Archetype a : {Archetype::kUniform, Archetype::kDegenerate, Archetype::kKModalThinTail,
                      Archetype::kHeavyTail}) {
    if (archetype_name(a) == name) return a;
  }
  throw UsageError("invalid archetype '" + std::string(name) + "'");
}

void check_shape(const ShapeSpec& spec) {
  if (spec.n_beams < 2) throw UsageError("shape needs n_beams >= 2");
  if (!(spec.noise_scale >= 0.0) || !std::isfinite(spec.noise_scale)) {
    throw UsageError("noise_scale must be a finite non-negative value");
  }
  if (spec.archetype == Archetype::kKModalThinTail) {
    if (spec.modes < 1 || spec.modes > spec.n_beams) {
      throw UsageError("modes must satisfy 1 <= modes <= n_beams");
    }
    if (spec.modes < spec.n_beams && !(spec.mode_mass > 0.0 && spec.mode_mass < 1.0)) {
      throw UsageError("mode_mass must lie in (0, 1)");
    }
  }
}

std::vector<double> archetype_probabilities(const ShapeSpec& spec) {
  check_shape(spec);
  const auto n = static_cast<std::size_t>(spec.n_beams);
  std::vector<double> p(n, 0.0);
  switch (spec.archetype) {
    case Archetype::kUniform:
      std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(n));
      break;
    case Archetype::kDegenerate:
      p[0] = kDegenerateTopMass;
      for (std::size_t i = 1; i < n; ++i) p[i] = (1.0 - kDegenerateTopMass) / static_cast<double>(n - 1);
      break;
    case Archetype::kKModalThinTail: {
      const auto modes = static_cast<std::size_t>(spec.modes);
      const double mode_mass = modes == n ? 1.0 : spec.mode_mass;
      auto fill_geometric = [&](std::size_t begin, std::size_t end, double decay, double mass) {
        double total = 0.0;
        double w = 1.0;
        for (std::size_t i = begin; i < end; ++i, w *= decay) total += w;
        w = 1.0;
        for (std::size_t i = begin; i < end; ++i, w *= decay) p[i] = mass * w / total;
      };
      fill_geometric(0, modes, kModeDecay, mode_mass);
      if (modes < n) fill_geometric(modes, n, kTailDecay, 1.0 - mode_mass);
      break;
    }
    case Archetype::kHeavyTail: {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += 1.0 / static_cast<double>(i + 1);
      for (std::size_t i = 0; i < n; ++i) p[i] = 1.0 / (static_cast<double>(i + 1) * total);
      break;
    }
  }
  return p;
}

std::vector<double> generate_distribution(const ShapeSpec& spec) {
  const std::vector<double> p = archetype_probabilities(spec);
  std::vector<double> log_probs(p.size());
  std::mt19937_64 rng(spec.seed);
  for (std::size_t i = 0; i < p.size(); ++i) {
    log_probs[i] = std::log(p[i]);
    if (spec.noise_scale > 0.0) log_probs[i] += spec.noise_scale * standard_normal(rng);
  }
  std::sort(log_probs.begin(), log_probs.end(), std::greater<>());
  if (log_probs.front() > 0.0) {
    const double shift = log_probs.front();
    for (double& lp : log_probs) lp -= shift;
  }
  return log_probs;
}

SyntheticDataset generate_dataset(const DatasetSpec& spec) {
  if (spec.n_records < 10) throw UsageError("synthetic datasets need at least 10 records");
  if (!(spec.coupling >= 0.0 && spec.coupling <= 1.0)) throw UsageError("coupling must lie in [0, 1]");
  if (spec.shape_mix.empty()) throw UsageError("shape_mix is empty");
  if (!(spec.sharpness > 0.0)) throw UsageError("sharpness must be positive");
  for (const auto& shape : spec.shape_mix) check_shape(shape);

  SyntheticDataset out;
  out.records.reserve(spec.n_records);
  for (std::size_t i = 0; i < spec.n_records; ++i) {
    std::mt19937_64 rng(mix_seed(spec.seed, i));
    ShapeSpec shape = spec.shape_mix[uniform_index(rng, spec.shape_mix.size())];
    shape.seed = mix_seed(shape.seed ^ spec.seed, i);
    const double latent = uniform_unit(rng);
    const double independent = uniform_unit(rng);
    const double offset = 0.5 + 4.5 * uniform_unit(rng);
    const double quality = spec.coupling * latent + (1.0 - spec.coupling) * independent;

    std::vector<double> log_probs = generate_distribution(shape);
    for (double& lp : log_probs) lp = spec.sharpness * latent * lp - offset;

    out.records.push_back(make_record(i, spec.task, log_probs, quality, spec.synthesize_tokens, rng));
    out.qualities.push_back(quality);
    out.latent.push_back(latent);
  }
  return out;
}

SyntheticDataset generate_ratio_coupled_dataset(const RatioCouplingSpec& spec) {
  if (spec.n_records < 10) throw UsageError("synthetic datasets need at least 10 records");
  if (spec.n_beams < 2) throw UsageError("n_beams must be >= 2");
  if (spec.k_star < 1 || spec.k_star > spec.n_beams - 1) {
    throw UsageError("k_star must satisfy 1 <= k_star <= n_beams - 1");
  }
  if (!(spec.noise >= 0.0)) throw UsageError("noise must be non-negative");

  SyntheticDataset out;
  const double k = spec.k_star;
  for (std::size_t i = 0; i < spec.n_records; ++i) {
    std::mt19937_64 rng(mix_seed(spec.seed, i));
    std::vector<double> log_probs(static_cast<std::size_t>(spec.n_beams));
    log_probs[0] = -(0.5 + 4.5 * uniform_unit(rng));
    for (std::size_t j = 1; j < log_probs.size(); ++j) {
      double u = uniform_unit(rng);
      while (u <= 0.0) u = uniform_unit(rng);
      log_probs[j] = log_probs[j - 1] + std::log(u);  // minus an Exp(1) gap
    }
    const double gap_sum = log_probs[0] - log_probs[static_cast<std::size_t>(spec.k_star)];
    // The sum of k unit exponentials has mean k and variance k.
    const double z = (gap_sum - k) / std::sqrt(k) + spec.noise * standard_normal(rng);
    const double quality = 1.0 / (1.0 + std::exp(-z));

    out.records.push_back(make_record(i, spec.task, log_probs, quality, false, rng));
    out.qualities.push_back(quality);
    out.latent.push_back(gap_sum);
  }
  return out;
}

SyntheticDataset generate_from_config(std::string_view json_config) {
  using nlohmann::json;
  json doc = json::parse(json_config.begin(), json_config.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw ParseError(1, "synthetic config must be a JSON object");
  try {
    const std::string mode = doc.value("mode", std::string("shapes"));
    if (mode == "ratio_coupled") {
      RatioCouplingSpec spec;
      spec.n_records = doc.value("n_records", spec.n_records);
      spec.n_beams = doc.value("n_beams", spec.n_beams);
      spec.k_star = doc.value("k_star", spec.k_star);
      spec.noise = doc.value("noise", spec.noise);
      spec.seed = doc.value("seed", spec.seed);
      spec.task = doc.value("task", spec.task);
      return generate_ratio_coupled_dataset(spec);
    }
    if (mode != "shapes") throw UsageError("unknown synthetic mode '" + mode + "'");
    DatasetSpec spec;
    spec.n_records = doc.value("n_records", spec.n_records);
    spec.coupling = doc.value("coupling", spec.coupling);
    spec.seed = doc.value("seed", spec.seed);
    spec.sharpness = doc.value("sharpness", spec.sharpness);
    spec.synthesize_tokens = doc.value("synthesize_tokens", spec.synthesize_tokens);
    spec.task = doc.value("task", spec.task);
    if (auto it = doc.find("shapes"); it != doc.end()) {
      spec.shape_mix.clear();
      for (const auto& entry : *it) {
        ShapeSpec shape;
        shape.archetype = parse_archetype(entry.value("archetype", std::string("k_modal_thin_tail")));
        shape.n_beams = entry.value("n_beams", shape.n_beams);
        shape.modes = entry.value("modes", shape.modes);
        shape.mode_mass = entry.value("mode_mass", shape.mode_mass);
        shape.noise_scale = entry.value("noise_scale", shape.noise_scale);
        shape.seed = entry.value("seed", shape.seed);
        spec.shape_mix.push_back(shape);
      }
    }
    return generate_dataset(spec);
  } catch (const json::exception& e) {
    throw ParseError(1, std::string("synthetic config: ") + e.what());
  }
}

}  // namespace calconf

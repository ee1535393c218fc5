// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "calconf/records.hpp"

namespace calconf {

enum class Archetype { kUniform, kDegenerate, kKModalThinTail, kHeavyTail };

std::string_view archetype_name(Archetype archetype);
/// "uniform", "degenerate", "k_modal_thin_tail", "heavy_tail"; UsageError otherwise.
Archetype parse_archetype(std::string_view name);

/// Mass on the top sequence of the degenerate archetype.
inline constexpr double kDegenerateTopMass = 0.995;
/// Successive modes of the k-modal archetype shrink by this factor.
inline constexpr double kModeDecay = 0.85;
/// Successive tail entries of the k-modal archetype shrink by this factor.
inline constexpr double kTailDecay = 0.6;

struct ShapeSpec {
  Archetype archetype = Archetype::kKModalThinTail;
  int n_beams = 100;
  /// k_modal_thin_tail only.
  int modes = 1;
  /// k_modal_thin_tail only: probability on the modes; the tail holds the rest.
  double mode_mass = 0.9;
  /// Standard deviation of Gaussian jitter added to each log-probability.
  double noise_scale = 0.0;
  std::uint64_t seed = 0;
};

/// Throws UsageError on an invalid spec.
void check_shape(const ShapeSpec& spec);

/// Noise-free normalized probabilities of the archetype, sorted non-increasing.
std::vector<double> archetype_probabilities(const ShapeSpec& spec);

/// Sequence log-probabilities realizing the archetype with seeded jitter, sorted
/// non-increasing and shifted so the largest is <= 0.
std::vector<double> generate_distribution(const ShapeSpec& spec);

struct DatasetSpec {
  std::size_t n_records = 500;
  /// 1: quality is a deterministic monotone function of latent confidence; 0: independent.
  double coupling = 1.0;
  std::vector<ShapeSpec> shape_mix{ShapeSpec{}};
  std::uint64_t seed = 0;
  /// Beam log-probs are sharpness * latent * log(archetype) - offset.
  double sharpness = 1.0;
  /// Split each beam into several tokens carrying entropies; otherwise one token per beam.
  bool synthesize_tokens = false;
  std::string task = "summarization";
};

struct SyntheticDataset {
  std::vector<GenerationRecord> records;
  /// Synthesized quality in [0, 1], aligned with records.
  std::vector<double> qualities;
  /// Latent confidence in [0, 1], aligned with records.
  std::vector<double> latent;
};

/// Records whose top beam text overlaps the single reference in proportion to the
/// synthesized quality, so text metrics recover it. Requires n_records >= 10.
SyntheticDataset generate_dataset(const DatasetSpec& spec);

struct RatioCouplingSpec {
  std::size_t n_records = 500;
  int n_beams = 100;
  /// Quality tracks log p(1) - log p(k_star + 1).
  int k_star = 1;
  /// Standard deviation of the noise added to the standardized ratio before squashing.
  double noise = 0.01;
  std::uint64_t seed = 0;
  std::string task = "qa";
};

/// Beam log-probs are cumulative sums of i.i.d. exponential gaps, so the ratio at each
/// offset is a different random variable; quality is a noisy logistic of the ratio at
/// k_star.
SyntheticDataset generate_ratio_coupled_dataset(const RatioCouplingSpec& spec);

/// JSON config: {"mode": "shapes" | "ratio_coupled", ...fields of the matching spec,
/// "shapes": [{"archetype", "n_beams", "modes", "mode_mass", "noise_scale", "seed"}]}.
/// Throws ParseError / UsageError.
SyntheticDataset generate_from_config(std::string_view json_config);

}  // namespace calconf

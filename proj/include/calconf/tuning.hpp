// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "calconf/confidence.hpp"

namespace calconf {

/// The distinct temperatures used by the per-dataset presets.
inline constexpr std::array<double, 6> kDefaultTemperatureGrid = {0.001, 0.005, 0.01, 0.05, 0.1, 1.0};

/// Cap on the ratio offset search.
inline constexpr int kMaxRatioOffset = 100;

struct SweepPoint {
  double parameter;
  /// Empty when the correlation is undefined at this grid point.
  std::optional<double> abs_spearman;
};

struct TuneResult {
  Method method;
  MethodConfig best_config;
  double best_abs_spearman = 0.0;
  std::vector<SweepPoint> sweep;
};

/// Exhaustive search over k = 1..k_max for the ratio method; ties go to the smaller k.
/// `qualities[i]` belongs to `validation[i]`. Throws UsageError when k_max exceeds the
/// beams available in some record (minus one) and StatisticsError when no k yields a
/// defined correlation.
TuneResult tune_ratio(std::span<const GenerationRecord> validation, std::span<const double> qualities,
                      int k_max, const MethodConfig& base = {}, unsigned workers = 1);

/// Exhaustive search over `grid` for tail thinness; ties go to the larger temperature.
TuneResult tune_temperature(std::span<const GenerationRecord> validation,
                            std::span<const double> qualities,
                            std::span<const double> grid = kDefaultTemperatureGrid,
                            const MethodConfig& base = {}, unsigned workers = 1);

/// Largest k that tune_ratio accepts for these records under `base.n_beams`.
int max_ratio_offset(std::span<const GenerationRecord> records, const MethodConfig& base = {});

/// {"method", "best": {"k"|"temperature"}, "best_abs_spearman", "sweep": [[param, value], ...]}
std::string tune_result_to_json(const TuneResult& result);

/// Two whitespace-separated columns (parameter, |spearman|) with a '#' header line;
/// undefined points are written as "nan".
std::string sweep_to_text(const TuneResult& result);

}  // namespace calconf

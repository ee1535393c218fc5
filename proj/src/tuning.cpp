// SPDX-License-Identifier: Apache-2.0
#include "calconf/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "calconf/calibration.hpp"
#include "calconf/errors.hpp"
#include "json.hpp"
#include "parallel.hpp"

namespace calconf {
namespace {

void check_inputs(std::span<const GenerationRecord> validation, std::span<const double> qualities) {
  if (validation.empty()) throw UsageError("tuning needs a non-empty validation set");
  if (validation.size() != qualities.size()) {
    throw UsageError("validation records and qualities differ in length");
  }
}

template <typename Score>
std::optional<double> abs_correlation(std::span<const GenerationRecord> records,
                                      std::span<const double> qualities, Score&& score) {
  std::vector<double> values(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) values[i] = score(records[i]);
  try {
    return evaluate(values, qualities, true).abs_spearman;
  } catch (const StatisticsError&) {
    return std::nullopt;
  }
}

// `prefer(candidate, incumbent)` decides exact ties.
template <typename Prefer>
const SweepPoint* pick_best(const std::vector<SweepPoint>& sweep, Prefer&& prefer) {
  const SweepPoint* best = nullptr;
  for (const auto& point : sweep) {
    if (!point.abs_spearman) continue;
    if (!best || *point.abs_spearman > *best->abs_spearman ||
        (*point.abs_spearman == *best->abs_spearman && prefer(point.parameter, best->parameter))) {
      best = &point;
    }
  }
  return best;
}

}  // namespace

int max_ratio_offset(std::span<const GenerationRecord> records, const MethodConfig& base) {
  std::size_t fewest = static_cast<std::size_t>(std::max(base.n_beams, 0));
  for (const auto& record : records) fewest = std::min(fewest, record.beams.size());
  return static_cast<int>(fewest) - 1;
}

TuneResult tune_ratio(std::span<const GenerationRecord> validation, std::span<const double> qualities,
                      int k_max, const MethodConfig& base, unsigned workers) {
  check_inputs(validation, qualities);
  const int limit = max_ratio_offset(validation, base);
  if (k_max < 1 || k_max > limit) {
    throw UsageError("k_max must satisfy 1 <= k_max <= " + std::to_string(limit) +
                     " (fewest beams minus one), got " + std::to_string(k_max));
  }

  TuneResult result{Method::kRatio, base, 0.0, std::vector<SweepPoint>(static_cast<std::size_t>(k_max))};
  detail::parallel_for(result.sweep.size(), workers, [&](std::size_t i) {
    MethodConfig config = base;
    config.k = static_cast<int>(i) + 1;
    result.sweep[i] = {static_cast<double>(config.k),
                       abs_correlation(validation, qualities, [&](const GenerationRecord& record) {
                         return ratio(record, config).value;
                       })};
  });

  const SweepPoint* best = pick_best(result.sweep, [](double k, double incumbent) { return k < incumbent; });
  if (!best) throw StatisticsError("ratio correlation is undefined for every k in 1.." + std::to_string(k_max));
  result.best_config.k = static_cast<int>(best->parameter);
  result.best_abs_spearman = *best->abs_spearman;
  return result;
}

TuneResult tune_temperature(std::span<const GenerationRecord> validation,
                            std::span<const double> qualities, std::span<const double> grid,
                            const MethodConfig& base, unsigned workers) {
  check_inputs(validation, qualities);
  if (grid.empty()) throw UsageError("temperature grid is empty");
  for (double t : grid) {
    if (!(t > 0.0) || !std::isfinite(t)) throw UsageError("temperatures must be positive");
  }
  for (const auto& record : validation) {
    if (std::min<std::size_t>(record.beams.size(), static_cast<std::size_t>(std::max(base.n_beams, 0))) < 2) {
      throw UsageError("record '" + record.id + "' has fewer than 2 beams");
    }
  }

  TuneResult result{Method::kTail, base, 0.0, std::vector<SweepPoint>(grid.size())};
  detail::parallel_for(grid.size(), workers, [&](std::size_t i) {
    MethodConfig config = base;
    config.temperature = grid[i];
    result.sweep[i] = {grid[i], abs_correlation(validation, qualities, [&](const GenerationRecord& record) {
                         return tail_thinness(record, config).value;
                       })};
  });

  const SweepPoint* best = pick_best(result.sweep, [](double t, double incumbent) { return t > incumbent; });
  if (!best) throw StatisticsError("tail correlation is undefined at every temperature");
  result.best_config.temperature = best->parameter;
  result.best_abs_spearman = *best->abs_spearman;
  return result;
}

std::string tune_result_to_json(const TuneResult& result) {
  using nlohmann::ordered_json;
  const bool is_ratio = result.method == Method::kRatio;
  ordered_json best = ordered_json::object();
  if (is_ratio) {
    best["k"] = result.best_config.k;
  } else {
    best["temperature"] = result.best_config.temperature;
  }
  ordered_json sweep = ordered_json::array();
  for (const auto& point : result.sweep) {
    ordered_json param = is_ratio ? ordered_json(static_cast<int>(point.parameter)) : ordered_json(point.parameter);
    sweep.push_back(ordered_json::array(
        {param, point.abs_spearman ? ordered_json(*point.abs_spearman) : ordered_json(nullptr)}));
  }
  ordered_json doc = {{"method", std::string(method_name(result.method))},
                      {"best", std::move(best)},
                      {"best_abs_spearman", result.best_abs_spearman},
                      {"sweep", std::move(sweep)}};
  return doc.dump();
}

std::string sweep_to_text(const TuneResult& result) {
  std::string out = result.method == Method::kRatio ? "# k abs_spearman\n" : "# temperature abs_spearman\n";
  char buffer[64];
  for (const auto& point : result.sweep) {
    if (result.method == Method::kRatio) {
      std::snprintf(buffer, sizeof buffer, "%d ", static_cast<int>(point.parameter));
    } else {
      std::snprintf(buffer, sizeof buffer, "%.17g ", point.parameter);
    }
    out += buffer;
    if (point.abs_spearman) {
      std::snprintf(buffer, sizeof buffer, "%.17g\n", *point.abs_spearman);
      out += buffer;
    } else {
      out += "nan\n";
    }
  }
  return out;
}

}  // namespace calconf

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace calconf {

/// Ranks 1..n; tied values share the mean of their positional ranks.
/// Throws UsageError on an empty input or a non-finite value.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of the average-rank vectors. Throws StatisticsError when the
/// lengths differ, n < 3, or either input is constant.
double spearman(std::span<const double> x, std::span<const double> y);

struct Evaluation {
  double abs_spearman = 0.0;
  double spearman = 0.0;
  std::size_t n_samples = 0;
  /// False when the sign contradicts the method's orientation.
  bool orientation_consistent = true;
};

/// |Spearman| of confidence against quality. Throws StatisticsError on fewer than 3 pairs
/// or an undefined correlation.
Evaluation evaluate(std::span<const double> confidences, std::span<const double> qualities,
                    bool higher_is_confident);

/// Id-keyed values, in file order.
using KeyedSeries = std::vector<std::pair<std::string, double>>;

struct AlignedSeries {
  std::vector<std::string> ids;
  std::vector<double> confidences;
  std::vector<double> qualities;
};

/// Inner join on id, keeping the order of `confidences`. Ids absent from `confidences`
/// (skipped records) are excluded pairwise. Throws ValidationError when a confidence id
/// has no quality.
AlignedSeries align(const KeyedSeries& confidences, const KeyedSeries& qualities);

struct BootstrapOptions {
  std::size_t resamples = 10000;
  std::uint64_t seed = 0;
  /// Redraws allowed for a resample whose correlation is undefined.
  int max_redraws = 20;
  unsigned workers = 1;
};

/// One-sided paired bootstrap of H0: |rho_A| <= |rho_B|.
/// p = (#{delta_b <= 0} + 1) / (B + 1) with delta_b = |rho_A| - |rho_B| on resample b.
/// Each resample draws from a generator seeded by (seed, b), so the worker count does
/// not change the result. Throws UsageError on mismatched lengths or B < 1000.
double paired_bootstrap(std::span<const double> confidences_a, std::span<const double> confidences_b,
                        std::span<const double> qualities, const BootstrapOptions& options);

/// Keyed overload: all three series must list the same ids in the same order
/// (ValidationError otherwise).
double paired_bootstrap(const KeyedSeries& confidences_a, const KeyedSeries& confidences_b,
                        const KeyedSeries& qualities, const BootstrapOptions& options);

enum class Star { kNone, kHollow, kSolid };

inline constexpr double kAlphaHollow = 0.10;
inline constexpr double kAlphaSolid = 0.05;

Star star_for(double p_value);

struct MethodCorrelation {
  std::string method;
  std::optional<Evaluation> evaluation;
  std::string skip_reason;
  Star star = Star::kNone;
};

struct PairSignificance {
  std::string better;
  std::string worse;
  double p_value = 1.0;
};

struct CalibrationReport {
  std::string dataset;
  std::string model;
  std::vector<MethodCorrelation> methods;
  std::vector<PairSignificance> significance;

  const MethodCorrelation* find(std::string_view method) const;
};

struct MethodSeries {
  std::string method;
  bool higher_is_confident = true;
  KeyedSeries scores;
};

/// Correlates every method with quality and tests the best method against the runner-up.
/// Methods with fewer than 3 aligned pairs or an undefined correlation are reported as
/// skipped. The bootstrap runs on the records both methods scored.
CalibrationReport build_report(std::string dataset, std::string model,
                               const std::vector<MethodSeries>& methods, const KeyedSeries& qualities,
                               const BootstrapOptions& options);

struct RankRow {
  std::string method;
  std::vector<double> ranks;  // one per report
  double average = 0.0;
  double median = 0.0;
};

struct RankSummary {
  std::vector<std::string> pairs;  // "dataset/model"
  std::vector<RankRow> rows;
};

/// Ranks methods by abs_spearman descending within each report (ties averaged) and
/// aggregates across reports. Throws ValidationError when the reports do not cover the
/// same set of scored methods.
RankSummary rank_table(const std::vector<CalibrationReport>& reports);

std::string report_to_json(const CalibrationReport& report);
/// Throws ParseError.
CalibrationReport report_from_json(std::string_view line, std::size_t line_number = 1);
std::string rank_summary_to_json(const RankSummary& summary);

/// Plain-text table: methods x dataset/model columns, star prefixes, Avg/Med rank columns.
std::string render_table(const std::vector<CalibrationReport>& reports, const RankSummary& summary);

}  // namespace calconf

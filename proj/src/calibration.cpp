// SPDX-License-Identifier: Apache-2.0
#include "calconf/calibration.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

#include "calconf/errors.hpp"
#include "calconf/rng.hpp"
#include "parallel.hpp"

namespace calconf {
namespace {

std::vector<double> ranks_unchecked(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double shared = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = shared;
    i = j;
  }
  return ranks;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  const double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::optional<double> spearman_or_null(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 3) return std::nullopt;
  const auto rx = ranks_unchecked(x);
  const auto ry = ranks_unchecked(y);
  return pearson(rx, ry);
}

void require_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw UsageError("non-finite value in rank input");
  }
}

std::string format_rank(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.1f", value);
  std::string text(buffer);
  if (text.size() > 2 && text.compare(text.size() - 2, 2, ".0") == 0) text.resize(text.size() - 2);
  return text;
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
  if (values.empty()) throw UsageError("cannot rank an empty list");
  require_finite(values);
  return ranks_unchecked(values);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw StatisticsError("spearman inputs differ in length");
  if (x.size() < 3) throw StatisticsError("spearman needs at least 3 pairs");
  require_finite(x);
  require_finite(y);
  auto rho = spearman_or_null(x, y);
  if (!rho) throw StatisticsError("spearman undefined: an input is constant");
  return *rho;
}

Evaluation evaluate(std::span<const double> confidences, std::span<const double> qualities,
                    bool higher_is_confident) {
  if (confidences.size() != qualities.size()) {
    throw StatisticsError("confidence and quality series differ in length");
  }
  if (confidences.size() < 3) {
    throw StatisticsError("need at least 3 aligned pairs, got " + std::to_string(confidences.size()));
  }
  Evaluation result;
  result.spearman = spearman(confidences, qualities);
  result.abs_spearman = std::abs(result.spearman);
  result.n_samples = confidences.size();
  result.orientation_consistent =
      result.spearman == 0.0 || ((result.spearman > 0.0) == higher_is_confident);
  return result;
}

AlignedSeries align(const KeyedSeries& confidences, const KeyedSeries& qualities) {
  std::unordered_map<std::string_view, double> by_id;
  by_id.reserve(qualities.size());
  for (const auto& [id, value] : qualities) by_id.emplace(id, value);
  AlignedSeries out;
  for (const auto& [id, value] : confidences) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw ValidationError(id, "id", "no quality score for this record");
    out.ids.push_back(id);
    out.confidences.push_back(value);
    out.qualities.push_back(it->second);
  }
  return out;
}

double paired_bootstrap(std::span<const double> confidences_a, std::span<const double> confidences_b,
                        std::span<const double> qualities, const BootstrapOptions& options) {
  const std::size_t n = qualities.size();
  if (confidences_a.size() != n || confidences_b.size() != n) {
    throw UsageError("bootstrap series differ in length");
  }
  if (n == 0) throw UsageError("bootstrap needs at least one record");
  if (options.resamples < 1000) throw UsageError("bootstrap needs B >= 1000");

  std::atomic<std::size_t> not_better{0};
  detail::parallel_for(options.resamples, options.workers, [&](std::size_t b) {
    std::mt19937_64 rng(mix_seed(options.seed, b));
    std::vector<double> a(n), bb(n), q(n);
    for (int attempt = 0; attempt <= options.max_redraws; ++attempt) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto pick = uniform_index(rng, n);
        a[i] = confidences_a[pick];
        bb[i] = confidences_b[pick];
        q[i] = qualities[pick];
      }
      const auto rq = ranks_unchecked(q);
      const auto rho_a = n >= 3 ? pearson(ranks_unchecked(a), rq) : std::nullopt;
      const auto rho_b = n >= 3 ? pearson(ranks_unchecked(bb), rq) : std::nullopt;
      if (rho_a && rho_b) {
        if (std::abs(*rho_a) - std::abs(*rho_b) <= 0.0) ++not_better;
        return;
      }
    }
    ++not_better;
  });
  return static_cast<double>(not_better.load() + 1) / static_cast<double>(options.resamples + 1);
}

double paired_bootstrap(const KeyedSeries& confidences_a, const KeyedSeries& confidences_b,
                        const KeyedSeries& qualities, const BootstrapOptions& options) {
  if (confidences_a.size() != qualities.size() || confidences_b.size() != qualities.size()) {
    throw ValidationError("bootstrap series cover different records");
  }
  std::vector<double> a, b, q;
  for (std::size_t i = 0; i < qualities.size(); ++i) {
    const std::string& id = qualities[i].first;
    if (confidences_a[i].first != id || confidences_b[i].first != id) {
      throw ValidationError(id, "id", "bootstrap series are misaligned at position " + std::to_string(i));
    }
    a.push_back(confidences_a[i].second);
    b.push_back(confidences_b[i].second);
    q.push_back(qualities[i].second);
  }
  return paired_bootstrap(a, b, q, options);
}

Star star_for(double p_value) {
  if (p_value < kAlphaSolid) return Star::kSolid;
  if (p_value < kAlphaHollow) return Star::kHollow;
  return Star::kNone;
}

const MethodCorrelation* CalibrationReport::find(std::string_view method) const {
  for (const auto& entry : methods) {
    if (entry.method == method) return &entry;
  }
  return nullptr;
}

CalibrationReport build_report(std::string dataset, std::string model,
                               const std::vector<MethodSeries>& methods, const KeyedSeries& qualities,
                               const BootstrapOptions& options) {
  CalibrationReport report;
  report.dataset = std::move(dataset);
  report.model = std::move(model);

  for (const auto& series : methods) {
    MethodCorrelation entry;
    entry.method = series.method;
    const AlignedSeries aligned = align(series.scores, qualities);
    try {
      entry.evaluation = evaluate(aligned.confidences, aligned.qualities, series.higher_is_confident);
    } catch (const StatisticsError& e) {
      entry.skip_reason = e.what();
    }
    report.methods.push_back(std::move(entry));
  }

  // Best against runner-up; stable order keeps the first-listed method on ties.
  std::vector<std::size_t> scored;
  for (std::size_t i = 0; i < report.methods.size(); ++i) {
    if (report.methods[i].evaluation) scored.push_back(i);
  }
  std::stable_sort(scored.begin(), scored.end(), [&](std::size_t a, std::size_t b) {
    return report.methods[a].evaluation->abs_spearman > report.methods[b].evaluation->abs_spearman;
  });
  if (scored.size() >= 2) {
    const auto& best = methods[scored[0]];
    const auto& next = methods[scored[1]];
    std::unordered_map<std::string_view, double> next_by_id(next.scores.begin(), next.scores.end());
    std::unordered_map<std::string_view, double> quality_by_id(qualities.begin(), qualities.end());
    std::vector<double> a, b, q;
    for (const auto& [id, value] : best.scores) {
      auto it = next_by_id.find(id);
      if (it == next_by_id.end()) continue;
      a.push_back(value);
      b.push_back(it->second);
      q.push_back(quality_by_id.at(id));
    }
    if (a.size() >= 3) {
      const double p = paired_bootstrap(a, b, q, options);
      report.significance.push_back({best.method, next.method, p});
      report.methods[scored[0]].star = star_for(p);
    }
  }
  return report;
}

RankSummary rank_table(const std::vector<CalibrationReport>& reports) {
  if (reports.empty()) throw ValidationError("rank table needs at least one report");
  auto scored_methods = [](const CalibrationReport& report) {
    std::vector<std::string> names;
    for (const auto& entry : report.methods) {
      if (entry.evaluation) names.push_back(entry.method);
    }
    return names;
  };

  const std::vector<std::string> reference = scored_methods(reports.front());
  if (reference.empty()) throw ValidationError("report has no scored methods");
  std::vector<std::string> reference_sorted = reference;
  std::sort(reference_sorted.begin(), reference_sorted.end());

  RankSummary summary;
  for (const auto& name : reference) summary.rows.push_back({name, {}, 0.0, 0.0});

  for (const auto& report : reports) {
    const std::string pair = report.dataset + "/" + report.model;
    auto names = scored_methods(report);
    std::sort(names.begin(), names.end());
    if (names != reference_sorted) {
      throw ValidationError("report " + pair + " covers a different method set than " +
                            reports.front().dataset + "/" + reports.front().model);
    }
    summary.pairs.push_back(pair);
    std::vector<double> negated;
    for (const auto& row : summary.rows) negated.push_back(-report.find(row.method)->evaluation->abs_spearman);
    const auto ranks = ranks_unchecked(negated);
    for (std::size_t i = 0; i < summary.rows.size(); ++i) summary.rows[i].ranks.push_back(ranks[i]);
  }

  for (auto& row : summary.rows) {
    row.average = std::accumulate(row.ranks.begin(), row.ranks.end(), 0.0) /
                  static_cast<double>(row.ranks.size());
    std::vector<double> sorted = row.ranks;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    row.median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  }
  return summary;
}

std::string render_table(const std::vector<CalibrationReport>& reports, const RankSummary& summary) {
  std::vector<std::string> header{"method"};
  for (const auto& report : reports) header.push_back(report.dataset + "/" + report.model);
  header.push_back("Avg");
  header.push_back("Med");

  std::vector<std::vector<std::string>> rows;
  for (const auto& rank_row : summary.rows) {
    std::vector<std::string> row{rank_row.method};
    for (const auto& report : reports) {
      const MethodCorrelation* entry = report.find(rank_row.method);
      if (!entry || !entry->evaluation) {
        row.emplace_back("-");
        continue;
      }
      char buffer[32];
      std::snprintf(buffer, sizeof buffer, "%.3f", entry->evaluation->abs_spearman);
      std::string cell = buffer[0] == '0' ? std::string(buffer + 1) : std::string(buffer);
      if (entry->star == Star::kSolid) cell = "★" + cell;
      if (entry->star == Star::kHollow) cell = "☆" + cell;
      row.push_back(std::move(cell));
    }
    row.push_back(format_rank(rank_row.average));
    row.push_back(format_rank(rank_row.median));
    rows.push_back(std::move(row));
  }

  // Display width: count UTF-8 lead bytes only.
  auto width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char ch : s) w += (ch & 0xC0) != 0x80;
    return w;
  };
  std::vector<std::size_t> widths(header.size(), 0);
  for (std::size_t c = 0; c < header.size(); ++c) widths[c] = width(header[c]);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], width(row[c]));
  }
  auto emit = [&](const std::vector<std::string>& cells, std::string& out) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::size_t pad = widths[c] - width(cells[c]);
      if (c == 0) {
        out += cells[c] + std::string(pad, ' ');
      } else {
        out += "  " + std::string(pad, ' ') + cells[c];
      }
    }
    out += '\n';
  };
  std::string out;
  emit(header, out);
  std::size_t total = 0;
  for (std::size_t w : widths) total += w + 2;
  out += std::string(total - 2, '-') + '\n';
  for (const auto& row : rows) emit(row, out);
  out += "|Spearman| between confidence and quality; ☆ p<0.10, ★ p<0.05 against the next best "
         "method (paired bootstrap)\n";
  return out;
}

}  // namespace calconf

// SPDX-License-Identifier: Apache-2.0
#include "calconf/calibration.hpp"
#include "calconf/errors.hpp"
#include "json.hpp"

namespace calconf {
namespace {

using nlohmann::ordered_json;

std::string_view star_name(Star star) {
  switch (star) {
    case Star::kSolid: return "solid";
    case Star::kHollow: return "hollow";
    case Star::kNone: break;
  }
  return "none";
}

Star parse_star(const std::string& name, std::size_t line) {
  if (name == "solid") return Star::kSolid;
  if (name == "hollow") return Star::kHollow;
  if (name == "none") return Star::kNone;
  throw ParseError(line, "unknown star marker '" + name + "'");
}

}  // namespace

std::string report_to_json(const CalibrationReport& report) {
  ordered_json methods = ordered_json::object();
  for (const auto& entry : report.methods) {
    if (entry.evaluation) {
      methods[entry.method] = {{"abs_spearman", entry.evaluation->abs_spearman},
                               {"spearman", entry.evaluation->spearman},
                               {"n_samples", entry.evaluation->n_samples},
                               {"orientation_consistent", entry.evaluation->orientation_consistent},
                               {"star", star_name(entry.star)}};
    } else {
      methods[entry.method] = {{"skipped", entry.skip_reason}};
    }
  }
  ordered_json significance = ordered_json::array();
  for (const auto& pair : report.significance) {
    significance.push_back({{"better", pair.better}, {"worse", pair.worse}, {"p_value", pair.p_value}});
  }
  ordered_json doc = {{"dataset", report.dataset},
                      {"model", report.model},
                      {"methods", std::move(methods)},
                      {"significance", std::move(significance)}};
  return doc.dump();
}

CalibrationReport report_from_json(std::string_view line, std::size_t line_number) {
  ordered_json doc = ordered_json::parse(line.begin(), line.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw ParseError(line_number, "malformed report JSON");
  try {
    CalibrationReport report;
    report.dataset = doc.at("dataset").get<std::string>();
    report.model = doc.at("model").get<std::string>();
    for (const auto& [name, value] : doc.at("methods").items()) {
      MethodCorrelation entry;
      entry.method = name;
      if (value.contains("skipped")) {
        entry.skip_reason = value.at("skipped").get<std::string>();
      } else {
        Evaluation evaluation;
        evaluation.abs_spearman = value.at("abs_spearman").get<double>();
        evaluation.spearman = value.at("spearman").get<double>();
        evaluation.n_samples = value.at("n_samples").get<std::size_t>();
        evaluation.orientation_consistent = value.value("orientation_consistent", true);
        entry.evaluation = evaluation;
        entry.star = parse_star(value.value("star", std::string("none")), line_number);
      }
      report.methods.push_back(std::move(entry));
    }
    if (auto it = doc.find("significance"); it != doc.end()) {
      for (const auto& pair : *it) {
        report.significance.push_back({pair.at("better").get<std::string>(),
                                       pair.at("worse").get<std::string>(),
                                       pair.at("p_value").get<double>()});
      }
    }
    return report;
  } catch (const ordered_json::exception& e) {
    throw ParseError(line_number, std::string("report schema: ") + e.what());
  }
}

std::string rank_summary_to_json(const RankSummary& summary) {
  ordered_json methods = ordered_json::object();
  for (const auto& row : summary.rows) {
    methods[row.method] = {{"average", row.average}, {"median", row.median}, {"ranks", row.ranks}};
  }
  ordered_json doc = {{"pairs", summary.pairs}, {"methods", std::move(methods)}};
  return doc.dump();
}

}  // namespace calconf

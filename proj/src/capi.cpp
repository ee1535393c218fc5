// SPDX-License-Identifier: Apache-2.0
#include "calconf/calconf.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "calconf/calibration.hpp"
#include "calconf/confidence.hpp"
#include "calconf/errors.hpp"
#include "calconf/pipeline.hpp"
#include "calconf/presets.hpp"
#include "calconf/records.hpp"
#include "calconf/synthetic.hpp"
#include "calconf/tuning.hpp"

struct cc_dataset {
  calconf::Dataset data;
};

struct cc_scores {
  std::vector<calconf::ScoreRow> rows;
};

struct cc_qualities {
  std::vector<calconf::QualityRow> rows;
};

struct cc_reports {
  std::vector<calconf::CalibrationReport> reports;
};

struct cc_tune_result {
  calconf::TuneResult result;
};

namespace {

thread_local std::string g_last_error;

cc_status fail(cc_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
cc_status guarded(Fn&& fn) {
  try {
    fn();
    return CC_OK;
  } catch (const calconf::Error& e) {
    return fail(static_cast<cc_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(CC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CC_ERR_INTERNAL, e.what());
  }
}

void require(const void* pointer, const char* name) {
  if (!pointer) throw calconf::UsageError(std::string(name) + " must not be NULL");
}

char* duplicate(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

calconf::MethodConfig to_config(const cc_method_config& config) {
  return {config.k, config.temperature, config.n_beams};
}

calconf::MethodConfigs to_configs(const cc_score_options& options) {
  return {to_config(options.ratio), to_config(options.tail), to_config(options.sum_top_k)};
}

std::vector<calconf::Method> parse_methods(const char* list) {
  std::vector<calconf::Method> methods;
  if (!list || !*list) return {calconf::kAllMethods.begin(), calconf::kAllMethods.end()};
  std::string_view rest(list);
  while (!rest.empty()) {
    const std::size_t comma = rest.find(',');
    std::string_view name = rest.substr(0, comma);
    while (!name.empty() && name.front() == ' ') name.remove_prefix(1);
    while (!name.empty() && name.back() == ' ') name.remove_suffix(1);
    if (!name.empty()) methods.push_back(calconf::parse_method(name));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (methods.empty()) throw calconf::UsageError("empty method list");
  return methods;
}

cc_score_options default_options() {
  cc_score_options options;
  cc_score_options_init(&options);
  return options;
}

std::string write_lines(const auto& rows, auto&& to_json) {
  std::string text;
  for (const auto& row : rows) {
    text += to_json(row);
    text += '\n';
  }
  return text;
}

}  // namespace

extern "C" {

const char* cc_last_error(void) { return g_last_error.c_str(); }

void cc_string_free(char* text) { std::free(text); }

cc_status cc_dataset_load(const char* path, cc_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new cc_dataset{calconf::load_dataset(path)};
  });
}

cc_status cc_dataset_parse(const char* text, cc_dataset** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = new cc_dataset{calconf::parse_dataset(text)};
  });
}

cc_status cc_dataset_write(const cc_dataset* dataset, const char* path) {
  return guarded([&] {
    require(dataset, "dataset");
    require(path, "path");
    calconf::write_dataset(path, dataset->data.records);
  });
}

void cc_dataset_free(cc_dataset* dataset) { delete dataset; }

size_t cc_dataset_size(const cc_dataset* dataset) { return dataset ? dataset->data.records.size() : 0; }

size_t cc_dataset_reordered(const cc_dataset* dataset) {
  return dataset ? dataset->data.stats.reordered_records : 0;
}

const char* cc_dataset_record_id(const cc_dataset* dataset, size_t index) {
  if (!dataset || index >= dataset->data.records.size()) return nullptr;
  return dataset->data.records[index].id.c_str();
}

cc_status cc_dataset_split(const cc_dataset* dataset, size_t val_size, uint64_t seed, cc_dataset** validation,
                           cc_dataset** test) {
  return guarded([&] {
    require(dataset, "dataset");
    require(validation, "validation");
    require(test, "test");
    calconf::Split split = calconf::split_dataset(dataset->data.records, val_size, seed);
    auto val = std::make_unique<cc_dataset>(cc_dataset{{std::move(split.validation), {}}});
    auto rest = std::make_unique<cc_dataset>(cc_dataset{{std::move(split.test), {}}});
    *validation = val.release();
    *test = rest.release();
  });
}

void cc_score_options_init(cc_score_options* options) {
  if (!options) return;
  const calconf::MethodConfigs defaults;
  auto convert = [](const calconf::MethodConfig& c) { return cc_method_config{c.k, c.temperature, c.n_beams}; };
  options->ratio = convert(defaults.ratio);
  options->tail = convert(defaults.tail);
  options->sum_top_k = convert(defaults.sum_top_k);
  options->methods = nullptr;
  options->workers = 1;
}

cc_status cc_score_record(const cc_dataset* dataset, size_t index, const char* method,
                          const cc_score_options* options, double* value, int* higher_is_confident) {
  return guarded([&] {
    require(dataset, "dataset");
    require(method, "method");
    require(value, "value");
    if (index >= dataset->data.records.size()) throw calconf::UsageError("record index out of range");
    const cc_score_options resolved = options ? *options : default_options();
    const calconf::Method parsed = calconf::parse_method(method);
    const calconf::MethodConfigs configs = to_configs(resolved);
    calconf::check_config(parsed, configs.for_method(parsed));
    const calconf::ConfidenceScore score = calconf::score_method(dataset->data.records[index], parsed, configs);
    *value = score.value;
    if (higher_is_confident) *higher_is_confident = score.higher_is_confident ? 1 : 0;
  });
}

cc_status cc_score_dataset(const cc_dataset* dataset, const cc_score_options* options, cc_scores** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out, "out");
    const cc_score_options resolved = options ? *options : default_options();
    const auto methods = parse_methods(resolved.methods);
    const auto& records = dataset->data.records;
    const auto outcomes = calconf::score_records(records, to_configs(resolved), methods,
                                                 std::max<std::uint32_t>(resolved.workers, 1));
    auto scores = std::make_unique<cc_scores>();
    scores->rows.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      scores->rows.push_back(calconf::to_score_row(records[i].id, outcomes[i]));
    }
    *out = scores.release();
  });
}

cc_status cc_scores_load(const char* path, cc_scores** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new cc_scores{calconf::parse_scores(calconf::read_text_file(path))};
  });
}

cc_status cc_scores_write(const cc_scores* scores, const char* path) {
  return guarded([&] {
    require(scores, "scores");
    require(path, "path");
    calconf::write_text_file(path, write_lines(scores->rows, calconf::score_row_to_json));
  });
}

size_t cc_scores_size(const cc_scores* scores) { return scores ? scores->rows.size() : 0; }

size_t cc_scores_skipped(const cc_scores* scores, const char* method) {
  if (!scores || !method) return 0;
  std::size_t skipped = 0;
  for (const auto& row : scores->rows) {
    for (const auto& entry : row.entries) {
      if (entry.method == method && !entry.value) ++skipped;
    }
  }
  return skipped;
}

void cc_scores_free(cc_scores* scores) { delete scores; }

cc_status cc_quality_dataset(const cc_dataset* dataset, const char* metric, cc_qualities** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out, "out");
    std::optional<calconf::QualityMetric> override_metric;
    if (metric && *metric) override_metric = calconf::parse_quality_metric(metric);
    *out = new cc_qualities{calconf::score_quality(dataset->data.records, override_metric)};
  });
}

cc_status cc_quality_text(const char* metric, const char* candidate, const char* reference, double* value) {
  return guarded([&] {
    require(metric, "metric");
    require(candidate, "candidate");
    require(reference, "reference");
    require(value, "value");
    *value = calconf::score_text(calconf::parse_quality_metric(metric), candidate, reference).value;
  });
}

cc_status cc_qualities_load(const char* path, cc_qualities** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new cc_qualities{calconf::parse_qualities(calconf::read_text_file(path))};
  });
}

cc_status cc_qualities_write(const cc_qualities* qualities, const char* path) {
  return guarded([&] {
    require(qualities, "qualities");
    require(path, "path");
    calconf::write_text_file(path, write_lines(qualities->rows, calconf::quality_row_to_json));
  });
}

size_t cc_qualities_size(const cc_qualities* qualities) { return qualities ? qualities->rows.size() : 0; }

void cc_qualities_free(cc_qualities* qualities) { delete qualities; }

void cc_bootstrap_options_init(cc_bootstrap_options* options) {
  if (!options) return;
  const calconf::BootstrapOptions defaults;
  options->resamples = defaults.resamples;
  options->seed = defaults.seed;
  options->workers = defaults.workers;
}

namespace {
calconf::BootstrapOptions to_bootstrap(const cc_bootstrap_options* options) {
  calconf::BootstrapOptions out;
  if (options) {
    out.resamples = options->resamples;
    out.seed = options->seed;
    out.workers = std::max<std::uint32_t>(options->workers, 1);
  }
  return out;
}
}  // namespace

cc_status cc_spearman(const double* x, const double* y, size_t n, double* rho) {
  return guarded([&] {
    require(x, "x");
    require(y, "y");
    require(rho, "rho");
    *rho = calconf::spearman(std::span<const double>(x, n), std::span<const double>(y, n));
  });
}

cc_status cc_paired_bootstrap(const double* confidences_a, const double* confidences_b, const double* qualities,
                              size_t n, const cc_bootstrap_options* options, double* p_value) {
  return guarded([&] {
    require(confidences_a, "confidences_a");
    require(confidences_b, "confidences_b");
    require(qualities, "qualities");
    require(p_value, "p_value");
    *p_value = calconf::paired_bootstrap(std::span<const double>(confidences_a, n),
                                         std::span<const double>(confidences_b, n),
                                         std::span<const double>(qualities, n), to_bootstrap(options));
  });
}

cc_status cc_correlate(const cc_scores* scores, const cc_qualities* qualities, const char* dataset,
                       const char* model, const cc_bootstrap_options* options, cc_reports** out) {
  return guarded([&] {
    require(scores, "scores");
    require(qualities, "qualities");
    require(out, "out");
    auto report = calconf::correlate(scores->rows, qualities->rows, dataset ? dataset : "dataset",
                                     model ? model : "model", to_bootstrap(options));
    *out = new cc_reports{{std::move(report)}};
  });
}

cc_status cc_reports_load(const char* path, cc_reports** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new cc_reports{calconf::parse_reports(calconf::read_text_file(path))};
  });
}

cc_status cc_reports_append(cc_reports* target, cc_reports* source) {
  return guarded([&] {
    require(target, "target");
    require(source, "source");
    if (target == source) throw calconf::UsageError("cannot append a report list to itself");
    for (auto& report : source->reports) target->reports.push_back(std::move(report));
    source->reports.clear();
  });
}

cc_status cc_reports_write(const cc_reports* reports, const char* path) {
  return guarded([&] {
    require(reports, "reports");
    require(path, "path");
    calconf::write_text_file(path, write_lines(reports->reports, calconf::report_to_json));
  });
}

size_t cc_reports_size(const cc_reports* reports) { return reports ? reports->reports.size() : 0; }

cc_status cc_reports_abs_spearman(const cc_reports* reports, size_t index, const char* method, double* value) {
  return guarded([&] {
    require(reports, "reports");
    require(method, "method");
    require(value, "value");
    if (index >= reports->reports.size()) throw calconf::UsageError("report index out of range");
    const calconf::MethodCorrelation* entry = reports->reports[index].find(method);
    if (!entry) throw calconf::UsageError(std::string("method '") + method + "' not in report");
    if (!entry->evaluation) throw calconf::StatisticsError(entry->skip_reason);
    *value = entry->evaluation->abs_spearman;
  });
}

cc_status cc_rank(const cc_reports* reports, char** summary_json, char** table) {
  return guarded([&] {
    require(reports, "reports");
    const calconf::RankSummary summary = calconf::rank_table(reports->reports);
    std::string json = calconf::rank_summary_to_json(summary);
    std::string rendered = calconf::render_table(reports->reports, summary);
    char* json_out = summary_json ? duplicate(json) : nullptr;
    try {
      if (table) *table = duplicate(rendered);
    } catch (...) {
      std::free(json_out);
      throw;
    }
    if (summary_json) *summary_json = json_out;
  });
}

void cc_reports_free(cc_reports* reports) { delete reports; }

namespace {
std::vector<double> aligned_qualities(const cc_dataset* validation, const cc_qualities* qualities) {
  require(validation, "validation");
  require(qualities, "qualities");
  return calconf::qualities_for(validation->data.records, qualities->rows);
}
}  // namespace

cc_status cc_tune_ratio(const cc_dataset* validation, const cc_qualities* qualities, int32_t k_max,
                        const cc_method_config* base, uint32_t workers, cc_tune_result** out) {
  return guarded([&] {
    require(out, "out");
    const std::vector<double> q = aligned_qualities(validation, qualities);
    const calconf::MethodConfig config = base ? to_config(*base) : calconf::MethodConfig{};
    const auto& records = validation->data.records;
    if (k_max <= 0) k_max = std::min(calconf::kMaxRatioOffset, calconf::max_ratio_offset(records, config));
    *out = new cc_tune_result{calconf::tune_ratio(records, q, k_max, config, std::max<std::uint32_t>(workers, 1))};
  });
}

cc_status cc_tune_temperature(const cc_dataset* validation, const cc_qualities* qualities, const double* grid,
                              size_t grid_size, const cc_method_config* base, uint32_t workers,
                              cc_tune_result** out) {
  return guarded([&] {
    require(out, "out");
    const std::vector<double> q = aligned_qualities(validation, qualities);
    const calconf::MethodConfig config = base ? to_config(*base) : calconf::MethodConfig{};
    std::span<const double> values = calconf::kDefaultTemperatureGrid;
    if (grid) values = std::span<const double>(grid, grid_size);
    *out = new cc_tune_result{calconf::tune_temperature(validation->data.records, q, values, config,
                                                        std::max<std::uint32_t>(workers, 1))};
  });
}

void cc_tune_result_best(const cc_tune_result* result, double* parameter, double* abs_spearman) {
  if (!result) return;
  const auto& r = result->result;
  if (parameter) {
    *parameter = r.method == calconf::Method::kRatio ? static_cast<double>(r.best_config.k)
                                                     : r.best_config.temperature;
  }
  if (abs_spearman) *abs_spearman = r.best_abs_spearman;
}

cc_status cc_tune_result_json(const cc_tune_result* result, char** json) {
  return guarded([&] {
    require(result, "result");
    require(json, "json");
    *json = duplicate(calconf::tune_result_to_json(result->result));
  });
}

cc_status cc_tune_result_sweep_text(const cc_tune_result* result, char** text) {
  return guarded([&] {
    require(result, "result");
    require(text, "text");
    *text = duplicate(calconf::sweep_to_text(result->result));
  });
}

void cc_tune_result_free(cc_tune_result* result) { delete result; }

cc_status cc_synth_generate(const char* config_json, cc_dataset** records, cc_qualities** qualities) {
  return guarded([&] {
    require(config_json, "config_json");
    require(records, "records");
    calconf::SyntheticDataset generated = calconf::generate_from_config(config_json);
    std::vector<calconf::QualityRow> rows;
    rows.reserve(generated.records.size());
    for (std::size_t i = 0; i < generated.records.size(); ++i) {
      rows.push_back({generated.records[i].id, "synthetic", generated.qualities[i]});
    }
    auto dataset = std::make_unique<cc_dataset>(cc_dataset{{std::move(generated.records), {}}});
    if (qualities) *qualities = new cc_qualities{std::move(rows)};
    *records = dataset.release();
  });
}

cc_status cc_preset_lookup(const char* dataset, const char* model, int32_t* k, double* temperature) {
  return guarded([&] {
    require(dataset, "dataset");
    require(model, "model");
    const calconf::Preset* preset = calconf::find_preset(dataset, model);
    if (!preset) {
      throw calconf::UsageError(std::string("no preset for ") + dataset + "/" + model);
    }
    if (k) *k = preset->k;
    if (temperature) *temperature = preset->temperature;
  });
}

}  // extern "C"

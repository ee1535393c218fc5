// SPDX-License-Identifier: Apache-2.0
//
// calconf: score -> quality -> correlate -> tune -> rank, plus synthetic fixtures.
// Talks to the library only through the C API in calconf/calconf.h.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "calconf/calconf.h"
#include "json.hpp"

namespace {

struct CliError {
  cc_status status;
  std::string message;
};

void check(cc_status status, const std::string& context) {
  if (status != CC_OK) throw CliError{status, context + ": " + cc_last_error()};
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using DatasetPtr = std::unique_ptr<cc_dataset, Deleter<cc_dataset, cc_dataset_free>>;
using ScoresPtr = std::unique_ptr<cc_scores, Deleter<cc_scores, cc_scores_free>>;
using QualitiesPtr = std::unique_ptr<cc_qualities, Deleter<cc_qualities, cc_qualities_free>>;
using ReportsPtr = std::unique_ptr<cc_reports, Deleter<cc_reports, cc_reports_free>>;
using TunePtr = std::unique_ptr<cc_tune_result, Deleter<cc_tune_result, cc_tune_result_free>>;

struct CString {
  char* text = nullptr;
  ~CString() { cc_string_free(text); }
  std::string str() const { return text ? std::string(text) : std::string(); }
};

// Every flag; config-file keys use the flag name without the leading dashes.
struct RunConfig {
  std::vector<std::string> input;
  std::string output;
  std::string quality;
  std::string methods;
  std::optional<int> k;
  std::string temperature;
  std::optional<int> top_k;
  std::optional<int> n_beams;
  std::string metric;
  std::optional<std::uint64_t> bootstrap_b;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> val_size;
  std::optional<unsigned> workers;
  std::string config;
  std::string preset;
  std::string dataset;
  std::string model;
  std::string table;
  std::string sweep;
  std::string spec;
  std::string archetype;
  std::optional<std::size_t> n_records;
  std::optional<double> coupling;
  std::string quality_output;
};

void add_common(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--config", cfg.config, "JSON file mirroring the flags; flags win");
  cmd->add_option("--workers", cfg.workers, "Worker threads");
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CliError{CC_ERR_IO, "cannot open '" + path + "' for writing"};
  out << text;
  if (!out) throw CliError{CC_ERR_IO, "write failure on '" + path + "'"};
}

std::vector<double> parse_doubles(const std::string& list) {
  std::vector<double> values;
  std::stringstream stream(list);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CliError{CC_ERR_USAGE, "not a number: '" + item + "'"};
    }
  }
  return values;
}

// Fills every option the user did not pass on the command line from --config.
void merge_config_file(CLI::App* cmd, RunConfig& cfg) {
  if (cfg.config.empty()) return;
  std::ifstream in(cfg.config);
  if (!in) throw CliError{CC_ERR_IO, "cannot open config '" + cfg.config + "'"};
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw CliError{CC_ERR_PARSE, "config '" + cfg.config + "' is not a JSON object"};
  }
  auto given = [&](const char* flag) { return cmd->get_option_no_throw(flag) && cmd->count(flag) > 0; };
  auto fill = [&](const char* key, auto& target) {
    const std::string flag = std::string("--") + key;
    auto it = doc.find(key);
    if (it == doc.end() || given(flag.c_str())) return;
    try {
      using T = std::decay_t<decltype(target)>;
      if constexpr (std::is_same_v<T, std::vector<std::string>>) {
        target = it->is_array() ? it->template get<std::vector<std::string>>()
                                : std::vector<std::string>{it->template get<std::string>()};
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (it->is_string()) {
          target = it->template get<std::string>();
        } else if (it->is_array()) {
          std::string joined;
          for (const auto& v : *it) joined += (joined.empty() ? "" : ",") + (v.is_string() ? v.template get<std::string>() : v.dump());
          target = joined;
        } else {
          target = it->dump();
        }
      } else {
        target = it->template get<typename T::value_type>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw CliError{CC_ERR_PARSE, std::string("config key '") + key + "': " + e.what()};
    }
  };
  fill("input", cfg.input);
  fill("output", cfg.output);
  fill("quality", cfg.quality);
  fill("methods", cfg.methods);
  fill("k", cfg.k);
  fill("temperature", cfg.temperature);
  fill("top-k", cfg.top_k);
  fill("n-beams", cfg.n_beams);
  fill("metric", cfg.metric);
  fill("bootstrap-b", cfg.bootstrap_b);
  fill("seed", cfg.seed);
  fill("val-size", cfg.val_size);
  fill("workers", cfg.workers);
  fill("preset", cfg.preset);
  fill("dataset", cfg.dataset);
  fill("model", cfg.model);
  fill("table", cfg.table);
  fill("sweep", cfg.sweep);
  fill("spec", cfg.spec);
  fill("archetype", cfg.archetype);
  fill("n-records", cfg.n_records);
  fill("coupling", cfg.coupling);
  fill("quality-output", cfg.quality_output);
}

const std::string& single_input(const RunConfig& cfg) {
  if (cfg.input.size() != 1) throw CliError{CC_ERR_USAGE, "exactly one --input is required"};
  return cfg.input.front();
}

DatasetPtr load_records(const std::string& path) {
  cc_dataset* raw = nullptr;
  check(cc_dataset_load(path.c_str(), &raw), "loading records");
  DatasetPtr dataset(raw);
  if (const size_t reordered = cc_dataset_reordered(dataset.get())) {
    std::cerr << "warning: re-sorted beams in " << reordered << " record(s)\n";
  }
  return dataset;
}

QualitiesPtr load_qualities(const std::string& path) {
  if (path.empty()) throw CliError{CC_ERR_USAGE, "--quality is required"};
  cc_qualities* raw = nullptr;
  check(cc_qualities_load(path.c_str(), &raw), "loading qualities");
  return QualitiesPtr(raw);
}

// In tune, --temperature is the grid and is read separately.
cc_score_options score_options(const RunConfig& cfg, bool temperature_is_grid = false) {
  cc_score_options options;
  cc_score_options_init(&options);
  if (!cfg.preset.empty()) {
    const auto slash = cfg.preset.find('/');
    if (slash == std::string::npos) throw CliError{CC_ERR_USAGE, "--preset expects DATASET/MODEL"};
    const std::string dataset = cfg.preset.substr(0, slash);
    const std::string model = cfg.preset.substr(slash + 1);
    check(cc_preset_lookup(dataset.c_str(), model.c_str(), &options.ratio.k, &options.tail.temperature),
          "preset");
  } else if (!cfg.dataset.empty() && !cfg.model.empty()) {
    // Known dataset/model pairs start from their preset k and temperature.
    int32_t k = 0;
    double temperature = 0.0;
    if (cc_preset_lookup(cfg.dataset.c_str(), cfg.model.c_str(), &k, &temperature) == CC_OK) {
      options.ratio.k = k;
      options.tail.temperature = temperature;
    }
  }
  if (cfg.k) options.ratio.k = *cfg.k;
  if (!cfg.temperature.empty() && !temperature_is_grid) {
    const auto values = parse_doubles(cfg.temperature);
    if (values.size() != 1) throw CliError{CC_ERR_USAGE, "--temperature takes one value here"};
    options.tail.temperature = values.front();
  }
  if (cfg.top_k) options.sum_top_k.k = *cfg.top_k;
  if (cfg.n_beams) {
    options.ratio.n_beams = options.tail.n_beams = options.sum_top_k.n_beams = *cfg.n_beams;
  }
  options.methods = cfg.methods.empty() ? nullptr : cfg.methods.c_str();
  options.workers = cfg.workers.value_or(1);
  return options;
}

void cmd_score(const RunConfig& cfg) {
  DatasetPtr dataset = load_records(single_input(cfg));
  const cc_score_options options = score_options(cfg);
  cc_scores* raw = nullptr;
  check(cc_score_dataset(dataset.get(), &options, &raw), "scoring");
  ScoresPtr scores(raw);
  if (cfg.output.empty()) throw CliError{CC_ERR_USAGE, "--output is required"};
  check(cc_scores_write(scores.get(), cfg.output.c_str()), "writing scores");

  std::cerr << "scored " << cc_scores_size(scores.get()) << " record(s)\n";
  static const char* kMethods[] = {"ratio", "tail", "atp", "ate", "dae", "wtp",
                                   "dsm", "dvb", "dvk", "beam_entropy", "sum_top_k"};
  for (const char* method : kMethods) {
    if (const size_t skipped = cc_scores_skipped(scores.get(), method)) {
      std::cerr << "  " << method << ": skipped on " << skipped << " record(s)\n";
    }
  }
}

void cmd_quality(const RunConfig& cfg) {
  DatasetPtr dataset = load_records(single_input(cfg));
  cc_qualities* raw = nullptr;
  check(cc_quality_dataset(dataset.get(), cfg.metric.empty() ? nullptr : cfg.metric.c_str(), &raw), "quality");
  QualitiesPtr qualities(raw);
  if (cfg.output.empty()) throw CliError{CC_ERR_USAGE, "--output is required"};
  check(cc_qualities_write(qualities.get(), cfg.output.c_str()), "writing qualities");
  std::cerr << "scored quality for " << cc_qualities_size(qualities.get()) << " record(s)\n";
}

cc_bootstrap_options bootstrap_options(const RunConfig& cfg) {
  cc_bootstrap_options options;
  cc_bootstrap_options_init(&options);
  if (cfg.bootstrap_b) options.resamples = *cfg.bootstrap_b;
  if (cfg.seed) options.seed = *cfg.seed;
  options.workers = cfg.workers.value_or(1);
  return options;
}

void render_reports(const cc_reports* reports, const std::string& table_path, const std::string* summary_path) {
  CString summary;
  CString table;
  check(cc_rank(reports, summary_path ? &summary.text : nullptr, &table.text), "ranking");
  if (summary_path) write_text(*summary_path, summary.str() + "\n");
  write_text(table_path, table.str());
}

void cmd_correlate(const RunConfig& cfg) {
  cc_scores* raw_scores = nullptr;
  check(cc_scores_load(single_input(cfg).c_str(), &raw_scores), "loading scores");
  ScoresPtr scores(raw_scores);
  QualitiesPtr qualities = load_qualities(cfg.quality);
  const cc_bootstrap_options options = bootstrap_options(cfg);
  cc_reports* raw = nullptr;
  check(cc_correlate(scores.get(), qualities.get(), cfg.dataset.empty() ? "dataset" : cfg.dataset.c_str(),
                     cfg.model.empty() ? "model" : cfg.model.c_str(), &options, &raw),
        "correlating");
  ReportsPtr reports(raw);
  if (!cfg.output.empty()) check(cc_reports_write(reports.get(), cfg.output.c_str()), "writing report");
  render_reports(reports.get(), cfg.table, nullptr);
}

void cmd_tune(const RunConfig& cfg) {
  DatasetPtr all = load_records(single_input(cfg));
  QualitiesPtr qualities = load_qualities(cfg.quality);

  DatasetPtr validation;
  if (cfg.val_size) {
    cc_dataset* val = nullptr;
    cc_dataset* test = nullptr;
    check(cc_dataset_split(all.get(), *cfg.val_size, cfg.seed.value_or(0), &val, &test), "splitting");
    validation.reset(val);
    cc_dataset_free(test);
  } else {
    validation = std::move(all);
  }

  const cc_score_options options = score_options(cfg, /*temperature_is_grid=*/true);
  const std::string methods = cfg.methods.empty() ? "ratio,tail" : cfg.methods;
  std::string json_lines;
  std::string sweeps;
  std::stringstream list(methods);
  std::string method;
  while (std::getline(list, method, ',')) {
    cc_tune_result* raw = nullptr;
    if (method == "ratio") {
      check(cc_tune_ratio(validation.get(), qualities.get(), cfg.k.value_or(0), &options.ratio,
                          options.workers, &raw),
            "tuning ratio");
    } else if (method == "tail") {
      std::vector<double> grid;
      if (!cfg.temperature.empty()) grid = parse_doubles(cfg.temperature);
      check(cc_tune_temperature(validation.get(), qualities.get(), grid.empty() ? nullptr : grid.data(),
                                grid.size(), &options.tail, options.workers, &raw),
            "tuning tail");
    } else {
      throw CliError{CC_ERR_USAGE, "tune supports the methods ratio and tail, got '" + method + "'"};
    }
    TunePtr result(raw);
    CString json;
    CString sweep;
    check(cc_tune_result_json(result.get(), &json.text), "tune json");
    check(cc_tune_result_sweep_text(result.get(), &sweep.text), "tune sweep");
    json_lines += json.str() + "\n";
    sweeps += "# method " + method + "\n" + sweep.str();
    double best = 0.0;
    double abs_rho = 0.0;
    cc_tune_result_best(result.get(), &best, &abs_rho);
    std::cerr << method << ": best " << (method == "ratio" ? "k=" : "temperature=") << best
              << " |spearman|=" << abs_rho << "\n";
  }
  write_text(cfg.output, json_lines);
  if (!cfg.sweep.empty()) write_text(cfg.sweep, sweeps);
}

void cmd_rank(const RunConfig& cfg) {
  if (cfg.input.empty()) throw CliError{CC_ERR_USAGE, "at least one --input report file is required"};
  ReportsPtr all;
  for (const auto& path : cfg.input) {
    cc_reports* raw = nullptr;
    check(cc_reports_load(path.c_str(), &raw), "loading reports");
    ReportsPtr loaded(raw);
    if (!all) {
      all = std::move(loaded);
    } else {
      check(cc_reports_append(all.get(), loaded.get()), "merging reports");
    }
  }
  const std::string summary_path = cfg.output.empty() ? "-" : cfg.output;
  render_reports(all.get(), cfg.table.empty() && cfg.output.empty() ? "-" : cfg.table, &summary_path);
}

void cmd_synth(const RunConfig& cfg) {
  std::string spec_json;
  if (!cfg.spec.empty()) {
    std::ifstream in(cfg.spec);
    if (!in) throw CliError{CC_ERR_IO, "cannot open spec '" + cfg.spec + "'"};
    std::stringstream buffer;
    buffer << in.rdbuf();
    spec_json = buffer.str();
  } else {
    nlohmann::json spec = nlohmann::json::object();
    if (cfg.n_records) spec["n_records"] = *cfg.n_records;
    if (cfg.coupling) spec["coupling"] = *cfg.coupling;
    if (cfg.seed) spec["seed"] = *cfg.seed;
    nlohmann::json shape = {{"archetype", cfg.archetype.empty() ? "k_modal_thin_tail" : cfg.archetype}};
    if (cfg.n_beams) shape["n_beams"] = *cfg.n_beams;
    spec["shapes"] = nlohmann::json::array({shape});
    spec_json = spec.dump();
  }
  cc_dataset* raw_records = nullptr;
  cc_qualities* raw_qualities = nullptr;
  check(cc_synth_generate(spec_json.c_str(), &raw_records, &raw_qualities), "generating");
  DatasetPtr records(raw_records);
  QualitiesPtr qualities(raw_qualities);
  if (cfg.output.empty()) throw CliError{CC_ERR_USAGE, "--output is required"};
  check(cc_dataset_write(records.get(), cfg.output.c_str()), "writing records");
  const std::string quality_path = cfg.quality_output.empty() ? cfg.output + ".quality.jsonl" : cfg.quality_output;
  check(cc_qualities_write(qualities.get(), quality_path.c_str()), "writing qualities");
  std::cerr << "wrote " << cc_dataset_size(records.get()) << " record(s) to " << cfg.output << " and "
            << quality_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probability-based confidence scores for text generation, and their calibration"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* score = app.add_subcommand("score", "Compute confidence scores for every record");
  score->add_option("--input", cfg.input, "Record file (one JSON record per line)")->expected(1);
  score->add_option("--output", cfg.output, "Score file to write");
  score->add_option("--methods", cfg.methods, "Comma-separated method ids (default: all)");
  score->add_option("--k", cfg.k, "Ratio offset: compare beam 1 with beam k+1");
  score->add_option("--temperature", cfg.temperature, "Softmax temperature for tail and beam_entropy");
  score->add_option("--top-k", cfg.top_k, "Beams summed by sum_top_k (default 10)");
  score->add_option("--n-beams", cfg.n_beams, "Beams consumed per record (default 100)");
  score->add_option("--preset", cfg.preset, "Preset k/temperature, e.g. squad/flan-t5");
  score->add_option("--dataset", cfg.dataset, "Dataset tag; a known pair with --model sets k/temperature");
  score->add_option("--model", cfg.model, "Model tag");
  add_common(score, cfg);

  auto* quality = app.add_subcommand("quality", "Score each top beam against its references");
  quality->add_option("--input", cfg.input, "Record file")->expected(1);
  quality->add_option("--output", cfg.output, "Quality file to write");
  quality->add_option("--metric", cfg.metric, "bleu | rouge_l | f1 | meteor (default: route by task)");
  add_common(quality, cfg);

  auto* correlate = app.add_subcommand("correlate", "Spearman correlation of scores with quality");
  correlate->add_option("--input", cfg.input, "Score file")->expected(1);
  correlate->add_option("--quality", cfg.quality, "Quality file");
  correlate->add_option("--output", cfg.output, "Report file to write (JSON lines)");
  correlate->add_option("--table", cfg.table, "Rendered table path (default: stdout)");
  correlate->add_option("--dataset", cfg.dataset, "Dataset tag for the report");
  correlate->add_option("--model", cfg.model, "Model tag for the report");
  correlate->add_option("--bootstrap-b", cfg.bootstrap_b, "Bootstrap resamples (default 10000)");
  correlate->add_option("--seed", cfg.seed, "Bootstrap seed");
  add_common(correlate, cfg);

  auto* tune = app.add_subcommand("tune", "Grid-search k (ratio) and temperature (tail) on validation data");
  tune->add_option("--input", cfg.input, "Record file")->expected(1);
  tune->add_option("--quality", cfg.quality, "Quality file");
  tune->add_option("--output", cfg.output, "Tune result file (default: stdout)");
  tune->add_option("--sweep", cfg.sweep, "Plain-text sweep dump for plotting");
  tune->add_option("--methods", cfg.methods, "ratio,tail (default both)");
  tune->add_option("--k", cfg.k, "Largest k searched (default min(100, fewest beams - 1))");
  tune->add_option("--temperature", cfg.temperature, "Comma-separated temperature grid");
  tune->add_option("--n-beams", cfg.n_beams, "Beams consumed per record");
  tune->add_option("--val-size", cfg.val_size, "Validation records drawn by a seeded shuffle (default: all)");
  tune->add_option("--seed", cfg.seed, "Split seed");
  add_common(tune, cfg);

  auto* rank = app.add_subcommand("rank", "Average and median method ranks across reports");
  rank->add_option("--input", cfg.input, "Report files")->delimiter(',');
  rank->add_option("--output", cfg.output, "Rank summary JSON (default: stdout)");
  rank->add_option("--table", cfg.table, "Rendered table path");
  add_common(rank, cfg);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic record file and its quality sidecar");
  synth->add_option("--spec", cfg.spec, "Synthetic spec JSON file");
  synth->add_option("--output", cfg.output, "Record file to write");
  synth->add_option("--quality-output", cfg.quality_output, "Quality sidecar (default: <output>.quality.jsonl)");
  synth->add_option("--archetype", cfg.archetype, "uniform | degenerate | k_modal_thin_tail | heavy_tail");
  synth->add_option("--n-records", cfg.n_records, "Number of records");
  synth->add_option("--coupling", cfg.coupling, "Confidence-quality coupling in [0, 1]");
  synth->add_option("--n-beams", cfg.n_beams, "Beams per record");
  synth->add_option("--seed", cfg.seed, "Generator seed");
  add_common(synth, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : CC_ERR_USAGE;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    merge_config_file(active, cfg);
    const std::string name = active->get_name();
    if (name == "score") cmd_score(cfg);
    else if (name == "quality") cmd_quality(cfg);
    else if (name == "correlate") cmd_correlate(cfg);
    else if (name == "tune") cmd_tune(cfg);
    else if (name == "rank") cmd_rank(cfg);
    else if (name == "synth") cmd_synth(cfg);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return static_cast<int>(e.status);
  }
  return 0;
}

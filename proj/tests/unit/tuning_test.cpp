// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "calconf/confidence.hpp"
#include "calconf/errors.hpp"
#include "calconf/synthetic.hpp"
#include "calconf/tuning.hpp"
#include "json.hpp"
#include "test_support.hpp"

namespace calconf {
namespace {

SyntheticDataset ratio_fixture(int k_star, std::uint64_t seed, std::size_t n = 300) {
  RatioCouplingSpec spec;
  spec.k_star = k_star;
  spec.seed = seed;
  spec.n_records = n;
  return generate_ratio_coupled_dataset(spec);
}

TEST(TuneRatio, RecoversSmallK) {
  const auto data = ratio_fixture(1, 1);
  const auto result = tune_ratio(data.records, data.qualities, 20);
  EXPECT_EQ(result.best_config.k, 1);
  EXPECT_EQ(result.sweep.size(), 20u);
}

TEST(TuneRatio, SweepPeaksNearLargeK) {
  const auto data = ratio_fixture(50, 2);
  const auto result = tune_ratio(data.records, data.qualities, 99);
  EXPECT_NEAR(result.best_config.k, 50, 2);
  // The curve rises toward the peak and falls after it.
  EXPECT_LT(*result.sweep[0].abs_spearman, *result.sweep[49].abs_spearman);
  EXPECT_LT(*result.sweep[98].abs_spearman, *result.sweep[49].abs_spearman);
}

TEST(TuneRatio, BestIsMaxOfSweep) {
  const auto data = ratio_fixture(10, 3, 200);
  const auto result = tune_ratio(data.records, data.qualities, 30);
  double max = 0.0;
  for (const auto& point : result.sweep) max = std::max(max, point.abs_spearman.value_or(0.0));
  EXPECT_EQ(result.best_abs_spearman, max);
}

TEST(TuneRatio, TiesPreferSmallerK) {
  // Equal gaps everywhere: every k ranks the records identically.
  std::vector<GenerationRecord> records;
  std::vector<double> qualities;
  for (int r = 0; r < 20; ++r) {
    std::vector<double> lps;
    for (int i = 0; i < 6; ++i) lps.push_back(-0.1 * (r + 1) * i);
    records.push_back(testing::make_record(lps, "r" + std::to_string(r)));
    qualities.push_back(r * 0.01);
  }
  const auto result = tune_ratio(records, qualities, 5);
  EXPECT_EQ(result.best_config.k, 1);
  for (const auto& point : result.sweep) EXPECT_EQ(*point.abs_spearman, 1.0);
}

TEST(TuneRatio, KMaxBeyondBeamsIsError) {
  const auto data = ratio_fixture(1, 4, 50);
  EXPECT_EQ(max_ratio_offset(data.records), 99);
  EXPECT_THROW(tune_ratio(data.records, data.qualities, 100), UsageError);
  EXPECT_THROW(tune_ratio(data.records, data.qualities, 0), UsageError);
  MethodConfig base;
  base.n_beams = 10;
  EXPECT_EQ(max_ratio_offset(data.records, base), 9);
}

TEST(TuneRatio, UndefinedEverywhere) {
  std::vector<GenerationRecord> records;
  for (int r = 0; r < 5; ++r) records.push_back(testing::make_record({-1, -2, -3}, "r" + std::to_string(r)));
  const std::vector<double> qualities = {0.1, 0.2, 0.3, 0.4, 0.5};
  EXPECT_THROW(tune_ratio(records, qualities, 2), StatisticsError);
}

TEST(TuneRatio, DeterministicAcrossWorkers) {
  const auto data = ratio_fixture(10, 5, 200);
  const auto a = tune_ratio(data.records, data.qualities, 40, {}, 1);
  const auto b = tune_ratio(data.records, data.qualities, 40, {}, 3);
  EXPECT_EQ(tune_result_to_json(a), tune_result_to_json(b));
}

// Two beams per record: tail is a monotone function of the gap at every temperature,
// so the sweep is exactly flat and the tie rule picks the largest T.
TEST(TuneTemperature, FlatSweepPicksLargestT) {
  std::mt19937_64 rng(8);
  std::vector<GenerationRecord> records;
  std::vector<double> qualities;
  for (int r = 0; r < 40; ++r) {
    const double gap = 1e-5 * (1 + r);
    records.push_back(testing::make_record({-1.0, -1.0 - gap}, "r" + std::to_string(r)));
    qualities.push_back(static_cast<double>(rng() % 1000));
  }
  const auto result = tune_temperature(records, qualities);
  ASSERT_EQ(result.sweep.size(), kDefaultTemperatureGrid.size());
  for (const auto& point : result.sweep) EXPECT_EQ(*point.abs_spearman, *result.sweep.front().abs_spearman);
  EXPECT_EQ(result.best_config.temperature, 1.0);
}

TEST(TuneTemperature, SinglePointGrid) {
  const auto data = ratio_fixture(1, 6, 50);
  const double grid[] = {1.0};
  EXPECT_EQ(tune_temperature(data.records, data.qualities, grid).best_config.temperature, 1.0);
}

TEST(TuneTemperature, BadGrid) {
  const auto data = ratio_fixture(1, 6, 20);
  const std::vector<double> empty;
  EXPECT_THROW(tune_temperature(data.records, data.qualities, empty), UsageError);
  const double negative[] = {0.1, -1.0};
  EXPECT_THROW(tune_temperature(data.records, data.qualities, negative), UsageError);
}

TEST(TuneTemperature, DefaultGridMatchesPresetValues) {
  EXPECT_EQ(std::vector<double>(kDefaultTemperatureGrid.begin(), kDefaultTemperatureGrid.end()),
            (std::vector<double>{0.001, 0.005, 0.01, 0.05, 0.1, 1.0}));
}

TEST(TuneOutput, JsonShape) {
  const auto data = ratio_fixture(1, 7, 50);
  const auto result = tune_ratio(data.records, data.qualities, 5);
  const auto doc = nlohmann::json::parse(tune_result_to_json(result));
  EXPECT_EQ(doc["method"], "ratio");
  EXPECT_EQ(doc["best"]["k"], result.best_config.k);
  ASSERT_EQ(doc["sweep"].size(), 5u);
  EXPECT_EQ(doc["sweep"][0][0], 1);
  const auto tail = nlohmann::json::parse(tune_result_to_json(tune_temperature(data.records, data.qualities)));
  EXPECT_TRUE(tail["best"].contains("temperature"));
  const std::string text = sweep_to_text(result);
  EXPECT_EQ(text.rfind("# k abs_spearman\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 6);
}

}  // namespace
}  // namespace calconf

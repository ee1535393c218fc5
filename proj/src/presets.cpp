// SPDX-License-Identifier: Apache-2.0
#include "calconf/presets.hpp"

#include <array>

namespace calconf {
namespace {

constexpr std::array<Preset, 18> kPresets = {{
    {"flores-fil", "bart", "translation", 99, 1.000},
    {"flores-fil", "flan-t5", "translation", 99, 1.000},
    {"wmt-de-en", "bart", "translation", 99, 1.000},
    {"wmt-de-en", "flan-t5", "translation", 99, 1.000},
    {"wmt-ru-en", "bart", "translation", 79, 1.000},
    {"wmt-ru-en", "flan-t5", "translation", 99, 1.000},
    {"hotpotqa", "bart", "qa", 1, 0.010},
    {"hotpotqa", "flan-t5", "qa", 1, 0.050},
    {"squad", "bart", "qa", 1, 0.050},
    {"squad", "flan-t5", "qa", 4, 0.001},
    {"debatesumm", "bart", "summarization", 95, 1.000},
    {"debatesumm", "flan-t5", "summarization", 85, 1.000},
    {"reddit", "bart", "summarization", 2, 0.005},
    {"reddit", "flan-t5", "summarization", 99, 0.010},
    {"cnn", "bart", "summarization", 3, 0.001},
    {"cnn", "flan-t5", "summarization", 77, 0.001},
    {"xsum", "bart", "summarization", 4, 0.100},
    {"xsum", "flan-t5", "summarization", 98, 0.100},
}};

}  // namespace

std::span<const Preset> presets() { return kPresets; }

const Preset* find_preset(std::string_view dataset, std::string_view model) {
  for (const auto& preset : kPresets) {
    if (preset.dataset == dataset && preset.model == model) return &preset;
  }
  return nullptr;
}

}  // namespace calconf

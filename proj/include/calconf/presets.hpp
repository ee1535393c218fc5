// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string_view>

namespace calconf {

/// Preset ratio offset and tail temperature for one dataset/model pair.
struct Preset {
  std::string_view dataset;
  std::string_view model;
  std::string_view task;
  int k;
  double temperature;
};

std::span<const Preset> presets();

/// nullptr when the pair is unknown.
const Preset* find_preset(std::string_view dataset, std::string_view model);

}  // namespace calconf

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "occlusym/flow.hpp"
#include "occlusym/mask2d.hpp"
#include "occlusym/toy_data.hpp"

namespace occlusym::cli {

using Json = nlohmann::ordered_json;

// Every recognised key with its default value.
Json default_config();

// Loads `path` over the defaults, then applies `key.sub=value` overrides.
// Values parse as JSON when they can and fall back to plain strings.
// Unknown keys are rejected. Relative paths resolve against the config
// file's directory.
struct RunConfig {
  Json json;
  std::filesystem::path base_dir;
  int jobs = 1;

  std::filesystem::path out_dir() const;
  std::filesystem::path resolve(const std::string& p) const;
  std::uint64_t seed() const;

  OcclusionParams occlusion() const;
  ToyDatasetConfig dataset() const;
  FlowModelConfig model(const ToyDatasetConfig& data) const;
  TrainConfig train() const;
  SampleConfig sample() const;
};

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides, int jobs);
void apply_override(Json& config, std::string_view assignment);

}  // namespace occlusym::cli

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "occlusym/flow_model.hpp"

namespace occlusym {

inline constexpr std::string_view kCheckpointMagic = "OCSYMCKP";
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Single-file container:
//   8 bytes magic | u32 LE version | u64 LE manifest length | JSON manifest |
//   parameter blobs as little-endian f64, in manifest order.
// The manifest records the model configuration, every parameter's name,
// shape and byte offset, and a caller-supplied `meta` object (JSON text).
std::string encode_checkpoint(FlowModel& model, std::string_view meta_json = "{}");
FlowModel decode_checkpoint(std::string_view bytes, std::string* meta_json = nullptr);

void save_checkpoint(const std::filesystem::path& path, FlowModel& model, std::string_view meta_json = "{}");
FlowModel load_checkpoint(const std::filesystem::path& path, std::string* meta_json = nullptr);

std::string flow_config_to_json(const FlowModelConfig& config);
FlowModelConfig flow_config_from_json(std::string_view text);

}  // namespace occlusym

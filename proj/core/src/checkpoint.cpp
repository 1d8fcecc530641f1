#include "occlusym/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "json.hpp"
#include "occlusym/error.hpp"
#include "occlusym/io.hpp"

namespace occlusym {

using json = nlohmann::ordered_json;

namespace {

json config_json(const FlowModelConfig& c) {
  return {{"latent_tokens", c.latent_tokens},
          {"latent_features", c.latent_features},
          {"patchify", c.patchify},
          {"n_blocks", c.n_blocks},
          {"block",
           {{"width", c.block.width},
            {"cond_width", c.block.cond_width},
            {"occ_width", c.block.occ_width},
            {"heads", c.block.heads},
            {"head_dim", c.block.head_dim},
            {"mlp_hidden", c.block.mlp_hidden},
            {"time_dim", c.block.time_dim}}},
          {"grid", {{"image_size", c.grid.image_size}, {"patch", c.grid.patch}, {"n_prefix", c.grid.n_prefix}}},
          {"image_channels", c.image_channels},
          {"seed", c.seed}};
}

FlowModelConfig config_from(const json& j) {
  FlowModelConfig c;
  c.latent_tokens = j.at("latent_tokens").get<int>();
  c.latent_features = j.at("latent_features").get<int>();
  c.patchify = j.at("patchify").get<int>();
  c.n_blocks = j.at("n_blocks").get<int>();
  const auto& b = j.at("block");
  c.block.width = b.at("width").get<int>();
  c.block.cond_width = b.at("cond_width").get<int>();
  c.block.occ_width = b.at("occ_width").get<int>();
  c.block.heads = b.at("heads").get<int>();
  c.block.head_dim = b.at("head_dim").get<int>();
  c.block.mlp_hidden = b.at("mlp_hidden").get<int>();
  c.block.time_dim = b.at("time_dim").get<int>();
  const auto& g = j.at("grid");
  c.grid.image_size = g.at("image_size").get<int>();
  c.grid.patch = g.at("patch").get<int>();
  c.grid.n_prefix = g.at("n_prefix").get<int>();
  c.image_channels = j.at("image_channels").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

template <typename T>
T byteswap(T v) {
  T out;
  auto* src = reinterpret_cast<const unsigned char*>(&v);
  auto* dst = reinterpret_cast<unsigned char*>(&out);
  for (std::size_t i = 0; i < sizeof(T); ++i) dst[i] = src[sizeof(T) - 1 - i];
  return out;
}

template <typename T>
void append_le(std::string& out, T value) {
  if constexpr (std::endian::native == std::endian::big) value = byteswap(value);
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T read_le(std::string_view bytes, std::size_t offset) {
  if (offset + sizeof(T) > bytes.size()) throw IoError("checkpoint: truncated");
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) value = byteswap(value);
  return value;
}

}  // namespace

std::string flow_config_to_json(const FlowModelConfig& config) { return config_json(config).dump(); }

FlowModelConfig flow_config_from_json(std::string_view text) {
  try {
    return config_from(json::parse(text));
  } catch (const json::exception& e) {
    throw ParameterError(std::string("flow model config: ") + e.what());
  }
}

std::string encode_checkpoint(FlowModel& model, std::string_view meta_json) {
  json manifest;
  manifest["format"] = "occlusym-checkpoint";
  manifest["version"] = kCheckpointVersion;
  manifest["config"] = config_json(model.config);
  try {
    manifest["meta"] = json::parse(meta_json);
  } catch (const json::exception& e) {
    throw ParameterError(std::string("checkpoint meta is not JSON: ") + e.what());
  }
  std::string blob;
  json params = json::array();
  model.visit_all([&](const std::string& name, Mat& m) {
    params.push_back({{"name", name}, {"shape", {m.rows(), m.cols()}}, {"offset", blob.size()}});
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      std::uint64_t bits;
      const double v = m.data()[i];
      std::memcpy(&bits, &v, sizeof bits);
      append_le(blob, bits);
    }
  });
  manifest["params"] = params;
  manifest["blob_bytes"] = blob.size();

  const std::string text = manifest.dump();
  std::string out(kCheckpointMagic);
  append_le<std::uint32_t>(out, kCheckpointVersion);
  append_le<std::uint64_t>(out, text.size());
  out += text;
  out += blob;
  return out;
}

FlowModel decode_checkpoint(std::string_view bytes, std::string* meta_json) {
  if (bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic) throw IoError("checkpoint: bad magic");
  std::size_t pos = kCheckpointMagic.size();
  const auto version = read_le<std::uint32_t>(bytes, pos);
  pos += 4;
  if (version != kCheckpointVersion) throw IoError("checkpoint: unsupported version " + std::to_string(version));
  const auto len = read_le<std::uint64_t>(bytes, pos);
  pos += 8;
  if (pos + len > bytes.size()) throw IoError("checkpoint: truncated manifest");
  json manifest;
  try {
    manifest = json::parse(bytes.substr(pos, len));
  } catch (const json::exception& e) {
    throw IoError(std::string("checkpoint: bad manifest: ") + e.what());
  }
  const std::string_view blob = bytes.substr(pos + len);
  if (blob.size() != manifest.at("blob_bytes").get<std::size_t>()) throw IoError("checkpoint: blob size mismatch");

  FlowModel model = make_flow_model(config_from(manifest.at("config")));
  const auto& params = manifest.at("params");
  std::size_t i = 0;
  model.visit_all([&](const std::string& name, Mat& m) {
    if (i >= params.size()) throw IoError("checkpoint: missing parameter " + name);
    const auto& entry = params[i++];
    if (entry.at("name").get<std::string>() != name) throw IoError("checkpoint: parameter order mismatch at " + name);
    const auto shape = entry.at("shape").get<std::vector<Eigen::Index>>();
    if (shape.size() != 2 || shape[0] != m.rows() || shape[1] != m.cols())
      throw IoError("checkpoint: shape mismatch for " + name);
    const auto offset = entry.at("offset").get<std::size_t>();
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      const auto bits = read_le<std::uint64_t>(blob, offset + static_cast<std::size_t>(k) * 8);
      double v;
      std::memcpy(&v, &bits, sizeof v);
      m.data()[k] = v;
    }
  });
  if (i != params.size()) throw IoError("checkpoint: unexpected extra parameters");
  if (meta_json) *meta_json = manifest.value("meta", json::object()).dump();
  return model;
}

void save_checkpoint(const std::filesystem::path& path, FlowModel& model, std::string_view meta_json) {
  write_file_atomic(path, encode_checkpoint(model, meta_json));
}

FlowModel load_checkpoint(const std::filesystem::path& path, std::string* meta_json) {
  return decode_checkpoint(read_file(path), meta_json);
}

}  // namespace occlusym

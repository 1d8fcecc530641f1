#include "occlusym_cli/config.hpp"

#include "occlusym/error.hpp"
#include "occlusym/io.hpp"

namespace occlusym::cli {

namespace {

Json range(double lo, double hi) { return Json::array({lo, hi}); }
Json irange(int lo, int hi) { return Json::array({lo, hi}); }

void check_known(const Json& defaults, const Json& given, const std::string& prefix) {
  for (auto it = given.begin(); it != given.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!defaults.contains(it.key())) throw ParameterError("unknown config key '" + key + "'");
    const Json& d = defaults.at(it.key());
    if (d.is_object()) {
      if (!it.value().is_object()) throw ParameterError("config key '" + key + "' must be an object");
      check_known(d, it.value(), key);
    }
  }
}

template <class T>
T get(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("config key '") + key + "': " + e.what());
  }
}

IntRange int_range(const Json& j, const char* key) {
  const auto v = get<std::vector<int>>(j, key);
  if (v.size() != 2) throw ParameterError(std::string("config key '") + key + "' must be [lo, hi]");
  return {v[0], v[1]};
}

RealRange real_range(const Json& j, const char* key) {
  const auto v = get<std::vector<double>>(j, key);
  if (v.size() != 2) throw ParameterError(std::string("config key '") + key + "' must be [lo, hi]");
  return {v[0], v[1]};
}

}  // namespace

Json default_config() {
  Json c;
  c["seed"] = 0;
  c["out_dir"] = "out";
  c["occlusion"] = {{"n_lines", irange(1, 3)},
                    {"n_circles", irange(1, 3)},
                    {"n_ellipses", irange(1, 3)},
                    {"n_rects", irange(3, 7)},
                    {"dilation_radius", -1},
                    {"line_length", range(0.1, 0.5)},
                    {"line_thickness", range(0.02, 0.06)},
                    {"circle_radius", range(0.03, 0.15)},
                    {"ellipse_semi_axis", range(0.03, 0.2)},
                    {"rect_side", range(0.05, 0.25)}};
  c["camera"] = {{"radius", 2.0}, {"fov_deg", 40.0}, {"pitch_deg", 30.0}, {"yaw_start_deg", 0.0}, {"n_views", 4}};
  c["masks"] = {{"mode", "2d"},          {"count", 10},
                {"width", 128},          {"height", 128},
                {"meshes", Json::array()}, {"image_size", 128},
                {"target_ratio", range(0.4, 0.6)}};
  c["dataset"] = {{"n_shapes", 64}, {"n", 16}, {"r", 8}, {"image_size", 32}, {"occlusion_prob", 1.0}};
  c["model"] = {{"n_blocks", 4},  {"width", 64},     {"heads", 4},    {"head_dim", 16},
                {"mlp_hidden", 256}, {"time_dim", 32}, {"cond_width", 64}, {"patch", 4},
                {"patchify", 2}};
  c["train"] = {{"lr", 1e-3}, {"cfg_drop", 0.1}, {"batch", 4}, {"steps", 2000}, {"weight_decay", 0.0}};
  c["sample"] = {{"count", 16},
                 {"n_steps", 25},
                 {"cfg_scale", 1.0},
                 {"views", 1},
                 {"target_ratio", range(0.4, 0.6)},
                 {"threshold", 0.5}};
  c["eval"] = {{"k_points", 256}};
  return c;
}

void apply_override(Json& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw ParameterError("--set expects key=value, got '" + std::string(assignment) + "'");
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  Json* node = &config;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(part)) throw ParameterError("unknown config key '" + key + "'");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_object()) throw ParameterError("--set cannot replace the whole block '" + key + "'");
  *node = std::move(value);
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides, int jobs) {
  if (jobs < 1) throw ParameterError("--jobs must be at least 1");
  Json given = Json::parse(read_file(path), nullptr, false);
  if (given.is_discarded() || !given.is_object()) throw ParameterError("config is not a JSON object: " + path.string());
  Json defaults = default_config();
  check_known(defaults, given, "");
  defaults.merge_patch(given);
  for (const auto& o : overrides) apply_override(defaults, o);

  RunConfig rc;
  rc.json = std::move(defaults);
  rc.base_dir = path.parent_path();
  rc.jobs = jobs;
  // Validate every block up front so a bad value fails before any output.
  const auto data = rc.dataset();
  rc.model(data).validate();
  rc.train().validate();
  rc.sample().validate();
  rc.occlusion().validate();
  return rc;
}

std::filesystem::path RunConfig::resolve(const std::string& p) const {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

std::filesystem::path RunConfig::out_dir() const { return resolve(get<std::string>(json, "out_dir")); }

std::uint64_t RunConfig::seed() const { return get<std::uint64_t>(json, "seed"); }

OcclusionParams RunConfig::occlusion() const {
  const Json& j = json.at("occlusion");
  OcclusionParams p;
  p.n_lines = int_range(j, "n_lines");
  p.n_circles = int_range(j, "n_circles");
  p.n_ellipses = int_range(j, "n_ellipses");
  p.n_rects = int_range(j, "n_rects");
  p.dilation_radius = get<int>(j, "dilation_radius");
  p.line_length = real_range(j, "line_length");
  p.line_thickness = real_range(j, "line_thickness");
  p.circle_radius = real_range(j, "circle_radius");
  p.ellipse_semi_axis = real_range(j, "ellipse_semi_axis");
  p.rect_side = real_range(j, "rect_side");
  return p;
}

ToyDatasetConfig RunConfig::dataset() const {
  const Json& d = json.at("dataset");
  const Json& cam = json.at("camera");
  ToyDatasetConfig c;
  c.n_shapes = get<int>(d, "n_shapes");
  c.n = get<int>(d, "n");
  c.r = get<int>(d, "r");
  c.seed = seed();
  c.occlusion_prob = get<double>(d, "occlusion_prob");
  c.occlusion = occlusion();
  c.render.radius = get<double>(cam, "radius");
  c.render.fov_y_deg = get<double>(cam, "fov_deg");
  c.render.pitch_deg = get<double>(cam, "pitch_deg");
  c.render.yaw_start_deg = get<double>(cam, "yaw_start_deg");
  c.render.n_views = get<int>(cam, "n_views");
  c.render.image_size = get<int>(d, "image_size");
  c.validate();
  return c;
}

FlowModelConfig RunConfig::model(const ToyDatasetConfig& data) const {
  const Json& m = json.at("model");
  FlowModelConfig c = default_flow_config(data, derive_seed(seed(), "model.init"));
  c.n_blocks = get<int>(m, "n_blocks");
  c.patchify = get<int>(m, "patchify");
  c.block.width = get<int>(m, "width");
  c.block.heads = get<int>(m, "heads");
  c.block.head_dim = get<int>(m, "head_dim");
  c.block.mlp_hidden = get<int>(m, "mlp_hidden");
  c.block.time_dim = get<int>(m, "time_dim");
  c.block.cond_width = get<int>(m, "cond_width");
  c.block.occ_width = c.block.cond_width;
  c.grid.patch = get<int>(m, "patch");
  return c;
}

TrainConfig RunConfig::train() const {
  const Json& t = json.at("train");
  TrainConfig c;
  c.lr = get<double>(t, "lr");
  c.cfg_drop = get<double>(t, "cfg_drop");
  c.batch = get<int>(t, "batch");
  c.steps = get<int>(t, "steps");
  c.weight_decay = get<double>(t, "weight_decay");
  c.seed = derive_seed(seed(), "train");
  c.jobs = jobs;
  return c;
}

SampleConfig RunConfig::sample() const {
  const Json& s = json.at("sample");
  SampleConfig c;
  c.n_steps = get<int>(s, "n_steps");
  c.cfg_scale = get<double>(s, "cfg_scale");
  c.seed = derive_seed(seed(), "sample");
  return c;
}

}  // namespace occlusym::cli

#include "occlusym/flow_model.hpp"

#include <cmath>

#include "occlusym/error.hpp"
#include "occlusym/rng.hpp"

namespace occlusym {

namespace {

int cube_root_exact(int n) {
  const int r = static_cast<int>(std::lround(std::cbrt(static_cast<double>(n))));
  return r * r * r == n ? r : -1;
}

}  // namespace

int FlowModelConfig::model_tokens() const {
  const int g = patchify;
  return latent_tokens / (g * g * g);
}

void FlowModelConfig::validate() const {
  grid.validate();
  if (latent_tokens <= 0 || latent_features <= 0 || n_blocks < 0 || image_channels <= 0 || patchify <= 0)
    throw ParameterError("FlowModelConfig: sizes must be positive");
  if (patchify > 1) {
    const int r = cube_root_exact(latent_tokens);
    if (r < 0 || r % patchify != 0)
      throw ParameterError("FlowModelConfig: patchify needs an r^3 token grid with r divisible by the patch");
  }
  if (block.width <= 0 || block.cond_width <= 0 || block.occ_width <= 0 || block.heads <= 0 ||
      block.head_dim <= 0 || block.mlp_hidden <= 0 || block.time_dim <= 0 || block.time_dim % 2 != 0)
    throw ParameterError("FlowModelConfig: invalid block configuration");
}

namespace {

// Fixed 3D sinusoidal code for an r^3 token grid (or a 1D code otherwise).
Mat latent_positional_code(int tokens, int width) {
  Mat pos(tokens, width);
  const int r = static_cast<int>(std::lround(std::cbrt(static_cast<double>(tokens))));
  const bool cubic = r * r * r == tokens;
  for (int i = 0; i < tokens; ++i) {
    const int coord[3] = {cubic ? i / (r * r) : i, cubic ? (i / r) % r : 0, cubic ? i % r : 0};
    for (int c = 0; c < width; ++c) {
      const int axis = c % 3;
      const int k = c / 3;
      const double freq = std::pow(2.0, static_cast<double>(k / 2)) * 0.5;
      const double v = (k % 2 == 0) ? std::sin(coord[axis] * freq) : std::cos(coord[axis] * freq);
      pos(i, c) = 0.5 * v;
    }
  }
  return pos;
}

}  // namespace

Mat patchify_tokens(const Mat& tokens, int patch) {
  if (patch == 1) return tokens;
  const int r = cube_root_exact(static_cast<int>(tokens.rows()));
  if (r < 0 || r % patch != 0) throw ShapeError("patchify_tokens: token count is not a compatible cube");
  const int g = r / patch;
  const auto f = tokens.cols();
  Mat out(static_cast<Eigen::Index>(g) * g * g, f * patch * patch * patch);
  for (int x = 0; x < r; ++x)
    for (int y = 0; y < r; ++y)
      for (int z = 0; z < r; ++z) {
        const int group = ((x / patch) * g + y / patch) * g + z / patch;
        const int within = ((x % patch) * patch + y % patch) * patch + z % patch;
        out.block(group, within * f, 1, f) = tokens.row((x * r + y) * r + z);
      }
  return out;
}

Mat unpatchify_tokens(const Mat& tokens, int patch, int features) {
  if (patch == 1) return tokens;
  const int g = cube_root_exact(static_cast<int>(tokens.rows()));
  if (g < 0 || tokens.cols() != static_cast<Eigen::Index>(features) * patch * patch * patch)
    throw ShapeError("unpatchify_tokens: incompatible shape");
  const int r = g * patch;
  Mat out(static_cast<Eigen::Index>(r) * r * r, features);
  for (int x = 0; x < r; ++x)
    for (int y = 0; y < r; ++y)
      for (int z = 0; z < r; ++z) {
        const int group = ((x / patch) * g + y / patch) * g + z / patch;
        const int within = ((x % patch) * patch + y % patch) * patch + z % patch;
        out.row((x * r + y) * r + z) = tokens.block(group, within * features, 1, features);
      }
  return out;
}

FlowModel make_flow_model(const FlowModelConfig& config) {
  config.validate();
  FlowModel m;
  m.config = config;
  Rng rng(derive_seed(config.seed, "flow_model.init"));
  const int width = config.block.width;
  m.input = make_linear(config.model_features(), width, rng);
  m.latent_pos = latent_positional_code(config.model_tokens(), width);
  for (int b = 0; b < config.n_blocks; ++b) m.blocks.push_back(make_block(config.block, rng));
  m.final_norm = make_layer_norm(width);
  m.output = make_linear(width, config.model_features(), rng, 0.0);
  const int k = config.cond_tokens();
  m.null_tokens.resize(k, config.block.cond_width);
  for (Eigen::Index i = 0; i < m.null_tokens.size(); ++i) m.null_tokens.data()[i] = rng.normal();
  m.embedder = make_patch_embedder(config.grid, config.image_channels, config.block.cond_width,
                                   derive_seed(config.seed, "flow_model.embedder"));
  return m;
}

ViewCondition make_view_condition(const Image& image, const BinaryMask& obj, const BinaryMask& occ,
                                  const PatchEmbedder& embedder) {
  const BinaryMask vis = visible_mask(obj, occ);
  ViewCondition v;
  v.visibility_count = vis.count();
  if (v.visibility_count == 0) throw DegenerateConditioningError("view has no visible object pixels");
  v.tokens = embed_patches(apply_mask(image, vis), embedder);
  v.c_vis = patch_fraction(vis, embedder.spec);
  v.c_occ = patch_fraction(occ, embedder.spec);
  return v;
}

ViewCondition null_condition(const FlowModel& model) {
  const auto& spec = model.config.grid;
  ViewCondition v;
  v.tokens = model.null_tokens;
  v.c_vis.n_prefix = spec.n_prefix;
  v.c_vis.values = Vec::Zero(token_count(spec));
  v.c_vis.values.head(spec.n_prefix).setOnes();
  v.c_occ = v.c_vis;
  v.is_null = true;
  return v;
}

Mat flow_forward(const FlowModel& model, const Mat& noisy, const ViewCondition& view, double t, FlowCache* cache) {
  const auto& cfg = model.config;
  require_shape(noisy, cfg.latent_tokens, cfg.latent_features, "flow_forward latents");
  require_shape(view.tokens, cfg.cond_tokens(), cfg.block.cond_width, "flow_forward condition tokens");
  BlockConditioning cond{view.tokens, view.c_vis.values, stack_occlusion_tokens(view.c_occ, cfg.block.occ_width)};

  Mat x_in = patchify_tokens(noisy, cfg.patchify);
  Mat h = linear_forward(x_in, model.input) + model.latent_pos;
  if (cache) {
    cache->x_in = std::move(x_in);
    cache->block_inputs.clear();
    cache->blocks.assign(model.blocks.size(), BlockCache{});
    cache->used_null = view.is_null;
  }
  for (std::size_t b = 0; b < model.blocks.size(); ++b) {
    if (cache) cache->block_inputs.push_back(h);
    h = block_forward(h, cond, t, model.blocks[b], cache ? &cache->blocks[b] : nullptr);
  }
  Mat n = layer_norm_forward(h, model.final_norm, cache ? &cache->final_norm : nullptr);
  Mat out = linear_forward(n, model.output);
  if (cache) cache->pre_out = std::move(n);
  return unpatchify_tokens(out, cfg.patchify, cfg.latent_features);
}

Mat flow_backward(const Mat& dvelocity, const FlowCache& cache, const FlowModel& model, FlowModel& grad) {
  const auto& cfg = model.config;
  Mat dn = linear_backward(patchify_tokens(dvelocity, cfg.patchify), cache.pre_out, model.output, grad.output);
  Mat dh = layer_norm_backward(dn, cache.final_norm, model.final_norm, grad.final_norm);
  for (std::size_t b = model.blocks.size(); b-- > 0;) {
    auto g = block_backward(dh, cache.blocks[b], model.blocks[b], grad.blocks[b]);
    if (cache.used_null) grad.null_tokens += g.dcond;
    dh = std::move(g.dlatents);
  }
  grad.latent_pos += dh;
  return unpatchify_tokens(linear_backward(dh, cache.x_in, model.input, grad.input), cfg.patchify,
                           cfg.latent_features);
}

}  // namespace occlusym

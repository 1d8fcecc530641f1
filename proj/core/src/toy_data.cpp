#include "occlusym/toy_data.hpp"

#include <algorithm>
#include <cmath>

#include "occlusym/error.hpp"
#include "occlusym/rng.hpp"

namespace occlusym {

void ToyDatasetConfig::validate() const {
  if (n_shapes <= 0) throw ParameterError("dataset: n_shapes must be positive");
  if (n < 8) throw ParameterError("dataset: N must be at least 8");
  dense_feature_count(n, r);
  if (render.n_views < 1 || render.image_size <= 0) throw ParameterError("dataset: bad render settings");
  if (!(occlusion_prob >= 0.0 && occlusion_prob <= 1.0)) throw ParameterError("dataset: occlusion_prob outside [0, 1]");
  occlusion.validate();
}

Image shade_depth(const IdBuffer& ids, const Camera& cam) {
  Image img(ids.size, ids.size, 1);
  for (std::size_t i = 0; i < ids.triangle.size(); ++i) {
    if (ids.triangle[i] < 0) continue;
    const double d = ids.depth[i];
    img.data[i] = std::clamp((cam.radius + 0.75 - d) / 1.5, 0.05, 1.0);
  }
  return img;
}

RenderedView render_view(const TriMesh& mesh, const Camera& cam) {
  RenderedView v;
  v.camera = cam;
  v.ids = rasterize_ids(mesh, cam);
  v.image = shade_depth(v.ids, cam);
  v.obj = BinaryMask(cam.image_size, cam.image_size);
  for (std::size_t i = 0; i < v.ids.triangle.size(); ++i) v.obj.set_index(i, v.ids.triangle[i] >= 0);
  return v;
}

ToyObject make_toy_object(ToyFamily family, std::uint64_t seed, const ToyDatasetConfig& cfg) {
  ToyObject o;
  o.family = family;
  o.seed = seed;
  o.params = resolve_toy_params(family, {}, seed);
  o.grid = gen_toy_shape(family, o.params, cfg.n, seed);
  attach_derived(o, cfg);
  return o;
}

void attach_derived(ToyObject& o, const ToyDatasetConfig& cfg) {
  if (o.grid.n() != cfg.n) throw ShapeError("toy object grid does not match the dataset resolution");
  if (o.grid.count() == 0) throw ParameterError("toy object is empty at this resolution");
  o.latent = fractions_to_latent(encode_stage1(o.grid, cfg.r).tokens);
  o.mesh = voxel_surface_mesh(o.grid);
  o.views.clear();
  for (const auto& cam : cfg.render.cameras()) o.views.push_back(render_view(o.mesh, cam));
}

std::vector<ToyObject> make_toy_dataset(const ToyDatasetConfig& cfg, std::string_view role) {
  cfg.validate();
  std::vector<ToyObject> objects;
  objects.reserve(static_cast<std::size_t>(cfg.n_shapes));
  for (int i = 0; i < cfg.n_shapes; ++i) {
    const ToyFamily family = kAllToyFamilies[static_cast<std::size_t>(i) % kAllToyFamilies.size()];
    objects.push_back(make_toy_object(family, derive_seed(cfg.seed, role, static_cast<std::uint64_t>(i)), cfg));
  }
  return objects;
}

ViewCondition clean_view_condition(const RenderedView& view, const PatchEmbedder& embedder) {
  return make_view_condition(view.image, view.obj, BinaryMask(view.obj.width(), view.obj.height()), embedder);
}

SampleSource make_training_source(const std::vector<ToyObject>& objects, const PatchEmbedder& embedder,
                                  const ToyDatasetConfig& cfg, int batch) {
  if (objects.empty()) throw ParameterError("training source: no objects");
  return [&objects, &embedder, cfg, batch](std::size_t step, std::size_t slot) {
    Rng rng(derive_seed(cfg.seed, "train.data", step * static_cast<std::size_t>(batch) + slot));
    const auto& obj = objects[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(objects.size()) - 1))];
    const auto& view = obj.views[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(obj.views.size()) - 1))];
    const std::uint64_t mask_seed = rng.next_u64();
    const bool occlude = rng.bernoulli(cfg.occlusion_prob);
    BinaryMask occ(view.obj.width(), view.obj.height());
    if (occlude) occ = gen_random_occlusion(view.obj.width(), view.obj.height(), cfg.occlusion, mask_seed);
    if (visible_mask(view.obj, occ).count() == 0) occ = BinaryMask(view.obj.width(), view.obj.height());
    return TrainingSample{obj.latent, make_view_condition(view.image, view.obj, occ, embedder)};
  };
}

ContactOcclusion contact_occluded_views(const ToyObject& object, double target_ratio, std::uint64_t seed,
                                        const PatchEmbedder& embedder) {
  ContactOcclusion out;
  out.selection = random_walk_select(object.mesh, target_ratio, seed);
  for (std::size_t v = 0; v < object.views.size(); ++v) {
    const auto& view = object.views[v];
    out.masks.push_back(masks_from_ids(view.ids, out.selection));
    const auto& m = out.masks.back();
    if (visible_mask(m.obj, m.occ).count() == 0) continue;
    out.conditions.push_back(make_view_condition(view.image, m.obj, m.occ, embedder));
    out.view_index.push_back(v);
  }
  if (out.conditions.empty()) throw DegenerateConditioningError("contact occlusion hides the object in every view");
  return out;
}

FlowModelConfig default_flow_config(const ToyDatasetConfig& data, std::uint64_t seed) {
  FlowModelConfig c;
  c.latent_tokens = data.r * data.r * data.r;
  c.latent_features = dense_feature_count(data.n, data.r);
  c.patchify = data.r % 2 == 0 ? 2 : 1;
  c.n_blocks = 4;
  c.block.width = 64;
  c.block.heads = 4;
  c.block.head_dim = 16;
  c.block.mlp_hidden = 256;
  c.grid = TokenGridSpec{data.render.image_size, 4, 5};
  c.seed = seed;
  return c;
}

}  // namespace occlusym

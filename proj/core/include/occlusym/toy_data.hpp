#pragma once

#include <cstdint>
#include <vector>

#include "occlusym/flow.hpp"
#include "occlusym/mask2d.hpp"
#include "occlusym/mesh_occlusion.hpp"
#include "occlusym/raster.hpp"
#include "occlusym/slat.hpp"

namespace occlusym {

struct RenderSettings {
  double radius = 2.0;
  double fov_y_deg = 40.0;
  double pitch_deg = 30.0;
  double yaw_start_deg = 0.0;
  int n_views = 4;
  int image_size = 32;

  std::vector<Camera> cameras() const {
    return orbit_cameras(n_views, radius, fov_y_deg, pitch_deg, yaw_start_deg, image_size);
  }
};

struct ToyDatasetConfig {
  int n_shapes = 256;
  int n = 16;
  int r = 8;
  std::uint64_t seed = 0;
  RenderSettings render;
  OcclusionParams occlusion;
  // Probability that a training view receives a random 2D occlusion.
  double occlusion_prob = 1.0;

  void validate() const;
};

struct RenderedView {
  Camera camera;
  IdBuffer ids;
  Image image;     // depth-shaded grey, 0 off the object
  BinaryMask obj;  // silhouette
};

struct ToyObject {
  ToyFamily family = ToyFamily::kBox;
  ToyShapeParams params;  // resolved
  std::uint64_t seed = 0;
  VoxelGrid grid;
  Mat latent;  // fractions_to_latent(encode_stage1(grid, r).tokens)
  TriMesh mesh;
  std::vector<RenderedView> views;
};

// Grey level falls off linearly with view depth.
Image shade_depth(const IdBuffer& ids, const Camera& cam);
RenderedView render_view(const TriMesh& mesh, const Camera& cam);

ToyObject make_toy_object(ToyFamily family, std::uint64_t seed, const ToyDatasetConfig& cfg);
// Fills latent, mesh and views from o.grid.
void attach_derived(ToyObject& o, const ToyDatasetConfig& cfg);

// Object i has family kAllToyFamilies[i % 4] and seed derive_seed(seed, role, i).
std::vector<ToyObject> make_toy_dataset(const ToyDatasetConfig& cfg, std::string_view role = "train");

// Training stream: each (step, slot) picks an object and one of its views and
// occludes it with a fresh random 2D mask. A mask that hides the whole
// object is discarded for that draw.
SampleSource make_training_source(const std::vector<ToyObject>& objects, const PatchEmbedder& embedder,
                                  const ToyDatasetConfig& cfg, int batch);

// Unoccluded condition for one rendered view.
ViewCondition clean_view_condition(const RenderedView& view, const PatchEmbedder& embedder);

// Contact occlusion shared across views: one random-walk selection on the
// object mesh rendered into every view. Views left with nothing visible are
// dropped.
struct ContactOcclusion {
  TriangleSelection selection;
  std::vector<ViewMasks> masks;          // per rendered view
  std::vector<ViewCondition> conditions; // only views with visible pixels
  std::vector<std::size_t> view_index;   // rendered-view index of each condition
};

ContactOcclusion contact_occluded_views(const ToyObject& object, double target_ratio, std::uint64_t seed,
                                        const PatchEmbedder& embedder);

FlowModelConfig default_flow_config(const ToyDatasetConfig& data, std::uint64_t seed);

}  // namespace occlusym

#include "occlusym_cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "occlusym/checkpoint.hpp"
#include "occlusym/error.hpp"
#include "occlusym/io.hpp"
#include "occlusym/mesh.hpp"
#include "occlusym/metrics.hpp"
#include "occlusym/parallel.hpp"
#include "occlusym/rng.hpp"

namespace occlusym::cli {

namespace fs = std::filesystem;

namespace {

std::string numbered(const char* pattern, std::size_t a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

std::string numbered(const char* pattern, std::size_t a, std::size_t b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

void write_json(Written& out, const fs::path& path, const Json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
  out.push_back(path);
}

Json read_json(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("missing input: " + path.string());
  Json j = Json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw IoError("not valid JSON: " + path.string());
  return j;
}

std::vector<std::uint8_t> grey_levels(const Image& image) {
  std::vector<std::uint8_t> levels(image.data.size());
  for (std::size_t i = 0; i < levels.size(); ++i)
    levels[i] = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(image.data[i], 0.0, 1.0)));
  return levels;
}

Json camera_json(const Camera& c) {
  const Vec3 p = c.position();
  return {{"radius", c.radius},       {"yaw_deg", c.yaw_deg},           {"pitch_deg", c.pitch_deg},
          {"fov_deg", c.fov_y_deg},   {"image_size", c.image_size},     {"position", {p.x(), p.y(), p.z()}}};
}

double draw_target(const Json& range, std::uint64_t seed) {
  const auto v = range.get<std::vector<double>>();
  if (v.size() != 2 || !(v[0] > 0.0) || !(v[1] < 1.0) || v[0] > v[1])
    throw ParameterError("target_ratio must be [lo, hi] with 0 < lo <= hi < 1");
  Rng rng(seed);
  return rng.uniform(v[0], v[1]);
}

void warn(const std::string& what) {
  std::cerr << Json{{"warning", what}}.dump() << "\n";
}

Written gen_masks_2d(const RunConfig& rc, const Layout& lay) {
  const Json& m = rc.json.at("masks");
  const int count = m.at("count").get<int>();
  const int width = m.at("width").get<int>();
  const int height = m.at("height").get<int>();
  if (count < 1 || width < 1 || height < 1) throw ParameterError("masks: count, width and height must be positive");
  const OcclusionParams params = rc.occlusion();

  std::vector<BinaryMask> masks(static_cast<std::size_t>(count));
  std::vector<std::uint64_t> seeds(masks.size());
  parallel_for(masks.size(), rc.jobs, [&](std::size_t i) {
    seeds[i] = derive_seed(rc.seed(), "masks.2d", i);
    masks[i] = gen_random_occlusion(width, height, params, seeds[i]);
  });

  Written out;
  Json entries = Json::array();
  double ratio_sum = 0.0;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const std::string stem = numbered("mask_%05zu", i);
    const double ratio = mask_ratio(masks[i]);
    ratio_sum += ratio;
    write_pgm(lay.masks() / (stem + ".pgm"), masks[i]);
    out.push_back(lay.masks() / (stem + ".pgm"));
    write_json(out, lay.masks() / (stem + ".json"),
               {{"index", i},
                {"seed", seeds[i]},
                {"width", width},
                {"height", height},
                {"shapes", sample_occlusion_shapes(width, height, params, seeds[i]).size()},
                {"mask_ratio", ratio}});
    entries.push_back({{"index", i}, {"mask", stem + ".pgm"}, {"sidecar", stem + ".json"}, {"seed", seeds[i]},
                       {"mask_ratio", ratio}});
  }
  write_json(out, lay.masks() / "manifest.json",
             {{"format", "occlusym-masks"},
              {"mode", "2d"},
              {"seed", rc.seed()},
              {"count", count},
              {"width", width},
              {"height", height},
              {"mean_mask_ratio", ratio_sum / count},
              {"entries", entries}});
  return out;
}

Written gen_masks_3d(const RunConfig& rc, const Layout& lay) {
  const Json& m = rc.json.at("masks");
  const Json& cam = rc.json.at("camera");
  const auto meshes = m.at("meshes").get<std::vector<std::string>>();
  if (meshes.empty()) throw ParameterError("masks.meshes is empty in 3d mode");
  for (const auto& p : meshes)
    if (!fs::exists(rc.resolve(p))) throw IoError("missing mesh: " + rc.resolve(p).string());
  const auto cameras = orbit_cameras(cam.at("n_views").get<int>(), cam.at("radius").get<double>(),
                                     cam.at("fov_deg").get<double>(), cam.at("pitch_deg").get<double>(),
                                     cam.at("yaw_start_deg").get<double>(), m.at("image_size").get<int>());

  Written out;
  Json entries = Json::array();
  Json skipped = Json::array();
  for (std::size_t mi = 0; mi < meshes.size(); ++mi) {
    TriMesh mesh;
    TriangleSelection sel;
    double target = 0.0;
    try {
      mesh = normalize_to_unit_cube(load_obj(rc.resolve(meshes[mi])));
      mesh.validate();
      target = draw_target(m.at("target_ratio"), derive_seed(rc.seed(), "masks.3d.target", mi));
      sel = random_walk_select(mesh, target, derive_seed(rc.seed(), "masks.3d.walk", mi));
    } catch (const ParameterError& e) {
      warn("skipping mesh " + meshes[mi] + ": " + e.what());
      skipped.push_back({{"mesh", meshes[mi]}, {"reason", e.what()}});
      continue;
    } catch (const ShapeError& e) {
      warn("skipping mesh " + meshes[mi] + ": " + e.what());
      skipped.push_back({{"mesh", meshes[mi]}, {"reason", e.what()}});
      continue;
    }
    std::vector<ViewMasks> views(cameras.size());
    parallel_for(cameras.size(), rc.jobs, [&](std::size_t v) { views[v] = render_masks(mesh, sel, cameras[v]); });
    for (std::size_t v = 0; v < cameras.size(); ++v) {
      const std::string stem = numbered("mesh_%03zu_view_%02zu", mi, v);
      write_pgm(lay.masks() / (stem + "_obj.pgm"), views[v].obj);
      out.push_back(lay.masks() / (stem + "_obj.pgm"));
      write_pgm(lay.masks() / (stem + "_occ.pgm"), views[v].occ);
      out.push_back(lay.masks() / (stem + "_occ.pgm"));
      write_json(out, lay.masks() / (stem + ".json"),
                 {{"mesh", meshes[mi]},
                  {"mesh_index", mi},
                  {"view", v},
                  {"camera", camera_json(cameras[v])},
                  {"target_ratio", target},
                  {"achieved_ratio", sel.achieved_ratio},
                  {"exhausted", sel.exhausted},
                  {"selected_triangles", sel.selected.size()},
                  {"object_pixels", views[v].obj.count()},
                  {"occluded_pixels", views[v].occ.count()}});
      entries.push_back({{"mesh_index", mi},
                         {"view", v},
                         {"obj", stem + "_obj.pgm"},
                         {"occ", stem + "_occ.pgm"},
                         {"sidecar", stem + ".json"},
                         {"achieved_ratio", sel.achieved_ratio}});
    }
  }
  if (entries.empty()) throw ParameterError("gen-masks: every mesh was rejected");
  write_json(out, lay.masks() / "manifest.json",
             {{"format", "occlusym-masks"},
              {"mode", "3d"},
              {"seed", rc.seed()},
              {"meshes", meshes.size() - skipped.size()},
              {"views_per_mesh", cameras.size()},
              {"count", entries.size()},
              {"skipped", skipped},
              {"entries", entries}});
  return out;
}

struct DatasetOnDisk {
  ToyDatasetConfig cfg;
  std::vector<ToyObject> objects;
};

Json dataset_identity(const ToyDatasetConfig& c) {
  return {{"n_shapes", c.n_shapes},
          {"n", c.n},
          {"r", c.r},
          {"seed", c.seed},
          {"image_size", c.render.image_size},
          {"n_views", c.render.n_views}};
}

DatasetOnDisk load_dataset(const RunConfig& rc, const Layout& lay) {
  DatasetOnDisk d;
  d.cfg = rc.dataset();
  const Json manifest = read_json(lay.dataset() / "manifest.json");
  if (manifest.at("identity") != dataset_identity(d.cfg))
    throw ParameterError("dataset on disk was generated with a different dataset config; rerun gen-dataset");
  for (const auto& e : manifest.at("entries")) {
    ToyObject o;
    o.family = toy_family_from_string(e.at("family").get<std::string>());
    o.seed = e.at("seed").get<std::uint64_t>();
    o.params = {e.at("params").at(0).get<double>(), e.at("params").at(1).get<double>(),
                e.at("params").at(2).get<double>()};
    o.grid = read_voxels(lay.dataset() / e.at("voxels").get<std::string>());
    d.objects.push_back(std::move(o));
  }
  parallel_for(d.objects.size(), rc.jobs, [&](std::size_t i) { attach_derived(d.objects[i], d.cfg); });
  return d;
}

double mean(const std::vector<double>& v, std::size_t from, std::size_t to) {
  double s = 0.0;
  for (std::size_t i = from; i < to; ++i) s += v[i];
  return to > from ? s / static_cast<double>(to - from) : 0.0;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string loss_csv(const std::vector<double>& losses) {
  std::string s = "step,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i) s += std::to_string(i) + "," + format_double(losses[i]) + "\n";
  return s;
}

std::vector<double> parse_loss_csv(const std::string& text, const fs::path& source) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "step,loss") throw IoError("loss CSV has no 'step,loss' header: " + source.string());
  std::vector<double> losses;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw IoError("malformed loss CSV row in " + source.string());
    try {
      if (std::stoul(line.substr(0, comma)) != losses.size()) throw IoError("loss CSV steps out of order in " + source.string());
      losses.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::logic_error&) {
      throw IoError("malformed loss CSV row in " + source.string());
    }
  }
  if (losses.empty()) throw IoError("loss CSV is empty: " + source.string());
  return losses;
}

std::string loss_svg(const std::vector<double>& losses) {
  constexpr double kW = 640.0, kH = 360.0, kPad = 48.0;
  double lo = losses.front(), hi = losses.front();
  for (double v : losses) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi == lo) hi = lo + 1.0;
  const double nx = losses.size() > 1 ? static_cast<double>(losses.size() - 1) : 1.0;
  auto px = [&](std::size_t i) { return kPad + (kW - 2 * kPad) * static_cast<double>(i) / nx; };
  auto py = [&](double v) { return kH - kPad - (kH - 2 * kPad) * (v - lo) / (hi - lo); };
  char buf[160];
  std::string s;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                kW, kH, kW, kH);
  s += buf;
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<path d=\"M%.1f %.1f V%.1f H%.1f\" fill=\"none\" stroke=\"black\"/>\n", kPad, kPad, kH - kPad,
                kW - kPad);
  s += buf;
  s += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\" points=\"";
  for (std::size_t i = 0; i < losses.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i ? " " : "", px(i), py(losses[i]));
    s += buf;
  }
  s += "\"/>\n";
  std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\">%.6g</text>\n", 4.0, kPad, hi);
  s += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\">%.6g</text>\n", 4.0, kH - kPad, lo);
  s += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\">step %zu</text>\n", kW - kPad - 40.0,
                kH - kPad + 20.0, losses.size() - 1);
  s += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"14\">flow loss</text>\n", kW / 2 - 30.0,
                kPad - 16.0);
  s += buf;
  s += "</svg>\n";
  return s;
}

Written cmd_gen_masks(const RunConfig& rc) {
  const Layout lay{rc.out_dir()};
  const auto mode = rc.json.at("masks").at("mode").get<std::string>();
  if (mode == "2d") return gen_masks_2d(rc, lay);
  if (mode == "3d") return gen_masks_3d(rc, lay);
  throw ParameterError("masks.mode must be \"2d\" or \"3d\", got \"" + mode + "\"");
}

Written cmd_gen_dataset(const RunConfig& rc) {
  const Layout lay{rc.out_dir()};
  const ToyDatasetConfig cfg = rc.dataset();
  std::vector<ToyObject> objects(static_cast<std::size_t>(cfg.n_shapes));
  std::vector<SparseLatent> slats(objects.size());
  parallel_for(objects.size(), rc.jobs, [&](std::size_t i) {
    const ToyFamily family = kAllToyFamilies[i % kAllToyFamilies.size()];
    objects[i] = make_toy_object(family, derive_seed(cfg.seed, "train", i), cfg);
    slats[i] = make_sparse_latent(objects[i].grid);
  });

  Written out;
  Json entries = Json::array();
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& o = objects[i];
    const std::string stem = numbered("shape_%05zu", i);
    write_voxels(lay.dataset() / (stem + ".voxels"), o.grid);
    out.push_back(lay.dataset() / (stem + ".voxels"));
    write_file_atomic(lay.dataset() / (stem + ".slat.jsonl"), encode_sparse_latent(slats[i]));
    out.push_back(lay.dataset() / (stem + ".slat.jsonl"));
    Json views = Json::array();
    for (std::size_t v = 0; v < o.views.size(); ++v) {
      const std::string name = numbered("shape_%05zu_view_%02zu.pgm", i, v);
      write_pgm(lay.dataset() / name, o.views[v].image.width, o.views[v].image.height, grey_levels(o.views[v].image));
      out.push_back(lay.dataset() / name);
      views.push_back({{"image", name}, {"camera", camera_json(o.views[v].camera)}});
    }
    entries.push_back({{"index", i},
                       {"family", to_string(o.family)},
                       {"seed", o.seed},
                       {"params", {o.params.a, o.params.b, o.params.c}},
                       {"voxels", stem + ".voxels"},
                       {"slat", stem + ".slat.jsonl"},
                       {"occupied", o.grid.count()},
                       {"active", slats[i].positions.size()},
                       {"views", views}});
  }
  write_json(out, lay.dataset() / "manifest.json",
             {{"format", "occlusym-dataset"}, {"identity", dataset_identity(cfg)}, {"entries", entries}});
  return out;
}

Written cmd_train(const RunConfig& rc) {
  const Layout lay{rc.out_dir()};
  const DatasetOnDisk data = load_dataset(rc, lay);
  FlowModel model = make_flow_model(rc.model(data.cfg));
  const TrainConfig tc = rc.train();
  const auto source = make_training_source(data.objects, model.embedder, data.cfg, tc.batch);
  const TrainResult result = train(source, model, tc);

  Written out;
  const Json meta = {{"steps", tc.steps},
                     {"batch", tc.batch},
                     {"lr", tc.lr},
                     {"cfg_drop", tc.cfg_drop},
                     {"weight_decay", tc.weight_decay},
                     {"seed", rc.seed()},
                     {"dataset", dataset_identity(data.cfg)}};
  save_checkpoint(lay.checkpoint(), model, meta.dump());
  out.push_back(lay.checkpoint());
  write_file_atomic(lay.loss_csv(), loss_csv(result.losses));
  out.push_back(lay.loss_csv());
  return out;
}

Written cmd_sample(const RunConfig& rc) {
  const Layout lay{rc.out_dir()};
  if (!fs::exists(lay.checkpoint())) throw IoError("missing input: " + lay.checkpoint().string());
  const FlowModel model = load_checkpoint(lay.checkpoint());
  const Json& s = rc.json.at("sample");
  const int count = s.at("count").get<int>();
  const int n_views = s.at("views").get<int>();
  const double threshold = s.at("threshold").get<double>();
  if (count < 1 || n_views < 1) throw ParameterError("sample: count and views must be positive");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ParameterError("sample.threshold must lie in (0, 1)");

  ToyDatasetConfig cfg = rc.dataset();
  cfg.n_shapes = count;
  if (model.config.latent_tokens != cfg.r * cfg.r * cfg.r || model.config.grid.image_size != cfg.render.image_size)
    throw ParameterError("checkpoint does not match the dataset config");
  const SampleConfig sc = rc.sample();
  const auto held = make_toy_dataset(cfg, "heldout");

  struct Result {
    ContactOcclusion occ;
    double target = 0.0;
    std::vector<std::size_t> used;
    VoxelGrid grid;
  };
  std::vector<Result> results(held.size());
  parallel_for(held.size(), rc.jobs, [&](std::size_t i) {
    Result& r = results[i];
    r.target = draw_target(s.at("target_ratio"), derive_seed(rc.seed(), "sample.target", i));
    r.occ = contact_occluded_views(held[i], r.target, derive_seed(rc.seed(), "sample.walk", i), model.embedder);
    std::vector<ViewCondition> views;
    for (std::size_t k = 0; k < r.occ.conditions.size() && views.size() < static_cast<std::size_t>(n_views); ++k) {
      views.push_back(r.occ.conditions[k]);
      r.used.push_back(r.occ.view_index[k]);
    }
    if (views.empty()) views.push_back(null_condition(model));
    SampleConfig per = sc;
    per.seed = derive_seed(sc.seed, "shape", i);
    r.grid = reconstruct(model, views, per, cfg.n, cfg.r, threshold);
  });

  Written out;
  Json entries = Json::array();
  double iou_sum = 0.0;
  for (std::size_t i = 0; i < held.size(); ++i) {
    const Result& r = results[i];
    const std::string stem = numbered("sample_%05zu", i);
    const std::string ref = numbered("ref_%05zu.ply", i);
    write_voxels(lay.samples() / (stem + ".voxels"), r.grid);
    out.push_back(lay.samples() / (stem + ".voxels"));
    write_ply(lay.samples() / ref, voxels_to_points(held[i].grid));
    out.push_back(lay.samples() / ref);
    const bool empty = active_voxels(r.grid).empty();
    if (!empty) {
      write_ply(lay.samples() / (stem + ".ply"), voxels_to_points(r.grid));
      out.push_back(lay.samples() / (stem + ".ply"));
    }
    Json views = Json::array();
    for (std::size_t v : r.used) {
      const std::string name = numbered("sample_%05zu_view_%02zu.pgm", i, v);
      const auto& m = r.occ.masks[v];
      write_pgm(lay.samples() / name, m.obj.width(), m.obj.height(), composite_levels(visible_mask(m.obj, m.occ), m.occ));
      out.push_back(lay.samples() / name);
      views.push_back({{"view", v}, {"mask", name}, {"visible_pixels", visible_mask(m.obj, m.occ).count()}});
    }
    const double iou = voxel_iou(r.grid, held[i].grid);
    iou_sum += iou;
    entries.push_back({{"index", i},
                       {"family", to_string(held[i].family)},
                       {"voxels", stem + ".voxels"},
                       {"ply", empty ? Json(nullptr) : Json(stem + ".ply")},
                       {"ref", ref},
                       {"target_ratio", r.target},
                       {"achieved_ratio", r.occ.selection.achieved_ratio},
                       {"conditioning", r.used.empty() ? "none" : "occluded"},
                       {"views", views},
                       {"iou", iou}});
  }
  write_json(out, lay.samples() / "manifest.json",
             {{"format", "occlusym-samples"},
              {"count", count},
              {"n_steps", sc.n_steps},
              {"cfg_scale", sc.cfg_scale},
              {"threshold", threshold},
              {"mean_iou", iou_sum / count},
              {"entries", entries}});
  return out;
}

Written cmd_eval(const RunConfig& rc) {
  const Layout lay{rc.out_dir()};
  const Json manifest = read_json(lay.samples() / "manifest.json");
  const auto k_points = rc.json.at("eval").at("k_points").get<long>();
  if (k_points < 1) throw ParameterError("eval.k_points must be positive");

  std::vector<fs::path> gen_files, ref_files;
  std::vector<double> ious;
  for (const auto& e : manifest.at("entries")) {
    ref_files.push_back(lay.samples() / e.at("ref").get<std::string>());
    if (!e.at("ply").is_null()) gen_files.push_back(lay.samples() / e.at("ply").get<std::string>());
    ious.push_back(e.at("iou").get<double>());
  }
  std::vector<std::string> missing;
  for (const auto* list : {&gen_files, &ref_files})
    for (const auto& p : *list)
      if (!fs::exists(p)) missing.push_back(p.string());
  if (!missing.empty()) {
    std::string msg = "missing inputs:";
    for (const auto& m : missing) msg += " " + m;
    throw IoError(msg);
  }
  if (gen_files.empty()) throw DegenerateConditioningError("eval: every generated sample is empty");

  auto load = [&](const std::vector<fs::path>& files, std::string_view role) {
    std::vector<PointCloud> clouds(files.size());
    parallel_for(files.size(), rc.jobs, [&](std::size_t i) {
      const PointCloud c = read_ply(files[i]);
      clouds[i] = farthest_point_sampling(c, std::min<Eigen::Index>(k_points, c.rows()), derive_seed(rc.seed(), role, i));
    });
    return clouds;
  };
  const auto gen = load(gen_files, "eval.fps.gen");
  const auto ref = load(ref_files, "eval.fps.ref");
  const auto d = chamfer_matrix(gen, ref, rc.jobs);
  const double mmd = mmd_from_matrix(d);
  const double cov = coverage_from_matrix(d);
  double iou = 0.0;
  for (double v : ious) iou += v;
  iou /= static_cast<double>(ious.size());

  Written out;
  const Json metrics = {{"format", "occlusym-metrics"},
                        {"cov", cov},
                        {"mmd", mmd},
                        {"mean_iou", iou},
                        {"n_gen", gen.size()},
                        {"n_ref", ref.size()},
                        {"n_empty", ref.size() - gen.size()},
                        {"k_points", k_points},
                        {"distance", "chamfer, mean squared nearest-neighbour, symmetric"}};
  write_json(out, lay.metrics_json(), metrics);

  char row[160];
  std::string table = "Method       | COV(%) ^ | MMD(x1e3) v\n-------------|----------|------------\n";
  std::snprintf(row, sizeof row, "%-12s | %8.2f | %11.3f\n", "occlusym", 100.0 * cov, 1e3 * mmd);
  table += row;
  write_file_atomic(lay.eval() / "table.txt", table);
  out.push_back(lay.eval() / "table.txt");
  return out;
}

Written cmd_report(const RunConfig& rc) {
  const Layout lay{rc.out_dir()};
  std::vector<std::string> missing;
  for (const auto& p : {lay.loss_csv(), lay.metrics_json()})
    if (!fs::exists(p)) missing.push_back(p.string());
  if (!missing.empty()) {
    std::string msg = "missing inputs:";
    for (const auto& m : missing) msg += " " + m;
    throw IoError(msg);
  }
  const auto losses = parse_loss_csv(read_file(lay.loss_csv()), lay.loss_csv());
  const Json metrics = read_json(lay.metrics_json());

  Written out;
  write_file_atomic(lay.report() / "loss.svg", loss_svg(losses));
  out.push_back(lay.report() / "loss.svg");

  const std::size_t window = std::min<std::size_t>(100, losses.size());
  std::string md = "# occlusym run summary\n\n## Training\n\n";
  md += "| quantity | value |\n|---|---|\n";
  md += "| steps | " + std::to_string(losses.size()) + " |\n";
  md += "| mean loss, first " + std::to_string(window) + " steps | " + format_double(mean(losses, 0, window)) + " |\n";
  md += "| mean loss, last " + std::to_string(window) + " steps | " +
        format_double(mean(losses, losses.size() - window, losses.size())) + " |\n";
  md += "\n![loss](loss.svg)\n\n## Evaluation\n\n| metric | value |\n|---|---|\n";
  for (const char* key : {"cov", "mmd", "mean_iou", "n_gen", "n_ref", "n_empty", "k_points"})
    if (metrics.contains(key)) md += std::string("| ") + key + " | " + metrics.at(key).dump() + " |\n";
  write_file_atomic(lay.report() / "summary.md", md);
  out.push_back(lay.report() / "summary.md");
  return out;
}

}  // namespace occlusym::cli

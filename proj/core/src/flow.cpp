#include "occlusym/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "occlusym/error.hpp"
#include "occlusym/parallel.hpp"
#include "occlusym/rng.hpp"

namespace occlusym {

Mat add_noise(const Mat& clean, const Mat& noise, double t) {
  if (clean.rows() != noise.rows() || clean.cols() != noise.cols()) throw ShapeError("add_noise: shape mismatch");
  return (1.0 - t) * clean + t * noise;
}

double flow_loss(const Mat& pred, const Mat& noise, const Mat& clean) {
  if (pred.rows() != noise.rows() || pred.cols() != noise.cols() || clean.rows() != noise.rows() ||
      clean.cols() != noise.cols())
    throw ShapeError("flow_loss: shape mismatch");
  return (pred - (noise - clean)).squaredNorm() / static_cast<double>(pred.size());
}

Mat flow_loss_grad(const Mat& pred, const Mat& noise, const Mat& clean) {
  return (2.0 / static_cast<double>(pred.size())) * (pred - (noise - clean));
}

AdamW::AdamW(const FlowModel& model, AdamWConfig config)
    : config_(config), m_(zeros_like(model)), v_(zeros_like(model)) {}

void AdamW::step(FlowModel& model, const FlowModel& grad) {
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  std::vector<Mat*> params, grads, ms, vs;
  model.visit([&](const std::string&, Mat& p) { params.push_back(&p); });
  const_cast<FlowModel&>(grad).visit([&](const std::string&, Mat& g) { grads.push_back(&g); });
  m_.visit([&](const std::string&, Mat& m) { ms.push_back(&m); });
  v_.visit([&](const std::string&, Mat& v) { vs.push_back(&v); });
  for (std::size_t i = 0; i < params.size(); ++i) {
    Mat& p = *params[i];
    const Mat& g = *grads[i];
    Mat& m = *ms[i];
    Mat& v = *vs[i];
    m = config_.beta1 * m + (1.0 - config_.beta1) * g;
    v = config_.beta2 * v + (1.0 - config_.beta2) * g.cwiseProduct(g);
    const Mat update = (m / bc1).array() / ((v / bc2).array().sqrt() + config_.eps);
    p -= config_.lr * (update + config_.weight_decay * p);
  }
}

void TrainConfig::validate() const {
  if (!(lr >= 0.0)) throw ParameterError("TrainConfig: lr must be non-negative");
  if (!(cfg_drop >= 0.0 && cfg_drop <= 1.0)) throw ParameterError("TrainConfig: cfg_drop must lie in [0, 1]");
  if (batch <= 0 || steps < 0 || jobs <= 0) throw ParameterError("TrainConfig: batch/steps/jobs invalid");
  if (!(weight_decay >= 0.0)) throw ParameterError("TrainConfig: weight_decay must be non-negative");
}

TrainResult train(const SampleSource& source, FlowModel& model, const TrainConfig& cfg, const StepCallback& on_step) {
  cfg.validate();
  AdamW opt(model, AdamWConfig{cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});
  const ViewCondition null_view = null_condition(model);
  const auto batch = static_cast<std::size_t>(cfg.batch);
  TrainResult result;
  result.losses.reserve(static_cast<std::size_t>(cfg.steps));

  std::vector<FlowModel> slot_grads(batch, zeros_like(model));
  std::vector<double> slot_loss(batch, 0.0);
  for (std::size_t step = 0; step < static_cast<std::size_t>(cfg.steps); ++step) {
    // The null view's tokens track the current learned null tokens.
    ViewCondition current_null = null_view;
    current_null.tokens = model.null_tokens;
    parallel_for(batch, cfg.jobs, [&](std::size_t slot) {
      TrainingSample s = source(step, slot);
      Rng rng(derive_seed(cfg.seed, "train.step", step * batch + slot));
      const double t = rng.uniform();
      Mat noise(s.latent.rows(), s.latent.cols());
      for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data()[i] = rng.normal();
      const bool drop = rng.bernoulli(cfg.cfg_drop);
      const ViewCondition& view = drop ? current_null : s.view;

      FlowCache cache;
      const Mat noisy = add_noise(s.latent, noise, t);
      const Mat pred = flow_forward(model, noisy, view, t, &cache);
      slot_loss[slot] = flow_loss(pred, noise, s.latent);
      FlowModel& g = slot_grads[slot];
      g.visit([](const std::string&, Mat& m) { m.setZero(); });
      flow_backward(flow_loss_grad(pred, noise, s.latent) / static_cast<double>(batch), cache, model, g);
    });

    double loss = 0.0;
    for (double l : slot_loss) loss += l;
    loss /= static_cast<double>(batch);
    if (!std::isfinite(loss))
      throw NumericError("training diverged: non-finite loss at step " + std::to_string(step));

    FlowModel total = slot_grads[0];
    for (std::size_t b = 1; b < batch; ++b) {
      std::vector<Mat*> acc;
      total.visit([&](const std::string&, Mat& m) { acc.push_back(&m); });
      std::size_t i = 0;
      slot_grads[b].visit([&](const std::string&, Mat& m) { *acc[i++] += m; });
    }
    opt.step(model, total);
    result.losses.push_back(loss);
    if (on_step) on_step(step, loss);
  }
  return result;
}

std::vector<std::size_t> sort_views_by_visibility(const std::vector<ViewCondition>& views) {
  if (views.empty()) throw ParameterError("sort_views_by_visibility: no views");
  std::vector<std::size_t> order(views.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return views[a].visibility_count > views[b].visibility_count;
  });
  return order;
}

void SampleConfig::validate() const {
  if (n_steps < 1) throw ParameterError("SampleConfig: n_steps must be at least 1");
  if (!(cfg_scale >= 0.0)) throw ParameterError("SampleConfig: cfg_scale must be non-negative");
}

std::size_t view_for_step(std::size_t step, std::size_t n_steps, std::size_t n_views) {
  return std::min(n_views - 1, step * n_views / n_steps);
}

Mat sample(const FlowModel& model, const std::vector<ViewCondition>& views, const SampleConfig& cfg) {
  cfg.validate();
  const auto order = sort_views_by_visibility(views);
  for (const auto& v : views) check_key_weights(v.c_vis.values, v.tokens.rows());

  const auto& mc = model.config;
  Rng rng(derive_seed(cfg.seed, "sample.noise"));
  Mat x(mc.latent_tokens, mc.latent_features);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();

  const ViewCondition null_view = null_condition(model);
  const auto n = static_cast<std::size_t>(cfg.n_steps);
  const double dt = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = 1.0 - static_cast<double>(k) * dt;
    const ViewCondition& view = views[order[view_for_step(k, n, views.size())]];
    Mat v;
    if (cfg.cfg_scale == 0.0) {
      v = flow_forward(model, x, null_view, t);
    } else if (cfg.cfg_scale == 1.0) {
      v = flow_forward(model, x, view, t);
    } else {
      const Mat v_null = flow_forward(model, x, null_view, t);
      v = v_null + cfg.cfg_scale * (flow_forward(model, x, view, t) - v_null);
    }
    x -= dt * v;
  }
  return x;
}

Mat fractions_to_latent(const Mat& fractions) { return (2.0 * fractions.array() - 1.0).matrix(); }

Mat latent_to_fractions(const Mat& latent) { return ((latent.array() + 1.0) * 0.5).matrix(); }

VoxelGrid reconstruct(const FlowModel& model, const std::vector<ViewCondition>& views, const SampleConfig& cfg,
                      int n, int r, double threshold) {
  DenseLatent lat;
  lat.n = n;
  lat.r = r;
  lat.sub_block = 1;
  lat.tokens = latent_to_fractions(sample(model, views, cfg));
  return decode_stage1(lat, threshold);
}

}  // namespace occlusym

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "occlusym/flow_model.hpp"
#include "occlusym/slat.hpp"

namespace occlusym {

// l(t) = (1 - t) l0 + t eps
Mat add_noise(const Mat& clean, const Mat& noise, double t);

// Mean over entries of (pred - (eps - l0))^2.
double flow_loss(const Mat& pred, const Mat& noise, const Mat& clean);
// d flow_loss / d pred.
Mat flow_loss_grad(const Mat& pred, const Mat& noise, const Mat& clean);

struct AdamWConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

// Decoupled weight decay: p -= lr * (m_hat / (sqrt(v_hat) + eps) + wd * p).
class AdamW {
 public:
  AdamW(const FlowModel& model, AdamWConfig config);
  void step(FlowModel& model, const FlowModel& grad);
  long steps() const { return t_; }

 private:
  AdamWConfig config_;
  FlowModel m_;
  FlowModel v_;
  long t_ = 0;
};

struct TrainConfig {
  double lr = 1e-4;
  double cfg_drop = 0.1;
  int batch = 4;
  int steps = 100;
  std::uint64_t seed = 0;
  double weight_decay = 0.0;
  int jobs = 1;

  void validate() const;
};

struct TrainingSample {
  Mat latent;  // clean l0
  ViewCondition view;
};

// Deterministic sample for (step, slot).
using SampleSource = std::function<TrainingSample(std::size_t step, std::size_t slot)>;

struct TrainResult {
  std::vector<double> losses;  // one mean batch loss per step
};

using StepCallback = std::function<void(std::size_t step, double loss)>;

// Per step and batch slot: t ~ U[0,1], eps ~ N(0, I), the condition replaced
// by the null condition with probability cfg_drop; gradients of the mean flow
// loss are summed over slots in slot order and applied with AdamW.
TrainResult train(const SampleSource& source, FlowModel& model, const TrainConfig& cfg,
                  const StepCallback& on_step = {});

// Descending by visibility_count, stable. Returns the permutation.
std::vector<std::size_t> sort_views_by_visibility(const std::vector<ViewCondition>& views);

struct SampleConfig {
  int n_steps = 25;
  double cfg_scale = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Index into the sorted view list conditioning Euler step k (0-based).
std::size_t view_for_step(std::size_t step, std::size_t n_steps, std::size_t n_views);

// Euler integration from t = 1 to t = 0 on a uniform grid, with
// v = v_null + cfg_scale (v_cond - v_null). Views are sorted by visibility
// and assigned to contiguous step segments, most visible first.
Mat sample(const FlowModel& model, const std::vector<ViewCondition>& views, const SampleConfig& cfg);

// Maps between stage-1 occupancy fractions and the flow's latent space
// (2 f - 1).
Mat fractions_to_latent(const Mat& fractions);
Mat latent_to_fractions(const Mat& latent);

// sample -> latent_to_fractions -> decode_stage1.
VoxelGrid reconstruct(const FlowModel& model, const std::vector<ViewCondition>& views, const SampleConfig& cfg,
                      int n, int r, double threshold);

}  // namespace occlusym

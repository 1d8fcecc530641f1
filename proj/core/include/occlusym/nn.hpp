#pragma once

#include <cstdint>
#include <string>

#include "occlusym/rng.hpp"
#include "occlusym/tensor.hpp"

namespace occlusym {

// Calls f(name, mat) for every parameter matrix of `params`, recursing into
// nested parameter groups with dotted names.
template <typename P, typename F>
void for_each_param(P& params, F&& f) {
  params.visit(std::forward<F>(f));
}

template <typename P>
P zeros_like(const P& params) {
  P out = params;
  out.visit([](const std::string&, Mat& m) { m.setZero(); });
  return out;
}

template <typename P>
std::size_t parameter_count(const P& params) {
  std::size_t n = 0;
  const_cast<P&>(params).visit([&](const std::string&, Mat& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

// Rows of `m` are independently normalized then scaled/shifted.
struct LayerNormParams {
  Mat gamma;  // 1 x C
  Mat beta;   // 1 x C

  template <typename F>
  void visit(F&& f) {
    f("gamma", gamma);
    f("beta", beta);
  }
};

struct LayerNormCache {
  Mat normalized;  // pre-affine
  Vec inv_std;
};

inline constexpr double kLayerNormEps = 1e-6;

LayerNormParams make_layer_norm(int width);
Mat layer_norm_forward(const Mat& x, const LayerNormParams& p, LayerNormCache* cache);
Mat layer_norm_backward(const Mat& dy, const LayerNormCache& cache, const LayerNormParams& p,
                        LayerNormParams& grad);

// y = x W + b
struct LinearParams {
  Mat w;  // in x out
  Mat b;  // 1 x out

  template <typename F>
  void visit(F&& f) {
    f("w", w);
    f("b", b);
  }
};

// Weights ~ N(0, scale^2 / fan_in), zero bias.
LinearParams make_linear(int in, int out, Rng& rng, double scale = 1.0);
Mat linear_forward(const Mat& x, const LinearParams& p);
// Accumulates parameter gradients and returns dL/dx.
Mat linear_backward(const Mat& dy, const Mat& x, const LinearParams& p, LinearParams& grad);

// Tanh approximation of GELU.
double gelu(double x);
double gelu_derivative(double x);

struct MlpParams {
  LinearParams fc1;
  LinearParams fc2;

  template <typename F>
  void visit(F&& f) {
    fc1.visit([&](const std::string& n, Mat& m) { f("fc1." + n, m); });
    fc2.visit([&](const std::string& n, Mat& m) { f("fc2." + n, m); });
  }
};

struct MlpCache {
  Mat x;
  Mat pre;  // fc1 output before GELU
  Mat hidden;
};

MlpParams make_mlp(int width, int hidden, Rng& rng, double out_scale = 1.0);
Mat mlp_forward(const Mat& x, const MlpParams& p, MlpCache* cache);
Mat mlp_backward(const Mat& dy, const MlpCache& cache, const MlpParams& p, MlpParams& grad);

// [sin(1000 t f_i) ..., cos(1000 t f_i) ...], f_i = 10000^(-i / (dim/2)).
RowVec timestep_embedding(double t, int dim);

}  // namespace occlusym

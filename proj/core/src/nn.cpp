#include "occlusym/nn.hpp"

#include <cmath>
#include <numbers>

#include "occlusym/error.hpp"

namespace occlusym {

LayerNormParams make_layer_norm(int width) {
  LayerNormParams p;
  p.gamma = Mat::Ones(1, width);
  p.beta = Mat::Zero(1, width);
  return p;
}

Mat layer_norm_forward(const Mat& x, const LayerNormParams& p, LayerNormCache* cache) {
  require_shape(p.gamma, 1, x.cols(), "layer_norm gamma");
  const auto n = static_cast<double>(x.cols());
  Mat normalized(x.rows(), x.cols());
  Vec inv_std(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mean = x.row(i).sum() / n;
    const auto centered = x.row(i).array() - mean;
    const double var = centered.square().sum() / n;
    inv_std[i] = 1.0 / std::sqrt(var + kLayerNormEps);
    normalized.row(i) = centered * inv_std[i];
  }
  Mat y = (normalized.array().rowwise() * p.gamma.row(0).array()).rowwise() + p.beta.row(0).array();
  if (cache) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

Mat layer_norm_backward(const Mat& dy, const LayerNormCache& cache, const LayerNormParams& p,
                        LayerNormParams& grad) {
  const Mat& xhat = cache.normalized;
  grad.gamma.row(0) += (dy.array() * xhat.array()).colwise().sum().matrix();
  grad.beta.row(0) += dy.colwise().sum();
  const Mat dxhat = dy.array().rowwise() * p.gamma.row(0).array();
  const auto n = static_cast<double>(dy.cols());
  Mat dx(dy.rows(), dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    const double mean_d = dxhat.row(i).sum() / n;
    const double mean_dx = dxhat.row(i).dot(xhat.row(i)) / n;
    dx.row(i) = cache.inv_std[i] * (dxhat.row(i).array() - mean_d - xhat.row(i).array() * mean_dx);
  }
  return dx;
}

LinearParams make_linear(int in, int out, Rng& rng, double scale) {
  LinearParams p;
  p.w.resize(in, out);
  const double s = scale / std::sqrt(static_cast<double>(in));
  for (Eigen::Index i = 0; i < p.w.size(); ++i) p.w.data()[i] = s * rng.normal();
  p.b = Mat::Zero(1, out);
  return p;
}

Mat linear_forward(const Mat& x, const LinearParams& p) {
  if (x.cols() != p.w.rows()) throw ShapeError("linear: input width mismatch");
  Mat y = x * p.w;
  y.rowwise() += p.b.row(0);
  return y;
}

Mat linear_backward(const Mat& dy, const Mat& x, const LinearParams& p, LinearParams& grad) {
  grad.w.noalias() += x.transpose() * dy;
  grad.b.row(0) += dy.colwise().sum();
  return dy * p.w.transpose();
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluA = 0.044715;
}  // namespace

double gelu(double x) { return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + kGeluA * x * x * x))); }

double gelu_derivative(double x) {
  const double u = kGeluC * (x + kGeluA * x * x * x);
  const double th = std::tanh(u);
  const double du = kGeluC * (1.0 + 3.0 * kGeluA * x * x);
  return 0.5 * (1.0 + th) + 0.5 * x * (1.0 - th * th) * du;
}

MlpParams make_mlp(int width, int hidden, Rng& rng, double out_scale) {
  MlpParams p;
  p.fc1 = make_linear(width, hidden, rng);
  p.fc2 = make_linear(hidden, width, rng, out_scale);
  return p;
}

Mat mlp_forward(const Mat& x, const MlpParams& p, MlpCache* cache) {
  Mat pre = linear_forward(x, p.fc1);
  Mat hidden = pre.unaryExpr([](double v) { return gelu(v); });
  Mat y = linear_forward(hidden, p.fc2);
  if (cache) {
    cache->x = x;
    cache->pre = std::move(pre);
    cache->hidden = std::move(hidden);
  }
  return y;
}

Mat mlp_backward(const Mat& dy, const MlpCache& cache, const MlpParams& p, MlpParams& grad) {
  Mat dhidden = linear_backward(dy, cache.hidden, p.fc2, grad.fc2);
  const Mat dpre = dhidden.array() * cache.pre.unaryExpr([](double v) { return gelu_derivative(v); }).array();
  return linear_backward(dpre, cache.x, p.fc1, grad.fc1);
}

RowVec timestep_embedding(double t, int dim) {
  if (dim <= 0 || dim % 2 != 0) throw ParameterError("timestep_embedding: dim must be positive and even");
  const int half = dim / 2;
  RowVec e(dim);
  for (int i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * i / half);
    e[i] = std::sin(1000.0 * t * freq);
    e[half + i] = std::cos(1000.0 * t * freq);
  }
  return e;
}

}  // namespace occlusym

#pragma once

#include <Eigen/Core>
#include <variant>
#include <vector>

#include "distraxion/rng.hpp"

namespace distraxion::nn {

// Activations are stored one sample per column.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct ParamRef {
  double* value;
  double* grad;
  Eigen::Index size;
};

class Dense {
 public:
  Dense(int in, int out, Rng& rng);

  Matrix apply(const Matrix& x) const;
  Matrix forward(const Matrix& x);
  Matrix backward(const Matrix& grad_out);
  void collect(std::vector<ParamRef>& out);
  int in() const { return static_cast<int>(weight_.cols()); }
  int out() const { return static_cast<int>(weight_.rows()); }

 private:
  Matrix weight_, weight_grad_;
  Vector bias_, bias_grad_;
  Matrix input_;
};

// Valid (unpadded) 2-D convolution over channel-major (C, H, W) columns.
class Conv2d {
 public:
  Conv2d(int channels, int height, int width, int filters, int kernel, int stride, Rng& rng);

  Matrix apply(const Matrix& x) const;
  Matrix forward(const Matrix& x);
  Matrix backward(const Matrix& grad_out);
  void collect(std::vector<ParamRef>& out);

  int out_height() const { return out_h_; }
  int out_width() const { return out_w_; }
  int filters() const { return static_cast<int>(weight_.rows()); }
  int out_size() const { return filters() * out_h_ * out_w_; }

 private:
  // (C*k*k) x (out_h*out_w) patch matrix of one sample.
  Matrix im2col(const double* sample) const;

  int c_, h_, w_, k_, stride_, out_h_, out_w_;
  Matrix weight_, weight_grad_;  // filters x (C*k*k)
  Vector bias_, bias_grad_;
  Matrix input_;
};

class Relu {
 public:
  Matrix apply(const Matrix& x) const { return x.cwiseMax(0.0); }
  Matrix forward(const Matrix& x);
  Matrix backward(const Matrix& grad_out) const;
  void collect(std::vector<ParamRef>&) {}

 private:
  Matrix input_;
};

class Tanh {
 public:
  Matrix apply(const Matrix& x) const { return x.array().tanh().matrix(); }
  Matrix forward(const Matrix& x);
  Matrix backward(const Matrix& grad_out) const;
  void collect(std::vector<ParamRef>&) {}

 private:
  Matrix output_;
};

// Per-sample normalization over features with learned scale and shift.
class LayerNorm {
 public:
  explicit LayerNorm(int dim, double eps = 1e-5);

  Matrix apply(const Matrix& x) const;
  Matrix forward(const Matrix& x);
  Matrix backward(const Matrix& grad_out);
  void collect(std::vector<ParamRef>& out);

 private:
  Vector gain_, gain_grad_, shift_, shift_grad_;
  double eps_;
  Matrix normalized_;
  Eigen::RowVectorXd inv_std_;
};

using Layer = std::variant<Dense, Conv2d, Relu, Tanh, LayerNorm>;

class Sequential {
 public:
  void add(Layer layer) { layers_.push_back(std::move(layer)); }
  bool empty() const { return layers_.empty(); }

  Matrix apply(const Matrix& x) const;
  // Caches what backward needs.
  Matrix forward(const Matrix& x);
  // Accumulates parameter gradients; returns the gradient w.r.t. the input.
  Matrix backward(const Matrix& grad_out);
  void collect(std::vector<ParamRef>& out);

 private:
  std::vector<Layer> layers_;
};

void zero_grad(const std::vector<ParamRef>& params);

class Adam {
 public:
  explicit Adam(double learning_rate = 1e-4, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // `params` must list the same tensors in the same order on every call.
  void step(const std::vector<ParamRef>& params);

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Vector> m_, v_;
};

}  // namespace distraxion::nn

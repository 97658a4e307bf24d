#include "distraxion/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace distraxion::nn {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void init_uniform(Matrix& w, double bound, Rng& rng) {
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = uniform(rng, -bound, bound);
}

}  // namespace

// ---------------------------------------------------------------- Dense

Dense::Dense(int in, int out, Rng& rng)
    : weight_(out, in), weight_grad_(Matrix::Zero(out, in)), bias_(Vector::Zero(out)), bias_grad_(Vector::Zero(out)) {
  init_uniform(weight_, std::sqrt(6.0 / (in + out)), rng);
}

Matrix Dense::apply(const Matrix& x) const { return (weight_ * x).colwise() + bias_; }

Matrix Dense::forward(const Matrix& x) {
  input_ = x;
  return apply(x);
}

Matrix Dense::backward(const Matrix& g) {
  weight_grad_.noalias() += g * input_.transpose();
  bias_grad_ += g.rowwise().sum();
  return weight_.transpose() * g;
}

void Dense::collect(std::vector<ParamRef>& out) {
  out.push_back({weight_.data(), weight_grad_.data(), weight_.size()});
  out.push_back({bias_.data(), bias_grad_.data(), bias_.size()});
}

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(int channels, int height, int width, int filters, int kernel, int stride, Rng& rng)
    : c_(channels), h_(height), w_(width), k_(kernel), stride_(stride) {
  if (height < kernel || width < kernel || stride < 1) throw std::invalid_argument("conv input smaller than kernel");
  out_h_ = (height - kernel) / stride + 1;
  out_w_ = (width - kernel) / stride + 1;
  const int fan_in = channels * kernel * kernel;
  weight_.resize(filters, fan_in);
  init_uniform(weight_, std::sqrt(6.0 / fan_in), rng);
  weight_grad_ = Matrix::Zero(filters, fan_in);
  bias_ = Vector::Zero(filters);
  bias_grad_ = Vector::Zero(filters);
}

Matrix Conv2d::im2col(const double* x) const {
  Matrix cols(c_ * k_ * k_, out_h_ * out_w_);
  for (int c = 0; c < c_; ++c) {
    for (int ky = 0; ky < k_; ++ky) {
      for (int kx = 0; kx < k_; ++kx) {
        const int row = (c * k_ + ky) * k_ + kx;
        for (int oy = 0; oy < out_h_; ++oy) {
          const double* src = x + (c * h_ + oy * stride_ + ky) * w_ + kx;
          for (int ox = 0; ox < out_w_; ++ox) cols(row, oy * out_w_ + ox) = src[ox * stride_];
        }
      }
    }
  }
  return cols;
}

Matrix Conv2d::apply(const Matrix& x) const {
  if (x.rows() != static_cast<Eigen::Index>(c_) * h_ * w_) throw std::invalid_argument("conv input size mismatch");
  const int positions = out_h_ * out_w_;
  Matrix out(out_size(), x.cols());
  for (Eigen::Index n = 0; n < x.cols(); ++n) {
    Eigen::Map<RowMajor> y(out.col(n).data(), filters(), positions);
    y.noalias() = weight_ * im2col(x.col(n).data());
    y.colwise() += bias_;
  }
  return out;
}

Matrix Conv2d::forward(const Matrix& x) {
  input_ = x;
  return apply(x);
}

Matrix Conv2d::backward(const Matrix& g) {
  const int positions = out_h_ * out_w_;
  Matrix grad_in = Matrix::Zero(input_.rows(), input_.cols());
  for (Eigen::Index n = 0; n < g.cols(); ++n) {
    Eigen::Map<const RowMajor> gy(g.col(n).data(), filters(), positions);
    const Matrix cols = im2col(input_.col(n).data());
    weight_grad_.noalias() += gy * cols.transpose();
    bias_grad_ += gy.rowwise().sum();
    const Matrix dcols = weight_.transpose() * gy;
    double* dx = grad_in.col(n).data();
    for (int c = 0; c < c_; ++c) {
      for (int ky = 0; ky < k_; ++ky) {
        for (int kx = 0; kx < k_; ++kx) {
          const int row = (c * k_ + ky) * k_ + kx;
          for (int oy = 0; oy < out_h_; ++oy) {
            double* dst = dx + (c * h_ + oy * stride_ + ky) * w_ + kx;
            for (int ox = 0; ox < out_w_; ++ox) dst[ox * stride_] += dcols(row, oy * out_w_ + ox);
          }
        }
      }
    }
  }
  return grad_in;
}

void Conv2d::collect(std::vector<ParamRef>& out) {
  out.push_back({weight_.data(), weight_grad_.data(), weight_.size()});
  out.push_back({bias_.data(), bias_grad_.data(), bias_.size()});
}

// ---------------------------------------------------------------- activations

Matrix Relu::forward(const Matrix& x) {
  input_ = x;
  return apply(x);
}

Matrix Relu::backward(const Matrix& g) const { return (input_.array() > 0.0).select(g, 0.0); }

Matrix Tanh::forward(const Matrix& x) {
  output_ = apply(x);
  return output_;
}

Matrix Tanh::backward(const Matrix& g) const { return (g.array() * (1.0 - output_.array().square())).matrix(); }

// ---------------------------------------------------------------- LayerNorm

LayerNorm::LayerNorm(int dim, double eps)
    : gain_(Vector::Ones(dim)),
      gain_grad_(Vector::Zero(dim)),
      shift_(Vector::Zero(dim)),
      shift_grad_(Vector::Zero(dim)),
      eps_(eps) {}

Matrix LayerNorm::apply(const Matrix& x) const {
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Matrix centered = x.rowwise() - mean;
  const Eigen::RowVectorXd inv_std = ((centered.array().square().colwise().mean()) + eps_).rsqrt().matrix();
  return ((centered.array().rowwise() * inv_std.array()).colwise() * gain_.array()).colwise() + shift_.array();
}

Matrix LayerNorm::forward(const Matrix& x) {
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Matrix centered = x.rowwise() - mean;
  inv_std_ = ((centered.array().square().colwise().mean()) + eps_).rsqrt().matrix();
  normalized_ = (centered.array().rowwise() * inv_std_.array()).matrix();
  return ((normalized_.array().colwise() * gain_.array()).colwise() + shift_.array()).matrix();
}

Matrix LayerNorm::backward(const Matrix& g) {
  gain_grad_ += (g.array() * normalized_.array()).rowwise().sum().matrix();
  shift_grad_ += g.rowwise().sum();
  const double n = static_cast<double>(g.rows());
  const Matrix dxhat = (g.array().colwise() * gain_.array()).matrix();
  const Eigen::RowVectorXd sum_d = dxhat.colwise().sum();
  const Eigen::RowVectorXd sum_dx = (dxhat.array() * normalized_.array()).colwise().sum().matrix();
  Matrix out = (n * dxhat).rowwise() - sum_d;
  out -= (normalized_.array().rowwise() * sum_dx.array()).matrix();
  return ((out.array().rowwise() * inv_std_.array()) / n).matrix();
}

void LayerNorm::collect(std::vector<ParamRef>& out) {
  out.push_back({gain_.data(), gain_grad_.data(), gain_.size()});
  out.push_back({shift_.data(), shift_grad_.data(), shift_.size()});
}

// ---------------------------------------------------------------- Sequential

Matrix Sequential::apply(const Matrix& x) const {
  Matrix h = x;
  for (const Layer& layer : layers_) h = std::visit([&h](const auto& l) { return l.apply(h); }, layer);
  return h;
}

Matrix Sequential::forward(const Matrix& x) {
  Matrix h = x;
  for (Layer& layer : layers_) h = std::visit([&h](auto& l) { return l.forward(h); }, layer);
  return h;
}

Matrix Sequential::backward(const Matrix& grad_out) {
  Matrix g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    g = std::visit([&g](auto& l) { return l.backward(g); }, *it);
  }
  return g;
}

void Sequential::collect(std::vector<ParamRef>& out) {
  for (Layer& layer : layers_) std::visit([&out](auto& l) { l.collect(out); }, layer);
}

void zero_grad(const std::vector<ParamRef>& params) {
  for (const ParamRef& p : params) std::fill(p.grad, p.grad + p.size, 0.0);
}

void Adam::step(const std::vector<ParamRef>& params) {
  if (m_.empty()) {
    for (const ParamRef& p : params) {
      m_.push_back(Vector::Zero(p.size));
      v_.push_back(Vector::Zero(p.size));
    }
  }
  if (m_.size() != params.size()) throw std::logic_error("Adam parameter list changed between steps");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Eigen::Map<Vector> value(params[i].value, params[i].size);
    Eigen::Map<const Vector> grad(params[i].grad, params[i].size);
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad.cwiseAbs2();
    value.array() -= lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
  }
}

}  // namespace distraxion::nn

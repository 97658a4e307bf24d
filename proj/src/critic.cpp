#include "distraxion/critic.hpp"

#include <stdexcept>

namespace distraxion {

using nn::Matrix;
using nn::Vector;

Critic::Critic(const CriticConfig& config, Rng& rng) : config_(config) {
  if (config.action_dim < 1 || config.head_layers < 1) throw std::invalid_argument("invalid critic config");
  if (config.pixels) {
    int c = config.channels, h = config.height, w = config.width;
    for (int i = 0; i < config.conv_layers; ++i) {
      nn::Conv2d conv(c, h, w, config.filters, config.kernel, i == 0 ? 2 : 1, rng);
      c = conv.filters();
      h = conv.out_height();
      w = conv.out_width();
      encoder_.add(std::move(conv));
      encoder_.add(nn::Relu{});
    }
    encoder_.add(nn::Dense(c * h * w, config.embedding, rng));
    encoder_.add(nn::LayerNorm(config.embedding));
    encoder_.add(nn::Tanh{});
    embedding_size_ = config.embedding;
  } else {
    if (config.state_dim < 1) throw std::invalid_argument("state critic needs state_dim >= 1");
    embedding_size_ = config.state_dim;
  }
  int in = embedding_size_ + config.action_dim;
  for (int i = 0; i < config.head_layers - 1; ++i) {
    head_.add(nn::Dense(in, config.hidden, rng));
    head_.add(nn::Relu{});
    in = config.hidden;
  }
  head_.add(nn::Dense(in, 1, rng));
}

Matrix Critic::encode(const Matrix& observations) const {
  return encoder_.empty() ? observations : encoder_.apply(observations);
}

Vector Critic::head_values(const Matrix& embeddings, const Matrix& actions) const {
  Matrix joint(embeddings.rows() + actions.rows(), embeddings.cols());
  joint << embeddings, actions;
  return head_.apply(joint).row(0).transpose();
}

Vector Critic::q_values(const Matrix& observations, const Matrix& actions) const {
  return head_values(encode(observations), actions);
}

Vector Critic::forward(const Matrix& observations, const Matrix& actions) {
  const Matrix emb = encoder_.empty() ? observations : encoder_.forward(observations);
  Matrix joint(emb.rows() + actions.rows(), emb.cols());
  joint << emb, actions;
  return head_.forward(joint).row(0).transpose();
}

void Critic::backward(const Vector& grad_q) {
  const Matrix g_joint = head_.backward(grad_q.transpose());
  if (!encoder_.empty()) encoder_.backward(g_joint.topRows(embedding_size_));
}

std::vector<nn::ParamRef> Critic::parameters() {
  std::vector<nn::ParamRef> out;
  encoder_.collect(out);
  head_.collect(out);
  return out;
}

void Critic::zero_grad() { nn::zero_grad(parameters()); }

void Critic::soft_update(Critic& source, double tau) {
  const auto dst = parameters();
  const auto src = source.parameters();
  if (dst.size() != src.size()) throw std::invalid_argument("soft_update between different architectures");
  for (std::size_t i = 0; i < dst.size(); ++i) {
    Eigen::Map<Vector> d(dst[i].value, dst[i].size);
    Eigen::Map<const Vector> s(src[i].value, src[i].size);
    d = (1.0 - tau) * d + tau * s;
  }
}

}  // namespace distraxion

#pragma once

#include <vector>

#include "distraxion/nn.hpp"

namespace distraxion {

struct CriticConfig {
  // Pixel input (channels x height x width) when true, else a state vector.
  bool pixels = true;
  int channels = 3;
  int height = 64;
  int width = 64;
  int state_dim = 0;
  int action_dim = 1;

  int conv_layers = 4;
  int filters = 32;
  int kernel = 3;
  int embedding = 50;
  int hidden = 256;
  // Dense layers in the head, the last producing the scalar Q.
  int head_layers = 3;

  int input_size() const { return pixels ? channels * height * width : state_dim; }
};

// Q(s, a): optional image encoder (3x3 convolutions, stride 2 then 1, ReLU;
// dense embedding with LayerNorm and tanh), action concatenated to the
// embedding, then a ReLU MLP ending in one linear unit. State inputs skip
// the encoder.
class Critic {
 public:
  Critic(const CriticConfig& config, Rng& rng);

  const CriticConfig& config() const { return config_; }
  int embedding_size() const { return embedding_size_; }

  nn::Matrix encode(const nn::Matrix& observations) const;
  // `embeddings` and `actions` have one column per evaluation.
  nn::Vector head_values(const nn::Matrix& embeddings, const nn::Matrix& actions) const;
  nn::Vector q_values(const nn::Matrix& observations, const nn::Matrix& actions) const;

  // Caching forward pass for training, followed by backward with dLoss/dQ.
  nn::Vector forward(const nn::Matrix& observations, const nn::Matrix& actions);
  void backward(const nn::Vector& grad_q);

  std::vector<nn::ParamRef> parameters();
  void zero_grad();
  // this <- (1 - tau) * this + tau * source
  void soft_update(Critic& source, double tau);

 private:
  CriticConfig config_;
  nn::Sequential encoder_;
  nn::Sequential head_;
  int embedding_size_ = 0;
};

}  // namespace distraxion

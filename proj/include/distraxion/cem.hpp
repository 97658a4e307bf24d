#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "distraxion/rng.hpp"

namespace distraxion {

struct CEMConfig {
  int population = 64;
  int iterations = 2;
  int elites = 6;

  void validate() const;
};

// Scores a batch of candidate actions (one per column).
using ActionScorer = std::function<Eigen::VectorXd(const Eigen::MatrixXd& actions)>;

struct CEMResult {
  Eigen::VectorXd action;
  double score = 0.0;
  // Best score seen after each iteration (nondecreasing).
  std::vector<double> best_per_iteration;
};

// Maximizes a scorer over [-1, 1]^action_dim. The first population is
// uniform; later ones are drawn from a Gaussian truncated to the box and
// refit to the elites. Elites carry over into the next scoring round, and the
// best action seen is returned.
CEMResult cem_maximize(const ActionScorer& score, int action_dim, const CEMConfig& config, Rng& rng);

// Runs `problems` independent CEM searches in lockstep so each iteration costs
// one scorer call. The scorer receives action_dim x (problems * count) columns
// grouped by problem (problem p owns columns [p * count, (p + 1) * count)).
// Returns action_dim x problems.
Eigen::MatrixXd cem_maximize_batch(const std::function<Eigen::VectorXd(const Eigen::MatrixXd&, int count)>& score,
                                   int problems, int action_dim, const CEMConfig& config, Rng& rng,
                                   Eigen::VectorXd* best_scores = nullptr);

}  // namespace distraxion

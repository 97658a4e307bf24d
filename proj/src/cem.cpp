#include "distraxion/cem.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace distraxion {

void CEMConfig::validate() const {
  if (population < 1 || iterations < 1 || elites < 1 || elites > population) {
    throw ConfigError("invalid CEM config: population " + std::to_string(population) + ", iterations " +
                      std::to_string(iterations) + ", elites " + std::to_string(elites));
  }
}

namespace {

double truncated_normal(Rng& rng, double mean, double stddev) {
  if (stddev <= 0.0) return std::clamp(mean, -1.0, 1.0);
  std::normal_distribution<double> dist(mean, stddev);
  for (int attempt = 0; attempt < 16; ++attempt) {
    const double v = dist(rng);
    if (v >= -1.0 && v <= 1.0) return v;
  }
  return std::clamp(dist(rng), -1.0, 1.0);
}

using BatchScorer = std::function<Eigen::VectorXd(const Eigen::MatrixXd&, int)>;

Eigen::MatrixXd run_cem(const BatchScorer& score, int problems, int dim, const CEMConfig& config, Rng& rng,
                        Eigen::VectorXd& best_scores, std::vector<double>* trace) {
  config.validate();
  const int n = config.population, e = config.elites;
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(dim, problems);
  Eigen::MatrixXd stddev = Eigen::MatrixXd::Ones(dim, problems);
  Eigen::MatrixXd elites(dim, problems * e);
  Eigen::VectorXd elite_scores(problems * e);
  Eigen::MatrixXd best(dim, problems);
  best_scores = Eigen::VectorXd::Constant(problems, -std::numeric_limits<double>::infinity());

  for (int it = 0; it < config.iterations; ++it) {
    const int carried = it == 0 ? 0 : e;
    const int count = n + carried;
    Eigen::MatrixXd candidates(dim, problems * count);
    for (int p = 0; p < problems; ++p) {
      for (int j = 0; j < n; ++j) {
        for (int d = 0; d < dim; ++d) {
          candidates(d, p * count + j) =
              it == 0 ? uniform(rng, -1.0, 1.0) : truncated_normal(rng, mean(d, p), stddev(d, p));
        }
      }
      if (carried > 0) candidates.middleCols(p * count + n, e) = elites.middleCols(p * e, e);
    }
    const Eigen::VectorXd scores = score(candidates, count);
    if (scores.size() != candidates.cols()) throw std::logic_error("CEM scorer returned the wrong number of scores");

    std::vector<int> order(count);
    for (int p = 0; p < problems; ++p) {
      std::iota(order.begin(), order.end(), 0);
      std::partial_sort(order.begin(), order.begin() + e, order.end(),
                        [&](int a, int b) { return scores[p * count + a] > scores[p * count + b]; });
      for (int k = 0; k < e; ++k) {
        elites.col(p * e + k) = candidates.col(p * count + order[k]);
        elite_scores[p * e + k] = scores[p * count + order[k]];
      }
      if (elite_scores[p * e] > best_scores[p]) {
        best_scores[p] = elite_scores[p * e];
        best.col(p) = elites.col(p * e);
      }
      const Eigen::MatrixXd block = elites.middleCols(p * e, e);
      mean.col(p) = block.rowwise().mean();
      stddev.col(p) = ((block.colwise() - mean.col(p)).array().square().rowwise().mean()).sqrt().max(1e-3).matrix();
    }
    if (trace != nullptr) trace->push_back(best_scores[0]);
  }
  return best;
}

}  // namespace

CEMResult cem_maximize(const ActionScorer& score, int action_dim, const CEMConfig& config, Rng& rng) {
  CEMResult result;
  Eigen::VectorXd best_scores;
  const Eigen::MatrixXd best = run_cem([&score](const Eigen::MatrixXd& a, int) { return score(a); }, 1, action_dim,
                                       config, rng, best_scores, &result.best_per_iteration);
  result.action = best.col(0);
  result.score = best_scores[0];
  return result;
}

Eigen::MatrixXd cem_maximize_batch(const BatchScorer& score, int problems, int action_dim, const CEMConfig& config,
                                   Rng& rng, Eigen::VectorXd* best_scores) {
  Eigen::VectorXd scores;
  Eigen::MatrixXd best = run_cem(score, problems, action_dim, config, rng, scores, nullptr);
  if (best_scores != nullptr) *best_scores = scores;
  return best;
}

}  // namespace distraxion

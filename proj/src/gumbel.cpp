#include "ecodse/gumbel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ecodse/errors.hpp"

namespace ecodse {

void require_probability_vector(const std::vector<double>& p) {
  if (p.empty()) throw Error("probability vector is empty");
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0) throw Error("probability vector has a negative or NaN entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw Error("probability vector sums to " + std::to_string(sum) + ", not 1");
}

std::vector<double> gumbel_max_sample(const std::vector<double>& p, Rng& rng) {
  require_probability_vector(p);
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double g = gumbel01(rng);
    // log(0) = -inf keeps zero-probability classes unreachable.
    const double score = g + std::log(p[k]);
    if (score > best_score) {
      best_score = score;
      best = k;
    }
  }
  std::vector<double> one_hot(p.size(), 0.0);
  one_hot[best] = 1.0;
  return one_hot;
}

std::vector<double> gumbel_softmax(const std::vector<double>& p, double tau, Rng& rng) {
  require_probability_vector(p);
  if (!(tau > 0.0)) throw Error("gumbel_softmax: tau must be positive");
  std::vector<double> scores(p.size());
  for (std::size_t k = 0; k < p.size(); ++k)
    scores[k] = (gumbel01(rng) + std::log(p[k])) / tau;
  const double mx = *std::max_element(scores.begin(), scores.end());
  double denom = 0.0;
  for (double& s : scores) {
    s = std::exp(s - mx);
    denom += s;
  }
  for (double& s : scores) s /= denom;
  return scores;
}

}  // namespace ecodse

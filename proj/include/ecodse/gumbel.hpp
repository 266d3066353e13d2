#pragma once

#include <vector>

#include "ecodse/rng.hpp"

namespace ecodse {

/// Checks p is a probability vector: entries >= 0, finite, summing to 1
/// within 1e-6. Throws on violation.
void require_probability_vector(const std::vector<double>& p);

/// One categorical draw via argmax_k(g_k + log p_k) with g_k ~ Gumbel(0,1).
/// Returns a one-hot vector over |p| classes.
std::vector<double> gumbel_max_sample(const std::vector<double>& p, Rng& rng);

/// Relaxed draw: softmax((g + log p) / tau). Sums to 1; approaches one-hot as
/// tau -> 0 and uniform as tau -> infinity.
std::vector<double> gumbel_softmax(const std::vector<double>& p, double tau, Rng& rng);

}  // namespace ecodse

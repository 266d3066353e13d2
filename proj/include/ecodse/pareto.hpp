#pragma once

#include <span>
#include <vector>

#include "ecodse/objectives.hpp"

namespace ecodse {

/// Non-dominated subset, ordered by (area, latency). Entries with identical
/// objectives keep one representative (the first seen).
ParetoFront pareto_filter(std::span<const FrontEntry> entries);
std::vector<Objectives> pareto_filter_points(std::span<const Objectives> points);

/// Average distance from the reference set: the mean, over reference points,
/// of the nearest relative distance to the approximate front. Distances
/// compare area and reciprocal latency, each normalized by the approximate
/// point's value.
double adrs(const ParetoFront& reference, const ParetoFront& approx);
double adrs_points(std::span<const Objectives> reference, std::span<const Objectives> approx);

}  // namespace ecodse

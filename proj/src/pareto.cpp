#include "ecodse/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ecodse/errors.hpp"

namespace ecodse {

namespace {

// Sort by (area, latency); with both sorted, a point is dominated exactly
// when some earlier point has latency <= its latency.
template <typename T, typename GetObj>
std::vector<T> filter_sorted(std::span<const T> input, GetObj get) {
  std::vector<std::size_t> order(input.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Objectives& oa = get(input[a]);
    const Objectives& ob = get(input[b]);
    if (oa.area != ob.area) return oa.area < ob.area;
    if (oa.latency_cycles != ob.latency_cycles) return oa.latency_cycles < ob.latency_cycles;
    return false;
  });

  std::vector<T> kept;
  double best_latency = std::numeric_limits<double>::infinity();
  double last_area = -std::numeric_limits<double>::infinity();
  double last_latency = 0.0;
  bool have_last = false;
  for (std::size_t i : order) {
    const Objectives& o = get(input[i]);
    if (have_last && o.area == last_area && o.latency_cycles == last_latency) continue;  // duplicate
    if (o.latency_cycles < best_latency) {
      kept.push_back(input[i]);
      best_latency = o.latency_cycles;
      last_area = o.area;
      last_latency = o.latency_cycles;
      have_last = true;
    }
  }
  return kept;
}

}  // namespace

ParetoFront pareto_filter(std::span<const FrontEntry> entries) {
  ParetoFront front;
  front.entries = filter_sorted(entries, [](const FrontEntry& e) -> const Objectives& {
    return e.objectives;
  });
  return front;
}

std::vector<Objectives> pareto_filter_points(std::span<const Objectives> points) {
  return filter_sorted(points, [](const Objectives& o) -> const Objectives& { return o; });
}

double adrs_points(std::span<const Objectives> reference, std::span<const Objectives> approx) {
  check(!reference.empty() && !approx.empty(), "adrs: fronts must be non-empty");
  double total = 0.0;
  for (const Objectives& ref : reference) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const Objectives& ap : approx) {
      const double a_ap = ap.area;
      const double l_ap = ap.l_metric();
      if (a_ap == 0.0 || l_ap == 0.0 || !std::isfinite(l_ap))
        throw Error("adrs: degenerate approximate point (zero area or reciprocal latency)");
      const double da = std::abs((ref.area - a_ap) / a_ap);
      const double dl = std::abs((ref.l_metric() - l_ap) / l_ap);
      nearest = std::min(nearest, std::max(da, dl));
    }
    total += nearest;
  }
  return total / static_cast<double>(reference.size());
}

double adrs(const ParetoFront& reference, const ParetoFront& approx) {
  std::vector<Objectives> ref, ap;
  ref.reserve(reference.size());
  ap.reserve(approx.size());
  for (const auto& e : reference.entries) ref.push_back(e.objectives);
  for (const auto& e : approx.entries) ap.push_back(e.objectives);
  return adrs_points(ref, ap);
}

}  // namespace ecodse

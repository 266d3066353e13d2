#include "ecodse/metrics.hpp"

#include <cmath>

#include "ecodse/errors.hpp"

namespace ecodse {

namespace {
void require_aligned(std::span<const double> pred, std::span<const double> target) {
  check(pred.size() == target.size() && !pred.empty(),
        "metrics: prediction and target lengths differ or are empty");
}
}  // namespace

double rmse(std::span<const double> pred, std::span<const double> target) {
  require_aligned(pred, target);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(pred.size()));
}

double mae(std::span<const double> pred, std::span<const double> target) {
  require_aligned(pred, target);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) acc += std::abs(pred[i] - target[i]);
  return acc / static_cast<double>(pred.size());
}

double mape(std::span<const double> pred, std::span<const double> target) {
  require_aligned(pred, target);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (target[i] == 0.0)
      throw Error("mape: zero-valued target at index " + std::to_string(i) +
                  "; use mae for targets with zero occurrences");
    acc += std::abs((pred[i] - target[i]) / target[i]);
  }
  return 100.0 * acc / static_cast<double>(pred.size());
}

}  // namespace ecodse

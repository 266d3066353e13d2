#include "ecodse/budget.hpp"

#include <algorithm>
#include <cmath>

#include "ecodse/errors.hpp"

namespace ecodse {

void BudgetSchedule::validate() const {
  check(n_pop >= 1, "budget: n_pop must be >= 1");
  check(n_se >= static_cast<std::uint64_t>(n_pop), "budget: n_se must be >= n_pop");
  check(wall_clock_cap_s >= 0.0, "budget: negative wall clock cap");
}

BudgetSchedule budget_for(std::uint64_t space_size) {
  check(space_size >= 1, "budget_for: space size must be >= 1");
  const auto s = static_cast<double>(space_size);
  double fraction;
  int n_pop;
  if (space_size >= 10000000ULL) {
    fraction = 0.00005;
    n_pop = 30;
  } else if (space_size > 1000000ULL) {
    // The published schedule skips (1e6, 1e7); this coefficient keeps the
    // sampled fraction monotone across the gap.
    fraction = 0.0005;
    n_pop = 30;
  } else if (space_size > 100000ULL) {
    fraction = 0.005;
    n_pop = 30;
  } else if (space_size > 10000ULL) {
    fraction = 0.05;
    n_pop = 30;
  } else if (space_size > 500ULL) {
    fraction = 0.3;
    n_pop = 30;
  } else {
    fraction = 0.5;
    n_pop = 10;
  }
  BudgetSchedule b;
  b.n_se = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::floor(fraction * s)));
  b.n_pop = static_cast<int>(std::min<std::uint64_t>(n_pop, b.n_se));
  return b;
}

}  // namespace ecodse

#pragma once

#include <cstdint>

namespace ecodse {

struct BudgetSchedule {
  std::uint64_t n_se = 0;          // maximum explorations (evaluator calls)
  int n_pop = 1;                   // population / batch size
  double wall_clock_cap_s = 3600;  // per-run time limit

  void validate() const;
};

/// Piecewise schedule over the design-space size. Sampled fraction shrinks as
/// the space grows; results are floored with a minimum of one exploration.
BudgetSchedule budget_for(std::uint64_t space_size);

}  // namespace ecodse

#pragma once

#include <span>

namespace ecodse {

double rmse(std::span<const double> pred, std::span<const double> target);
double mae(std::span<const double> pred, std::span<const double> target);

/// Mean absolute percentage error. Refuses zero-valued targets; callers with
/// zero labels should report MAE instead.
double mape(std::span<const double> pred, std::span<const double> target);

}  // namespace ecodse

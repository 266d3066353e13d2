#pragma once

#include <optional>
#include <string>
#include <vector>

namespace ecodse {

/// Quality-of-results record: latency plus normalized resource utilizations,
/// with optional critical-path delay and power. Serves as both training label
/// and prediction.
struct QorVector {
  double latency = 0.0;
  double lut = 0.0;
  double ff = 0.0;
  double dsp = 0.0;
  double bram = 0.0;
  std::optional<double> cp;
  std::optional<double> power;

  double get(const std::string& target) const;
  void set(const std::string& target, double value);

  /// Present fields finite; utilizations within [0, 1.5] (over-utilized
  /// post-route designs are tolerated up to 50% overshoot).
  void validate() const;
};

/// Canonical target field names in declaration order.
const std::vector<std::string>& qor_target_names();

bool is_qor_target(const std::string& name);

}  // namespace ecodse

#pragma once

#include "ecodse/design_space.hpp"
#include "ecodse/qor.hpp"

namespace ecodse {

/// Maximum available resources on the target device. Defaults are for a
/// ZCU104-class part; override via the run configuration.
struct DeviceCapacities {
  double lut = 230400;
  double ff = 460800;
  double dsp = 1728;
  double bram = 312;
};

/// The two search objectives, both minimized: mean normalized resource
/// utilization and latency in cycles.
struct Objectives {
  double area = 0.0;
  double latency_cycles = 0.0;

  /// Reciprocal latency; used inside the ADRS distance only.
  double l_metric() const { return 1.0 / latency_cycles; }

  /// Area is the mean of the four normalized utilizations; the QoR record
  /// already stores utilizations as fractions of device capacity.
  static Objectives from_qor(const QorVector& qor);
};

bool dominates(const Objectives& a, const Objectives& b);

struct FrontEntry {
  Configuration config;
  Objectives objectives;
  QorVector qor;
};

struct ParetoFront {
  std::vector<FrontEntry> entries;

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
};

}  // namespace ecodse

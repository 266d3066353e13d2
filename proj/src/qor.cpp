#include "ecodse/qor.hpp"

#include <cmath>

#include "ecodse/errors.hpp"

namespace ecodse {

double QorVector::get(const std::string& target) const {
  if (target == "latency") return latency;
  if (target == "lut") return lut;
  if (target == "ff") return ff;
  if (target == "dsp") return dsp;
  if (target == "bram") return bram;
  if (target == "cp") {
    check(cp.has_value(), "qor: cp not present");
    return *cp;
  }
  if (target == "power") {
    check(power.has_value(), "qor: power not present");
    return *power;
  }
  throw SchemaError("qor: unknown target '" + target + "'");
}

void QorVector::set(const std::string& target, double value) {
  if (target == "latency") latency = value;
  else if (target == "lut") lut = value;
  else if (target == "ff") ff = value;
  else if (target == "dsp") dsp = value;
  else if (target == "bram") bram = value;
  else if (target == "cp") cp = value;
  else if (target == "power") power = value;
  else throw SchemaError("qor: unknown target '" + target + "'");
}

void QorVector::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(latency) || !finite(lut) || !finite(ff) || !finite(dsp) || !finite(bram) ||
      (cp && !finite(*cp)) || (power && !finite(*power)))
    throw SchemaError("qor: non-finite field");
  for (double u : {lut, ff, dsp, bram})
    if (u < 0.0 || u > 1.5) throw SchemaError("qor: utilization outside [0, 1.5]");
}

const std::vector<std::string>& qor_target_names() {
  static const std::vector<std::string> names = {"latency", "lut", "ff",
                                                 "dsp",     "bram", "cp", "power"};
  return names;
}

bool is_qor_target(const std::string& name) {
  for (const auto& n : qor_target_names())
    if (n == name) return true;
  return false;
}

}  // namespace ecodse

#include "ecodse/objectives.hpp"

#include <cmath>

#include "ecodse/errors.hpp"

namespace ecodse {

Objectives Objectives::from_qor(const QorVector& qor) {
  Objectives o;
  o.area = 0.25 * (qor.ff + qor.lut + qor.bram + qor.dsp);
  o.latency_cycles = qor.latency;
  if (!std::isfinite(o.area) || !std::isfinite(o.latency_cycles))
    throw SchemaError("objectives: non-finite area or latency");
  return o;
}

bool dominates(const Objectives& a, const Objectives& b) {
  if (a.area > b.area || a.latency_cycles > b.latency_cycles) return false;
  return a.area < b.area || a.latency_cycles < b.latency_cycles;
}

}  // namespace ecodse

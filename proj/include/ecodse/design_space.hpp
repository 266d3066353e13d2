#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "ecodse/graph.hpp"
#include "ecodse/rng.hpp"

namespace ecodse {

/// A pragma knob value: numeric (unroll factors, tile sizes) or symbolic
/// (partition kinds such as "cyclic").
using KnobValue = std::variant<double, std::string>;

std::string knob_value_to_string(const KnobValue& v);
bool knob_value_is_numeric(const KnobValue& v);
double knob_value_number(const KnobValue& v);

struct Knob {
  std::string name;
  std::vector<KnobValue> domain;  // ordered, non-empty
};

struct Configuration {
  std::vector<KnobValue> values;  // one per knob, in knob order

  std::string key() const;  // canonical string, usable as a map key
  bool operator==(const Configuration& other) const { return values == other.values; }
};

class DesignSpace {
 public:
  DesignSpace() = default;
  explicit DesignSpace(std::vector<Knob> knobs);

  static DesignSpace load(const std::string& path);
  std::string to_json() const;

  const std::vector<Knob>& knobs() const { return knobs_; }
  std::uint64_t size() const { return size_; }

  bool contains(const Configuration& config) const;
  void require_valid(const Configuration& config) const;

  /// Index of config.values[knob] inside the knob's domain, -1 if absent.
  int domain_index(std::size_t knob, const KnobValue& v) const;

  Configuration config_from_indices(const std::vector<int>& idx) const;
  std::vector<int> indices_of(const Configuration& config) const;

  /// Lexicographic rank of a configuration (first knob most significant).
  std::uint64_t rank_of(const Configuration& config) const;
  Configuration config_at_rank(std::uint64_t rank) const;

  Configuration random_config(Rng& rng) const;

 private:
  std::vector<Knob> knobs_;
  std::uint64_t size_ = 0;
};

inline constexpr std::uint64_t kDefaultEnumerationCap = 1000000;

/// Yields every configuration exactly once, lexicographic in knob order.
/// Refuses spaces larger than the cap.
std::vector<Configuration> enumerate_space(const DesignSpace& space,
                                           std::uint64_t cap = kDefaultEnumerationCap);

/// Streaming enumeration for callers that do not want the full vector.
void for_each_configuration(const DesignSpace& space,
                            const std::function<void(const Configuration&)>& fn,
                            std::uint64_t cap = kDefaultEnumerationCap);

/// Returns a copy of the graph where each pragma-slot node's designated
/// numeric feature holds the configured value. Symbolic knob values are
/// written as their domain index.
CdfgGraph apply_configuration(const CdfgGraph& graph, const DesignSpace& space,
                              const Configuration& config, int slot_feature_index);

}  // namespace ecodse

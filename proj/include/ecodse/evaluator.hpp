#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>

#include "ecodse/checkpoint.hpp"
#include "ecodse/design_space.hpp"
#include "ecodse/ecognn.hpp"
#include "ecodse/objectives.hpp"
#include "ecodse/qor.hpp"

namespace ecodse {

/// Scores one configuration. Implementations must be deterministic per
/// (configuration, seed) and safe for concurrent calls. Latency is returned
/// in cycles, utilizations normalized to device capacity.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual QorVector evaluate(const DesignSpace& space, const Configuration& config) = 0;
};

/// Analytic family of test objectives on knob positions: higher positions buy
/// latency with resources. Totally defined on any space; seeded weights.
class SyntheticEvaluator : public Evaluator {
 public:
  explicit SyntheticEvaluator(std::uint64_t seed = 0) : seed_(seed) {}
  QorVector evaluate(const DesignSpace& space, const Configuration& config) override;

 private:
  std::uint64_t seed_;
};

/// CSV-backed lookup table. Rows keyed by the configuration values in knob
/// order. Missing configurations are evaluation failures.
class TableEvaluator : public Evaluator {
 public:
  static TableEvaluator from_csv(const std::string& path, const DesignSpace& space);
  QorVector evaluate(const DesignSpace& space, const Configuration& config) override;

  std::size_t row_count() const { return rows_.size(); }

 private:
  std::map<std::string, QorVector> rows_;
};

/// Templates the configuration into the base graph's pragma slots and asks
/// the trained model for QoR. Predictions come back in label units via the
/// manifest normalization captured in the checkpoint.
class SurrogateEvaluator : public Evaluator {
 public:
  SurrogateEvaluator(EcognnModel model, std::map<std::string, AffineNorm> target_norm,
                     CdfgGraph base_graph, int slot_feature_index, std::uint64_t seed);
  QorVector evaluate(const DesignSpace& space, const Configuration& config) override;

 private:
  EcognnModel model_;
  std::map<std::string, AffineNorm> target_norm_;
  CdfgGraph base_graph_;
  int slot_feature_index_;
  std::uint64_t seed_;
};

/// Wraps another evaluator with a callback, e.g. for call counting in tests.
class ObservedEvaluator : public Evaluator {
 public:
  ObservedEvaluator(Evaluator& inner, std::function<void(const Configuration&)> on_call)
      : inner_(inner), on_call_(std::move(on_call)) {}
  QorVector evaluate(const DesignSpace& space, const Configuration& config) override {
    on_call_(config);
    return inner_.evaluate(space, config);
  }

 private:
  Evaluator& inner_;
  std::function<void(const Configuration&)> on_call_;
};

}  // namespace ecodse

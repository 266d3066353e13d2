#pragma once

#include "ecodse/llm_client.hpp"
#include "ecodse/prompt.hpp"
#include "ecodse/search.hpp"

namespace ecodse {

/// Adaptive LLM sampling temperature: decays by a fixed step when the best
/// solution has stagnated for a threshold of iterations, never below zero.
struct TempController {
  double t;
  double decay;
  int stagnation = 0;
  int threshold;

  explicit TempController(double t_init = 1.0, double decay_step = 0.2, int threshold_iters = 3)
      : t(t_init), decay(decay_step), threshold(threshold_iters) {}

  void update(bool improved) {
    stagnation = improved ? 0 : stagnation + 1;
    if (stagnation >= threshold && t >= 0.0) t = std::max(0.0, t - decay);
  }
};

/// Per-knob concentration per domain value. Evaporation scales everything by
/// rho; deposits add a fixed amount for values present in elite solutions.
struct PheromoneMatrix {
  std::vector<std::vector<double>> tau;

  static PheromoneMatrix init(const DesignSpace& space, double value = 1.0);
  void evaporate(double rho);
  void deposit(const DesignSpace& space, const std::vector<Configuration>& elites, double amount);
};

struct LlmParams {
  double llm_t_init = 1.0;
  double llm_decay = 0.2;
  int stagnation_threshold = 3;
  // annealing variant
  double sa_t_init = 1.0;
  double sa_t_stop = 1e-3;
  double sa_cooling = 0.05;
  /// The published acceptance expression, kept behind a switch; the standard
  /// exp(-delta/T) rule is the default.
  bool legacy_sa_acceptance = false;
  // colony variant
  double aco_rho = 0.9;
  double aco_deposit = 0.1;
};

SearchResult llmga_run(const DesignSpace& space, Evaluator& evaluator,
                       const BudgetSchedule& budget, LlmClient& client, std::uint64_t seed,
                       const LlmParams& params = {});
SearchResult llmsa_run(const DesignSpace& space, Evaluator& evaluator,
                       const BudgetSchedule& budget, LlmClient& client, std::uint64_t seed,
                       const LlmParams& params = {});
SearchResult llmaco_run(const DesignSpace& space, Evaluator& evaluator,
                        const BudgetSchedule& budget, LlmClient& client, std::uint64_t seed,
                        const LlmParams& params = {});

}  // namespace ecodse

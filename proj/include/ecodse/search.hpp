#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ecodse/budget.hpp"
#include "ecodse/design_space.hpp"
#include "ecodse/evaluator.hpp"
#include "ecodse/objectives.hpp"
#include "ecodse/pareto.hpp"

namespace ecodse {

struct EvalRecord {
  int iter = 0;
  Configuration config;
  Objectives objectives;
  QorVector qor;
  double elapsed_ms = 0.0;
  bool failed = false;
};

struct TranscriptRecord {
  int iter = 0;
  std::string prompt_hash;
  double temperature = 0.0;
  std::string response_excerpt;
  int valid = 0, repaired = 0, dropped = 0, padded = 0;
};

struct SearchResult {
  std::string algorithm;
  ParetoFront front;               // non-dominated subset of everything evaluated
  std::vector<EvalRecord> log;     // one record per evaluator call
  std::vector<TranscriptRecord> transcript;  // LLM-driven runs only
  std::uint64_t evaluations = 0;
  std::uint64_t failures = 0;
  std::uint64_t client_calls = 0;
  double runtime_s = 0.0;
  std::map<std::string, double> stats;  // algorithm-specific extras
};

struct SearchParams {
  // simulated annealing
  double sa_t_init = 1.0;
  double sa_t_stop = 1e-3;
  double sa_cooling = 0.05;
  // ant colony
  double aco_alpha = 1.0;
  double aco_beta = 0.0;  // heuristic off unless a prior is supplied
  double aco_rho = 0.9;
  double aco_q = 1.0;
  std::vector<std::vector<double>> aco_prior;  // optional per-knob heuristic
  // genetic
  double crossover_rate = 0.9;
  std::optional<double> mutation_rate;  // default 1/knobs
};

SearchResult nsga2_run(const DesignSpace& space, Evaluator& evaluator,
                       const BudgetSchedule& budget, std::uint64_t seed,
                       const SearchParams& params = {});
SearchResult sa_run(const DesignSpace& space, Evaluator& evaluator, const BudgetSchedule& budget,
                    std::uint64_t seed, const SearchParams& params = {});
SearchResult aco_run(const DesignSpace& space, Evaluator& evaluator, const BudgetSchedule& budget,
                     std::uint64_t seed, const SearchParams& params = {});

/// Evaluates the whole space and returns the exact front. Refuses spaces over
/// the enumeration cap.
SearchResult exhaustive_run(const DesignSpace& space, Evaluator& evaluator,
                            std::uint64_t cap = kDefaultEnumerationCap);

/// 0-based non-domination rank per point (rank 0 = non-dominated).
std::vector<int> non_dominated_ranks(const std::vector<Objectives>& points);
/// Crowding distance within each rank class.
std::vector<double> crowding_distances(const std::vector<Objectives>& points,
                                       const std::vector<int>& ranks);
/// Indices of the n best points by (rank, then descending crowding).
std::vector<std::size_t> rank_crowding_select(const std::vector<Objectives>& points,
                                              std::size_t n);

/// Scalarized cost shared by the annealing-style searches: equal-weight blend
/// of area and latency normalized by the largest latency seen so far.
double scalar_cost(const Objectives& o, double latency_max);

/// Budget- and wall-clock-aware evaluation funnel shared by all searches.
/// Caches repeated configurations (cache hits do not consume budget), logs
/// every evaluator call, and archives results for the final front.
class EvalContext {
 public:
  EvalContext(const DesignSpace& space, Evaluator& evaluator, const BudgetSchedule& budget);

  /// Evaluates or replays a configuration. Returns nothing when the budget or
  /// wall clock is exhausted, or when the evaluator failed (failures consume
  /// budget).
  std::optional<Objectives> evaluate(const Configuration& config);

  bool exhausted() const;
  void next_iteration() { ++iter_; }
  int iteration() const { return iter_; }
  std::uint64_t evaluations() const { return evaluations_; }
  std::uint64_t failures() const { return failures_; }
  double latency_max() const { return latency_max_; }
  double elapsed_s() const;

  const std::vector<EvalRecord>& log() const { return log_; }
  std::vector<EvalRecord>& log() { return log_; }
  ParetoFront front() const;

 private:
  const DesignSpace& space_;
  Evaluator& evaluator_;
  BudgetSchedule budget_;
  std::map<std::string, std::optional<std::pair<Objectives, QorVector>>> cache_;
  std::vector<EvalRecord> log_;
  std::vector<FrontEntry> archive_;
  std::uint64_t evaluations_ = 0;
  std::uint64_t failures_ = 0;
  double latency_max_ = 0.0;
  int iter_ = 0;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace ecodse

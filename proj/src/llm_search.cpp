#include "ecodse/llm_search.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ecodse/errors.hpp"

namespace ecodse {

PheromoneMatrix PheromoneMatrix::init(const DesignSpace& space, double value) {
  PheromoneMatrix m;
  m.tau.reserve(space.knobs().size());
  for (const auto& knob : space.knobs()) m.tau.emplace_back(knob.domain.size(), value);
  return m;
}

void PheromoneMatrix::evaporate(double rho) {
  check(rho > 0.0 && rho <= 1.0, "pheromone: rho must be in (0, 1]");
  for (auto& row : tau)
    for (double& v : row) v *= rho;
}

void PheromoneMatrix::deposit(const DesignSpace& space, const std::vector<Configuration>& elites,
                              double amount) {
  // One deposit per distinct (knob, value) pair present in the elites.
  std::vector<std::vector<bool>> seen(tau.size());
  for (std::size_t g = 0; g < tau.size(); ++g) seen[g].assign(tau[g].size(), false);
  for (const auto& elite : elites) {
    const auto idx = space.indices_of(elite);
    for (std::size_t g = 0; g < idx.size(); ++g) seen[g][idx[g]] = true;
  }
  for (std::size_t g = 0; g < tau.size(); ++g)
    for (std::size_t i = 0; i < tau[g].size(); ++i)
      if (seen[g][i]) tau[g][i] += amount;
}

namespace {

struct Member {
  Configuration config;
  Objectives objectives;
};

std::string front_signature(const ParetoFront& front) {
  std::string sig;
  for (const auto& e : front.entries) {
    sig += e.config.key();
    sig += ';';
  }
  return sig;
}

/// Shared plumbing: prompt construction, the client exchange with one retry
/// and a random fallback, batch evaluation and stagnation tracking.
class LlmRun {
 public:
  LlmRun(const DesignSpace& space, Evaluator& evaluator, const BudgetSchedule& budget,
         LlmClient& client, std::uint64_t seed, const LlmParams& params)
      : space_(space),
        ctx_(space, evaluator, budget),
        client_(client),
        params_(params),
        temp_(params.llm_t_init, params.llm_decay, params.stagnation_threshold),
        rng_(make_rng(seed_for(seed, "llm-run"))) {}

  std::vector<Configuration> request_batch(const std::vector<Member>& population, PromptMode mode,
                                           int n, const PromptExtras& extras = {}) {
    std::vector<Configuration> pop_configs;
    std::vector<double> fitness;
    pop_configs.reserve(population.size());
    for (const auto& m : population) {
      pop_configs.push_back(m.config);
      fitness.push_back(scalar_cost(m.objectives, ctx_.latency_max()));
    }
    const std::string prompt =
        build_prompt(space_, pop_configs, fitness, mode, n, extras).render();

    for (int attempt = 0; attempt < 2; ++attempt) {
      std::string text;
      try {
        text = client_.complete(prompt, temp_.t);
        ++client_calls_;
      } catch (const std::exception&) {
        ++client_calls_;
        continue;
      }
      ParseDiagnostics diag;
      try {
        auto configs = parse_response(text, space_, n, rng_, &diag);
        record_transcript(prompt, text, diag);
        return configs;
      } catch (const ParseError&) {
        record_transcript(prompt, text, diag);
      }
    }
    // Both exchanges unusable: fall back to random generation for this batch.
    std::vector<Configuration> fallback;
    fallback.reserve(n);
    for (int i = 0; i < n; ++i) fallback.push_back(space_.random_config(rng_));
    return fallback;
  }

  std::vector<Member> evaluate_batch(const std::vector<Configuration>& configs) {
    std::vector<Member> members;
    for (const auto& c : configs) {
      if (ctx_.exhausted()) break;
      if (const auto obj = ctx_.evaluate(c)) members.push_back({c, *obj});
    }
    return members;
  }

  bool note_progress() {
    const std::string sig = front_signature(ctx_.front());
    const bool improved = sig != front_sig_;
    front_sig_ = sig;
    temp_.update(improved);
    return improved;
  }

  SearchResult finish(const std::string& algorithm) {
    SearchResult result;
    result.algorithm = algorithm;
    result.front = ctx_.front();
    result.log = std::move(ctx_.log());
    result.transcript = std::move(transcript_);
    result.evaluations = ctx_.evaluations();
    result.failures = ctx_.failures();
    result.client_calls = client_calls_;
    result.runtime_s = ctx_.elapsed_s();
    result.stats["llm_temperature"] = temp_.t;
    return result;
  }

  EvalContext& ctx() { return ctx_; }
  TempController& temp() { return temp_; }
  Rng& rng() { return rng_; }
  std::uint64_t iterations_cap(const BudgetSchedule& budget) const {
    return (budget.n_se + budget.n_pop - 1) / budget.n_pop;
  }

 private:
  void record_transcript(const std::string& prompt, const std::string& text,
                         const ParseDiagnostics& diag) {
    TranscriptRecord rec;
    rec.iter = ctx_.iteration();
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(prompt)));
    rec.prompt_hash = buf;
    rec.temperature = temp_.t;
    rec.response_excerpt = text.substr(0, 160);
    rec.valid = diag.valid;
    rec.repaired = diag.repaired;
    rec.dropped = diag.dropped;
    rec.padded = diag.padded;
    transcript_.push_back(std::move(rec));
  }

  const DesignSpace& space_;
  EvalContext ctx_;
  LlmClient& client_;
  LlmParams params_;
  TempController temp_;
  Rng rng_;
  std::vector<TranscriptRecord> transcript_;
  std::string front_sig_;
  std::uint64_t client_calls_ = 0;
};

std::vector<Member> select_members(const std::vector<Member>& pool, std::size_t n) {
  std::vector<Objectives> objs;
  objs.reserve(pool.size());
  for (const auto& m : pool) objs.push_back(m.objectives);
  std::vector<Member> kept;
  for (std::size_t i : rank_crowding_select(objs, n)) kept.push_back(pool[i]);
  return kept;
}

double mean_cost(const std::vector<Member>& members, double latency_max) {
  if (members.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& m : members) acc += scalar_cost(m.objectives, latency_max);
  return acc / static_cast<double>(members.size());
}

}  // namespace

SearchResult llmga_run(const DesignSpace& space, Evaluator& evaluator,
                       const BudgetSchedule& budget, LlmClient& client, std::uint64_t seed,
                       const LlmParams& params) {
  budget.validate();
  LlmRun run(space, evaluator, budget, client, seed, params);
  const auto n_pop = static_cast<std::size_t>(budget.n_pop);

  auto population =
      run.evaluate_batch(run.request_batch({}, PromptMode::Init, budget.n_pop));
  population = select_members(population, n_pop);
  run.note_progress();

  const std::uint64_t max_iters = run.iterations_cap(budget);
  for (std::uint64_t iter = 0; iter < max_iters && !run.ctx().exhausted(); ++iter) {
    run.ctx().next_iteration();
    auto offspring =
        run.evaluate_batch(run.request_batch(population, PromptMode::GaOffspring, budget.n_pop));
    std::vector<Member> merged = population;
    merged.insert(merged.end(), offspring.begin(), offspring.end());
    population = select_members(merged, n_pop);
    run.note_progress();
  }
  return run.finish("llmga");
}

SearchResult llmsa_run(const DesignSpace& space, Evaluator& evaluator,
                       const BudgetSchedule& budget, LlmClient& client, std::uint64_t seed,
                       const LlmParams& params) {
  budget.validate();
  check(params.sa_t_init > params.sa_t_stop && params.sa_t_stop > 0.0,
        "llmsa: need t_init > t_stop > 0");
  check(params.sa_cooling > 0.0, "llmsa: cooling rate must be positive");
  LlmRun run(space, evaluator, budget, client, seed, params);
  const auto n_pop = static_cast<std::size_t>(budget.n_pop);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto population =
      run.evaluate_batch(run.request_batch({}, PromptMode::Init, budget.n_pop));
  population = select_members(population, n_pop);
  run.note_progress();

  double temperature = params.sa_t_init;
  int coolings = 0;
  const std::uint64_t max_iters = run.iterations_cap(budget);
  for (std::uint64_t iter = 0;
       iter < max_iters && temperature >= params.sa_t_stop && !run.ctx().exhausted(); ++iter) {
    run.ctx().next_iteration();
    auto candidates =
        run.evaluate_batch(run.request_batch(population, PromptMode::SaNeighbor, budget.n_pop));
    if (!candidates.empty()) {
      auto proposed = select_members(candidates, n_pop);
      const double cost_new = mean_cost(proposed, run.ctx().latency_max());
      const double cost_cur = mean_cost(population, run.ctx().latency_max());
      bool accept;
      if (params.legacy_sa_acceptance) {
        // Published expression: delta = current - new, acceptance
        // probability 1 - exp(delta / T) when the new set is not better.
        const double delta = cost_cur - cost_new;
        accept = delta > 0.0 ||
                 unit(run.rng()) < std::max(0.0, 1.0 - std::exp(delta / temperature));
      } else {
        const double delta = cost_new - cost_cur;
        accept = delta < 0.0 || unit(run.rng()) < std::exp(-delta / temperature);
      }
      if (accept || population.empty()) population = std::move(proposed);
    }
    run.note_progress();
    temperature /= 1.0 + params.sa_cooling;
    ++coolings;
  }
  SearchResult result = run.finish("llmsa");
  result.stats["sa_final_temperature"] = temperature;
  result.stats["sa_coolings"] = static_cast<double>(coolings);
  return result;
}

SearchResult llmaco_run(const DesignSpace& space, Evaluator& evaluator,
                        const BudgetSchedule& budget, LlmClient& client, std::uint64_t seed,
                        const LlmParams& params) {
  budget.validate();
  check(params.aco_rho > 0.0 && params.aco_rho <= 1.0, "llmaco: rho must be in (0, 1]");
  LlmRun run(space, evaluator, budget, client, seed, params);
  const auto n_pop = static_cast<std::size_t>(budget.n_pop);

  PheromoneMatrix pheromone = PheromoneMatrix::init(space, 1.0);

  auto population =
      run.evaluate_batch(run.request_batch({}, PromptMode::Init, budget.n_pop));
  population = select_members(population, n_pop);
  run.note_progress();

  const std::uint64_t max_iters = run.iterations_cap(budget);
  for (std::uint64_t iter = 0; iter < max_iters && !run.ctx().exhausted(); ++iter) {
    run.ctx().next_iteration();
    PromptExtras extras;
    extras.pheromone = &pheromone.tau;
    auto sampled = run.evaluate_batch(
        run.request_batch(population, PromptMode::AcoPheromone, budget.n_pop, extras));
    std::vector<Member> merged = population;
    merged.insert(merged.end(), sampled.begin(), sampled.end());
    population = select_members(merged, n_pop);

    pheromone.evaporate(params.aco_rho);
    if (!population.empty()) {
      std::vector<Objectives> objs;
      objs.reserve(population.size());
      for (const auto& m : population) objs.push_back(m.objectives);
      const auto ranks = non_dominated_ranks(objs);
      std::vector<Configuration> elites;
      for (std::size_t i = 0; i < population.size(); ++i)
        if (ranks[i] == 0) elites.push_back(population[i].config);
      pheromone.deposit(space, elites, params.aco_deposit);
    }
    run.note_progress();
  }
  return run.finish("llmaco");
}

}  // namespace ecodse

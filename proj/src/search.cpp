#include "ecodse/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ecodse/errors.hpp"
#include "ecodse/rng.hpp"

namespace ecodse {

EvalContext::EvalContext(const DesignSpace& space, Evaluator& evaluator,
                         const BudgetSchedule& budget)
    : space_(space), evaluator_(evaluator), budget_(budget),
      start_(std::chrono::steady_clock::now()) {
  budget_.validate();
}

double EvalContext::elapsed_s() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

bool EvalContext::exhausted() const {
  return evaluations_ >= budget_.n_se || elapsed_s() >= budget_.wall_clock_cap_s;
}

std::optional<Objectives> EvalContext::evaluate(const Configuration& config) {
  const std::string key = config.key();
  if (const auto it = cache_.find(key); it != cache_.end()) {
    if (it->second) return it->second->first;
    return std::nullopt;
  }
  if (exhausted()) return std::nullopt;

  const auto before = std::chrono::steady_clock::now();
  ++evaluations_;
  EvalRecord rec;
  rec.iter = iter_;
  rec.config = config;
  try {
    const QorVector qor = evaluator_.evaluate(space_, config);
    rec.qor = qor;
    rec.objectives = Objectives::from_qor(qor);
    rec.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - before)
            .count();
    log_.push_back(rec);
    archive_.push_back({config, rec.objectives, qor});
    latency_max_ = std::max(latency_max_, rec.objectives.latency_cycles);
    cache_[key] = std::make_pair(rec.objectives, qor);
    return rec.objectives;
  } catch (const std::exception&) {
    // Evaluation failures consume budget, mirroring real synthesis failures.
    ++failures_;
    rec.failed = true;
    rec.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - before)
            .count();
    log_.push_back(rec);
    cache_[key] = std::nullopt;
    return std::nullopt;
  }
}

ParetoFront EvalContext::front() const { return pareto_filter(archive_); }

std::vector<int> non_dominated_ranks(const std::vector<Objectives>& points) {
  const std::size_t n = points.size();
  std::vector<int> rank(n, -1);
  std::vector<int> dominated_by(n, 0);
  std::vector<std::vector<std::size_t>> dominated(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (dominates(points[i], points[j])) dominated[i].push_back(j);
      else if (dominates(points[j], points[i])) ++dominated_by[i];
    }
  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < n; ++i)
    if (dominated_by[i] == 0) {
      rank[i] = 0;
      current.push_back(i);
    }
  int level = 0;
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t i : current)
      for (std::size_t j : dominated[i])
        if (--dominated_by[j] == 0) {
          rank[j] = level + 1;
          next.push_back(j);
        }
    current = std::move(next);
    ++level;
  }
  return rank;
}

std::vector<double> crowding_distances(const std::vector<Objectives>& points,
                                       const std::vector<int>& ranks) {
  const std::size_t n = points.size();
  std::vector<double> crowd(n, 0.0);
  const int max_rank = ranks.empty() ? -1 : *std::max_element(ranks.begin(), ranks.end());
  for (int r = 0; r <= max_rank; ++r) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (ranks[i] == r) idx.push_back(i);
    if (idx.size() <= 2) {
      for (std::size_t i : idx) crowd[i] = std::numeric_limits<double>::infinity();
      continue;
    }
    auto accumulate = [&](auto get) {
      std::sort(idx.begin(), idx.end(),
                [&](std::size_t a, std::size_t b) { return get(points[a]) < get(points[b]); });
      const double lo = get(points[idx.front()]);
      const double hi = get(points[idx.back()]);
      crowd[idx.front()] = crowd[idx.back()] = std::numeric_limits<double>::infinity();
      if (hi == lo) return;
      for (std::size_t k = 1; k + 1 < idx.size(); ++k)
        crowd[idx[k]] += (get(points[idx[k + 1]]) - get(points[idx[k - 1]])) / (hi - lo);
    };
    accumulate([](const Objectives& o) { return o.area; });
    accumulate([](const Objectives& o) { return o.latency_cycles; });
  }
  return crowd;
}

std::vector<std::size_t> rank_crowding_select(const std::vector<Objectives>& points,
                                              std::size_t n) {
  const auto ranks = non_dominated_ranks(points);
  const auto crowd = crowding_distances(points, ranks);
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (ranks[a] != ranks[b]) return ranks[a] < ranks[b];
    return crowd[a] > crowd[b];
  });
  order.resize(std::min(n, order.size()));
  return order;
}

double scalar_cost(const Objectives& o, double latency_max) {
  const double lat_norm = latency_max > 0.0 ? o.latency_cycles / latency_max : 0.0;
  return 0.5 * o.area + 0.5 * lat_norm;
}

namespace {

SearchResult finish(const std::string& algorithm, EvalContext& ctx) {
  SearchResult result;
  result.algorithm = algorithm;
  result.front = ctx.front();
  result.log = std::move(ctx.log());
  result.evaluations = ctx.evaluations();
  result.failures = ctx.failures();
  result.runtime_s = ctx.elapsed_s();
  return result;
}

struct Member {
  Configuration config;
  Objectives objectives;
};

}  // namespace

SearchResult nsga2_run(const DesignSpace& space, Evaluator& evaluator,
                       const BudgetSchedule& budget, std::uint64_t seed,
                       const SearchParams& params) {
  EvalContext ctx(space, evaluator, budget);
  Rng rng = make_rng(seed_for(seed, "nsga2"));
  const std::size_t k = space.knobs().size();
  const double mutation_rate =
      params.mutation_rate.value_or(1.0 / static_cast<double>(std::max<std::size_t>(1, k)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Member> population;
  while (population.size() < static_cast<std::size_t>(budget.n_pop) && !ctx.exhausted()) {
    const Configuration c = space.random_config(rng);
    if (const auto obj = ctx.evaluate(c)) population.push_back({c, *obj});
  }

  auto tournament = [&](const std::vector<int>& ranks, const std::vector<double>& crowd) {
    std::uniform_int_distribution<std::size_t> pick(0, population.size() - 1);
    const std::size_t a = pick(rng);
    const std::size_t b = pick(rng);
    if (ranks[a] != ranks[b]) return ranks[a] < ranks[b] ? a : b;
    return crowd[a] >= crowd[b] ? a : b;
  };

  // Iterations that only replay cached configurations make no budget
  // progress; a stall guard bounds the loop once proposals stop finding
  // anything new.
  int stalled = 0;
  while (!ctx.exhausted() && !population.empty() && stalled < kStallLimit) {
    ctx.next_iteration();
    const std::uint64_t evals_before = ctx.evaluations();
    std::vector<Objectives> objs;
    objs.reserve(population.size());
    for (const auto& m : population) objs.push_back(m.objectives);
    const auto ranks = non_dominated_ranks(objs);
    const auto crowd = crowding_distances(objs, ranks);

    std::vector<Member> merged = population;
    for (int i = 0; i < budget.n_pop && !ctx.exhausted(); ++i) {
      const auto& pa = population[tournament(ranks, crowd)].config;
      const auto& pb = population[tournament(ranks, crowd)].config;
      Configuration child;
      child.values.reserve(k);
      for (std::size_t g = 0; g < k; ++g) {
        const bool cross = unit(rng) < params.crossover_rate;
        child.values.push_back(cross ? (unit(rng) < 0.5 ? pa.values[g] : pb.values[g])
                                     : pa.values[g]);
      }
      for (std::size_t g = 0; g < k; ++g) {
        if (unit(rng) < mutation_rate) {
          std::uniform_int_distribution<int> pick(
              0, static_cast<int>(space.knobs()[g].domain.size()) - 1);
          child.values[g] = space.knobs()[g].domain[pick(rng)];
        }
      }
      if (const auto obj = ctx.evaluate(child)) merged.push_back({child, *obj});
    }

    std::vector<Objectives> merged_objs;
    merged_objs.reserve(merged.size());
    for (const auto& m : merged) merged_objs.push_back(m.objectives);
    const auto keep = rank_crowding_select(merged_objs, static_cast<std::size_t>(budget.n_pop));
    std::vector<Member> next;
    next.reserve(keep.size());
    for (std::size_t i : keep) next.push_back(merged[i]);
    population = std::move(next);
    stalled = ctx.evaluations() == evals_before ? stalled + 1 : 0;
  }
  return finish("nsga2", ctx);
}

SearchResult sa_run(const DesignSpace& space, Evaluator& evaluator, const BudgetSchedule& budget,
                    std::uint64_t seed, const SearchParams& params) {
  check(params.sa_t_init > params.sa_t_stop && params.sa_t_stop > 0.0,
        "sa: need t_init > t_stop > 0");
  check(params.sa_cooling > 0.0, "sa: cooling rate must be positive");
  EvalContext ctx(space, evaluator, budget);
  Rng rng = make_rng(seed_for(seed, "sa"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t k = space.knobs().size();

  struct Chain {
    Configuration config;
    Objectives objectives;
  };
  std::vector<Chain> chains;
  while (chains.size() < static_cast<std::size_t>(budget.n_pop) && !ctx.exhausted()) {
    const Configuration c = space.random_config(rng);
    if (const auto obj = ctx.evaluate(c)) chains.push_back({c, *obj});
  }

  double temperature = params.sa_t_init;
  int stalled = 0;
  while (temperature >= params.sa_t_stop && !ctx.exhausted() && !chains.empty() &&
         stalled < kStallLimit) {
    ctx.next_iteration();
    const std::uint64_t evals_before = ctx.evaluations();
    for (auto& chain : chains) {
      if (ctx.exhausted()) break;
      // One knob stepped to an adjacent domain value.
      std::uniform_int_distribution<std::size_t> pick_knob(0, k - 1);
      const std::size_t g = pick_knob(rng);
      const auto& domain = space.knobs()[g].domain;
      int idx = space.domain_index(g, chain.config.values[g]);
      int step = unit(rng) < 0.5 ? -1 : 1;
      if (idx + step < 0 || idx + step >= static_cast<int>(domain.size())) step = -step;
      if (idx + step < 0 || idx + step >= static_cast<int>(domain.size())) continue;
      Configuration neighbor = chain.config;
      neighbor.values[g] = domain[idx + step];

      const auto obj = ctx.evaluate(neighbor);
      if (!obj) continue;
      const double cost_new = scalar_cost(*obj, ctx.latency_max());
      const double cost_cur = scalar_cost(chain.objectives, ctx.latency_max());
      const double delta = cost_new - cost_cur;
      if (delta < 0.0 || unit(rng) < std::exp(-delta / temperature)) {
        chain.config = std::move(neighbor);
        chain.objectives = *obj;
      }
    }
    temperature /= 1.0 + params.sa_cooling;
    stalled = ctx.evaluations() == evals_before ? stalled + 1 : 0;
  }
  return finish("sa", ctx);
}

SearchResult aco_run(const DesignSpace& space, Evaluator& evaluator, const BudgetSchedule& budget,
                     std::uint64_t seed, const SearchParams& params) {
  check(params.aco_rho > 0.0 && params.aco_rho <= 1.0, "aco: rho must be in (0, 1]");
  EvalContext ctx(space, evaluator, budget);
  Rng rng = make_rng(seed_for(seed, "aco"));
  const std::size_t k = space.knobs().size();
  if (!params.aco_prior.empty())
    check(params.aco_prior.size() == k, "aco: prior shape must match the knobs");

  std::vector<std::vector<double>> pheromone(k);
  for (std::size_t g = 0; g < k; ++g)
    pheromone[g].assign(space.knobs()[g].domain.size(), 1.0);

  auto sample_config = [&] {
    Configuration c;
    c.values.reserve(k);
    for (std::size_t g = 0; g < k; ++g) {
      const auto& domain = space.knobs()[g].domain;
      std::vector<double> weights(domain.size());
      for (std::size_t i = 0; i < domain.size(); ++i) {
        const double heuristic =
            params.aco_prior.empty() ? 1.0 : std::pow(params.aco_prior[g][i], params.aco_beta);
        weights[i] = std::pow(pheromone[g][i], params.aco_alpha) * heuristic;
      }
      std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
      c.values.push_back(domain[pick(rng)]);
    }
    return c;
  };

  int stalled = 0;
  while (!ctx.exhausted() && stalled < kStallLimit) {
    ctx.next_iteration();
    const std::uint64_t evals_before = ctx.evaluations();
    std::vector<Member> colony;
    for (int ant = 0; ant < budget.n_pop && !ctx.exhausted(); ++ant) {
      const Configuration c = sample_config();
      if (const auto obj = ctx.evaluate(c)) colony.push_back({c, *obj});
    }
    stalled = ctx.evaluations() == evals_before ? stalled + 1 : 0;
    if (colony.empty()) continue;

    for (auto& row : pheromone)
      for (double& tau : row) tau *= params.aco_rho;

    // Elite deposits from the iteration's non-dominated set.
    std::vector<Objectives> objs;
    objs.reserve(colony.size());
    for (const auto& m : colony) objs.push_back(m.objectives);
    const auto ranks = non_dominated_ranks(objs);
    for (std::size_t i = 0; i < colony.size(); ++i) {
      if (ranks[i] != 0) continue;
      const double cost = scalar_cost(colony[i].objectives, ctx.latency_max());
      const double deposit = params.aco_q / std::max(cost, 1e-9);
      const auto idx = space.indices_of(colony[i].config);
      for (std::size_t g = 0; g < k; ++g) pheromone[g][idx[g]] += deposit;
    }
  }
  return finish("aco", ctx);
}

SearchResult exhaustive_run(const DesignSpace& space, Evaluator& evaluator, std::uint64_t cap) {
  BudgetSchedule budget;
  budget.n_se = space.size();
  budget.n_pop = 1;
  budget.wall_clock_cap_s = std::numeric_limits<double>::infinity();
  EvalContext ctx(space, evaluator, budget);
  for_each_configuration(space, [&](const Configuration& c) { ctx.evaluate(c); }, cap);
  return finish("exhaustive", ctx);
}

}  // namespace ecodse

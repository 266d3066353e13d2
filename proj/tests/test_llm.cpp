#include <doctest.h>

#include <atomic>
#include <cmath>
#include <set>
#include <thread>

#include <httplib.h>

#include "ecodse/errors.hpp"
#include "ecodse/llm_search.hpp"
#include "test_support.hpp"

using namespace ecodse;
using namespace ecodse::testing;

namespace {

DesignSpace pragma_space() {
  return DesignSpace({{"UNROLL", {KnobValue(1.0), KnobValue(2.0), KnobValue(4.0), KnobValue(8.0)}},
                      {"TILE", {KnobValue(2.0), KnobValue(4.0)}},
                      {"PART", {KnobValue(std::string("off")), KnobValue(std::string("cyclic"))}}});
}

std::string solutions_block(const std::vector<std::string>& lines) {
  std::string out = "Proposed configurations follow.\n```\n";
  for (const auto& l : lines) out += l + "\n";
  out += "```\n";
  return out;
}

}  // namespace

TEST_CASE("prompt declares knobs, domains, count, and grammar") {
  const DesignSpace space = pragma_space();
  const InContextPrompt prompt = build_prompt(space, {}, {}, PromptMode::Init, 5);
  const std::string text = prompt.render();
  CHECK(text.find("UNROLL") != std::string::npos);
  CHECK(text.find("TILE") != std::string::npos);
  CHECK(text.find("PART") != std::string::npos);
  CHECK(text.find("{1, 2, 4, 8}") != std::string::npos);
  CHECK(text.find("{off, cyclic}") != std::string::npos);
  CHECK(text.find("exactly 5 solutions") != std::string::npos);
  CHECK(text.find("```") != std::string::npos);
  CHECK(prompt.state_block.empty());  // init mode has no population yet
  CHECK_FALSE(prompt.solution_examples.empty());
}

TEST_CASE("neighbor and pheromone prompt modes") {
  const DesignSpace space = pragma_space();
  std::vector<Configuration> pop = {
      {{KnobValue(2.0), KnobValue(2.0), KnobValue(std::string("off"))}},
      {{KnobValue(4.0), KnobValue(4.0), KnobValue(std::string("cyclic"))}}};
  std::vector<double> fitness = {0.8, 0.3};

  SUBCASE("sa mode asks for nearby solutions and orders the state best-first") {
    const InContextPrompt p = build_prompt(space, pop, fitness, PromptMode::SaNeighbor, 4);
    CHECK(p.task_instruction.find("neighbor") != std::string::npos);
    const auto best = p.state_block.find("cost=0.3");
    const auto worse = p.state_block.find("cost=0.8");
    REQUIRE(best != std::string::npos);
    REQUIRE(worse != std::string::npos);
    CHECK(best < worse);
  }
  SUBCASE("aco mode embeds every pheromone value") {
    PheromoneMatrix m = PheromoneMatrix::init(space, 1.0);
    m.tau[0][2] = 3.25;
    PromptExtras extras;
    extras.pheromone = &m.tau;
    const InContextPrompt p =
        build_prompt(space, pop, fitness, PromptMode::AcoPheromone, 4, extras);
    CHECK(p.state_block.find("4=3.25") != std::string::npos);
    CHECK(p.state_block.find("off=1") != std::string::npos);
  }
}

TEST_CASE("parse_response validation, repair, and padding") {
  const DesignSpace space = pragma_space();
  Rng rng = make_rng(70);

  SUBCASE("clean reply comes back verbatim") {
    ParseDiagnostics diag;
    const auto configs = parse_response(solutions_block({"[1, 2, off]", "[8, 4, cyclic]"}), space,
                                        2, rng, &diag);
    REQUIRE(configs.size() == 2);
    CHECK(configs[0].key() == "1|2|off");
    CHECK(configs[1].key() == "8|4|cyclic");
    CHECK(diag.valid == 2);
    CHECK(diag.repaired == 0);
    CHECK(diag.dropped == 0);
    CHECK(diag.padded == 0);
  }
  SUBCASE("out-of-domain numerics snap to the nearest value") {
    ParseDiagnostics diag;
    const auto configs =
        parse_response(solutions_block({"[7, 2, off]"}), space, 1, rng, &diag);
    REQUIRE(configs.size() == 1);
    CHECK(configs[0].key() == "8|2|off");  // 7 is closer to 8 than to 4
    CHECK(diag.repaired == 1);
  }
  SUBCASE("ties snap to the smaller value") {
    ParseDiagnostics diag;
    const auto configs = parse_response(solutions_block({"[3, 3, off]"}), space, 1, rng, &diag);
    CHECK(configs[0].key() == "2|2|off");  // 3 is equidistant from 2 and 4
    CHECK(diag.repaired == 1);
  }
  SUBCASE("unfixable rows are dropped and shortfalls padded in-domain") {
    ParseDiagnostics diag;
    const auto configs = parse_response(
        solutions_block({"[1, 2, off]", "[1, 2, sideways]", "[1, 2]"}), space, 3, rng, &diag);
    REQUIRE(configs.size() == 3);
    CHECK(diag.valid == 1);
    CHECK(diag.dropped == 2);
    CHECK(diag.padded == 2);
    for (const auto& c : configs) CHECK(space.contains(c));
  }
  SUBCASE("prose-only reply raises") {
    CHECK_THROWS_AS(parse_response("I would rather discuss pragma philosophy.", space, 2, rng,
                                   nullptr),
                    ParseError);
  }
}

TEST_CASE("temperature controller decays on stagnation only") {
  TempController t(1.0, 0.2, 3);
  t.update(true);
  CHECK(t.t == 1.0);
  t.update(false);
  t.update(false);
  CHECK(t.t == 1.0);  // two stagnant iterations, below the threshold
  t.update(false);
  CHECK(t.t == doctest::Approx(0.8));  // exactly one decay after the third
  t.update(true);
  CHECK(t.t == doctest::Approx(0.8));  // improvement resets the counter
  CHECK(t.stagnation == 0);
  for (int i = 0; i < 20; ++i) t.update(false);
  CHECK(t.t >= 0.0);  // floor at zero
}

TEST_CASE("pheromone evaporation and deposit") {
  const DesignSpace space = pragma_space();
  PheromoneMatrix m = PheromoneMatrix::init(space, 1.0);

  SUBCASE("elite membership exactly offsets evaporation at the published rates") {
    Configuration elite{{KnobValue(1.0), KnobValue(2.0), KnobValue(std::string("off"))}};
    m.evaporate(0.9);
    m.deposit(space, {elite}, 0.1);
    CHECK(m.tau[0][0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.tau[1][0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.tau[2][0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.tau[0][1] == doctest::Approx(0.9));  // not in the elite
  }
  SUBCASE("absent values decay geometrically toward zero") {
    for (int i = 0; i < 200; ++i) m.evaporate(0.9);
    for (const auto& row : m.tau)
      for (double tau : row) {
        CHECK(tau >= 0.0);
        CHECK(tau < 1e-8);
      }
  }
  SUBCASE("duplicate elites deposit once per distinct value") {
    Configuration elite{{KnobValue(1.0), KnobValue(2.0), KnobValue(std::string("off"))}};
    m.deposit(space, {elite, elite, elite}, 0.1);
    CHECK(m.tau[0][0] == doctest::Approx(1.1));
  }
}

TEST_CASE("llmga finds a scripted optimum immediately") {
  const DesignSpace space = pragma_space();
  SyntheticEvaluator eval(20);
  // Locate the actual best-latency configuration via the exhaustive front.
  const SearchResult reference = exhaustive_run(space, eval);
  std::string best_line = "[";
  const Configuration best = reference.front.entries.back().config;
  for (std::size_t i = 0; i < best.values.size(); ++i) {
    if (i) best_line += ", ";
    best_line += knob_value_to_string(best.values[i]);
  }
  best_line += "]";

  MockClient client = MockClient::scripted(space, {solutions_block({best_line})});
  BudgetSchedule budget;
  budget.n_se = 8;
  budget.n_pop = 2;
  const SearchResult result = llmga_run(space, eval, budget, client, 1);
  bool found = false;
  for (const auto& e : result.front.entries)
    if (e.config.key() == best.key()) found = true;
  CHECK(found);
  CHECK(result.client_calls >= 1);
}

TEST_CASE("llmga temperature drops by exactly the decay step after stagnation") {
  const DesignSpace space = pragma_space();
  SyntheticEvaluator eval(21);
  // The same single configuration every time: the front never changes.
  MockClient client = MockClient::scripted(space, {solutions_block({"[1, 2, off]"})});
  BudgetSchedule budget;
  budget.n_pop = 2;
  budget.n_se = 2 * 4;  // init batch + exactly three main iterations
  LlmParams params;
  params.llm_t_init = 1.0;
  params.llm_decay = 0.2;
  params.stagnation_threshold = 3;
  const SearchResult result = llmga_run(space, eval, budget, client, 2, params);
  REQUIRE(!result.transcript.empty());
  CHECK(result.stats.at("llm_temperature") == doctest::Approx(1.0 - 0.2).epsilon(1e-12));
}

TEST_CASE("llm variants respect budgets and stay in-domain under adversarial replies") {
  const DesignSpace space = pragma_space();
  SyntheticEvaluator inner(22);
  const BudgetSchedule budget = budget_for(space.size());
  for (int alg = 0; alg < 3; ++alg) {
    std::uint64_t calls = 0;
    bool all_valid = true;
    ObservedEvaluator eval(inner, [&](const Configuration& c) {
      ++calls;
      all_valid = all_valid && space.contains(c);
    });
    MockClient client(space, 77, MockClient::Behavior::Adversarial);
    SearchResult result;
    if (alg == 0) result = llmga_run(space, eval, budget, client, 7);
    else if (alg == 1) result = llmsa_run(space, eval, budget, client, 7);
    else result = llmaco_run(space, eval, budget, client, 7);
    CAPTURE(result.algorithm);
    CHECK(calls <= budget.n_se);
    CHECK(result.evaluations == calls);
    CHECK(all_valid);
  }
}

TEST_CASE("llm variants with a uniform mock equal filtered random search") {
  const DesignSpace space = pragma_space();
  SyntheticEvaluator eval(23);
  const BudgetSchedule budget = budget_for(space.size());
  for (int alg = 0; alg < 3; ++alg) {
    MockClient client(space, 88, MockClient::Behavior::UniformRandom);
    SearchResult result;
    if (alg == 0) result = llmga_run(space, eval, budget, client, 3);
    else if (alg == 1) result = llmsa_run(space, eval, budget, client, 3);
    else result = llmaco_run(space, eval, budget, client, 3);

    std::vector<Objectives> evaluated;
    for (const auto& rec : result.log)
      if (!rec.failed) evaluated.push_back(rec.objectives);
    const auto expected = brute_force_front(evaluated);
    REQUIRE(result.front.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i)
      CHECK(result.front.entries[i].objectives.area == expected[i].area);

    // Client-call bound: one init batch plus one call per iteration.
    CHECK(result.client_calls <= budget.n_se / budget.n_pop + 1);
  }
}

TEST_CASE("llm runs are deterministic per seed") {
  const DesignSpace space = pragma_space();
  SyntheticEvaluator eval(24);
  BudgetSchedule budget;
  budget.n_se = 24;
  budget.n_pop = 4;
  for (int alg = 0; alg < 3; ++alg) {
    auto run = [&] {
      MockClient client(space, 5, MockClient::Behavior::UniformRandom);
      if (alg == 0) return llmga_run(space, eval, budget, client, 9);
      if (alg == 1) return llmsa_run(space, eval, budget, client, 9);
      return llmaco_run(space, eval, budget, client, 9);
    };
    const SearchResult a = run();
    const SearchResult b = run();
    REQUIRE(a.log.size() == b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i)
      CHECK(a.log[i].config.key() == b.log[i].config.key());
  }
}

TEST_CASE("llmsa cooling follows the published schedule") {
  const DesignSpace space = pragma_space();
  SyntheticEvaluator eval(25);
  BudgetSchedule budget;
  budget.n_se = 12;
  budget.n_pop = 4;
  LlmParams params;
  params.sa_t_init = 2.0;
  params.sa_cooling = 0.25;
  MockClient client(space, 6, MockClient::Behavior::UniformRandom);
  const SearchResult result = llmsa_run(space, eval, budget, client, 4, params);
  // init + k iterations; each iteration divides T by (1 + r).
  const auto k = static_cast<int>(result.client_calls) - 1;
  REQUIRE(k >= 1);
  double expect = params.sa_t_init;
  for (int i = 0; i < k; ++i) expect /= 1.0 + params.sa_cooling;
  CHECK(result.stats.at("sa_final_temperature") == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("http chat client speaks the completion wire format") {
  const DesignSpace space = pragma_space();
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    CHECK(req.get_header_value("Authorization") == "Bearer sekrit");
    CHECK(req.body.find("\"model\"") != std::string::npos);
    CHECK(req.body.find("\"temperature\"") != std::string::npos);
    res.set_content(
        R"({"choices":[{"message":{"role":"assistant","content":"```\n[1, 2, off]\n```"}}]})",
        "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread worker([&] { server.listen_after_bind(); });
  while (!server.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(1));

  setenv("ECODSE_TEST_TOKEN", "sekrit", 1);
  HttpClientConfig config;
  config.endpoint_url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  config.model = "test-model";
  config.token_env = "ECODSE_TEST_TOKEN";
  HttpChatClient client(config);
  const std::string reply = client.complete("Return exactly 1 solutions", 0.7);
  CHECK(reply.find("[1, 2, off]") != std::string::npos);
  CHECK(hits == 1);

  SUBCASE("missing token fails before any request") {
    unsetenv("ECODSE_NO_SUCH_TOKEN");
    HttpClientConfig bad = config;
    bad.token_env = "ECODSE_NO_SUCH_TOKEN";
    CHECK_THROWS_AS(HttpChatClient{bad}, ExternalServiceError);
  }

  server.stop();
  worker.join();
}

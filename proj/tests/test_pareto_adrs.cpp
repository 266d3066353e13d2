#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "ecodse/budget.hpp"
#include "ecodse/errors.hpp"
#include "ecodse/front_io.hpp"
#include "ecodse/pareto.hpp"
#include "test_support.hpp"

using namespace ecodse;
using namespace ecodse::testing;

namespace {

Objectives obj(double area, double latency) { return Objectives{area, latency}; }

std::vector<Objectives> random_points(Rng& rng, int n) {
  std::uniform_real_distribution<double> area(0.05, 1.0);
  std::uniform_real_distribution<double> lat(10.0, 1000.0);
  std::vector<Objectives> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) pts.push_back(obj(area(rng), lat(rng)));
  return pts;
}

ParetoFront front_of(const std::vector<Objectives>& points) {
  ParetoFront f;
  for (const auto& p : points) f.entries.push_back({Configuration{}, p, QorVector{}});
  return f;
}

}  // namespace

TEST_CASE("dominance relation") {
  CHECK(dominates(obj(0.2, 100), obj(0.3, 200)));
  CHECK_FALSE(dominates(obj(0.2, 100), obj(0.2, 100)));
  CHECK_FALSE(dominates(obj(0.2, 300), obj(0.3, 200)));
  CHECK_FALSE(dominates(obj(0.3, 200), obj(0.2, 300)));
  CHECK(dominates(obj(0.2, 200), obj(0.2, 300)));  // tie on one axis, strict on the other
}

TEST_CASE("pareto_filter hand cases") {
  const std::vector<Objectives> pts = {obj(0.2, 100), obj(0.3, 200), obj(0.25, 150)};
  const auto front = pareto_filter_points(pts);
  REQUIRE(front.size() == 1);
  CHECK(front[0].area == 0.2);

  const std::vector<Objectives> dup = {obj(0.4, 50), obj(0.4, 50), obj(0.4, 50)};
  CHECK(pareto_filter_points(dup).size() == 1);
}

TEST_CASE("pareto_filter matches the brute-force oracle") {
  Rng rng = make_rng(60);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 20 + static_cast<int>(rng() % 481);  // up to 500 points
    auto pts = random_points(rng, n);
    // Inject duplicates and dominated copies.
    for (int d = 0; d < n / 10; ++d) pts.push_back(pts[rng() % pts.size()]);
    const auto fast = pareto_filter_points(pts);
    const auto slow = brute_force_front(pts);
    REQUIRE(fast.size() == slow.size());
    for (std::size_t i = 0; i < fast.size(); ++i) {
      CHECK(fast[i].area == slow[i].area);
      CHECK(fast[i].latency_cycles == slow[i].latency_cycles);
    }
    // Stable order by (area, latency).
    for (std::size_t i = 1; i < fast.size(); ++i) {
      CHECK(fast[i - 1].area <= fast[i].area);
      CHECK(fast[i - 1].latency_cycles > fast[i].latency_cycles);
    }
  }
}

TEST_CASE("adrs identities and hand values") {
  const std::vector<Objectives> f = {obj(0.3, 120), obj(0.5, 80), obj(0.8, 40)};
  CHECK(adrs_points(f, f) == doctest::Approx(0.0));

  // Singleton case: reference (A=1, L=1), approx (A=2, L=1).
  const std::vector<Objectives> ref = {obj(1.0, 1.0)};
  const std::vector<Objectives> ap = {obj(2.0, 1.0)};
  CHECK(adrs_points(ref, ap) == doctest::Approx(0.5).epsilon(1e-12));

  SUBCASE("degenerate approximate point is an error") {
    const std::vector<Objectives> zero_area = {obj(0.0, 1.0)};
    CHECK_THROWS_AS(adrs_points(ref, zero_area), Error);
    CHECK_THROWS_AS(adrs_points(ref, {}), Error);
  }
  SUBCASE("non-negative on random fronts") {
    Rng rng = make_rng(61);
    for (int rep = 0; rep < 20; ++rep) {
      const auto a = pareto_filter_points(random_points(rng, 40));
      const auto b = pareto_filter_points(random_points(rng, 40));
      CHECK(adrs_points(a, b) >= 0.0);
    }
  }
}

TEST_CASE("adding a dominated point to the approximation never raises adrs") {
  Rng rng = make_rng(62);
  for (int rep = 0; rep < 25; ++rep) {
    const auto ref = pareto_filter_points(random_points(rng, 30));
    auto ap = pareto_filter_points(random_points(rng, 30));
    const double before = adrs_points(ref, ap);
    Objectives dominated = ap[rng() % ap.size()];
    dominated.area *= 1.3;
    dominated.latency_cycles *= 1.2;
    ap.push_back(dominated);
    const double after = adrs_points(ref, ap);
    CHECK(after <= before + 1e-15);
  }
}

TEST_CASE("archived run fixture reproduces the published SA/mvt score") {
  const ParetoFront reference =
      read_front_csv(std::string(ECODSE_FIXTURE_DIR) + "/sa_mvt_reference.csv");
  const ParetoFront approx = read_front_csv(std::string(ECODSE_FIXTURE_DIR) + "/sa_mvt_approx.csv");
  REQUIRE(reference.size() == 2);
  REQUIRE(approx.size() == 1);
  CHECK(adrs(reference, approx) == doctest::Approx(0.5620).epsilon(1e-4));
}

TEST_CASE("front csv round trip preserves scores") {
  Rng rng = make_rng(63);
  const auto pts = pareto_filter_points(random_points(rng, 25));
  ParetoFront front;
  DesignSpace space({{"U", {KnobValue(1.0), KnobValue(2.0)}}});
  for (std::size_t i = 0; i < pts.size(); ++i) {
    QorVector q;
    q.latency = pts[i].latency_cycles;
    q.lut = q.ff = q.dsp = q.bram = pts[i].area;
    front.entries.push_back({Configuration{{KnobValue(i % 2 == 0 ? 1.0 : 2.0)}}, pts[i], q});
  }
  const std::string path =
      (std::filesystem::temp_directory_path() / "ecodse_front.csv").string();
  write_front_csv(path, space, front, R"({"algorithm":"test"})");
  const ParetoFront loaded = read_front_csv(path);
  REQUIRE(loaded.size() == front.size());
  CHECK(adrs(front, loaded) == doctest::Approx(0.0));
  std::remove(path.c_str());
}

TEST_CASE("budget schedule branches") {
  auto expect = [](std::uint64_t s, std::uint64_t n_se, int n_pop) {
    const BudgetSchedule b = budget_for(s);
    CHECK(b.n_se == n_se);
    CHECK(b.n_pop == n_pop);
    b.validate();
  };
  expect(179, 89, 10);        // 0.5 * 179 floored, small-space population
  expect(3354, 1006, 30);     // 0.3 * 3354 floored
  expect(10000000, 500, 30);  // 0.00005 * 1e7
  expect(500, 250, 10);
  expect(501, 150, 30);
  expect(100000, 5000, 30);
  expect(100001, 500, 30);
  expect(1000000, 5000, 30);
  expect(3059001, 1529, 30);  // bridged gap between 1e6 and 1e7
  expect(1, 1, 1);            // floors clamp to at least one exploration

  SUBCASE("n_se at least 1 and n_pop never exceeds it") {
    Rng rng = make_rng(64);
    for (int rep = 0; rep < 200; ++rep) {
      const std::uint64_t s = 1 + rng() % 20000000ULL;
      const BudgetSchedule b = budget_for(s);
      CHECK(b.n_se >= 1);
      CHECK(static_cast<std::uint64_t>(b.n_pop) <= b.n_se);
    }
  }
}

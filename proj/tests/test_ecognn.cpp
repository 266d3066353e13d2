#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ecodse/errors.hpp"
#include "ecodse/train.hpp"
#include "test_support.hpp"

using namespace ecodse;
using namespace ecodse::testing;

namespace {

EcognnConfig small_config(LayerKind env = LayerKind::SumGnn, LayerKind act = LayerKind::MeanGnn) {
  EcognnConfig cfg;
  cfg.env_layers = 2;
  cfg.action_layers = 1;
  cfg.hidden_dim = 10;
  cfg.temp_hidden_dim = 6;
  cfg.env_kind = env;
  cfg.action_kind = act;
  cfg.targets = {"latency", "lut"};
  cfg.seed = 21;
  return cfg;
}

EcognnModel small_model(const DatasetManifest& m,
                        LayerKind env = LayerKind::SumGnn,
                        LayerKind act = LayerKind::MeanGnn) {
  return EcognnModel(small_config(env, act), m.feature_dim, m.edge_feature_dim);
}

Matrix random_hidden(Rng& rng, int n, int h) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Matrix m(n, h);
  for (double& v : m.flat()) v = dist(rng);
  return m;
}

}  // namespace

TEST_CASE("action probabilities are row distributions") {
  const DatasetManifest m = toy_manifest();
  Rng rng = make_rng(31);
  const CdfgGraph graph = random_graph(rng, 9, m);
  const EcognnModel model = small_model(m);
  const GraphTensors g = GraphTensors::from_graph(graph);
  const Matrix h = random_hidden(rng, g.num_nodes(), model.config().hidden_dim);
  const Matrix p = model.action_probabilities(g, h);
  REQUIRE(p.rows() == g.num_nodes());
  REQUIRE(p.cols() == kNumActionStates);
  for (int r = 0; r < p.rows(); ++r) {
    double sum = 0.0;
    for (int c = 0; c < p.cols(); ++c) {
      CHECK(p.at(r, c) >= 0.0);
      sum += p.at(r, c);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("isolated node's action depends only on its own features") {
  const DatasetManifest m = toy_manifest();
  const EcognnModel model = small_model(m);
  Rng rng = make_rng(32);
  const Matrix h = random_hidden(rng, 3, model.config().hidden_dim);

  // Same three nodes, once with no edges, once with an edge between the others.
  GraphTensors isolated;
  isolated.node_features = Matrix(3, m.feature_dim);
  isolated.edge_features = Matrix(0, m.edge_feature_dim);
  GraphTensors with_edge = isolated;
  with_edge.edge_src = {1};
  with_edge.edge_dst = {2};
  with_edge.edge_features = Matrix(1, m.edge_feature_dim, 0.3);

  const Matrix p0 = model.action_probabilities(isolated, h);
  const Matrix p1 = model.action_probabilities(with_edge, h);
  for (int c = 0; c < kNumActionStates; ++c)
    CHECK(p0.at(0, c) == doctest::Approx(p1.at(0, c)).epsilon(1e-12));
}

TEST_CASE("isomorphic nodes get identical action distributions") {
  const DatasetManifest m = toy_manifest();
  const EcognnModel model = small_model(m);
  // Two nodes with identical features and mirrored edges between them.
  GraphTensors g;
  g.node_features = Matrix(2, m.feature_dim, 0.4);
  g.edge_src = {0, 1};
  g.edge_dst = {1, 0};
  g.edge_features = Matrix(2, m.edge_feature_dim, 0.2);
  Matrix h(2, model.config().hidden_dim, 0.7);
  const Matrix p = model.action_probabilities(g, h);
  for (int c = 0; c < kNumActionStates; ++c)
    CHECK(p.at(0, c) == doctest::Approx(p.at(1, c)).epsilon(1e-12));
}

TEST_CASE("edge gates follow the broadcast-listen product rule") {
  const int S = static_cast<int>(ActionState::Standard);
  const int LI = static_cast<int>(ActionState::ListenIn);
  const int LO = static_cast<int>(ActionState::ListenOut);
  const int B = static_cast<int>(ActionState::Broadcast);
  const int I = static_cast<int>(ActionState::Isolate);
  const std::vector<int> src = {0};
  const std::vector<int> dst = {1};
  std::vector<double> w_in, w_out;

  auto hard = [&](int a0, int a1) {
    Matrix s(2, kNumActionStates);
    s.at(0, a0) = 1.0;
    s.at(1, a1) = 1.0;
    return s;
  };

  SUBCASE("all standard: every gate open") {
    EcognnModel::edge_weights_from_samples(hard(S, S), src, dst, w_in, w_out);
    CHECK(w_in[0] == 1.0);
    CHECK(w_out[0] == 1.0);
  }
  SUBCASE("isolated receiver closes both directions") {
    EcognnModel::edge_weights_from_samples(hard(I, I), src, dst, w_in, w_out);
    CHECK(w_in[0] == 0.0);
    CHECK(w_out[0] == 0.0);
  }
  SUBCASE("listen-in sender neither broadcasts nor hears its out-neighbor") {
    EcognnModel::edge_weights_from_samples(hard(LI, S), src, dst, w_in, w_out);
    CHECK(w_in[0] == 0.0);   // src does not broadcast
    CHECK(w_out[0] == 0.0);  // src does not listen along outgoing edges
  }
  SUBCASE("broadcast-only node never receives") {
    // dst broadcasts to src (out direction) but src=B must not hear it.
    EcognnModel::edge_weights_from_samples(hard(B, S), src, dst, w_in, w_out);
    CHECK(w_in[0] == 1.0);   // B broadcasts, S listens in
    CHECK(w_out[0] == 0.0);  // B refuses the reverse message
  }
  SUBCASE("soft samples multiply group probabilities") {
    Matrix s(2, kNumActionStates);
    s.at(0, S) = 0.6;
    s.at(0, B) = 0.1;
    s.at(0, LO) = 0.3;
    s.at(1, S) = 0.2;
    s.at(1, LI) = 0.5;
    s.at(1, B) = 0.3;
    EcognnModel::edge_weights_from_samples(s, src, dst, w_in, w_out);
    CHECK(w_in[0] == doctest::Approx((0.6 + 0.1) * (0.2 + 0.5)));
    CHECK(w_out[0] == doctest::Approx((0.2 + 0.3) * (0.6 + 0.3)));
  }
}

TEST_CASE("environment layer honors edge weights") {
  const DatasetManifest m = toy_manifest();
  Rng rng = make_rng(33);
  const CdfgGraph graph = random_graph(rng, 7, m);
  const GraphTensors g = GraphTensors::from_graph(graph);
  const EcognnModel model = small_model(m);
  const int H = model.config().hidden_dim;
  const Matrix h = random_hidden(rng, g.num_nodes(), H);
  const std::vector<double> zeros(g.edge_src.size(), 0.0);
  const std::vector<double> ones(g.edge_src.size(), 1.0);

  SUBCASE("all-zero weights reduce to the self transform") {
    const Matrix out = model.env_layer_values(0, g, h, zeros, zeros);
    Matrix self_term = matmul(h, model.param("env.0.self_w"));
    for (int r = 0; r < out.rows(); ++r)
      for (int c = 0; c < H; ++c) {
        const double expect = std::tanh(self_term.at(r, c) + model.param("env.0.b").at(0, c));
        CHECK(out.at(r, c) == doctest::Approx(expect).epsilon(1e-9));
      }
  }
  SUBCASE("halving one edge weight halves its message term") {
    GraphTensors single;
    single.node_features = Matrix(2, m.feature_dim);
    single.edge_src = {0};
    single.edge_dst = {1};
    single.edge_features = Matrix(1, m.edge_feature_dim, 0.25);
    const Matrix h2 = random_hidden(rng, 2, H);
    const Matrix base = model.env_layer_values(0, single, h2, {0.0}, {0.0});
    const Matrix half = model.env_layer_values(0, single, h2, {0.5}, {0.0});
    const Matrix full = model.env_layer_values(0, single, h2, {1.0}, {0.0});
    // atanh recovers the pre-activation, which is linear in the sum weight.
    for (int c = 0; c < H; ++c) {
      const double d_half = std::atanh(half.at(1, c)) - std::atanh(base.at(1, c));
      const double d_full = std::atanh(full.at(1, c)) - std::atanh(base.at(1, c));
      CHECK(d_full == doctest::Approx(2.0 * d_half).epsilon(1e-6));
    }
  }
  SUBCASE("all-ones weights equal the plain MPNN layer") {
    const Matrix out = model.env_layer_values(0, g, h, ones, ones);
    // Plain sum aggregation over the undirected neighborhood, by hand.
    const int n = g.num_nodes();
    Matrix eproj = matmul(g.edge_features, model.param("edge.env.w"));
    Matrix agg(n, H);
    for (std::size_t e = 0; e < g.edge_src.size(); ++e)
      for (int c = 0; c < H; ++c) {
        agg.at(g.edge_dst[e], c) += h.at(g.edge_src[e], c) + eproj.at(static_cast<int>(e), c);
        agg.at(g.edge_src[e], c) += h.at(g.edge_dst[e], c) + eproj.at(static_cast<int>(e), c);
      }
    Matrix self_term = matmul(h, model.param("env.0.self_w"));
    Matrix nbr_term = matmul(agg, model.param("env.0.nbr_w"));
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < H; ++c) {
        const double expect = std::tanh(self_term.at(r, c) + nbr_term.at(r, c) +
                                        model.param("env.0.b").at(0, c));
        CHECK(out.at(r, c) == doctest::Approx(expect).epsilon(1e-9));
      }
  }
}

TEST_CASE("learnable temperature map") {
  const DatasetManifest m = toy_manifest();
  EcognnModel model = small_model(m);
  const auto& cfg = model.config();

  SUBCASE("zero parameters and zero input give tau_min + softplus(0)") {
    for (const auto& name : {"temp.w1", "temp.b1", "temp.w2", "temp.b2"})
      model.param(name).fill(0.0);
    const Matrix h(4, cfg.hidden_dim);
    CHECK(model.temperature_of(h) ==
          doctest::Approx(cfg.tau_min + std::log(2.0)).epsilon(1e-12));
  }
  SUBCASE("always inside the clamp interval") {
    Rng rng = make_rng(34);
    for (int rep = 0; rep < 20; ++rep) {
      std::uniform_real_distribution<double> big(-40.0, 40.0);
      for (double& v : model.param("temp.b2").flat()) v = big(rng);
      const Matrix h = random_hidden(rng, 5, cfg.hidden_dim);
      const double tau = model.temperature_of(h);
      CHECK(tau >= cfg.tau_min);
      CHECK(tau <= cfg.tau_max);
    }
  }
  SUBCASE("loss gradient reaches the temperature parameters") {
    Rng rng = make_rng(35);
    const CdfgGraph graph = random_graph(rng, 8, m);
    Tape tape;
    auto pn = model.register_params(tape);
    ForwardOptions opts;
    opts.noise_seed = 4242;
    auto pred = model.forward_on_tape(tape, pn, GraphTensors::from_graph(graph), opts);
    auto loss = tape.sum_all(tape.mul(pred, pred));
    tape.backward(loss);
    double magnitude = 0.0;
    for (const auto& name : {"temp.w1", "temp.b1", "temp.w2", "temp.b2"})
      magnitude += tape.grad(pn.at(name)).max_abs();
    CHECK(magnitude > 0.0);
  }
}

TEST_CASE("attention pooling") {
  const DatasetManifest m = toy_manifest();
  const EcognnModel model = small_model(m);
  const int H = model.config().hidden_dim;
  Rng rng = make_rng(36);

  SUBCASE("single node returns its value projection") {
    const Matrix h = random_hidden(rng, 1, H);
    const Matrix pooled = model.attention_pool_values(h);
    Matrix value = matmul(h, model.param("attn.value_w"));
    for (int c = 0; c < H; ++c)
      CHECK(pooled.at(0, c) ==
            doctest::Approx(value.at(0, c) + model.param("attn.value_b").at(0, c)).epsilon(1e-9));
  }
  SUBCASE("identical nodes pool to the shared value with uniform weights") {
    Matrix h(6, H, 0.3);
    Matrix weights;
    const Matrix pooled = model.attention_pool_values(h, &weights);
    for (int z = 0; z < 6; ++z) CHECK(weights.at(0, z) == doctest::Approx(1.0 / 6).epsilon(1e-9));
    Matrix one = random_hidden(rng, 1, H);
    for (int c = 0; c < H; ++c) one.at(0, c) = 0.3;
    Matrix value = matmul(one, model.param("attn.value_w"));
    for (int c = 0; c < H; ++c)
      CHECK(pooled.at(0, c) ==
            doctest::Approx(value.at(0, c) + model.param("attn.value_b").at(0, c)).epsilon(1e-9));
  }
  SUBCASE("weights always normalize") {
    const Matrix h = random_hidden(rng, 9, H);
    Matrix weights;
    model.attention_pool_values(h, &weights);
    double sum = 0.0;
    for (int z = 0; z < 9; ++z) sum += weights.at(0, z);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("empty graph is an error") {
    CHECK_THROWS_AS(model.attention_pool_values(Matrix(0, H)), Error);
  }
}

TEST_CASE("model forward determinism and stochasticity") {
  const DatasetManifest m = toy_manifest();
  Rng rng = make_rng(37);
  const CdfgGraph graph = random_graph(rng, 12, m);
  const EcognnModel model = small_model(m);
  ForwardOptions opts;
  opts.noise_seed = 99;
  const QorVector a = model.predict(graph, opts);
  const QorVector b = model.predict(graph, opts);
  CHECK(a.latency == b.latency);
  CHECK(a.lut == b.lut);
  ForwardOptions other;
  other.noise_seed = 100;
  const QorVector c = model.predict(graph, other);
  CHECK(a.latency != c.latency);  // sampling noise matters

  ForwardOptions hard = opts;
  hard.hard_sampling = true;
  const QorVector d = model.predict(graph, hard);
  const QorVector e = model.predict(graph, hard);
  CHECK(d.latency == e.latency);
}

TEST_CASE("prediction is invariant to node and edge list order") {
  const DatasetManifest m = toy_manifest();
  Rng rng = make_rng(38);
  const CdfgGraph graph = random_graph(rng, 14, m);
  const EcognnModel model = small_model(m);
  ForwardOptions opts;
  opts.noise_seed = 5;
  const QorVector base = model.predict(graph, opts);
  for (int rep = 0; rep < 5; ++rep) {
    CdfgGraph shuffled = graph;
    std::shuffle(shuffled.nodes.begin(), shuffled.nodes.end(), rng);
    std::shuffle(shuffled.edges.begin(), shuffled.edges.end(), rng);
    shuffled.canonicalize();
    const QorVector out = model.predict(shuffled, opts);
    CHECK(std::abs(out.latency - base.latency) < 1e-6);
    CHECK(std::abs(out.lut - base.lut) < 1e-6);
  }
}

TEST_CASE("pinning actions to standard reduces to the plain MPNN oracle") {
  const DatasetManifest m = toy_manifest();
  Rng rng = make_rng(39);
  for (LayerKind kind : {LayerKind::SumGnn, LayerKind::MeanGnn, LayerKind::Gcn}) {
    const EcognnModel model = small_model(m, kind);
    for (int rep = 0; rep < 10; ++rep) {
      const CdfgGraph graph = random_graph(rng, 6 + static_cast<int>(rng() % 10), m);
      ForwardOptions opts;
      opts.force_standard_action = true;
      ForwardTrace trace;
      const Matrix pred = model.predict_vector(GraphTensors::from_graph(graph), opts, &trace);
      const OracleResult oracle = plain_mpnn_oracle(model, graph);
      REQUIRE(trace.layer_outputs.size() == oracle.layer_outputs.size());
      for (std::size_t l = 0; l < oracle.layer_outputs.size(); ++l)
        CHECK(max_abs_diff(trace.layer_outputs[l], oracle.layer_outputs[l]) < 1e-6);
      CHECK(max_abs_diff(pred, oracle.prediction) < 1e-6);
    }
  }
}

TEST_CASE("gradient check") {
  const DatasetManifest m = toy_manifest();
  Rng rng = make_rng(40);
  const CdfgGraph graph = random_graph(rng, 12, m);

  SUBCASE("full model against finite differences") {
    const EcognnModel model = small_model(m);
    CHECK(grad_check(model, graph, 1e-4) < 1e-3);
  }
  SUBCASE("gcn variant differentiates through the degree normalization") {
    const EcognnModel model = small_model(m, LayerKind::Gcn, LayerKind::Gcn);
    CHECK(grad_check(model, graph, 1e-4) < 1e-3);
  }
  SUBCASE("head block alone is nearly exact") {
    const EcognnModel model = small_model(m);
    CHECK(grad_check(model, graph, 1e-5, {"head.w2", "head.b2"}) < 1e-8);
  }
}

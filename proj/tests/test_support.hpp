#pragma once

#include <cmath>
#include <vector>

#include "ecodse/dataset.hpp"
#include "ecodse/ecognn.hpp"
#include "ecodse/evaluator.hpp"
#include "ecodse/matrix.hpp"
#include "ecodse/objectives.hpp"
#include "ecodse/rng.hpp"

namespace ecodse::testing {

// Toy schema: one 4-wide one-hot block, then numeric pragma/latency/lut/dsp/ff.
inline DatasetManifest toy_manifest(std::uint64_t split_seed = 7) {
  DatasetManifest m;
  m.blocks = {{"node_type", 4}};
  m.numeric_fields = {"pragma", "latency", "lut", "dsp", "ff"};
  m.feature_dim = 9;
  m.edge_feature_dim = 3;
  m.slot_field = "pragma";
  m.normalization["latency"] = {1.0, 0.0};
  m.split_seed = split_seed;
  return m;
}

inline CdfgGraph random_graph(Rng& rng, int n_nodes, const DatasetManifest& manifest,
                              bool with_label = true) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  CdfgGraph g;
  g.benchmark_id = "toy-" + std::to_string(rng() % 100000);
  const int block = manifest.blocks.empty() ? 0 : manifest.blocks.front().size;
  for (int i = 0; i < n_nodes; ++i) {
    CdfgNode node;
    node.id = i;
    node.feature.assign(manifest.feature_dim, 0.0);
    if (block > 0) node.feature[rng() % block] = 1.0;
    for (int c = block; c < manifest.feature_dim; ++c) node.feature[c] = unit(rng);
    node.is_pragma_node = false;
    g.nodes.push_back(std::move(node));
  }
  // Sparse random digraph, no self loops.
  for (int u = 0; u < n_nodes; ++u) {
    const int fan = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < fan; ++k) {
      int v = static_cast<int>(rng() % n_nodes);
      if (v == u) v = (v + 1) % n_nodes;
      if (v == u) continue;
      CdfgEdge e;
      e.src = u;
      e.dst = v;
      e.feature.assign(manifest.edge_feature_dim, 0.0);
      for (int c = 0; c < manifest.edge_feature_dim; ++c) e.feature[c] = unit(rng);
      g.edges.push_back(std::move(e));
    }
  }
  if (with_label) {
    QorVector q;
    q.latency = 0.1 + 1.9 * unit(rng);
    q.lut = unit(rng);
    q.ff = unit(rng);
    q.dsp = unit(rng);
    q.bram = unit(rng);
    g.label = q;
  }
  g.canonicalize(manifest.self_loops);
  return g;
}

inline Dataset toy_dataset(int n_graphs, std::uint64_t seed, int nodes_lo = 8, int nodes_hi = 16) {
  Dataset ds;
  ds.manifest = toy_manifest(seed);
  Rng rng = make_rng(seed_for(seed, "toy-dataset"));
  for (int i = 0; i < n_graphs; ++i) {
    const int n = nodes_lo + static_cast<int>(rng() % (nodes_hi - nodes_lo + 1));
    CdfgGraph g = random_graph(rng, n, ds.manifest);
    g.benchmark_id = "toy-" + std::to_string(i);
    ds.graphs.push_back(std::move(g));
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Independent plain-MPNN reference: the same pipeline with every node in the
// standard state, written as direct loops with no tape involvement.
// ---------------------------------------------------------------------------

inline Matrix oracle_layer_norm(const Matrix& x, const Matrix& gamma, const Matrix& beta) {
  Matrix out(x.rows(), x.cols());
  for (int r = 0; r < x.rows(); ++r) {
    double mean = 0.0;
    for (int c = 0; c < x.cols(); ++c) mean += x.at(r, c);
    mean /= x.cols();
    double var = 0.0;
    for (int c = 0; c < x.cols(); ++c) {
      const double d = x.at(r, c) - mean;
      var += d * d;
    }
    var /= x.cols();
    const double inv = 1.0 / std::sqrt(var + 1e-5);
    for (int c = 0; c < x.cols(); ++c)
      out.at(r, c) = (x.at(r, c) - mean) * inv * gamma.at(0, c) + beta.at(0, c);
  }
  return out;
}

struct OracleResult {
  std::vector<Matrix> layer_outputs;
  Matrix prediction;
};

inline OracleResult plain_mpnn_oracle(const EcognnModel& model, const CdfgGraph& graph) {
  const auto& cfg = model.config();
  const GraphTensors g = GraphTensors::from_graph(graph);
  const int n = g.num_nodes();
  const int e = g.num_edges();
  const int H = cfg.hidden_dim;

  Matrix x = g.node_features;
  for (int r = 0; r < x.rows(); ++r)
    for (int c = 0; c < x.cols(); ++c)
      x.at(r, c) = (x.at(r, c) - model.feature_offset()[c]) / model.feature_scale()[c];

  Matrix h = matmul(x, model.param("input.w"));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < H; ++c) h.at(r, c) += model.param("input.b").at(0, c);
  h = oracle_layer_norm(h, model.param("norm_in.gamma"), model.param("norm_in.beta"));

  Matrix eproj(e, H);
  if (model.edge_feature_dim() > 0 && e > 0)
    eproj = matmul(g.edge_features, model.param("edge.env.w"));

  OracleResult result;
  for (int layer = 0; layer < cfg.env_layers; ++layer) {
    Matrix agg(n, H);
    std::vector<double> degree(n, 0.0);
    for (int i = 0; i < e; ++i) {
      degree[g.edge_dst[i]] += 1.0;
      degree[g.edge_src[i]] += 1.0;
    }
    for (int i = 0; i < e; ++i) {
      const int u = g.edge_src[i];
      const int v = g.edge_dst[i];
      double scale_uv = 1.0, scale_vu = 1.0;
      if (cfg.env_kind == LayerKind::Gcn) {
        const double du = 1.0 + degree[u];
        const double dv = 1.0 + degree[v];
        scale_uv = scale_vu = 1.0 / std::sqrt(du * dv);
      }
      for (int c = 0; c < H; ++c) {
        const double msg_uv = h.at(u, c) + eproj.at(i, c);
        const double msg_vu = h.at(v, c) + eproj.at(i, c);
        agg.at(v, c) += scale_uv * msg_uv;
        agg.at(u, c) += scale_vu * msg_vu;
      }
    }
    if (cfg.env_kind == LayerKind::MeanGnn)
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < H; ++c) agg.at(r, c) /= degree[r] + 1e-12;

    const std::string p = "env." + std::to_string(layer);
    Matrix self_term = matmul(h, model.param(p + ".self_w"));
    Matrix nbr_term = matmul(agg, model.param(p + ".nbr_w"));
    Matrix next(n, H);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < H; ++c)
        next.at(r, c) = std::tanh(self_term.at(r, c) + nbr_term.at(r, c) +
                                  model.param(p + ".b").at(0, c));
    h = next;
    result.layer_outputs.push_back(h);
  }

  h = oracle_layer_norm(h, model.param("norm_out.gamma"), model.param("norm_out.beta"));

  std::vector<double> scores(n);
  double score_max = -1e300;
  for (int r = 0; r < n; ++r) {
    double s = model.param("attn.score_b").at(0, 0);
    for (int c = 0; c < H; ++c) s += h.at(r, c) * model.param("attn.score_w").at(c, 0);
    scores[r] = s;
    score_max = std::max(score_max, s);
  }
  double denom = 0.0;
  for (double& s : scores) {
    s = std::exp(s - score_max);
    denom += s;
  }
  Matrix values = matmul(h, model.param("attn.value_w"));
  Matrix pooled(1, H);
  for (int r = 0; r < n; ++r) {
    const double alpha = scores[r] / denom;
    for (int c = 0; c < H; ++c)
      pooled.at(0, c) += alpha * (values.at(r, c) + model.param("attn.value_b").at(0, c));
  }

  Matrix z = matmul(pooled, model.param("head.w1"));
  for (int c = 0; c < H; ++c)
    z.at(0, c) = std::tanh(z.at(0, c) + model.param("head.b1").at(0, c));
  Matrix pred = matmul(z, model.param("head.w2"));
  for (int c = 0; c < pred.cols(); ++c) pred.at(0, c) += model.param("head.b2").at(0, c);
  result.prediction = pred;
  return result;
}

// O(n^2) dominance filter used as the oracle for pareto_filter. Duplicate
// (area, latency) pairs keep the first occurrence, matching the tie rule.
inline std::vector<Objectives> brute_force_front(const std::vector<Objectives>& points) {
  std::vector<Objectives> unique;
  for (const auto& p : points) {
    bool dup = false;
    for (const auto& q : unique)
      if (q.area == p.area && q.latency_cycles == p.latency_cycles) dup = true;
    if (!dup) unique.push_back(p);
  }
  std::vector<Objectives> front;
  for (const auto& p : unique) {
    bool dominated = false;
    for (const auto& q : unique)
      if (dominates(q, p)) dominated = true;
    if (!dominated) front.push_back(p);
  }
  std::sort(front.begin(), front.end(), [](const Objectives& a, const Objectives& b) {
    if (a.area != b.area) return a.area < b.area;
    return a.latency_cycles < b.latency_cycles;
  });
  return front;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

}  // namespace ecodse::testing

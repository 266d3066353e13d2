#include "ecodse/ecognn.hpp"

#include <algorithm>
#include <cmath>

#include "ecodse/errors.hpp"

namespace ecodse {

std::string layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::MeanGnn: return "mean";
    case LayerKind::SumGnn: return "sum";
    case LayerKind::Gcn: return "gcn";
  }
  throw Error("unknown layer kind");
}

LayerKind layer_kind_from_name(const std::string& name) {
  if (name == "mean") return LayerKind::MeanGnn;
  if (name == "sum") return LayerKind::SumGnn;
  if (name == "gcn") return LayerKind::Gcn;
  throw UsageError("unknown layer kind '" + name + "' (expected mean, sum, or gcn)");
}

void EcognnConfig::validate() const {
  check(env_layers >= 1, "config: env_layers must be >= 1");
  check(action_layers >= 1, "config: action_layers must be >= 1");
  check(hidden_dim >= 1, "config: hidden_dim must be >= 1");
  check(temp_hidden_dim >= 1, "config: temp_hidden_dim must be >= 1");
  check(tau_min > 0.0, "config: tau_min must be positive");
  check(tau_max >= tau_min, "config: tau_max must be >= tau_min");
  check(!targets.empty(), "config: at least one target");
  for (const auto& t : targets)
    check(is_qor_target(t), "config: unknown target '" + t + "'");
}

GraphTensors GraphTensors::from_graph(const CdfgGraph& graph) {
  GraphTensors g;
  const int n = static_cast<int>(graph.nodes.size());
  const int fdim = graph.feature_dim();
  g.node_features = Matrix(n, fdim);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < fdim; ++c) g.node_features.at(r, c) = graph.nodes[r].feature[c];
  const int e = static_cast<int>(graph.edges.size());
  const int edim = graph.edge_feature_dim();
  g.edge_features = Matrix(e, edim);
  g.edge_src.resize(e);
  g.edge_dst.resize(e);
  for (int i = 0; i < e; ++i) {
    const auto& edge = graph.edges[i];
    g.edge_src[i] = graph.node_row(edge.src);
    g.edge_dst[i] = graph.node_row(edge.dst);
    for (int c = 0; c < edim; ++c) g.edge_features.at(i, c) = edge.feature[c];
  }
  return g;
}

EcognnModel::EcognnModel(EcognnConfig config, int feature_dim, int edge_feature_dim)
    : config_(std::move(config)), feature_dim_(feature_dim), edge_feature_dim_(edge_feature_dim) {
  config_.validate();
  check(feature_dim_ >= 1, "model: feature_dim must be >= 1");
  check(edge_feature_dim_ >= 0, "model: edge_feature_dim must be >= 0");
  feat_scale_.assign(feature_dim_, 1.0);
  feat_offset_.assign(feature_dim_, 0.0);

  const int H = config_.hidden_dim;
  const int T = static_cast<int>(config_.targets.size());
  const int HT = config_.temp_hidden_dim;

  params_["input.w"] = Matrix(feature_dim_, H);
  params_["input.b"] = Matrix(1, H);
  params_["norm_in.gamma"] = Matrix(1, H);
  params_["norm_in.beta"] = Matrix(1, H);
  params_["norm_out.gamma"] = Matrix(1, H);
  params_["norm_out.beta"] = Matrix(1, H);
  if (edge_feature_dim_ > 0) {
    params_["edge.env.w"] = Matrix(edge_feature_dim_, H);
    params_["edge.act.w"] = Matrix(edge_feature_dim_, H);
  }
  for (int l = 0; l < config_.env_layers; ++l) {
    const auto names = env_names(l);
    params_[names.self_w] = Matrix(H, H);
    params_[names.nbr_w] = Matrix(H, H);
    params_[names.bias] = Matrix(1, H);
  }
  for (int l = 0; l < config_.action_layers; ++l) {
    const auto names = action_names(l);
    params_[names.self_w] = Matrix(H, H);
    params_[names.nbr_w] = Matrix(H, H);
    params_[names.bias] = Matrix(1, H);
  }
  params_["act.logits.w"] = Matrix(H, kNumActionStates);
  params_["act.logits.b"] = Matrix(1, kNumActionStates);
  params_["temp.w1"] = Matrix(H, HT);
  params_["temp.b1"] = Matrix(1, HT);
  params_["temp.w2"] = Matrix(HT, 1);
  params_["temp.b2"] = Matrix(1, 1);
  params_["attn.score_w"] = Matrix(H, 1);
  params_["attn.score_b"] = Matrix(1, 1);
  params_["attn.value_w"] = Matrix(H, H);
  params_["attn.value_b"] = Matrix(1, H);
  params_["head.w1"] = Matrix(H, H);
  params_["head.b1"] = Matrix(1, H);
  params_["head.w2"] = Matrix(H, T);
  params_["head.b2"] = Matrix(1, T);

  // Uniform fan-in init for weights, zeros for biases, identity for norms.
  Rng rng = make_rng(seed_for(config_.seed, "ecognn-init"));
  for (auto& [name, m] : params_) {
    const bool is_bias = name.ends_with(".b") || name.ends_with(".b1") || name.ends_with(".b2") ||
                         name.ends_with("bias") || name.ends_with("score_b") ||
                         name.ends_with("value_b") || name.ends_with("logits.b");
    if (name.ends_with("gamma")) {
      m.fill(1.0);
    } else if (name.ends_with("beta") || is_bias) {
      m.fill(0.0);
    } else {
      const double bound = 1.0 / std::sqrt(static_cast<double>(m.rows()));
      std::uniform_real_distribution<double> dist(-bound, bound);
      for (double& v : m.flat()) v = dist(rng);
    }
  }
}

EcognnModel::LayerNames EcognnModel::env_names(int layer) const {
  const std::string p = "env." + std::to_string(layer);
  return {p + ".self_w", p + ".nbr_w", p + ".b"};
}

EcognnModel::LayerNames EcognnModel::action_names(int layer) const {
  const std::string p = "act." + std::to_string(layer);
  return {p + ".self_w", p + ".nbr_w", p + ".b"};
}

std::vector<std::string> EcognnModel::param_names() const {
  std::vector<std::string> names;
  names.reserve(params_.size());
  for (const auto& [name, m] : params_) names.push_back(name);
  return names;
}

Matrix& EcognnModel::param(const std::string& name) {
  auto it = params_.find(name);
  check(it != params_.end(), "model: unknown parameter '" + name + "'");
  return it->second;
}

const Matrix& EcognnModel::param(const std::string& name) const {
  auto it = params_.find(name);
  check(it != params_.end(), "model: unknown parameter '" + name + "'");
  return it->second;
}

std::size_t EcognnModel::param_count() const {
  std::size_t n = 0;
  for (const auto& [name, m] : params_) n += m.size();
  return n;
}

void EcognnModel::set_feature_normalization(std::vector<double> scale,
                                            std::vector<double> offset) {
  check(static_cast<int>(scale.size()) == feature_dim_ &&
            static_cast<int>(offset.size()) == feature_dim_,
        "feature normalization arity mismatch");
  for (double s : scale) check(s != 0.0, "feature normalization scale must be nonzero");
  feat_scale_ = std::move(scale);
  feat_offset_ = std::move(offset);
}

ParamNodeMap EcognnModel::register_params(Tape& tape) const {
  ParamNodeMap pn;
  for (const auto& [name, m] : params_) pn[name] = tape.leaf(m);
  return pn;
}

Matrix EcognnModel::normalized_features(const Matrix& raw) const {
  check(raw.cols() == feature_dim_, "graph feature dimension " + std::to_string(raw.cols()) +
                                        " does not match model feature_dim " +
                                        std::to_string(feature_dim_));
  Matrix out = raw;
  for (int r = 0; r < out.rows(); ++r)
    for (int c = 0; c < out.cols(); ++c)
      out.at(r, c) = (out.at(r, c) - feat_offset_[c]) / feat_scale_[c];
  return out;
}

Tape::NodeId EcognnModel::layer_norm(Tape& t, const ParamNodeMap& pn, Tape::NodeId x,
                                     const std::string& prefix) const {
  const int cols = t.value(x).cols();
  const double inv_c = 1.0 / static_cast<double>(cols);
  auto mu = t.affine(t.row_sum(x), inv_c, 0.0);
  auto d = t.sub_colvec(x, mu);
  auto var = t.affine(t.row_sum(t.mul(d, d)), inv_c, 0.0);
  auto inv_sigma = t.rsqrt(t.affine(var, 1.0, 1e-5));
  auto xn = t.mul_colvec(d, inv_sigma);
  return t.add_rowvec(t.mul_rowvec(xn, pn.at(prefix + ".gamma")), pn.at(prefix + ".beta"));
}

Tape::NodeId EcognnModel::aggregate(Tape& t, Tape::NodeId h, const GraphTensors& g,
                                    Tape::NodeId w_in, Tape::NodeId w_out, LayerKind kind,
                                    Tape::NodeId edge_proj) const {
  const int n = g.num_nodes();

  auto messages = [&](const std::vector<int>& sender) {
    auto m = t.gather_rows(h, sender);
    if (edge_proj >= 0) m = t.add(m, edge_proj);
    return m;
  };

  auto msg_in = t.mul_colvec(messages(g.edge_src), w_in);    // received along incoming edges
  auto msg_out = t.mul_colvec(messages(g.edge_dst), w_out);  // received along outgoing edges

  if (kind == LayerKind::Gcn) {
    // Symmetric normalization over gated degrees, with an implicit self loop.
    auto deg = t.affine(t.add(t.scatter_add_rows(w_in, g.edge_dst, n),
                              t.scatter_add_rows(w_out, g.edge_src, n)),
                        1.0, 1.0);
    auto norm = t.rsqrt(t.mul(t.gather_rows(deg, g.edge_src), t.gather_rows(deg, g.edge_dst)));
    msg_in = t.mul_colvec(msg_in, norm);
    msg_out = t.mul_colvec(msg_out, norm);
  }

  auto total = t.add(t.scatter_add_rows(msg_in, g.edge_dst, n),
                     t.scatter_add_rows(msg_out, g.edge_src, n));

  if (kind == LayerKind::MeanGnn) {
    auto deg = t.add(t.scatter_add_rows(w_in, g.edge_dst, n),
                     t.scatter_add_rows(w_out, g.edge_src, n));
    total = t.div_colvec(total, t.affine(deg, 1.0, 1e-12));
  }
  return total;
}

Tape::NodeId EcognnModel::action_probs_on_tape(Tape& t, const ParamNodeMap& pn,
                                               const GraphTensors& g, Tape::NodeId h) const {
  const int e = g.num_edges();
  Tape::NodeId edge_proj = -1;
  if (edge_feature_dim_ > 0 && e > 0)
    edge_proj = t.matmul(t.leaf(g.edge_features), pn.at("edge.act.w"));
  auto ones_in = t.leaf(Matrix(e, 1, 1.0));
  auto ones_out = t.leaf(Matrix(e, 1, 1.0));

  auto a = h;
  for (int l = 0; l < config_.action_layers; ++l) {
    const auto names = action_names(l);
    auto agg = aggregate(t, a, g, ones_in, ones_out, config_.action_kind, edge_proj);
    auto pre = t.add(t.matmul(a, pn.at(names.self_w)), t.matmul(agg, pn.at(names.nbr_w)));
    a = t.tanh_(t.add_rowvec(pre, pn.at(names.bias)));
  }
  auto logits = t.add_rowvec(t.matmul(a, pn.at("act.logits.w")), pn.at("act.logits.b"));
  return t.row_softmax(logits);
}

Tape::NodeId EcognnModel::env_layer_on_tape(Tape& t, const ParamNodeMap& pn, int layer,
                                            const GraphTensors& g, Tape::NodeId h,
                                            Tape::NodeId w_in, Tape::NodeId w_out) const {
  Tape::NodeId edge_proj = -1;
  if (edge_feature_dim_ > 0 && g.num_edges() > 0)
    edge_proj = t.matmul(t.leaf(g.edge_features), pn.at("edge.env.w"));
  const auto names = env_names(layer);
  auto agg = aggregate(t, h, g, w_in, w_out, config_.env_kind, edge_proj);
  auto pre = t.add(t.matmul(h, pn.at(names.self_w)), t.matmul(agg, pn.at(names.nbr_w)));
  return t.tanh_(t.add_rowvec(pre, pn.at(names.bias)));
}

Tape::NodeId EcognnModel::temperature_on_tape(Tape& t, const ParamNodeMap& pn,
                                              Tape::NodeId h) const {
  const double inv_n = 1.0 / static_cast<double>(t.value(h).rows());
  auto pooled = t.affine(t.col_sum(h), inv_n, 0.0);
  auto z = t.tanh_(t.add(t.matmul(pooled, pn.at("temp.w1")), pn.at("temp.b1")));
  auto raw = t.add(t.matmul(z, pn.at("temp.w2")), pn.at("temp.b2"));
  auto tau = t.affine(t.softplus(raw), 1.0, config_.tau_min);
  return t.clamp(tau, config_.tau_min, config_.tau_max);
}

Tape::NodeId EcognnModel::attention_pool_on_tape(Tape& t, const ParamNodeMap& pn, Tape::NodeId h,
                                                 Tape::NodeId* weights_out) const {
  check(t.value(h).rows() >= 1, "attention pool: empty graph");
  auto scores = t.add_rowvec(t.matmul(h, pn.at("attn.score_w")), pn.at("attn.score_b"));
  auto alpha = t.row_softmax(t.transpose(scores));  // 1 x n
  if (weights_out) *weights_out = alpha;
  auto values = t.add_rowvec(t.matmul(h, pn.at("attn.value_w")), pn.at("attn.value_b"));
  return t.matmul(alpha, values);
}

void EcognnModel::edge_weights_from_samples(const Matrix& samples, const std::vector<int>& src,
                                            const std::vector<int>& dst,
                                            std::vector<double>& in_weights,
                                            std::vector<double>& out_weights) {
  check(samples.cols() == kNumActionStates, "edge weights: samples must have 5 columns");
  const auto S = static_cast<int>(ActionState::Standard);
  const auto LI = static_cast<int>(ActionState::ListenIn);
  const auto LO = static_cast<int>(ActionState::ListenOut);
  const auto B = static_cast<int>(ActionState::Broadcast);
  in_weights.resize(src.size());
  out_weights.resize(src.size());
  for (std::size_t e = 0; e < src.size(); ++e) {
    const int u = src[e];
    const int v = dst[e];
    const double bcast_u = samples.at(u, S) + samples.at(u, B);
    const double bcast_v = samples.at(v, S) + samples.at(v, B);
    const double listen_in_v = samples.at(v, S) + samples.at(v, LI);
    const double listen_out_u = samples.at(u, S) + samples.at(u, LO);
    in_weights[e] = bcast_u * listen_in_v;    // message u -> v
    out_weights[e] = bcast_v * listen_out_u;  // message v -> u along u's outgoing edge
  }
}

Tape::NodeId EcognnModel::forward_on_tape(Tape& t, const ParamNodeMap& pn,
                                          const GraphTensors& graph, const ForwardOptions& opts,
                                          ForwardTrace* trace) const {
  check(graph.num_nodes() >= 1, "forward: empty graph");
  const int n = graph.num_nodes();
  const int e = graph.num_edges();

  auto x = t.leaf(normalized_features(graph.node_features));
  auto h = t.add_rowvec(t.matmul(x, pn.at("input.w")), pn.at("input.b"));
  h = layer_norm(t, pn, h, "norm_in");

  Rng noise_rng = make_rng(seed_for(opts.noise_seed, "gumbel-noise"));

  for (int layer = 0; layer < config_.env_layers; ++layer) {
    Tape::NodeId w_in, w_out;
    if (opts.force_standard_action) {
      w_in = t.leaf(Matrix(e, 1, 1.0));
      w_out = t.leaf(Matrix(e, 1, 1.0));
      if (trace) {
        Matrix pinned(n, kNumActionStates);
        for (int r = 0; r < n; ++r) pinned.at(r, static_cast<int>(ActionState::Standard)) = 1.0;
        trace->action_probs.push_back(pinned);
        trace->action_samples.push_back(pinned);
        trace->taus.push_back(config_.tau_min);
      }
    } else {
      auto p = action_probs_on_tape(t, pn, graph, h);
      auto tau = temperature_on_tape(t, pn, h);
      Matrix noise(n, kNumActionStates);
      for (double& v : noise.flat()) v = gumbel01(noise_rng);
      auto noisy = t.add_const(t.log_(p), noise);
      Tape::NodeId s;
      if (opts.hard_sampling) {
        const Matrix& scores = t.value(noisy);
        Matrix hard(n, kNumActionStates);
        for (int r = 0; r < n; ++r) {
          int best = 0;
          for (int c = 1; c < kNumActionStates; ++c)
            if (scores.at(r, c) > scores.at(r, best)) best = c;
          hard.at(r, best) = 1.0;
        }
        s = t.leaf(std::move(hard));
      } else {
        s = t.row_softmax(t.mul_scalar_node(noisy, t.recip(tau)));
      }
      const auto S0 = static_cast<int>(ActionState::Standard);
      const auto LI = static_cast<int>(ActionState::ListenIn);
      const auto LO = static_cast<int>(ActionState::ListenOut);
      const auto B0 = static_cast<int>(ActionState::Broadcast);
      auto s_std = t.select_cols(s, S0, S0 + 1);
      auto s_lin = t.select_cols(s, LI, LI + 1);
      auto s_lout = t.select_cols(s, LO, LO + 1);
      auto s_bcast = t.select_cols(s, B0, B0 + 1);
      auto bcast = t.add(s_std, s_bcast);
      auto listen_in = t.add(s_std, s_lin);
      auto listen_out = t.add(s_std, s_lout);
      w_in = t.mul(t.gather_rows(bcast, graph.edge_src), t.gather_rows(listen_in, graph.edge_dst));
      w_out =
          t.mul(t.gather_rows(bcast, graph.edge_dst), t.gather_rows(listen_out, graph.edge_src));
      if (trace) {
        trace->action_probs.push_back(t.value(p));
        trace->action_samples.push_back(t.value(s));
        trace->taus.push_back(t.value(tau).at(0, 0));
      }
    }
    h = env_layer_on_tape(t, pn, layer, graph, h, w_in, w_out);
    if (trace) trace->layer_outputs.push_back(t.value(h));
  }

  h = layer_norm(t, pn, h, "norm_out");
  Tape::NodeId alpha = -1;
  auto pooled = attention_pool_on_tape(t, pn, h, trace ? &alpha : nullptr);
  if (trace) trace->attention_weights = t.value(alpha);

  auto z = t.tanh_(t.add_rowvec(t.matmul(pooled, pn.at("head.w1")), pn.at("head.b1")));
  return t.add_rowvec(t.matmul(z, pn.at("head.w2")), pn.at("head.b2"));
}

Matrix EcognnModel::predict_vector(const GraphTensors& graph, const ForwardOptions& opts,
                                   ForwardTrace* trace) const {
  Tape t;
  auto pn = register_params(t);
  auto pred = forward_on_tape(t, pn, graph, opts, trace);
  return t.value(pred);
}

QorVector EcognnModel::predict(const CdfgGraph& graph, const ForwardOptions& opts) const {
  const Matrix out = predict_vector(GraphTensors::from_graph(graph), opts);
  QorVector q;
  for (std::size_t i = 0; i < config_.targets.size(); ++i)
    q.set(config_.targets[i], out.at(0, static_cast<int>(i)));
  return q;
}

Matrix EcognnModel::action_probabilities(const GraphTensors& graph, const Matrix& hidden) const {
  Tape t;
  auto pn = register_params(t);
  auto probs = action_probs_on_tape(t, pn, graph, t.leaf(hidden));
  return t.value(probs);
}

Matrix EcognnModel::env_layer_values(int layer, const GraphTensors& graph, const Matrix& hidden,
                                     const std::vector<double>& in_weights,
                                     const std::vector<double>& out_weights) const {
  check(in_weights.size() == graph.edge_src.size() && out_weights.size() == graph.edge_src.size(),
        "env layer: one weight pair per edge");
  Tape t;
  auto pn = register_params(t);
  auto w_in = t.leaf(Matrix::column(in_weights));
  auto w_out = t.leaf(Matrix::column(out_weights));
  auto out = env_layer_on_tape(t, pn, layer, graph, t.leaf(hidden), w_in, w_out);
  return t.value(out);
}

double EcognnModel::temperature_of(const Matrix& hidden) const {
  Tape t;
  auto pn = register_params(t);
  return t.value(temperature_on_tape(t, pn, t.leaf(hidden))).at(0, 0);
}

Matrix EcognnModel::attention_pool_values(const Matrix& hidden, Matrix* weights) const {
  Tape t;
  auto pn = register_params(t);
  Tape::NodeId alpha = -1;
  auto pooled = attention_pool_on_tape(t, pn, t.leaf(hidden), weights ? &alpha : nullptr);
  if (weights) *weights = t.value(alpha);
  return t.value(pooled);
}

}  // namespace ecodse

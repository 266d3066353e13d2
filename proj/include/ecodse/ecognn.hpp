#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ecodse/dataset.hpp"
#include "ecodse/graph.hpp"
#include "ecodse/matrix.hpp"
#include "ecodse/qor.hpp"
#include "ecodse/rng.hpp"
#include "ecodse/tape.hpp"

namespace ecodse {

/// Aggregation family for the environment / action networks:
/// mean, sum, or symmetrically normalized sum.
enum class LayerKind { MeanGnn, SumGnn, Gcn };

std::string layer_kind_name(LayerKind kind);
LayerKind layer_kind_from_name(const std::string& name);

/// Per-node state controlling message flow. Index order is fixed.
enum class ActionState : int {
  Standard = 0,   // S: broadcasts and listens to all neighbors
  ListenIn = 1,   // listens only along incoming edges
  ListenOut = 2,  // listens only along outgoing edges
  Broadcast = 3,  // broadcasts without listening
  Isolate = 4,    // neither broadcasts nor listens
};
inline constexpr int kNumActionStates = 5;

struct EcognnConfig {
  int env_layers = 3;
  int action_layers = 2;
  int hidden_dim = 128;
  int temp_hidden_dim = 16;
  LayerKind env_kind = LayerKind::SumGnn;      // best-performing combination
  LayerKind action_kind = LayerKind::MeanGnn;  // (sum environment, mean action)
  double tau_min = 0.1;
  double tau_max = 5.0;
  std::vector<std::string> targets = {"latency", "lut", "ff", "dsp", "bram"};
  std::uint64_t seed = 0;

  void validate() const;
};

/// Graph unpacked into dense tensors, rows in node-id order.
struct GraphTensors {
  Matrix node_features;        // n x F
  Matrix edge_features;        // E x Fe
  std::vector<int> edge_src;   // row indices
  std::vector<int> edge_dst;

  int num_nodes() const { return node_features.rows(); }
  int num_edges() const { return static_cast<int>(edge_src.size()); }

  static GraphTensors from_graph(const CdfgGraph& graph);
};

struct ForwardOptions {
  std::uint64_t noise_seed = 0;
  bool hard_sampling = false;
  /// Pins every node to the Standard state: all edge gates become 1 and the
  /// model reduces to a plain message-passing network.
  bool force_standard_action = false;
};

struct ForwardTrace {
  std::vector<Matrix> layer_outputs;    // node features after each env layer
  std::vector<Matrix> action_probs;     // n x 5, one per env layer
  std::vector<Matrix> action_samples;   // relaxed or hard samples per layer
  std::vector<double> taus;
  Matrix attention_weights;             // 1 x n
};

using ParamNodeMap = std::map<std::string, Tape::NodeId>;

class EcognnModel {
 public:
  EcognnModel() = default;
  EcognnModel(EcognnConfig config, int feature_dim, int edge_feature_dim);

  const EcognnConfig& config() const { return config_; }
  int feature_dim() const { return feature_dim_; }
  int edge_feature_dim() const { return edge_feature_dim_; }

  std::vector<std::string> param_names() const;
  Matrix& param(const std::string& name);
  const Matrix& param(const std::string& name) const;
  const std::map<std::string, Matrix>& params() const { return params_; }
  std::size_t param_count() const;

  /// Affine normalization of the numeric input columns, captured from the
  /// dataset manifest at training time.
  void set_feature_normalization(std::vector<double> scale, std::vector<double> offset);
  const std::vector<double>& feature_scale() const { return feat_scale_; }
  const std::vector<double>& feature_offset() const { return feat_offset_; }

  ParamNodeMap register_params(Tape& tape) const;

  /// Full pipeline on an existing tape; returns the 1 x |targets| prediction.
  Tape::NodeId forward_on_tape(Tape& tape, const ParamNodeMap& pn, const GraphTensors& graph,
                               const ForwardOptions& opts, ForwardTrace* trace = nullptr) const;

  Matrix predict_vector(const GraphTensors& graph, const ForwardOptions& opts,
                        ForwardTrace* trace = nullptr) const;
  QorVector predict(const CdfgGraph& graph, const ForwardOptions& opts) const;

  // Building blocks, exposed for direct testing. Each runs on a private tape.
  Matrix action_probabilities(const GraphTensors& graph, const Matrix& hidden) const;
  Matrix env_layer_values(int layer, const GraphTensors& graph, const Matrix& hidden,
                          const std::vector<double>& in_weights,
                          const std::vector<double>& out_weights) const;
  double temperature_of(const Matrix& hidden) const;
  Matrix attention_pool_values(const Matrix& hidden, Matrix* weights = nullptr) const;

  /// Gate weights from sampled states: a message crossing an edge needs a
  /// broadcasting sender and a receiver listening in that direction. Hard
  /// one-hot samples yield weights in {0, 1}.
  static void edge_weights_from_samples(const Matrix& samples, const std::vector<int>& src,
                                        const std::vector<int>& dst,
                                        std::vector<double>& in_weights,
                                        std::vector<double>& out_weights);

 private:
  struct LayerNames {
    std::string self_w, nbr_w, bias;
  };
  LayerNames env_names(int layer) const;
  LayerNames action_names(int layer) const;

  Tape::NodeId layer_norm(Tape& t, const ParamNodeMap& pn, Tape::NodeId x,
                          const std::string& prefix) const;
  Tape::NodeId aggregate(Tape& t, Tape::NodeId h, const GraphTensors& g, Tape::NodeId w_in,
                         Tape::NodeId w_out, LayerKind kind, Tape::NodeId edge_proj) const;
  Tape::NodeId action_probs_on_tape(Tape& t, const ParamNodeMap& pn, const GraphTensors& g,
                                    Tape::NodeId h) const;
  Tape::NodeId env_layer_on_tape(Tape& t, const ParamNodeMap& pn, int layer,
                                 const GraphTensors& g, Tape::NodeId h, Tape::NodeId w_in,
                                 Tape::NodeId w_out) const;
  Tape::NodeId temperature_on_tape(Tape& t, const ParamNodeMap& pn, Tape::NodeId h) const;
  Tape::NodeId attention_pool_on_tape(Tape& t, const ParamNodeMap& pn, Tape::NodeId h,
                                      Tape::NodeId* weights_out) const;
  Matrix normalized_features(const Matrix& raw) const;

  EcognnConfig config_;
  int feature_dim_ = 0;
  int edge_feature_dim_ = 0;
  std::vector<double> feat_scale_;   // per input column
  std::vector<double> feat_offset_;
  std::map<std::string, Matrix> params_;
};

}  // namespace ecodse

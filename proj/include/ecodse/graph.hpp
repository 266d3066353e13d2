#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ecodse/qor.hpp"

namespace ecodse {

struct CdfgNode {
  int id = 0;
  std::vector<double> feature;
  bool is_pragma_node = false;
};

struct CdfgEdge {
  int src = 0;  // node ids, not list positions
  int dst = 0;
  std::vector<double> feature;
};

/// Directed attributed control-data-flow graph with pragma slots. Nodes are
/// kept sorted by id so list order in the source file never affects results.
struct CdfgGraph {
  std::string benchmark_id;
  std::vector<CdfgNode> nodes;
  std::vector<CdfgEdge> edges;
  std::optional<QorVector> label;
  std::map<std::string, int> pragma_slots;  // pragma name -> node id

  /// Sorts nodes by id and checks structural invariants: unique ids, edge
  /// endpoints and slot targets refer to existing nodes, consistent feature
  /// dimensions, no self loops unless allowed.
  void canonicalize(bool allow_self_loops = false);

  int node_row(int node_id) const;  // row index in the sorted node list
  int feature_dim() const;
  int edge_feature_dim() const;
};

}  // namespace ecodse

#include "ecodse/graph.hpp"

#include <algorithm>
#include <cmath>

#include "ecodse/errors.hpp"

namespace ecodse {

void CdfgGraph::canonicalize(bool allow_self_loops) {
  check(!nodes.empty(), "graph '" + benchmark_id + "': no nodes");
  std::sort(nodes.begin(), nodes.end(),
            [](const CdfgNode& a, const CdfgNode& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (nodes[i].id == nodes[i - 1].id)
      throw SchemaError("graph '" + benchmark_id + "': duplicate node id " +
                        std::to_string(nodes[i].id));

  const std::size_t dim = nodes.front().feature.size();
  for (const auto& n : nodes) {
    if (n.feature.size() != dim)
      throw SchemaError("graph '" + benchmark_id + "': node " + std::to_string(n.id) +
                        " feature dimension " + std::to_string(n.feature.size()) +
                        " differs from " + std::to_string(dim));
    for (double v : n.feature)
      if (!std::isfinite(v))
        throw SchemaError("graph '" + benchmark_id + "': non-finite feature on node " +
                          std::to_string(n.id));
  }

  auto known = [this](int id) {
    return std::binary_search(nodes.begin(), nodes.end(), CdfgNode{id, {}, false},
                              [](const CdfgNode& a, const CdfgNode& b) { return a.id < b.id; });
  };

  std::size_t edim = edges.empty() ? 0 : edges.front().feature.size();
  for (const auto& e : edges) {
    if (!known(e.src)) throw SchemaError("graph '" + benchmark_id + "': unknown node " +
                                         std::to_string(e.src));
    if (!known(e.dst)) throw SchemaError("graph '" + benchmark_id + "': unknown node " +
                                         std::to_string(e.dst));
    if (e.src == e.dst && !allow_self_loops)
      throw SchemaError("graph '" + benchmark_id + "': self loop on node " +
                        std::to_string(e.src) + " (manifest does not allow self loops)");
    if (e.feature.size() != edim)
      throw SchemaError("graph '" + benchmark_id + "': inconsistent edge feature dimension");
  }

  for (const auto& [name, node_id] : pragma_slots) {
    if (!known(node_id))
      throw SchemaError("graph '" + benchmark_id + "': pragma slot '" + name +
                        "' points at unknown node " + std::to_string(node_id));
  }

  if (label) label->validate();
}

int CdfgGraph::node_row(int node_id) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), node_id,
                             [](const CdfgNode& n, int id) { return n.id < id; });
  if (it == nodes.end() || it->id != node_id)
    throw SchemaError("graph '" + benchmark_id + "': unknown node " + std::to_string(node_id));
  return static_cast<int>(it - nodes.begin());
}

int CdfgGraph::feature_dim() const {
  return nodes.empty() ? 0 : static_cast<int>(nodes.front().feature.size());
}

int CdfgGraph::edge_feature_dim() const {
  return edges.empty() ? 0 : static_cast<int>(edges.front().feature.size());
}

}  // namespace ecodse

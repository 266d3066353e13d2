#pragma once

#include <functional>
#include <vector>

#include "ecodse/matrix.hpp"

namespace ecodse {

/// Reverse-mode differentiation over dense matrices. Operations append nodes
/// in topological order; backward() walks them in reverse and accumulates
/// adjoints. A tape is built per forward pass and discarded afterwards.
class Tape {
 public:
  using NodeId = int;

  NodeId leaf(Matrix value);

  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);

  /// y[r,c] = a[r,c] (op) v[0,c] for a 1xC row vector v.
  NodeId add_rowvec(NodeId a, NodeId v);
  NodeId mul_rowvec(NodeId a, NodeId v);

  /// y[r,c] = a[r,c] (op) v[r,0] for an Nx1 column vector v.
  NodeId add_colvec(NodeId a, NodeId v);
  NodeId sub_colvec(NodeId a, NodeId v);
  NodeId mul_colvec(NodeId a, NodeId v);
  NodeId div_colvec(NodeId a, NodeId v);

  /// y = scale * a + shift, elementwise.
  NodeId affine(NodeId a, double scale, double shift);
  /// y = a + c for a constant matrix c (no adjoint flows into c).
  NodeId add_const(NodeId a, const Matrix& c);

  NodeId tanh_(NodeId a);
  NodeId log_(NodeId a);
  NodeId sqrt_(NodeId a);
  NodeId recip(NodeId a);
  NodeId rsqrt(NodeId a);
  NodeId softplus(NodeId a);
  /// Hard clamp; the adjoint passes only where lo < a < hi.
  NodeId clamp(NodeId a, double lo, double hi);

  NodeId row_softmax(NodeId a);
  NodeId transpose(NodeId a);
  NodeId row_sum(NodeId a);  // NxC -> Nx1
  NodeId col_sum(NodeId a);  // NxC -> 1xC
  NodeId sum_all(NodeId a);  // NxC -> 1x1

  /// y[i,:] = a[idx[i],:]. Indices may repeat.
  NodeId gather_rows(NodeId a, std::vector<int> idx);
  /// y has out_rows rows; y[idx[i],:] += a[i,:].
  NodeId scatter_add_rows(NodeId a, std::vector<int> idx, int out_rows);
  /// Column slice [c0, c1).
  NodeId select_cols(NodeId a, int c0, int c1);

  /// y = a * s for a 1x1 node s.
  NodeId mul_scalar_node(NodeId a, NodeId s);

  const Matrix& value(NodeId id) const { return nodes_[id].value; }
  const Matrix& grad(NodeId id) const { return nodes_[id].grad; }
  double scalar(NodeId id) const;

  /// Seeds the 1x1 root with adjoint 1 and propagates to every node.
  void backward(NodeId root);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::function<void(Tape&)> back;  // empty for leaves
  };

  NodeId push(Matrix value, std::function<void(Tape&)> back);
  Matrix& grad_of(NodeId id) { return nodes_[id].grad; }

  std::vector<Node> nodes_;
};

}  // namespace ecodse

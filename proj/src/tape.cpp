#include "ecodse/tape.hpp"

#include <cmath>
#include <utility>

#include "ecodse/errors.hpp"

namespace ecodse {

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw Error(std::string("tape: ") + what);
}

}  // namespace

Tape::NodeId Tape::push(Matrix value, std::function<void(Tape&)> back) {
  nodes_.push_back(Node{std::move(value), Matrix(), std::move(back)});
  return static_cast<NodeId>(nodes_.size()) - 1;
}

Tape::NodeId Tape::leaf(Matrix value) { return push(std::move(value), nullptr); }

double Tape::scalar(NodeId id) const {
  require(nodes_[id].value.rows() == 1 && nodes_[id].value.cols() == 1, "scalar() on non-1x1 node");
  return nodes_[id].value.at(0, 0);
}

Tape::NodeId Tape::matmul(NodeId a, NodeId b) {
  const Matrix& va = value(a);
  const Matrix& vb = value(b);
  Matrix out = ecodse::matmul(va, vb);
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a, b](Tape& t) {
    const Matrix& g = t.grad_of(self);
    const Matrix& va = t.value(a);
    const Matrix& vb = t.value(b);
    Matrix& ga = t.grad_of(a);
    Matrix& gb = t.grad_of(b);
    // dA = G * B^T
    for (int i = 0; i < va.rows(); ++i)
      for (int k = 0; k < va.cols(); ++k) {
        double acc = 0.0;
        const double* grow = g.data() + static_cast<std::size_t>(i) * g.cols();
        const double* brow = vb.data() + static_cast<std::size_t>(k) * vb.cols();
        for (int j = 0; j < vb.cols(); ++j) acc += grow[j] * brow[j];
        ga.at(i, k) += acc;
      }
    // dB = A^T * G
    for (int k = 0; k < vb.rows(); ++k)
      for (int i = 0; i < va.rows(); ++i) {
        const double aik = va.at(i, k);
        if (aik == 0.0) continue;
        const double* grow = g.data() + static_cast<std::size_t>(i) * g.cols();
        double* gbrow = gb.data() + static_cast<std::size_t>(k) * gb.cols();
        for (int j = 0; j < vb.cols(); ++j) gbrow[j] += aik * grow[j];
      }
  };
  return self;
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
  const Matrix& va = value(a);
  const Matrix& vb = value(b);
  require(va.same_shape(vb), "add: shape mismatch");
  Matrix out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += vb.data()[i];
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a, b](Tape& t) {
    const Matrix& g = t.grad_of(self);
    Matrix& ga = t.grad_of(a);
    Matrix& gb = t.grad_of(b);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga.data()[i] += g.data()[i];
      gb.data()[i] += g.data()[i];
    }
  };
  return self;
}

Tape::NodeId Tape::sub(NodeId a, NodeId b) {
  const Matrix& va = value(a);
  const Matrix& vb = value(b);
  require(va.same_shape(vb), "sub: shape mismatch");
  Matrix out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= vb.data()[i];
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a, b](Tape& t) {
    const Matrix& g = t.grad_of(self);
    Matrix& ga = t.grad_of(a);
    Matrix& gb = t.grad_of(b);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga.data()[i] += g.data()[i];
      gb.data()[i] -= g.data()[i];
    }
  };
  return self;
}

Tape::NodeId Tape::mul(NodeId a, NodeId b) {
  const Matrix& va = value(a);
  const Matrix& vb = value(b);
  require(va.same_shape(vb), "mul: shape mismatch");
  Matrix out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= vb.data()[i];
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a, b](Tape& t) {
    const Matrix& g = t.grad_of(self);
    const Matrix& va = t.value(a);
    const Matrix& vb = t.value(b);
    Matrix& ga = t.grad_of(a);
    Matrix& gb = t.grad_of(b);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga.data()[i] += g.data()[i] * vb.data()[i];
      gb.data()[i] += g.data()[i] * va.data()[i];
    }
  };
  return self;
}

Tape::NodeId Tape::add_rowvec(NodeId a, NodeId v) {
  const Matrix& va = value(a);
  const Matrix& vv = value(v);
  require(vv.rows() == 1 && vv.cols() == va.cols(), "add_rowvec: need 1xC row vector");
  Matrix out = va;
  for (int r = 0; r < out.rows(); ++r)
    for (int c = 0; c < out.cols(); ++c) out.at(r, c) += vv.at(0, c);
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a, v](Tape& t) {
    const Matrix& g = t.grad_of(self);
    Matrix& ga = t.grad_of(a);
    Matrix& gv = t.grad_of(v);
    for (int r = 0; r < g.rows(); ++r)
      for (int c = 0; c < g.cols(); ++c) {
        ga.at(r, c) += g.at(r, c);
        gv.at(0, c) += g.at(r, c);
      }
  };
  return self;
}

Tape::NodeId Tape::mul_rowvec(NodeId a, NodeId v) {
  const Matrix& va = value(a);
  const Matrix& vv = value(v);
  require(vv.rows() == 1 && vv.cols() == va.cols(), "mul_rowvec: need 1xC row vector");
  Matrix out = va;
  for (int r = 0; r < out.rows(); ++r)
    for (int c = 0; c < out.cols(); ++c) out.at(r, c) *= vv.at(0, c);
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a, v](Tape& t) {
    const Matrix& g = t.grad_of(self);
    const Matrix& va = t.value(a);
    const Matrix& vv = t.value(v);
    Matrix& ga = t.grad_of(a);
    Matrix& gv = t.grad_of(v);
    for (int r = 0; r < g.rows(); ++r)
      for (int c = 0; c < g.cols(); ++c) {
        ga.at(r, c) += g.at(r, c) * vv.at(0, c);
        gv.at(0, c) += g.at(r, c) * va.at(r, c);
      }
  };
  return self;
}

Tape::NodeId Tape::add_colvec(NodeId a, NodeId v) {
  const Matrix& va = value(a);
  const Matrix& vv = value(v);
  require(vv.cols() == 1 && vv.rows() == va.rows(), "add_colvec: need Nx1 column vector");
  Matrix out = va;
  for (int r = 0; r < out.rows(); ++r)
    for (int c = 0; c < out.cols(); ++c) out.at(r, c) += vv.at(r, 0);
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a, v](Tape& t) {
    const Matrix& g = t.grad_of(self);
    Matrix& ga = t.grad_of(a);
    Matrix& gv = t.grad_of(v);
    for (int r = 0; r < g.rows(); ++r)
      for (int c = 0; c < g.cols(); ++c) {
        ga.at(r, c) += g.at(r, c);
        gv.at(r, 0) += g.at(r, c);
      }
  };
  return self;
}

Tape::NodeId Tape::sub_colvec(NodeId a, NodeId v) {
  const Matrix& va = value(a);
  const Matrix& vv = value(v);
  require(vv.cols() == 1 && vv.rows() == va.rows(), "sub_colvec: need Nx1 column vector");
  Matrix out = va;
  for (int r = 0; r < out.rows(); ++r)
    for (int c = 0; c < out.cols(); ++c) out.at(r, c) -= vv.at(r, 0);
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a, v](Tape& t) {
    const Matrix& g = t.grad_of(self);
    Matrix& ga = t.grad_of(a);
    Matrix& gv = t.grad_of(v);
    for (int r = 0; r < g.rows(); ++r)
      for (int c = 0; c < g.cols(); ++c) {
        ga.at(r, c) += g.at(r, c);
        gv.at(r, 0) -= g.at(r, c);
      }
  };
  return self;
}

Tape::NodeId Tape::mul_colvec(NodeId a, NodeId v) {
  const Matrix& va = value(a);
  const Matrix& vv = value(v);
  require(vv.cols() == 1 && vv.rows() == va.rows(), "mul_colvec: need Nx1 column vector");
  Matrix out = va;
  for (int r = 0; r < out.rows(); ++r)
    for (int c = 0; c < out.cols(); ++c) out.at(r, c) *= vv.at(r, 0);
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a, v](Tape& t) {
    const Matrix& g = t.grad_of(self);
    const Matrix& va = t.value(a);
    const Matrix& vv = t.value(v);
    Matrix& ga = t.grad_of(a);
    Matrix& gv = t.grad_of(v);
    for (int r = 0; r < g.rows(); ++r)
      for (int c = 0; c < g.cols(); ++c) {
        ga.at(r, c) += g.at(r, c) * vv.at(r, 0);
        gv.at(r, 0) += g.at(r, c) * va.at(r, c);
      }
  };
  return self;
}

Tape::NodeId Tape::div_colvec(NodeId a, NodeId v) {
  const Matrix& va = value(a);
  const Matrix& vv = value(v);
  require(vv.cols() == 1 && vv.rows() == va.rows(), "div_colvec: need Nx1 column vector");
  Matrix out = va;
  for (int r = 0; r < out.rows(); ++r)
    for (int c = 0; c < out.cols(); ++c) out.at(r, c) /= vv.at(r, 0);
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a, v](Tape& t) {
    const Matrix& g = t.grad_of(self);
    const Matrix& va = t.value(a);
    const Matrix& vv = t.value(v);
    Matrix& ga = t.grad_of(a);
    Matrix& gv = t.grad_of(v);
    for (int r = 0; r < g.rows(); ++r) {
      const double d = vv.at(r, 0);
      for (int c = 0; c < g.cols(); ++c) {
        ga.at(r, c) += g.at(r, c) / d;
        gv.at(r, 0) -= g.at(r, c) * va.at(r, c) / (d * d);
      }
    }
  };
  return self;
}

Tape::NodeId Tape::affine(NodeId a, double scale, double shift) {
  Matrix out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = scale * out.data()[i] + shift;
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a, scale](Tape& t) {
    const Matrix& g = t.grad_of(self);
    Matrix& ga = t.grad_of(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += scale * g.data()[i];
  };
  return self;
}

Tape::NodeId Tape::add_const(NodeId a, const Matrix& c) {
  const Matrix& va = value(a);
  require(va.same_shape(c), "add_const: shape mismatch");
  Matrix out = va;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += c.data()[i];
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a](Tape& t) {
    const Matrix& g = t.grad_of(self);
    Matrix& ga = t.grad_of(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i];
  };
  return self;
}

Tape::NodeId Tape::tanh_(NodeId a) {
  Matrix out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = std::tanh(out.data()[i]);
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a](Tape& t) {
    const Matrix& g = t.grad_of(self);
    const Matrix& y = t.value(self);
    Matrix& ga = t.grad_of(a);
    for (std::size_t i = 0; i < g.size(); ++i)
      ga.data()[i] += g.data()[i] * (1.0 - y.data()[i] * y.data()[i]);
  };
  return self;
}

Tape::NodeId Tape::log_(NodeId a) {
  Matrix out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = std::log(out.data()[i]);
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a](Tape& t) {
    const Matrix& g = t.grad_of(self);
    const Matrix& x = t.value(a);
    Matrix& ga = t.grad_of(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga.data()[i] += g.data()[i] / x.data()[i];
  };
  return self;
}

Tape::NodeId Tape::sqrt_(NodeId a) {
  Matrix out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = std::sqrt(out.data()[i]);
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a](Tape& t) {
    const Matrix& g = t.grad_of(self);
    const Matrix& y = t.value(self);
    Matrix& ga = t.grad_of(a);
    for (std::size_t i = 0; i < g.size(); ++i)
      ga.data()[i] += g.data()[i] * 0.5 / y.data()[i];
  };
  return self;
}

Tape::NodeId Tape::recip(NodeId a) {
  Matrix out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = 1.0 / out.data()[i];
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a](Tape& t) {
    const Matrix& g = t.grad_of(self);
    const Matrix& y = t.value(self);
    Matrix& ga = t.grad_of(a);
    for (std::size_t i = 0; i < g.size(); ++i)
      ga.data()[i] -= g.data()[i] * y.data()[i] * y.data()[i];
  };
  return self;
}

Tape::NodeId Tape::rsqrt(NodeId a) {
  Matrix out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = 1.0 / std::sqrt(out.data()[i]);
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a](Tape& t) {
    const Matrix& g = t.grad_of(self);
    const Matrix& x = t.value(a);
    const Matrix& y = t.value(self);
    Matrix& ga = t.grad_of(a);
    for (std::size_t i = 0; i < g.size(); ++i)
      ga.data()[i] -= g.data()[i] * 0.5 * y.data()[i] / x.data()[i];
  };
  return self;
}

Tape::NodeId Tape::softplus(NodeId a) {
  Matrix out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = out.data()[i];
    out.data()[i] = std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  }
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a](Tape& t) {
    const Matrix& g = t.grad_of(self);
    const Matrix& x = t.value(a);
    Matrix& ga = t.grad_of(a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double sig = 1.0 / (1.0 + std::exp(-x.data()[i]));
      ga.data()[i] += g.data()[i] * sig;
    }
  };
  return self;
}

Tape::NodeId Tape::clamp(NodeId a, double lo, double hi) {
  Matrix out = value(a);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.data()[i] = std::min(std::max(out.data()[i], lo), hi);
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a, lo, hi](Tape& t) {
    const Matrix& g = t.grad_of(self);
    const Matrix& x = t.value(a);
    Matrix& ga = t.grad_of(a);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (x.data()[i] > lo && x.data()[i] < hi) ga.data()[i] += g.data()[i];
  };
  return self;
}

Tape::NodeId Tape::row_softmax(NodeId a) {
  const Matrix& x = value(a);
  Matrix out(x.rows(), x.cols());
  for (int r = 0; r < x.rows(); ++r) {
    double mx = -1e300;
    for (int c = 0; c < x.cols(); ++c) mx = std::max(mx, x.at(r, c));
    double denom = 0.0;
    for (int c = 0; c < x.cols(); ++c) {
      out.at(r, c) = std::exp(x.at(r, c) - mx);
      denom += out.at(r, c);
    }
    for (int c = 0; c < x.cols(); ++c) out.at(r, c) /= denom;
  }
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a](Tape& t) {
    const Matrix& g = t.grad_of(self);
    const Matrix& y = t.value(self);
    Matrix& ga = t.grad_of(a);
    for (int r = 0; r < g.rows(); ++r) {
      double dot = 0.0;
      for (int c = 0; c < g.cols(); ++c) dot += g.at(r, c) * y.at(r, c);
      for (int c = 0; c < g.cols(); ++c)
        ga.at(r, c) += y.at(r, c) * (g.at(r, c) - dot);
    }
  };
  return self;
}

Tape::NodeId Tape::transpose(NodeId a) {
  const Matrix& x = value(a);
  Matrix out(x.cols(), x.rows());
  for (int r = 0; r < x.rows(); ++r)
    for (int c = 0; c < x.cols(); ++c) out.at(c, r) = x.at(r, c);
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a](Tape& t) {
    const Matrix& g = t.grad_of(self);
    Matrix& ga = t.grad_of(a);
    for (int r = 0; r < g.rows(); ++r)
      for (int c = 0; c < g.cols(); ++c) ga.at(c, r) += g.at(r, c);
  };
  return self;
}

Tape::NodeId Tape::row_sum(NodeId a) {
  const Matrix& x = value(a);
  Matrix out(x.rows(), 1);
  for (int r = 0; r < x.rows(); ++r) {
    double s = 0.0;
    for (int c = 0; c < x.cols(); ++c) s += x.at(r, c);
    out.at(r, 0) = s;
  }
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a](Tape& t) {
    const Matrix& g = t.grad_of(self);
    Matrix& ga = t.grad_of(a);
    for (int r = 0; r < ga.rows(); ++r)
      for (int c = 0; c < ga.cols(); ++c) ga.at(r, c) += g.at(r, 0);
  };
  return self;
}

Tape::NodeId Tape::col_sum(NodeId a) {
  const Matrix& x = value(a);
  Matrix out(1, x.cols());
  for (int r = 0; r < x.rows(); ++r)
    for (int c = 0; c < x.cols(); ++c) out.at(0, c) += x.at(r, c);
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a](Tape& t) {
    const Matrix& g = t.grad_of(self);
    Matrix& ga = t.grad_of(a);
    for (int r = 0; r < ga.rows(); ++r)
      for (int c = 0; c < ga.cols(); ++c) ga.at(r, c) += g.at(0, c);
  };
  return self;
}

Tape::NodeId Tape::sum_all(NodeId a) {
  const Matrix& x = value(a);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x.data()[i];
  Matrix out(1, 1, s);
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a](Tape& t) {
    const double g = t.grad_of(self).at(0, 0);
    Matrix& ga = t.grad_of(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga.data()[i] += g;
  };
  return self;
}

Tape::NodeId Tape::gather_rows(NodeId a, std::vector<int> idx) {
  const Matrix& x = value(a);
  Matrix out(static_cast<int>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    require(idx[i] >= 0 && idx[i] < x.rows(), "gather_rows: index out of range");
    for (int c = 0; c < x.cols(); ++c) out.at(static_cast<int>(i), c) = x.at(idx[i], c);
  }
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a, idx = std::move(idx)](Tape& t) {
    const Matrix& g = t.grad_of(self);
    Matrix& ga = t.grad_of(a);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (int c = 0; c < g.cols(); ++c) ga.at(idx[i], c) += g.at(static_cast<int>(i), c);
  };
  return self;
}

Tape::NodeId Tape::scatter_add_rows(NodeId a, std::vector<int> idx, int out_rows) {
  const Matrix& x = value(a);
  require(static_cast<int>(idx.size()) == x.rows(), "scatter_add_rows: one index per row");
  Matrix out(out_rows, x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    require(idx[i] >= 0 && idx[i] < out_rows, "scatter_add_rows: index out of range");
    for (int c = 0; c < x.cols(); ++c) out.at(idx[i], c) += x.at(static_cast<int>(i), c);
  }
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a, idx = std::move(idx)](Tape& t) {
    const Matrix& g = t.grad_of(self);
    Matrix& ga = t.grad_of(a);
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (int c = 0; c < g.cols(); ++c) ga.at(static_cast<int>(i), c) += g.at(idx[i], c);
  };
  return self;
}

Tape::NodeId Tape::select_cols(NodeId a, int c0, int c1) {
  const Matrix& x = value(a);
  require(0 <= c0 && c0 < c1 && c1 <= x.cols(), "select_cols: bad range");
  Matrix out(x.rows(), c1 - c0);
  for (int r = 0; r < x.rows(); ++r)
    for (int c = c0; c < c1; ++c) out.at(r, c - c0) = x.at(r, c);
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a, c0](Tape& t) {
    const Matrix& g = t.grad_of(self);
    Matrix& ga = t.grad_of(a);
    for (int r = 0; r < g.rows(); ++r)
      for (int c = 0; c < g.cols(); ++c) ga.at(r, c0 + c) += g.at(r, c);
  };
  return self;
}

Tape::NodeId Tape::mul_scalar_node(NodeId a, NodeId s) {
  const Matrix& vs = value(s);
  require(vs.rows() == 1 && vs.cols() == 1, "mul_scalar_node: scalar must be 1x1");
  Matrix out = value(a);
  const double sv = vs.at(0, 0);
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= sv;
  NodeId self = push(std::move(out), nullptr);
  nodes_[self].back = [self, a, s](Tape& t) {
    const Matrix& g = t.grad_of(self);
    const Matrix& va = t.value(a);
    const double sv = t.value(s).at(0, 0);
    Matrix& ga = t.grad_of(a);
    Matrix& gs = t.grad_of(s);
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga.data()[i] += g.data()[i] * sv;
      acc += g.data()[i] * va.data()[i];
    }
    gs.at(0, 0) += acc;
  };
  return self;
}

void Tape::backward(NodeId root) {
  require(root >= 0 && root < static_cast<NodeId>(nodes_.size()), "backward: bad root");
  const Matrix& rv = nodes_[root].value;
  require(rv.rows() == 1 && rv.cols() == 1, "backward: root must be a 1x1 scalar");
  for (auto& n : nodes_) {
    n.grad = Matrix(n.value.rows(), n.value.cols());
  }
  nodes_[root].grad.at(0, 0) = 1.0;
  for (NodeId id = root; id >= 0; --id) {
    if (nodes_[id].back) nodes_[id].back(*this);
  }
}

}  // namespace ecodse

#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "csforge/tensor.hpp"
#include "csforge/util.hpp"

namespace csforge {

using NodeId = std::size_t;

// Named leaf tensors with accumulated gradients. Iteration order is the
// sorted name order everywhere (global norms, checkpoints), which keeps
// training runs byte-for-byte reproducible.
class ParameterStore {
 public:
  Tensor& create(const std::string& name, std::vector<std::size_t> shape);
  // Xavier/Glorot uniform over ±sqrt(6/(fan_in+fan_out)) for matrices.
  Tensor& create_xavier(const std::string& name, std::size_t rows,
                        std::size_t cols, Rng& rng);

  bool has(const std::string& name) const { return entries_.count(name) > 0; }
  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;
  Tensor& grad(const std::string& name);
  const Tensor& grad(const std::string& name) const;

  void zero_grads();
  std::vector<std::string> names() const;
  std::size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    Tensor value;
    Tensor grad;
  };
  std::map<std::string, Entry> entries_;
};

// Global-norm gradient clip followed by one SGD step, p <- p - lr * g.
// Returns the pre-clip global gradient norm. Throws GraphError naming the
// offending parameter if any gradient is non-finite.
double sgd_update(ParameterStore& params, double lr, double clip_norm);

// Reverse-mode autodiff tape. Ops evaluate eagerly as nodes are appended,
// so value(id) is available immediately; backward() walks the tape in
// reverse and accumulates into the ParameterStore gradients.
//
// Shape mismatches and non-finite outputs throw GraphError naming the node.
class Graph {
 public:
  explicit Graph(const ParameterStore* params = nullptr) : params_(params) {}

  NodeId input(Tensor value, std::string name = "");
  NodeId constant(Tensor value) { return input(std::move(value), ""); }
  NodeId param(const std::string& name);

  NodeId matmul(NodeId a, NodeId b);               // (m,k)x(k,n) or (m,k)x(k)
  NodeId matvec_t(NodeId a, NodeId x);             // A^T x
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);                  // elementwise
  NodeId scale(NodeId v, NodeId s);                // s is rank-0
  NodeId scale_const(NodeId v, double c);
  NodeId neg(NodeId a) { return scale_const(a, -1.0); }
  NodeId sigmoid(NodeId a);
  NodeId tanh_(NodeId a);
  NodeId exp_(NodeId a);
  NodeId log_(NodeId a);
  NodeId softmax(NodeId v);                        // rank-1, max-subtracted
  NodeId concat(NodeId a, NodeId b);               // rank-1
  NodeId slice(NodeId v, std::size_t start, std::size_t len);
  NodeId row(NodeId m, std::size_t r);             // matrix row gather
  NodeId pick(NodeId v, std::size_t i);            // rank-0 element
  NodeId scatter_add(NodeId v, std::vector<std::size_t> ids, std::size_t size);
  NodeId sum(NodeId v);                            // rank-0
  NodeId dot(NodeId a, NodeId b) { return sum(mul(a, b)); }
  NodeId stack_rows(const std::vector<NodeId>& rows);  // L vectors -> (L,H)

  const Tensor& value(NodeId id) const;
  std::size_t node_count() const { return nodes_.size(); }

  // Accumulates d(loss)/d(param) into grads for every parameter reachable
  // from the loss node; unreachable parameters are left untouched (their
  // zeroed gradients stay zero).
  void backward(NodeId loss, ParameterStore& grads_into);

  void check_finite(NodeId id) const;

 private:
  enum class Op {
    kInput, kParam, kMatMul, kMatVecT, kAdd, kSub, kMul, kScale, kScaleConst,
    kSigmoid, kTanh, kExp, kLog, kSoftmax, kConcat, kSlice, kRow, kPick,
    kScatterAdd, kSum, kStackRows,
  };

  struct Node {
    Op op;
    std::vector<NodeId> in;
    Tensor value;
    std::string name;               // param or input name
    std::size_t a = 0, b = 0;       // op-specific indices (slice/row/pick)
    std::vector<std::size_t> ids;   // scatter indices
    double c = 0.0;                 // scale_const factor
  };

  NodeId push(Node n);
  const Tensor& val(NodeId id) const { return nodes_[id].value; }
  [[noreturn]] void shape_error(const std::string& op, NodeId id,
                                const std::string& detail) const;

  const ParameterStore* params_;
  std::vector<Node> nodes_;
};

}  // namespace csforge

#include "csforge/graph.hpp"

#include <algorithm>
#include <cmath>

namespace csforge {

Tensor& ParameterStore::create(const std::string& name,
                               std::vector<std::size_t> shape) {
  if (entries_.count(name)) throw ContractError("parameter exists: " + name);
  Entry e;
  e.value = Tensor::zeros(shape);
  e.grad = Tensor::zeros(shape);
  return entries_.emplace(name, std::move(e)).first->second.value;
}

Tensor& ParameterStore::create_xavier(const std::string& name, std::size_t rows,
                                      std::size_t cols, Rng& rng) {
  Tensor& t = create(name, {rows, cols});
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (double& v : t.data) v = rng.uniform(-bound, bound);
  return t;
}

Tensor& ParameterStore::value(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ContractError("unknown parameter: " + name);
  return it->second.value;
}

const Tensor& ParameterStore::value(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ContractError("unknown parameter: " + name);
  return it->second.value;
}

Tensor& ParameterStore::grad(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ContractError("unknown parameter: " + name);
  return it->second.grad;
}

const Tensor& ParameterStore::grad(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ContractError("unknown parameter: " + name);
  return it->second.grad;
}

void ParameterStore::zero_grads() {
  for (auto& [name, e] : entries_) {
    std::fill(e.grad.data.begin(), e.grad.data.end(), 0.0);
  }
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, e] : entries_) out.push_back(name);
  return out;
}

double sgd_update(ParameterStore& params, double lr, double clip_norm) {
  if (lr <= 0) throw ContractError("sgd_update: lr must be positive");
  if (clip_norm <= 0) throw ContractError("sgd_update: clip_norm must be positive");
  double sq = 0.0;
  for (const auto& name : params.names()) {
    const Tensor& g = params.grad(name);
    for (double v : g.data) {
      if (!std::isfinite(v)) {
        throw GraphError("sgd_update: non-finite gradient in parameter '" +
                         name + "'");
      }
      sq += v * v;
    }
  }
  const double norm = std::sqrt(sq);
  const double scale = (norm > clip_norm) ? clip_norm / norm : 1.0;
  for (const auto& name : params.names()) {
    Tensor& p = params.value(name);
    Tensor& g = params.grad(name);
    for (std::size_t i = 0; i < p.data.size(); ++i) {
      if (scale != 1.0) g.data[i] *= scale;
      p.data[i] -= lr * g.data[i];
    }
  }
  return norm;
}

NodeId Graph::push(Node n) {
  const NodeId id = nodes_.size();
  if (!n.value.finite()) {
    throw GraphError("node " + std::to_string(id) +
                     ": non-finite value produced");
  }
  nodes_.push_back(std::move(n));
  return id;
}

void Graph::shape_error(const std::string& op, NodeId id,
                        const std::string& detail) const {
  throw GraphError("node " + std::to_string(id) + " (" + op +
                   "): shape mismatch, " + detail);
}

NodeId Graph::input(Tensor value, std::string name) {
  Node n;
  n.op = Op::kInput;
  n.value = std::move(value);
  n.name = std::move(name);
  return push(std::move(n));
}

NodeId Graph::param(const std::string& name) {
  if (params_ == nullptr) throw GraphError("graph has no parameter store");
  Node n;
  n.op = Op::kParam;
  n.value = params_->value(name);
  n.name = name;
  return push(std::move(n));
}

const Tensor& Graph::value(NodeId id) const {
  if (id >= nodes_.size()) throw GraphError("unknown node id " + std::to_string(id));
  return nodes_[id].value;
}

void Graph::check_finite(NodeId id) const {
  if (!value(id).finite()) {
    throw GraphError("node " + std::to_string(id) + ": non-finite value");
  }
}

NodeId Graph::matmul(NodeId a, NodeId b) {
  const Tensor& A = val(a);
  const Tensor& B = val(b);
  const NodeId id = nodes_.size();
  if (A.rank() != 2) shape_error("matmul", id, "lhs must be rank 2, got " + A.shape_str());
  const std::size_t m = A.rows(), k = A.cols();
  Node n;
  n.op = Op::kMatMul;
  n.in = {a, b};
  if (B.rank() == 1) {
    if (B.shape[0] != k) {
      shape_error("matmul", id, "expected rhs [" + std::to_string(k) +
                  "], got " + B.shape_str());
    }
    Tensor out = Tensor::zeros({m});
    for (std::size_t i = 0; i < m; ++i) {
      double acc = 0.0;
      const double* arow = &A.data[i * k];
      for (std::size_t j = 0; j < k; ++j) acc += arow[j] * B.data[j];
      out.data[i] = acc;
    }
    n.value = std::move(out);
  } else if (B.rank() == 2) {
    if (B.rows() != k) {
      shape_error("matmul", id, "expected rhs rows " + std::to_string(k) +
                  ", got " + B.shape_str());
    }
    const std::size_t c = B.cols();
    Tensor out = Tensor::zeros({m, c});
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        const double av = A.data[i * k + j];
        if (av == 0.0) continue;
        const double* brow = &B.data[j * c];
        double* orow = &out.data[i * c];
        for (std::size_t l = 0; l < c; ++l) orow[l] += av * brow[l];
      }
    }
    n.value = std::move(out);
  } else {
    shape_error("matmul", id, "rhs must be rank 1 or 2, got " + B.shape_str());
  }
  return push(std::move(n));
}

NodeId Graph::matvec_t(NodeId a, NodeId x) {
  const Tensor& A = val(a);
  const Tensor& X = val(x);
  const NodeId id = nodes_.size();
  if (A.rank() != 2 || X.rank() != 1 || A.rows() != X.shape[0]) {
    shape_error("matvec_t", id, "need (m,n) and (m), got " + A.shape_str() +
                " and " + X.shape_str());
  }
  const std::size_t m = A.rows(), c = A.cols();
  Tensor out = Tensor::zeros({c});
  for (std::size_t i = 0; i < m; ++i) {
    const double xi = X.data[i];
    if (xi == 0.0) continue;
    const double* arow = &A.data[i * c];
    for (std::size_t j = 0; j < c; ++j) out.data[j] += xi * arow[j];
  }
  Node n;
  n.op = Op::kMatVecT;
  n.in = {a, x};
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Graph::add(NodeId a, NodeId b) {
  const Tensor& A = val(a);
  const Tensor& B = val(b);
  const NodeId id = nodes_.size();
  if (!A.same_shape(B)) {
    if (!(A.is_scalar() && B.is_scalar())) {
      shape_error("add", id, "got " + A.shape_str() + " vs " + B.shape_str());
    }
  }
  Tensor out = A;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += B.data[i];
  Node n;
  n.op = Op::kAdd;
  n.in = {a, b};
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Graph::sub(NodeId a, NodeId b) {
  const Tensor& A = val(a);
  const Tensor& B = val(b);
  const NodeId id = nodes_.size();
  if (!A.same_shape(B) && !(A.is_scalar() && B.is_scalar())) {
    shape_error("sub", id, "got " + A.shape_str() + " vs " + B.shape_str());
  }
  Tensor out = A;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= B.data[i];
  Node n;
  n.op = Op::kSub;
  n.in = {a, b};
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Graph::mul(NodeId a, NodeId b) {
  const Tensor& A = val(a);
  const Tensor& B = val(b);
  const NodeId id = nodes_.size();
  if (!A.same_shape(B) && !(A.is_scalar() && B.is_scalar())) {
    shape_error("mul", id, "got " + A.shape_str() + " vs " + B.shape_str());
  }
  Tensor out = A;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= B.data[i];
  Node n;
  n.op = Op::kMul;
  n.in = {a, b};
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Graph::scale(NodeId v, NodeId s) {
  const Tensor& V = val(v);
  const Tensor& S = val(s);
  const NodeId id = nodes_.size();
  if (!S.is_scalar()) shape_error("scale", id, "scale factor must be scalar, got " + S.shape_str());
  const double f = S.data[0];
  Tensor out = V;
  for (double& x : out.data) x *= f;
  Node n;
  n.op = Op::kScale;
  n.in = {v, s};
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Graph::scale_const(NodeId v, double c) {
  Tensor out = val(v);
  for (double& x : out.data) x *= c;
  Node n;
  n.op = Op::kScaleConst;
  n.in = {v};
  n.c = c;
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Graph::sigmoid(NodeId a) {
  Tensor out = val(a);
  for (double& x : out.data) {
    // stable in both tails
    x = (x >= 0) ? 1.0 / (1.0 + std::exp(-x))
                 : std::exp(x) / (1.0 + std::exp(x));
  }
  Node n;
  n.op = Op::kSigmoid;
  n.in = {a};
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Graph::tanh_(NodeId a) {
  Tensor out = val(a);
  for (double& x : out.data) x = std::tanh(x);
  Node n;
  n.op = Op::kTanh;
  n.in = {a};
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Graph::exp_(NodeId a) {
  Tensor out = val(a);
  for (double& x : out.data) x = std::exp(x);
  Node n;
  n.op = Op::kExp;
  n.in = {a};
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Graph::log_(NodeId a) {
  Tensor out = val(a);
  for (double& x : out.data) x = std::log(x);
  Node n;
  n.op = Op::kLog;
  n.in = {a};
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Graph::softmax(NodeId v) {
  const Tensor& V = val(v);
  const NodeId id = nodes_.size();
  if (V.rank() != 1 || V.size() == 0) {
    shape_error("softmax", id, "need non-empty rank 1, got " + V.shape_str());
  }
  Tensor out = V;
  const double mx = *std::max_element(out.data.begin(), out.data.end());
  double z = 0.0;
  for (double& x : out.data) {
    x = std::exp(x - mx);
    z += x;
  }
  for (double& x : out.data) x /= z;
  Node n;
  n.op = Op::kSoftmax;
  n.in = {v};
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Graph::concat(NodeId a, NodeId b) {
  const Tensor& A = val(a);
  const Tensor& B = val(b);
  const NodeId id = nodes_.size();
  if (A.rank() != 1 || B.rank() != 1) {
    shape_error("concat", id, "need rank 1, got " + A.shape_str() + " and " + B.shape_str());
  }
  Tensor out = Tensor::zeros({A.size() + B.size()});
  std::copy(A.data.begin(), A.data.end(), out.data.begin());
  std::copy(B.data.begin(), B.data.end(), out.data.begin() + static_cast<long>(A.size()));
  Node n;
  n.op = Op::kConcat;
  n.in = {a, b};
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Graph::slice(NodeId v, std::size_t start, std::size_t len) {
  const Tensor& V = val(v);
  const NodeId id = nodes_.size();
  if (V.rank() != 1 || start + len > V.size()) {
    shape_error("slice", id, "range [" + std::to_string(start) + "," +
                std::to_string(start + len) + ") out of " + V.shape_str());
  }
  Tensor out = Tensor::zeros({len});
  std::copy(V.data.begin() + static_cast<long>(start),
            V.data.begin() + static_cast<long>(start + len), out.data.begin());
  Node n;
  n.op = Op::kSlice;
  n.in = {v};
  n.a = start;
  n.b = len;
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Graph::row(NodeId m, std::size_t r) {
  const Tensor& M = val(m);
  const NodeId id = nodes_.size();
  if (M.rank() != 2 || r >= M.rows()) {
    shape_error("row", id, "row " + std::to_string(r) + " of " + M.shape_str());
  }
  const std::size_t c = M.cols();
  Tensor out = Tensor::zeros({c});
  std::copy(M.data.begin() + static_cast<long>(r * c),
            M.data.begin() + static_cast<long>((r + 1) * c), out.data.begin());
  Node n;
  n.op = Op::kRow;
  n.in = {m};
  n.a = r;
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Graph::pick(NodeId v, std::size_t i) {
  const Tensor& V = val(v);
  const NodeId id = nodes_.size();
  if (V.rank() != 1 || i >= V.size()) {
    shape_error("pick", id, "index " + std::to_string(i) + " of " + V.shape_str());
  }
  Node n;
  n.op = Op::kPick;
  n.in = {v};
  n.a = i;
  n.value = Tensor::scalar(V.data[i]);
  return push(std::move(n));
}

NodeId Graph::scatter_add(NodeId v, std::vector<std::size_t> ids, std::size_t size) {
  const Tensor& V = val(v);
  const NodeId id = nodes_.size();
  if (V.rank() != 1 || V.size() != ids.size()) {
    shape_error("scatter_add", id, "values " + V.shape_str() + " vs " +
                std::to_string(ids.size()) + " indices");
  }
  Tensor out = Tensor::zeros({size});
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (ids[k] >= size) {
      shape_error("scatter_add", id, "index " + std::to_string(ids[k]) +
                  " out of size " + std::to_string(size));
    }
    out.data[ids[k]] += V.data[k];
  }
  Node n;
  n.op = Op::kScatterAdd;
  n.in = {v};
  n.ids = std::move(ids);
  n.value = std::move(out);
  return push(std::move(n));
}

NodeId Graph::sum(NodeId v) {
  const Tensor& V = val(v);
  double acc = 0.0;
  for (double x : V.data) acc += x;
  Node n;
  n.op = Op::kSum;
  n.in = {v};
  n.value = Tensor::scalar(acc);
  return push(std::move(n));
}

NodeId Graph::stack_rows(const std::vector<NodeId>& rows) {
  const NodeId id = nodes_.size();
  if (rows.empty()) shape_error("stack_rows", id, "no rows");
  const std::size_t c = val(rows[0]).size();
  Tensor out = Tensor::zeros({rows.size(), c});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Tensor& R = val(rows[i]);
    if (R.rank() != 1 || R.size() != c) {
      shape_error("stack_rows", id, "row " + std::to_string(i) + " has shape " +
                  R.shape_str());
    }
    std::copy(R.data.begin(), R.data.end(), out.data.begin() + static_cast<long>(i * c));
  }
  Node n;
  n.op = Op::kStackRows;
  n.in = rows;
  n.value = std::move(out);
  return push(std::move(n));
}

void Graph::backward(NodeId loss, ParameterStore& grads_into) {
  if (loss >= nodes_.size()) {
    throw GraphError("backward: unknown node id " + std::to_string(loss));
  }
  if (!nodes_[loss].value.is_scalar()) {
    throw GraphError("backward: loss node " + std::to_string(loss) +
                     " is not scalar, shape " + nodes_[loss].value.shape_str());
  }
  std::vector<Tensor> grads(nodes_.size());
  std::vector<bool> has_grad(nodes_.size(), false);
  auto accum = [&](NodeId id, std::size_t i, double v) {
    if (!has_grad[id]) {
      grads[id] = Tensor::zeros(nodes_[id].value.shape);
      has_grad[id] = true;
    }
    grads[id].data[i] += v;
  };
  grads[loss] = Tensor::scalar(1.0);
  has_grad[loss] = true;

  for (NodeId id = loss + 1; id-- > 0;) {
    if (!has_grad[id]) continue;
    const Node& n = nodes_[id];
    const Tensor& g = grads[id];
    switch (n.op) {
      case Op::kInput:
        break;
      case Op::kParam: {
        Tensor& pg = grads_into.grad(n.name);
        if (!pg.same_shape(g)) {
          throw GraphError("backward: gradient shape mismatch for parameter '" +
                           n.name + "'");
        }
        for (std::size_t i = 0; i < g.size(); ++i) pg.data[i] += g.data[i];
        break;
      }
      case Op::kMatMul: {
        const Tensor& A = val(n.in[0]);
        const Tensor& B = val(n.in[1]);
        const std::size_t m = A.rows(), k = A.cols();
        if (B.rank() == 1) {
          // y = A b : dA[i][j] += g[i] b[j]; db[j] += A[i][j] g[i]
          for (std::size_t i = 0; i < m; ++i) {
            const double gi = g.data[i];
            if (gi == 0.0) continue;
            for (std::size_t j = 0; j < k; ++j) {
              accum(n.in[0], i * k + j, gi * B.data[j]);
              accum(n.in[1], j, A.data[i * k + j] * gi);
            }
          }
        } else {
          const std::size_t c = B.cols();
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
              double acc = 0.0;
              for (std::size_t l = 0; l < c; ++l) {
                const double gil = g.data[i * c + l];
                acc += gil * B.data[j * c + l];
                accum(n.in[1], j * c + l, A.data[i * k + j] * gil);
              }
              accum(n.in[0], i * k + j, acc);
            }
          }
        }
        break;
      }
      case Op::kMatVecT: {
        // y = A^T x : dA[i][j] += x[i] g[j]; dx[i] += A[i][:] . g
        const Tensor& A = val(n.in[0]);
        const Tensor& X = val(n.in[1]);
        const std::size_t m = A.rows(), c = A.cols();
        for (std::size_t i = 0; i < m; ++i) {
          double acc = 0.0;
          for (std::size_t j = 0; j < c; ++j) {
            accum(n.in[0], i * c + j, X.data[i] * g.data[j]);
            acc += A.data[i * c + j] * g.data[j];
          }
          accum(n.in[1], i, acc);
        }
        break;
      }
      case Op::kAdd:
        for (std::size_t i = 0; i < g.size(); ++i) {
          accum(n.in[0], i, g.data[i]);
          accum(n.in[1], i, g.data[i]);
        }
        break;
      case Op::kSub:
        for (std::size_t i = 0; i < g.size(); ++i) {
          accum(n.in[0], i, g.data[i]);
          accum(n.in[1], i, -g.data[i]);
        }
        break;
      case Op::kMul: {
        const Tensor& A = val(n.in[0]);
        const Tensor& B = val(n.in[1]);
        for (std::size_t i = 0; i < g.size(); ++i) {
          accum(n.in[0], i, g.data[i] * B.data[i]);
          accum(n.in[1], i, g.data[i] * A.data[i]);
        }
        break;
      }
      case Op::kScale: {
        const Tensor& V = val(n.in[0]);
        const double f = val(n.in[1]).data[0];
        double ds = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
          accum(n.in[0], i, g.data[i] * f);
          ds += g.data[i] * V.data[i];
        }
        accum(n.in[1], 0, ds);
        break;
      }
      case Op::kScaleConst:
        for (std::size_t i = 0; i < g.size(); ++i) accum(n.in[0], i, g.data[i] * n.c);
        break;
      case Op::kSigmoid:
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double y = n.value.data[i];
          accum(n.in[0], i, g.data[i] * y * (1.0 - y));
        }
        break;
      case Op::kTanh:
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double y = n.value.data[i];
          accum(n.in[0], i, g.data[i] * (1.0 - y * y));
        }
        break;
      case Op::kExp:
        for (std::size_t i = 0; i < g.size(); ++i) {
          accum(n.in[0], i, g.data[i] * n.value.data[i]);
        }
        break;
      case Op::kLog: {
        const Tensor& X = val(n.in[0]);
        for (std::size_t i = 0; i < g.size(); ++i) {
          accum(n.in[0], i, g.data[i] / X.data[i]);
        }
        break;
      }
      case Op::kSoftmax: {
        const Tensor& y = n.value;
        double gy = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) gy += g.data[i] * y.data[i];
        for (std::size_t i = 0; i < g.size(); ++i) {
          accum(n.in[0], i, y.data[i] * (g.data[i] - gy));
        }
        break;
      }
      case Op::kConcat: {
        const std::size_t na = val(n.in[0]).size();
        for (std::size_t i = 0; i < na; ++i) accum(n.in[0], i, g.data[i]);
        for (std::size_t i = na; i < g.size(); ++i) accum(n.in[1], i - na, g.data[i]);
        break;
      }
      case Op::kSlice:
        for (std::size_t i = 0; i < n.b; ++i) accum(n.in[0], n.a + i, g.data[i]);
        break;
      case Op::kRow: {
        const std::size_t c = val(n.in[0]).cols();
        for (std::size_t i = 0; i < c; ++i) accum(n.in[0], n.a * c + i, g.data[i]);
        break;
      }
      case Op::kPick:
        accum(n.in[0], n.a, g.data[0]);
        break;
      case Op::kScatterAdd:
        for (std::size_t k = 0; k < n.ids.size(); ++k) {
          accum(n.in[0], k, g.data[n.ids[k]]);
        }
        break;
      case Op::kSum:
        for (std::size_t i = 0; i < val(n.in[0]).size(); ++i) {
          accum(n.in[0], i, g.data[0]);
        }
        break;
      case Op::kStackRows: {
        const std::size_t c = n.value.cols();
        for (std::size_t r = 0; r < n.in.size(); ++r) {
          for (std::size_t i = 0; i < c; ++i) {
            accum(n.in[r], i, g.data[r * c + i]);
          }
        }
        break;
      }
    }
    if (n.op != Op::kInput && n.op != Op::kParam) {
      grads[id] = Tensor();  // free as we go; long unrolls get large
    }
  }
}

}  // namespace csforge

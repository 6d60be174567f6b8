#include "csforge/nn.hpp"

namespace csforge {

LstmParams LstmParams::create(ParameterStore& store, const std::string& prefix,
                              std::size_t input_dim, std::size_t hidden_dim,
                              Rng& rng, bool lstm) {
  LstmParams p;
  p.wx = prefix + "/wx";
  p.wh = prefix + "/wh";
  p.b = prefix + "/b";
  const std::size_t rows = lstm ? 4 * hidden_dim : hidden_dim;
  store.create_xavier(p.wx, rows, input_dim, rng);
  store.create_xavier(p.wh, rows, hidden_dim, rng);
  store.create(p.b, {rows});
  return p;
}

LstmNodes lstm_nodes(Graph& g, const LstmParams& p) {
  return {g.param(p.wx), g.param(p.wh), g.param(p.b)};
}

LstmState lstm_step(Graph& g, const LstmNodes& p, NodeId x, LstmState prev,
                    std::size_t hidden_dim) {
  const std::size_t H = hidden_dim;
  NodeId gates = g.add(g.add(g.matmul(p.wx, x), g.matmul(p.wh, prev.h)), p.b);
  NodeId i = g.sigmoid(g.slice(gates, 0, H));
  NodeId f = g.sigmoid(g.slice(gates, H, H));
  NodeId cand = g.tanh_(g.slice(gates, 2 * H, H));
  NodeId o = g.sigmoid(g.slice(gates, 3 * H, H));
  NodeId c = g.add(g.mul(f, prev.c), g.mul(i, cand));
  NodeId h = g.mul(o, g.tanh_(c));
  return {h, c};
}

NodeId rnn_step(Graph& g, const LstmNodes& p, NodeId x, NodeId prev_h) {
  NodeId pre = g.add(g.add(g.matmul(p.wx, x), g.matmul(p.wh, prev_h)), p.b);
  return g.tanh_(pre);
}

NodeId dropout_mask(Graph& g, std::size_t size, double p, Rng& rng) {
  Tensor mask = Tensor::zeros({size});
  const double keep = 1.0 - p;
  for (double& v : mask.data) v = rng.bernoulli(p) ? 0.0 : 1.0 / keep;
  return g.constant(std::move(mask));
}

Tensor zero_vec(std::size_t n) { return Tensor::zeros({n}); }

}  // namespace csforge

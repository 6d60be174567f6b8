#pragma once

#include <string>
#include <vector>

#include "csforge/graph.hpp"

namespace csforge {

// One recurrent layer's parameters. For the LSTM cell the gate blocks are
// fused: W_x (4H, I), W_h (4H, H), b (4H), order i,f,g,o. For the simple
// tanh cell the shapes are (H, I), (H, H), (H). Biases zero-initialized.
struct LstmParams {
  std::string wx, wh, b;

  static LstmParams create(ParameterStore& store, const std::string& prefix,
                           std::size_t input_dim, std::size_t hidden_dim,
                           Rng& rng, bool lstm = true);
};

struct LstmNodes {
  NodeId wx, wh, b;
};

struct LstmState {
  NodeId h, c;
};

LstmNodes lstm_nodes(Graph& g, const LstmParams& p);

// x: (I), state: {(H), (H)} -> new state. Gate order i,f,g,o.
LstmState lstm_step(Graph& g, const LstmNodes& p, NodeId x, LstmState prev,
                    std::size_t hidden_dim);

// Simple tanh recurrence, used by the simple-rnn LM cell.
NodeId rnn_step(Graph& g, const LstmNodes& p, NodeId x, NodeId prev_h);

// Inverted-dropout mask as a constant node: entries are 0 or 1/(1-p).
NodeId dropout_mask(Graph& g, std::size_t size, double p, Rng& rng);

// Fresh zero state (value-level, outside any graph).
Tensor zero_vec(std::size_t n);

}  // namespace csforge

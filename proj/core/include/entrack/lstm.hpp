#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "entrack/autodiff.hpp"
#include "entrack/random.hpp"

namespace entrack {

// One LSTM direction: a fused gate matrix over [x; h_prev] and a bias.
// Gate rows are ordered input, forget, output, candidate.
struct LstmWeights {
  ParamId gates = 0;  // [4 * hidden, input + hidden]
  ParamId bias = 0;   // [4 * hidden]
  std::size_t input = 0;
  std::size_t hidden = 0;

  static LstmWeights create(ParameterStore& store, const std::string& prefix, std::size_t input,
                            std::size_t hidden, Rng& rng, double init_range);
  static LstmWeights bind(const ParameterStore& store, const std::string& prefix);
};

struct LstmState {
  Var h;
  Var c;
};

// Standard cell:
//   i = sigma(W_i [x; h] + b_i), f = sigma(...), o = sigma(...), g = tanh(...)
//   c' = f * c + i * g,  h' = o * tanh(c')
LstmState lstm_cell(Var x, Var h_prev, Var c_prev, Var gates, Var bias);

// Runs a direction over `inputs`; returns one hidden state per input, in
// input order. Backward direction processes right to left.
std::vector<Var> run_lstm(Tape& tape, const ParameterStore& store, const LstmWeights& weights,
                          const std::vector<Var>& inputs, bool reverse = false);

// Concatenation of forward and backward hidden states per position.
std::vector<Var> run_bilstm(Tape& tape, const ParameterStore& store, const LstmWeights& forward,
                            const LstmWeights& backward, const std::vector<Var>& inputs);

}  // namespace entrack

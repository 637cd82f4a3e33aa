#include "entrack/lstm.hpp"

namespace entrack {

LstmWeights LstmWeights::create(ParameterStore& store, const std::string& prefix, std::size_t input,
                                std::size_t hidden, Rng& rng, double init_range) {
  LstmWeights w;
  w.input = input;
  w.hidden = hidden;
  Tensor gates = Tensor::zeros({4 * hidden, input + hidden});
  for (auto& v : gates.values) v = rng.uniform(-init_range, init_range);
  w.gates = store.add(prefix + ".gates", std::move(gates));
  w.bias = store.add(prefix + ".bias", Tensor::zeros({4 * hidden}));
  return w;
}

LstmWeights LstmWeights::bind(const ParameterStore& store, const std::string& prefix) {
  LstmWeights w;
  w.gates = store.find(prefix + ".gates");
  w.bias = store.find(prefix + ".bias");
  const Tensor& g = store.tensor(w.gates);
  w.hidden = g.rows() / 4;
  w.input = g.cols() - w.hidden;
  return w;
}

LstmState lstm_cell(Var x, Var h_prev, Var c_prev, Var gates, Var bias) {
  const std::size_t hidden = h_prev.size();
  const auto& gshape = gates.shape();
  if (gshape.size() != 2 || gshape[0] != 4 * hidden || gshape[1] != x.size() + hidden ||
      bias.size() != 4 * hidden || c_prev.size() != hidden) {
    throw ShapeError("lstm_cell: gates " + shape_string(gshape) + ", bias " +
                     shape_string(bias.shape()) + " incompatible with input " +
                     shape_string(x.shape()) + " and hidden " + std::to_string(hidden));
  }
  Var pre = ad::add(ad::matmul(gates, ad::concat({x, h_prev})), bias);
  Var in_gate = ad::sigmoid(ad::slice(pre, 0, hidden));
  Var forget_gate = ad::sigmoid(ad::slice(pre, hidden, hidden));
  Var out_gate = ad::sigmoid(ad::slice(pre, 2 * hidden, hidden));
  Var candidate = ad::tanh(ad::slice(pre, 3 * hidden, hidden));
  Var c = ad::add(ad::mul(forget_gate, c_prev), ad::mul(in_gate, candidate));
  Var h = ad::mul(out_gate, ad::tanh(c));
  return {h, c};
}

std::vector<Var> run_lstm(Tape& tape, const ParameterStore& store, const LstmWeights& weights,
                          const std::vector<Var>& inputs, bool reverse) {
  std::vector<Var> out(inputs.size());
  if (inputs.empty()) return out;
  Var gates = tape.param(store, weights.gates);
  Var bias = tape.param(store, weights.bias);
  Var h = tape.constant(Tensor::zeros({weights.hidden}));
  Var c = h;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    std::size_t i = reverse ? inputs.size() - 1 - k : k;
    auto state = lstm_cell(inputs[i], h, c, gates, bias);
    h = state.h;
    c = state.c;
    out[i] = h;
  }
  return out;
}

std::vector<Var> run_bilstm(Tape& tape, const ParameterStore& store, const LstmWeights& forward,
                            const LstmWeights& backward, const std::vector<Var>& inputs) {
  auto fwd = run_lstm(tape, store, forward, inputs, false);
  auto bwd = run_lstm(tape, store, backward, inputs, true);
  std::vector<Var> out;
  out.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) out.push_back(ad::concat({fwd[i], bwd[i]}));
  return out;
}

}  // namespace entrack

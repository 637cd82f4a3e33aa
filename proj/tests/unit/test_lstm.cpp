#include <gtest/gtest.h>

#include <cmath>

#include "entrack/lstm.hpp"
#include "oracles.hpp"

namespace {

using namespace entrack;

struct Fixture {
  ParameterStore store;
  Rng rng{42};
  LstmWeights w = LstmWeights::create(store, "cell", 3, 2, rng, 0.5);
  std::vector<std::vector<double>> xs = {{0.5, -1.0, 0.25}, {1.5, 0.0, -0.75}, {-0.2, 0.3, 0.9}};

  Fixture() {
    // Non-zero bias so every gate term is exercised.
    for (std::size_t i = 0; i < store.tensor(w.bias).size(); ++i) {
      store.tensor(w.bias).values[i] = 0.1 * static_cast<double>(i) - 0.3;
    }
  }

  std::vector<Var> run(Tape& tape, bool reverse = false) {
    std::vector<Var> in;
    for (const auto& x : xs) in.push_back(tape.constant(Tensor::vector(x)));
    return run_lstm(tape, store, w, in, reverse);
  }
};

TEST(Lstm, MatchesPlainLoopReference) {
  Fixture f;
  Tape tape;
  auto hs = f.run(tape);
  std::vector<double> h(2, 0.0), c(2, 0.0);
  for (std::size_t t = 0; t < f.xs.size(); ++t) {
    oracle::lstm_step(f.store.tensor(f.w.gates).values, f.store.tensor(f.w.bias).values, f.xs[t], h, c);
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(hs[t].value()[j], h[j], 1e-14);
  }
}

TEST(Lstm, ReverseDirectionReadsRightToLeft) {
  Fixture f;
  Tape tape;
  auto hs = f.run(tape, /*reverse=*/true);
  std::vector<double> h(2, 0.0), c(2, 0.0);
  for (std::size_t t = f.xs.size(); t-- > 0;) {
    oracle::lstm_step(f.store.tensor(f.w.gates).values, f.store.tensor(f.w.bias).values, f.xs[t], h, c);
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(hs[t].value()[j], h[j], 1e-14);
  }
}

TEST(Lstm, GradientMatchesFiniteDifferences) {
  Fixture f;
  auto loss = [&](Tape& tape) {
    auto hs = f.run(tape);
    Var total = ad::dot(hs[0], tape.constant(Tensor::vector({0.7, -1.1})));
    total = ad::add(total, ad::sum(hs[2]));
    return total;
  };
  Tape tape;
  auto g = tape.backward(loss(tape), f.store);
  auto value = [&] {
    Tape t;
    return loss(t).value()[0];
  };
  for (ParamId p : {f.w.gates, f.w.bias}) {
    auto& values = f.store.tensor(p).values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double n = oracle::central_difference(value, values[i], 1e-6);
      EXPECT_NEAR(g[p].values[i], n, 1e-8) << f.store.name(p) << "[" << i << "]";
    }
  }
}

TEST(Lstm, ZeroWeightsGiveZeroStates) {
  ParameterStore store;
  Rng rng(1);
  auto w = LstmWeights::create(store, "z", 2, 3, rng, 0.0);
  Tape tape;
  auto hs = run_lstm(tape, store, w, {tape.constant(Tensor::vector({5.0, -5.0}))});
  for (double v : hs[0].value().values) EXPECT_EQ(v, 0.0);  // g = tanh(0) = 0
}

TEST(Lstm, BidirectionalConcatenatesBothDirections) {
  ParameterStore store;
  Rng rng(3);
  auto fwd = LstmWeights::create(store, "f", 2, 3, rng, 0.3);
  auto bwd = LstmWeights::create(store, "b", 2, 3, rng, 0.3);
  Tape tape;
  std::vector<Var> in = {tape.constant(Tensor::vector({1.0, 2.0})), tape.constant(Tensor::vector({-1.0, 0.5}))};
  auto both = run_bilstm(tape, store, fwd, bwd, in);
  auto f = run_lstm(tape, store, fwd, in);
  auto b = run_lstm(tape, store, bwd, in, true);
  ASSERT_EQ(both[0].size(), 6u);
  for (std::size_t t = 0; t < 2; ++t) {
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_EQ(both[t].value()[j], f[t].value()[j]);
      EXPECT_EQ(both[t].value()[3 + j], b[t].value()[j]);
    }
  }
}

TEST(Lstm, BindFindsWeightsByName) {
  ParameterStore store;
  Rng rng(2);
  auto w = LstmWeights::create(store, "enc", 4, 5, rng, 0.1);
  auto b = LstmWeights::bind(store, "enc");
  EXPECT_EQ(b.gates, w.gates);
  EXPECT_EQ(b.bias, w.bias);
  EXPECT_EQ(b.input, 4u);
  EXPECT_EQ(b.hidden, 5u);
}

// Frozen regression values: seed 42, input 3, hidden 2, range 0.5.
TEST(Lstm, GoldenStatesUnderFixedSeed) {
  Fixture f;
  Tape tape;
  auto hs = f.run(tape);
  const std::vector<double> expected = {0.14757344688021332, 0.13220441566269533};
  ASSERT_EQ(expected.size(), 2u);
  for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(hs[2].value()[j], expected[j], 1e-15);
}

}  // namespace

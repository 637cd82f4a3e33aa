// Linear-chain CRF over entity lifecycle tags with hard structural
// constraints.
//
// Scores follow the usual decomposition
//
//   score(y) = psi(START, y_1) + sum_t [phi(t, y_t) + psi(y_{t-1}, y_t)] + psi(y_T, STOP)
//
// and only label sequences accepted by the scheme's constraint automaton
// receive probability mass. Inference runs over the states of a
// deterministic automaton, so forbidden transitions never enter a sum or a
// max; the transition matrix still stores them as kForbidden so that any
// code path scoring a label pair directly sees an effectively -inf value.

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "entrack/autodiff.hpp"
#include "entrack/corpus.hpp"

namespace entrack::crf {

inline constexpr double kForbidden = -1e9;

enum class SchemeKind { Full6, Merged5, Merged4 };

std::string_view scheme_name(SchemeKind kind);  // full6 | merged5 | merged4
SchemeKind parse_scheme(std::string_view name);  // throws std::invalid_argument

using Label = std::size_t;
using Labels = std::vector<Label>;

// Lifecycle constraints on the six base tags. Rows/columns 0..5 are tags,
// 6 is START (as source) and 7 is STOP (as target).
inline constexpr std::size_t kBaseStart = kTagCount;
inline constexpr std::size_t kBaseStop = kTagCount + 1;
bool base_allowed(std::size_t from, std::size_t to);

// Deterministic acceptor over scheme labels. State 0 is the start state.
struct Automaton {
  struct State {
    Label label = 0;               // label read to enter the state; K for start
    std::vector<int> next;         // per label: successor state or -1
    bool can_stop = false;
  };
  std::vector<State> states;
  // States sorted by (label, index); the Viterbi tie-break order.
  std::vector<std::size_t> order;

  bool accepts(const Labels& labels) const;
};

class TagScheme {
 public:
  explicit TagScheme(SchemeKind kind = SchemeKind::Full6);

  SchemeKind kind() const { return kind_; }
  std::size_t size() const { return names_.size(); }
  std::size_t start() const { return size(); }     // START index in transition matrices
  std::size_t stop() const { return size() + 1; }  // STOP index in transition matrices
  std::string_view label_name(Label label) const;

  Label map(Tag tag) const { return merge_[static_cast<std::size_t>(tag)]; }
  Labels map(const TagSequence& tags) const;
  const std::vector<Tag>& preimage(Label label) const { return preimage_[label]; }

  // Label-pair view of the automaton over labels + {START, STOP}.
  bool allowed(std::size_t from, std::size_t to) const { return pair_allowed_[from * (size() + 2) + to]; }
  const Automaton& automaton() const { return automaton_; }
  bool accepts(const Labels& labels) const { return automaton_.accepts(labels); }

  // Lexicographically smallest base-tag sequence that maps to `labels` and is
  // accepted by the base automaton. Throws if none exists.
  TagSequence lift(const Labels& labels) const;

 private:
  SchemeKind kind_;
  std::vector<std::string> names_;
  std::vector<Label> merge_;
  std::vector<std::vector<Tag>> preimage_;
  Automaton automaton_;
  std::vector<bool> pair_allowed_;
};

// Transition matrix of shape [K + 2, K + 2] with forbidden pairs set to
// kForbidden. `raw` supplies the allowed entries; when `trainable` is false
// the allowed entries are 0.
Tensor effective_transitions(const Tensor& raw, const TagScheme& scheme, bool trainable = true);

// phi(t, y) = W_y . h_t for every step; result is [T, K].
Tensor emissions(std::span<const Tensor> states, const Tensor& weights);

double sequence_score(const Tensor& emissions, const Tensor& transitions, const TagScheme& scheme,
                      const Labels& labels);

// Forward algorithm in log space. Throws std::invalid_argument for T = 0.
double log_partition(const Tensor& emissions, const Tensor& transitions, const TagScheme& scheme);

struct Decoded {
  Labels labels;
  double score = 0.0;
};

// Highest-scoring accepted sequence. Ties resolve to the lowest-ordered
// predecessor state at every backpointer and the lowest final state.
Decoded viterbi(const Tensor& emissions, const Tensor& transitions, const TagScheme& scheme);

struct Marginals {
  double log_z = 0.0;
  Tensor emissions;    // [T, K] posterior label marginals
  Tensor transitions;  // [K + 2, K + 2] expected transition counts
};

Marginals marginals(const Tensor& emissions, const Tensor& transitions, const TagScheme& scheme);

// Negative log-likelihood log Z - score(gold) recorded on the tape.
// `emissions` is [T, K], `transitions` is the effective [K + 2, K + 2] matrix.
// Throws std::invalid_argument if `gold` is rejected by the automaton.
Var nll(Var emissions, Var transitions, const TagScheme& scheme, const Labels& gold);

// Exhaustive references used by `oracle-check`; exponential in T.
double brute_force_log_partition(const Tensor& emissions, const Tensor& transitions,
                                 const TagScheme& scheme);
Decoded brute_force_argmax(const Tensor& emissions, const Tensor& transitions, const TagScheme& scheme);

}  // namespace entrack::crf

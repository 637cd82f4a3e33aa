#include "entrack/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace entrack::crf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

void check_shapes(const Tensor& emissions, const Tensor& transitions, const TagScheme& scheme) {
  const std::size_t k = scheme.size();
  if (emissions.rank() != 2 || emissions.cols() != k) {
    throw ShapeError("crf: emissions " + shape_string(emissions.shape) + " do not have " +
                     std::to_string(k) + " columns");
  }
  if (transitions.shape != Shape{k + 2, k + 2}) {
    throw ShapeError("crf: transitions " + shape_string(transitions.shape) + ", expected [" +
                     std::to_string(k + 2) + ", " + std::to_string(k + 2) + "]");
  }
  if (emissions.rows() == 0) throw std::invalid_argument("crf: sequence has no steps");
}

// psi(label(q), l) for the automaton edge leaving q on l.
// The start state's label is K, which is also the START row.
double edge_psi(const Tensor& transitions, const Automaton::State& q, Label l) {
  return transitions.at(q.label, l);
}

}  // namespace

std::string_view scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Full6: return "full6";
    case SchemeKind::Merged5: return "merged5";
    case SchemeKind::Merged4: return "merged4";
  }
  return "full6";
}

SchemeKind parse_scheme(std::string_view name) {
  if (name == "full6") return SchemeKind::Full6;
  if (name == "merged5") return SchemeKind::Merged5;
  if (name == "merged4") return SchemeKind::Merged4;
  throw std::invalid_argument("unknown tag scheme '" + std::string(name) +
                              "' (expected full6, merged5 or merged4)");
}

bool base_allowed(std::size_t from, std::size_t to) {
  using enum Tag;
  auto t = [](Tag x) { return static_cast<std::size_t>(x); };
  if (from == kBaseStart) {
    return to == t(OB) || to == t(C) || to == t(D) || to == t(E) || to == t(M);
  }
  if (from >= kTagCount) return false;
  const bool stop = to == kBaseStop;
  switch (static_cast<Tag>(from)) {
    case OB: return to == t(OB) || to == t(C) || stop;
    case C:
    case E:
    case M: return to == t(E) || to == t(M) || to == t(D) || stop;
    case D: return to == t(OA) || stop;
    case OA: return to == t(OA) || stop;
  }
  return false;
}

bool Automaton::accepts(const Labels& labels) const {
  if (labels.empty()) return false;
  int q = 0;
  for (Label l : labels) {
    if (l >= states[static_cast<std::size_t>(q)].next.size()) return false;
    q = states[static_cast<std::size_t>(q)].next[l];
    if (q < 0) return false;
  }
  return states[static_cast<std::size_t>(q)].can_stop;
}

TagScheme::TagScheme(SchemeKind kind) : kind_(kind) {
  switch (kind) {
    case SchemeKind::Full6:
      names_ = {"O_B", "O_A", "C", "D", "E", "M"};
      merge_ = {0, 1, 2, 3, 4, 5};
      break;
    case SchemeKind::Merged5:
      names_ = {"O", "C", "D", "E", "M"};
      merge_ = {0, 0, 1, 2, 3, 4};
      break;
    case SchemeKind::Merged4:
      names_ = {"O", "C", "D", "M"};
      merge_ = {0, 0, 1, 2, 0, 3};
      break;
  }
  const std::size_t k = names_.size();
  preimage_.assign(k, {});
  for (std::size_t t = 0; t < kTagCount; ++t) preimage_[merge_[t]].push_back(static_cast<Tag>(t));

  // Subset construction over base-automaton states (bit 6 marks START).
  using Subset = unsigned;
  const Subset start_set = 1u << kBaseStart;
  std::map<Subset, std::size_t> index;
  std::vector<Subset> subsets{start_set};
  index[start_set] = 0;
  automaton_.states.push_back({k, std::vector<int>(k, -1), false});
  for (std::size_t s = 0; s < subsets.size(); ++s) {
    const Subset cur = subsets[s];
    bool can_stop = false;
    for (std::size_t a = 0; a <= kBaseStart; ++a) {
      if ((cur >> a & 1u) && base_allowed(a, kBaseStop)) can_stop = true;
    }
    automaton_.states[s].can_stop = can_stop;
    for (Label l = 0; l < k; ++l) {
      Subset nxt = 0;
      for (Tag b : preimage_[l]) {
        for (std::size_t a = 0; a <= kBaseStart; ++a) {
          if ((cur >> a & 1u) && base_allowed(a, static_cast<std::size_t>(b))) {
            nxt |= 1u << static_cast<std::size_t>(b);
          }
        }
      }
      if (nxt == 0) continue;
      auto [it, inserted] = index.emplace(nxt, subsets.size());
      if (inserted) {
        subsets.push_back(nxt);
        automaton_.states.push_back({l, std::vector<int>(k, -1), false});
      }
      automaton_.states[s].next[l] = static_cast<int>(it->second);
    }
  }
  automaton_.order.resize(automaton_.states.size());
  for (std::size_t i = 0; i < automaton_.order.size(); ++i) automaton_.order[i] = i;
  std::stable_sort(automaton_.order.begin(), automaton_.order.end(), [&](std::size_t a, std::size_t b) {
    return automaton_.states[a].label < automaton_.states[b].label;
  });

  pair_allowed_.assign((k + 2) * (k + 2), false);
  for (const auto& q : automaton_.states) {
    for (Label l = 0; l < k; ++l) {
      if (q.next[l] >= 0) pair_allowed_[q.label * (k + 2) + l] = true;
    }
    if (q.can_stop) pair_allowed_[q.label * (k + 2) + k + 1] = true;
  }
}

std::string_view TagScheme::label_name(Label label) const {
  if (label == start()) return "<START>";
  if (label == stop()) return "<STOP>";
  return names_.at(label);
}

Labels TagScheme::map(const TagSequence& tags) const {
  Labels out;
  out.reserve(tags.size());
  for (Tag t : tags) out.push_back(map(t));
  return out;
}

TagSequence TagScheme::lift(const Labels& labels) const {
  const std::size_t n = labels.size();
  if (n == 0) return {};
  // feasible[t][b]: base tag b at position t can be completed to an accepted suffix.
  std::vector<std::vector<bool>> feasible(n, std::vector<bool>(kTagCount, false));
  for (std::size_t t = n; t-- > 0;) {
    for (Tag b : preimage_.at(labels[t])) {
      const auto bi = static_cast<std::size_t>(b);
      bool ok = false;
      if (t + 1 == n) {
        ok = base_allowed(bi, kBaseStop);
      } else {
        for (Tag c : preimage_.at(labels[t + 1])) {
          if (feasible[t + 1][static_cast<std::size_t>(c)] && base_allowed(bi, static_cast<std::size_t>(c))) ok = true;
        }
      }
      feasible[t][bi] = ok;
    }
  }
  TagSequence out;
  std::size_t prev = kBaseStart;
  for (std::size_t t = 0; t < n; ++t) {
    bool found = false;
    for (Tag b : preimage_[labels[t]]) {  // preimages are in tag order
      const auto bi = static_cast<std::size_t>(b);
      if (feasible[t][bi] && base_allowed(prev, bi)) {
        out.push_back(b);
        prev = bi;
        found = true;
        break;
      }
    }
    if (!found) throw std::invalid_argument("label sequence has no lifecycle-consistent lift");
  }
  return out;
}

Tensor effective_transitions(const Tensor& raw, const TagScheme& scheme, bool trainable) {
  const std::size_t n = scheme.size() + 2;
  if (raw.shape != Shape{n, n}) {
    throw ShapeError("transition matrix " + shape_string(raw.shape) + " does not match scheme");
  }
  Tensor out = Tensor::zeros({n, n});
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      out.at(a, b) = scheme.allowed(a, b) ? (trainable ? raw.at(a, b) : 0.0) : kForbidden;
    }
  }
  return out;
}

Tensor emissions(std::span<const Tensor> states, const Tensor& weights) {
  const std::size_t k = weights.rows(), d = weights.cols();
  Tensor out = Tensor::zeros({states.size(), k});
  for (std::size_t t = 0; t < states.size(); ++t) {
    if (states[t].size() != d) throw ShapeError("emissions: state width does not match weights");
    for (std::size_t y = 0; y < k; ++y) {
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += weights.at(y, i) * states[t][i];
      out.at(t, y) = s;
    }
  }
  return out;
}

double sequence_score(const Tensor& emissions, const Tensor& transitions, const TagScheme& scheme,
                      const Labels& labels) {
  check_shapes(emissions, transitions, scheme);
  if (labels.size() != emissions.rows()) throw ShapeError("sequence_score: length mismatch");
  double s = 0.0;
  std::size_t prev = scheme.start();
  for (std::size_t t = 0; t < labels.size(); ++t) {
    s += transitions.at(prev, labels[t]) + emissions.at(t, labels[t]);
    prev = labels[t];
  }
  return s + transitions.at(prev, scheme.stop());
}

namespace {

// alpha[t][q]: log-sum of scores of prefixes ending in automaton state q
// after consuming t + 1 labels.
std::vector<std::vector<double>> forward_scores(const Tensor& em, const Tensor& tr, const TagScheme& scheme) {
  const auto& A = scheme.automaton();
  const std::size_t n = em.rows(), k = scheme.size(), s = A.states.size();
  std::vector<std::vector<double>> alpha(n, std::vector<double>(s, kNegInf));
  for (std::size_t t = 0; t < n; ++t) {
    if (t == 0) {
      const auto& q0 = A.states[0];
      for (Label l = 0; l < k; ++l) {
        if (q0.next[l] < 0) continue;
        auto& dst = alpha[0][static_cast<std::size_t>(q0.next[l])];
        dst = log_add(dst, edge_psi(tr, q0, l) + em.at(0, l));
      }
      continue;
    }
    for (std::size_t qi = 0; qi < s; ++qi) {
      const double a = alpha[t - 1][qi];
      if (a == kNegInf) continue;
      const auto& q = A.states[qi];
      for (Label l = 0; l < k; ++l) {
        if (q.next[l] < 0) continue;
        auto& dst = alpha[t][static_cast<std::size_t>(q.next[l])];
        dst = log_add(dst, a + edge_psi(tr, q, l) + em.at(t, l));
      }
    }
  }
  return alpha;
}

// beta[t][q]: log-sum of suffix scores from state q after t + 1 labels,
// including the final STOP transition.
std::vector<std::vector<double>> backward_scores(const Tensor& em, const Tensor& tr, const TagScheme& scheme) {
  const auto& A = scheme.automaton();
  const std::size_t n = em.rows(), k = scheme.size(), s = A.states.size();
  std::vector<std::vector<double>> beta(n, std::vector<double>(s, kNegInf));
  for (std::size_t qi = 0; qi < s; ++qi) {
    const auto& q = A.states[qi];
    if (q.can_stop) beta[n - 1][qi] = tr.at(q.label, scheme.stop());
  }
  for (std::size_t t = n - 1; t-- > 0;) {
    for (std::size_t qi = 0; qi < s; ++qi) {
      const auto& q = A.states[qi];
      double acc = kNegInf;
      for (Label l = 0; l < k; ++l) {
        if (q.next[l] < 0) continue;
        const double b = beta[t + 1][static_cast<std::size_t>(q.next[l])];
        if (b == kNegInf) continue;
        acc = log_add(acc, edge_psi(tr, q, l) + em.at(t + 1, l) + b);
      }
      beta[t][qi] = acc;
    }
  }
  return beta;
}

}  // namespace

double log_partition(const Tensor& emissions, const Tensor& transitions, const TagScheme& scheme) {
  check_shapes(emissions, transitions, scheme);
  const auto& A = scheme.automaton();
  auto alpha = forward_scores(emissions, transitions, scheme);
  double z = kNegInf;
  for (std::size_t qi = 0; qi < A.states.size(); ++qi) {
    const auto& q = A.states[qi];
    if (!q.can_stop || alpha.back()[qi] == kNegInf) continue;
    z = log_add(z, alpha.back()[qi] + transitions.at(q.label, scheme.stop()));
  }
  if (z == kNegInf) throw std::runtime_error("crf: no accepted label sequence");
  return z;
}

Decoded viterbi(const Tensor& emissions, const Tensor& transitions, const TagScheme& scheme) {
  check_shapes(emissions, transitions, scheme);
  const auto& A = scheme.automaton();
  const std::size_t n = emissions.rows(), k = scheme.size(), s = A.states.size();
  std::vector<std::vector<double>> delta(n, std::vector<double>(s, kNegInf));
  std::vector<std::vector<int>> back(n, std::vector<int>(s, -1));

  const auto& q0 = A.states[0];
  for (Label l = 0; l < k; ++l) {
    if (q0.next[l] < 0) continue;
    delta[0][static_cast<std::size_t>(q0.next[l])] = transitions.at(q0.label, l) + emissions.at(0, l);
    back[0][static_cast<std::size_t>(q0.next[l])] = 0;
  }
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t qi : A.order) {  // ascending label order: first strict max wins ties
      const double d = delta[t - 1][qi];
      if (d == kNegInf) continue;
      const auto& q = A.states[qi];
      for (Label l = 0; l < k; ++l) {
        if (q.next[l] < 0) continue;
        const auto dst = static_cast<std::size_t>(q.next[l]);
        const double cand = d + transitions.at(q.label, l) + emissions.at(t, l);
        if (back[t][dst] < 0 || cand > delta[t][dst]) {
          delta[t][dst] = cand;
          back[t][dst] = static_cast<int>(qi);
        }
      }
    }
  }
  int best = -1;
  double best_score = kNegInf;
  for (std::size_t qi : A.order) {
    const auto& q = A.states[qi];
    if (!q.can_stop || back[n - 1][qi] < 0) continue;
    const double cand = delta[n - 1][qi] + transitions.at(q.label, scheme.stop());
    if (best < 0 || cand > best_score) {
      best = static_cast<int>(qi);
      best_score = cand;
    }
  }
  if (best < 0) throw std::runtime_error("crf: no accepted label sequence");
  Decoded out;
  out.score = best_score;
  out.labels.resize(n);
  int q = best;
  for (std::size_t t = n; t-- > 0;) {
    out.labels[t] = A.states[static_cast<std::size_t>(q)].label;
    q = back[t][static_cast<std::size_t>(q)];
  }
  return out;
}

Marginals marginals(const Tensor& emissions, const Tensor& transitions, const TagScheme& scheme) {
  check_shapes(emissions, transitions, scheme);
  const auto& A = scheme.automaton();
  const std::size_t n = emissions.rows(), k = scheme.size(), s = A.states.size();
  auto alpha = forward_scores(emissions, transitions, scheme);
  auto beta = backward_scores(emissions, transitions, scheme);
  Marginals m;
  m.log_z = log_partition(emissions, transitions, scheme);
  m.emissions = Tensor::zeros({n, k});
  m.transitions = Tensor::zeros({k + 2, k + 2});
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t qi = 0; qi < s; ++qi) {
      if (alpha[t][qi] == kNegInf || beta[t][qi] == kNegInf) continue;
      m.emissions.at(t, A.states[qi].label) += std::exp(alpha[t][qi] + beta[t][qi] - m.log_z);
    }
  }
  // START edges.
  const auto& q0 = A.states[0];
  for (Label l = 0; l < k; ++l) {
    if (q0.next[l] < 0) continue;
    const double b = beta[0][static_cast<std::size_t>(q0.next[l])];
    if (b == kNegInf) continue;
    m.transitions.at(scheme.start(), l) +=
        std::exp(transitions.at(scheme.start(), l) + emissions.at(0, l) + b - m.log_z);
  }
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t qi = 0; qi < s; ++qi) {
      if (alpha[t - 1][qi] == kNegInf) continue;
      const auto& q = A.states[qi];
      for (Label l = 0; l < k; ++l) {
        if (q.next[l] < 0) continue;
        const double b = beta[t][static_cast<std::size_t>(q.next[l])];
        if (b == kNegInf) continue;
        m.transitions.at(q.label, l) +=
            std::exp(alpha[t - 1][qi] + transitions.at(q.label, l) + emissions.at(t, l) + b - m.log_z);
      }
    }
  }
  for (std::size_t qi = 0; qi < s; ++qi) {
    const auto& q = A.states[qi];
    if (!q.can_stop || alpha[n - 1][qi] == kNegInf) continue;
    m.transitions.at(q.label, scheme.stop()) +=
        std::exp(alpha[n - 1][qi] + transitions.at(q.label, scheme.stop()) - m.log_z);
  }
  return m;
}

Var nll(Var emissions, Var transitions, const TagScheme& scheme, const Labels& gold) {
  if (emissions.tape != transitions.tape) throw std::logic_error("crf::nll: operands on different tapes");
  const Tensor& em = emissions.value();
  const Tensor& tr = transitions.value();
  check_shapes(em, tr, scheme);
  if (gold.size() != em.rows()) {
    throw ShapeError("crf::nll: gold has " + std::to_string(gold.size()) + " labels for " +
                     std::to_string(em.rows()) + " steps");
  }
  if (!scheme.accepts(gold)) {
    std::string seq;
    for (Label l : gold) seq += std::string(seq.empty() ? "" : " ") + std::string(scheme.label_name(l));
    throw std::invalid_argument("crf::nll: gold sequence [" + seq + "] violates the lifecycle automaton");
  }
  Marginals m = marginals(em, tr, scheme);
  const double loss = m.log_z - sequence_score(em, tr, scheme, gold);

  // d loss / d phi = marginals - gold indicators; same for psi.
  Tensor d_em = std::move(m.emissions);
  Tensor d_tr = std::move(m.transitions);
  std::size_t prev = scheme.start();
  for (std::size_t t = 0; t < gold.size(); ++t) {
    d_em.at(t, gold[t]) -= 1.0;
    d_tr.at(prev, gold[t]) -= 1.0;
    prev = gold[t];
  }
  d_tr.at(prev, scheme.stop()) -= 1.0;

  Tape& tape = *emissions.tape;
  const auto ei = emissions.index, ti = transitions.index;
  return tape.record(Tensor::scalar(loss),
                     [ei, ti, d_em = std::move(d_em), d_tr = std::move(d_tr),
                      self = static_cast<std::uint32_t>(tape.node_count())](Tape& tp) {
                       const double g = tp.grad(self)[0];
                       auto& ge = tp.grad(ei);
                       for (std::size_t i = 0; i < ge.size(); ++i) ge[i] += g * d_em.values[i];
                       auto& gt = tp.grad(ti);
                       for (std::size_t i = 0; i < gt.size(); ++i) gt[i] += g * d_tr.values[i];
                     });
}

namespace {

template <typename Visit>
void enumerate_labels(std::size_t n, std::size_t k, Visit&& visit) {
  Labels labels(n, 0);
  while (true) {
    visit(labels);
    std::size_t i = n;
    while (i > 0) {
      --i;
      if (++labels[i] < k) break;
      labels[i] = 0;
      if (i == 0) return;
    }
    if (n == 0) return;
  }
}

}  // namespace

double brute_force_log_partition(const Tensor& emissions, const Tensor& transitions,
                                 const TagScheme& scheme) {
  check_shapes(emissions, transitions, scheme);
  std::vector<double> scores;
  enumerate_labels(emissions.rows(), scheme.size(), [&](const Labels& y) {
    if (scheme.accepts(y)) scores.push_back(sequence_score(emissions, transitions, scheme, y));
  });
  return ad::log_sum_exp(scores);
}

Decoded brute_force_argmax(const Tensor& emissions, const Tensor& transitions, const TagScheme& scheme) {
  check_shapes(emissions, transitions, scheme);
  Decoded best;
  bool have = false;
  enumerate_labels(emissions.rows(), scheme.size(), [&](const Labels& y) {
    if (!scheme.accepts(y)) return;
    const double s = sequence_score(emissions, transitions, scheme, y);
    if (!have || s > best.score) {
      best = {y, s};
      have = true;
    }
  });
  return best;
}

}  // namespace entrack::crf

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "entrack/encoders.hpp"
#include "entrack/location.hpp"
#include "tiny.hpp"

namespace {

using namespace entrack;

std::vector<Var> constants(Tape& tape, const std::vector<std::vector<double>>& rows) {
  std::vector<Var> out;
  for (const auto& r : rows) out.push_back(tape.constant(Tensor::vector(r)));
  return out;
}

std::vector<double> values(Var v) { return v.value().values; }

TEST(FindMentions, ExactSingleToken) {
  auto p = tiny::paragraph({"Roots/N absorb/V water/N ."}, {"water"});
  auto m = find_mentions(p, p.entities[0]);
  ASSERT_EQ(m.spans[0].size(), 1u);
  EXPECT_EQ(m.spans[0][0], (Span{2, 2}));
}

TEST(FindMentions, LongestAliasFirst) {
  auto p = tiny::paragraph({"Carbon/N dioxide/N and CO2/N and carbon/N"}, {});
  Entity e{"co2", {"CO2", "carbon", "carbon dioxide"}};
  auto m = find_mentions(p, e);
  EXPECT_EQ(m.spans[0], (std::vector<Span>{{0, 1}, {3, 3}, {5, 5}}));
}

TEST(FindMentions, AbsentEntityGivesEmptyList) {
  auto p = tiny::paragraph({"The rock/N falls/V", "Water/N flows/V"}, {"magma"});
  auto m = find_mentions(p, p.entities[0]);
  EXPECT_FALSE(m.mentioned(0));
  EXPECT_FALSE(m.mentioned(1));
}

TEST(FindMentions, NeverCrossesSentenceBoundary) {
  auto p = tiny::paragraph({"it is carbon/N", "dioxide/N here"}, {});
  Entity e{"carbon dioxide", {"carbon dioxide"}};
  auto m = find_mentions(p, e);
  EXPECT_FALSE(m.mentioned(0));
  EXPECT_FALSE(m.mentioned(1));
}

TEST(FindMentions, OverlapsResolveLeftToRight) {
  auto p = tiny::paragraph({"a b a b a"}, {});
  Entity e{"x", {"a b", "b a"}};
  auto m = find_mentions(p, e);
  EXPECT_EQ(m.spans[0], (std::vector<Span>{{0, 1}, {2, 3}}));
}

TEST(VerbPositions, SentenceLocal) {
  auto p = tiny::paragraph({"water/N flows/V", "it/N moves/V and drifts/V"}, {});
  auto v = verb_positions(p);
  EXPECT_EQ(v[0], (std::vector<std::size_t>{1}));
  EXPECT_EQ(v[1], (std::vector<std::size_t>{1, 3}));
}

TEST(EncodeTokens, SingleTokenHasBothHalves) {
  auto model = tiny::model();
  auto p = tiny::paragraph({"water/N"}, {"water"});
  Tape tape;
  auto h = encode_tokens(tape, model, p);
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h[0].size(), 6u);
}

TEST(EncodeTokens, Deterministic) {
  auto model = tiny::model();
  auto p = tiny::paragraph({"The water/N flows/V", "to the river/N"}, {"water"});
  Tape a, b;
  auto ha = encode_tokens(a, model, p);
  auto hb = encode_tokens(b, model, p);
  for (std::size_t i = 0; i < ha.size(); ++i) EXPECT_EQ(ha[i].value(), hb[i].value());
}

TEST(EncodeTokens, VerbFlagIgnoredWhenVerbsDisabled) {
  auto mc = tiny::config();
  auto p = tiny::paragraph({"water/N flows/V down"}, {"water"});
  auto flipped = p;
  flipped.sentences[0][2].is_verb = true;
  for (bool use_verb : {true, false}) {
    mc.use_verb = use_verb;
    auto model = tiny::model(mc);
    Tape a, b;
    auto ha = encode_tokens(a, model, p);
    auto hb = encode_tokens(b, model, flipped);
    EXPECT_EQ(ha[0].value() == hb[0].value(), !use_verb) << "use_verb " << use_verb;
  }
}

TEST(EncodeTokens, SentenceScopeIsolatesSentences) {
  auto mc = tiny::config();
  auto p = tiny::paragraph({"water/N flows/V", "rock/N falls/V"}, {"water"});
  auto changed = p;
  changed.sentences[0][0].embedding_id = tiny::embeddings().lookup("magma");
  for (auto scope : {ContextScope::Paragraph, ContextScope::Sentence}) {
    mc.scope = scope;
    auto model = tiny::model(mc);
    Tape a, b;
    auto ha = encode_tokens(a, model, p);
    auto hb = encode_tokens(b, model, changed);
    EXPECT_EQ(ha[3].value() == hb[3].value(), scope == ContextScope::Sentence);
  }
}

// Frozen regression values: seed 7, hidden 3, dimension-4 synthetic
// embeddings, three tokens.
TEST(EncodeTokens, GoldenStates) {
  auto model = tiny::model();
  auto p = tiny::paragraph({"water/N flows/V soil/N"}, {"water"});
  Tape tape;
  auto h = encode_tokens(tape, model, p);
  const std::vector<double> expected = {-0.048051130835323218, -0.028456849799195057, -0.082382957678231658,
                                       -0.017816723597358614, 0.11398476754349746, -0.046219828800208064};
  ASSERT_EQ(expected.size(), 6u);
  for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(h[1].value()[j], expected[j], 1e-12);
}

struct StepFixture {
  entrack::Model model = tiny::model();
  Paragraph p = tiny::paragraph({"the carbon/N dioxide/N forms/V", "nothing here", "rock/N falls/V"}, {});
  Entity e{"carbon dioxide", {"carbon dioxide"}};
  std::vector<std::vector<double>> states = {{1, 0, 0, 0, 0, 0}, {0, 2, 0, 0, 0, 0}, {0, 4, 0, 0, 6, 0},
                                             {0, 0, 3, 0, 0, 0}, {5, 5, 5, 5, 5, 5}, {1, 1, 1, 1, 1, 1},
                                             {7, 0, 0, 0, 0, 0}, {0, 0, 0, 0, 0, 9}};
};

TEST(EntityStepInput, MentionMeanThenVerbMean) {
  StepFixture f;
  Tape tape;
  auto h = constants(tape, f.states);
  auto m = find_mentions(f.p, f.e);
  auto x = entity_step_input(tape, f.model, f.p, h, m, verb_positions(f.p), 0);
  EXPECT_EQ(values(x), (std::vector<double>{0, 3, 0, 0, 3, 0, 0, 0, 3, 0, 0, 0}));
}

TEST(EntityStepInput, UnmentionedStepIsZero) {
  StepFixture f;
  Tape tape;
  auto h = constants(tape, f.states);
  auto m = find_mentions(f.p, f.e);
  for (std::size_t t : {1u, 2u}) {
    auto x = entity_step_input(tape, f.model, f.p, h, m, verb_positions(f.p), t);
    EXPECT_EQ(values(x), std::vector<double>(12, 0.0));
  }
}

TEST(EntityStepInput, NoVerbsGivesZeroVerbHalf) {
  StepFixture f;
  f.p.sentences[0][3].is_verb = false;
  f.p.sentences[0][3].pos = Pos::Other;
  Tape tape;
  auto h = constants(tape, f.states);
  auto m = find_mentions(f.p, f.e);
  auto x = entity_step_input(tape, f.model, f.p, h, m, verb_positions(f.p), 0);
  for (std::size_t j = 6; j < 12; ++j) EXPECT_EQ(x.value()[j], 0.0);
}

TEST(EntityStepInput, VerbHalfOmittedWhenVerbsDisabled) {
  auto mc = tiny::config();
  mc.use_verb = false;
  StepFixture f;
  f.model = tiny::model(mc);
  Tape tape;
  auto h = constants(tape, f.states);
  auto x = entity_step_input(tape, f.model, f.p, h, find_mentions(f.p, f.e), verb_positions(f.p), 0);
  EXPECT_EQ(values(x), (std::vector<double>{0, 3, 0, 0, 3, 0}));
}

// Perturbing an unmentioned sentence never leaks into its step input.
TEST(EntityStepInput, MaskingProperty) {
  auto model = tiny::model();
  auto p = tiny::paragraph({"water/N flows/V", "the rock/N falls/V", "water/N freezes/V"}, {"water"});
  for (const std::string word : {"magma", "soil", "cloud"}) {
    auto q = p;
    q.sentences[1][1].embedding_id = tiny::embeddings().lookup(word);
    Tape tape;
    auto h = encode_tokens(tape, model, q);
    auto m = find_mentions(q, q.entities[0]);
    auto x = entity_step_input(tape, model, q, h, m, verb_positions(q), 1);
    EXPECT_EQ(values(x), std::vector<double>(12, 0.0));
  }
}

TEST(Attention, ZeroQueryGivesPlainMean) {
  auto mc = tiny::config();
  mc.attention = true;
  StepFixture f;
  f.model = tiny::model(mc);
  auto& q = f.model.store().tensor(f.model.params().attention_query);
  std::fill(q.values.begin(), q.values.end(), 0.0);
  Tape tape;
  auto h = constants(tape, f.states);
  auto x = entity_step_input_attention(tape, f.model, f.p, h, verb_positions(f.p), 0);
  const std::vector<double> mean = {0.25, 1.5, 0.75, 0, 1.5, 0};
  for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(x.value()[j], mean[j], 1e-15);
  for (std::size_t j = 6; j < 12; ++j) EXPECT_EQ(x.value()[j], f.states[3][j - 6]);
}

TEST(Attention, DominantScoreSelectsToken) {
  auto mc = tiny::config();
  mc.attention = true;
  StepFixture f;
  f.model = tiny::model(mc);
  auto& q = f.model.store().tensor(f.model.params().attention_query);
  q.values = {50, 0, 0, 0, 0, 0};  // token 0 scores 50, the rest 0
  Tape tape;
  auto h = constants(tape, f.states);
  auto x = entity_step_input_attention(tape, f.model, f.p, h, verb_positions(f.p), 0);
  for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(x.value()[j], f.states[0][j], 1e-6);
}

TEST(EntityTrack, SingleStepAndDeterminism) {
  auto model = tiny::model();
  Tape a, b;
  auto in = Tensor::vector(std::vector<double>(12, 0.3));
  auto ha = entity_track(a, model, {a.constant(in)});
  auto hb = entity_track(b, model, {b.constant(in)});
  ASSERT_EQ(ha.size(), 1u);
  EXPECT_EQ(ha[0].size(), 6u);
  EXPECT_EQ(ha[0].value(), hb[0].value());
}

TEST(LocationStepInput, HalvesFollowPresence) {
  StepFixture f;
  Tape tape;
  auto h = constants(tape, f.states);
  auto m = find_mentions(f.p, f.e);
  auto candidates = extract_candidates(f.p);
  const auto& rock = *std::find_if(candidates.begin(), candidates.end(),
                                   [](const auto& c) { return c.normalized_text == "rock"; });
  // Both absent in sentence 1.
  EXPECT_EQ(values(location_step_input(tape, f.model, f.p, h, m, rock, 1)), std::vector<double>(12, 0.0));
  // Location present, entity absent in sentence 2.
  auto x = values(location_step_input(tape, f.model, f.p, h, m, rock, 2));
  EXPECT_EQ(std::vector<double>(x.begin(), x.begin() + 6), f.states[6]);
  EXPECT_EQ(std::vector<double>(x.begin() + 6, x.end()), std::vector<double>(6, 0.0));
  // Entity present, location absent in sentence 0.
  x = values(location_step_input(tape, f.model, f.p, h, m, rock, 0));
  EXPECT_EQ(std::vector<double>(x.begin(), x.begin() + 6), std::vector<double>(6, 0.0));
  EXPECT_EQ(std::vector<double>(x.begin() + 6, x.end()), (std::vector<double>{0, 3, 0, 0, 3, 0}));
}

TEST(LocationStepInput, PseudoCandidatesUseSymbolVectors) {
  StepFixture f;
  Tape tape;
  auto h = constants(tape, f.states);
  auto m = find_mentions(f.p, f.e);
  auto candidates = extract_candidates(f.p);
  auto x = values(location_step_input(tape, f.model, f.p, h, m, candidates[null_index(candidates)], 1));
  const auto& sym = f.model.store().tensor(f.model.params().null_symbol).values;
  EXPECT_EQ(std::vector<double>(x.begin(), x.begin() + 6), sym);
}

}  // namespace

#include <gtest/gtest.h>

#include "entrack/corpus.hpp"
#include "entrack/location.hpp"
#include "entrack/random.hpp"
#include "oracles.hpp"

namespace {

using namespace entrack;

const char* kOneSentence =
    R"({"id":"p1","sentences":[[{"surface":"Water","pos":"NOUN","is_verb":false},)"
    R"({"surface":"evaporates","pos":"VERB","is_verb":true}]],)"
    R"("entities":[{"name":"water"}],"grid":[["lake","-"]]})";

TEST(ParseCanonical, EmptyInputIsEmptyCorpus) {
  EXPECT_TRUE(parse_canonical("").empty());
  EXPECT_TRUE(parse_canonical("\n\n").empty());
}

TEST(ParseCanonical, SingleSentenceParagraph) {
  auto c = parse_canonical(kOneSentence);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].id, "p1");
  EXPECT_EQ(c[0].steps(), 1u);
  EXPECT_EQ(c[0].sentences[0][1].pos, Pos::Verb);
  EXPECT_TRUE(c[0].sentences[0][1].is_verb);
  ASSERT_TRUE(c[0].grid);
  EXPECT_EQ(c[0].grid->rows[0][0], Cell::at("lake"));
  EXPECT_EQ(c[0].grid->rows[0][1], Cell::absent());
}

TEST(ParseCanonical, GridWidthMustBeStepsPlusOne) {
  std::string bad = kOneSentence;
  bad.replace(bad.find(R"(["lake","-"])"), 12, R"(["lake"])");
  try {
    parse_canonical(bad);
    FAIL() << "accepted a grid of width T";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.paragraph_id(), "p1");
    EXPECT_EQ(e.line(), 1u);
    EXPECT_NE(e.field().find("grid"), std::string::npos) << e.field();
  }
}

TEST(ParseCanonical, ErrorsNameTheLineAndField) {
  const std::string text = std::string(kOneSentence) + "\n" +
                           R"({"id":"p2","sentences":[[{"surface":"x","pos":"BOGUS","is_verb":false}]],)"
                           R"("entities":[{"name":"x"}]})";
  try {
    parse_canonical(text);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.paragraph_id(), "p2");
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(e.field().find("pos"), std::string::npos) << e.field();
  }
}

TEST(ParseCanonical, VerbFlagMustAgreeWithPos) {
  std::string bad = kOneSentence;
  bad.replace(bad.find(R"("is_verb":true)"), 14, R"("is_verb":false)");
  EXPECT_THROW(parse_canonical(bad), ParseError);
}

TEST(ParseCanonical, RejectsEmptySentencesAndMissingEntities) {
  EXPECT_THROW(parse_canonical(R"({"id":"a","sentences":[[]],"entities":[{"name":"x"}]})"), ParseError);
  EXPECT_THROW(
      parse_canonical(R"({"id":"a","sentences":[[{"surface":"x","pos":"NOUN","is_verb":false}]],"entities":[]})"),
      ParseError);
  EXPECT_THROW(parse_canonical("{not json"), ParseError);
}

TEST(ParseCanonical, AliasesSplitOnSemicolon) {
  auto c = parse_canonical(
      R"({"id":"a","sentences":[[{"surface":"x","pos":"NOUN","is_verb":false}]],"entities":[{"name":"rock; rocks"}]})");
  ASSERT_EQ(c[0].entities[0].aliases.size(), 2u);
  EXPECT_EQ(c[0].entities[0].canonical_name, "rock");
  EXPECT_EQ(c[0].entities[0].aliases[1], "rocks");
}

TEST(ParseCanonical, WriteThenParseRoundTrips) {
  auto c = parse_canonical(kOneSentence);
  auto again = parse_canonical(write_canonical(c));
  ASSERT_EQ(again.size(), 1u);
  EXPECT_EQ(again[0].grid, c[0].grid);
  EXPECT_EQ(again[0].sentences[0][0].surface, "Water");
  EXPECT_EQ(write_canonical(again), write_canonical(c));
}

TEST(Normalize, CaseArticlesAndWhitespace) {
  EXPECT_EQ(normalize_location("The  Soil "), "soil");
  EXPECT_EQ(normalize_location("an apple tree"), "apple tree");
  EXPECT_EQ(normalize_location("A leaf"), "leaf");
  EXPECT_EQ(normalize_location("theater"), "theater");
  EXPECT_EQ(normalize_location("deep in the earth"), "deep in the earth");
}

TEST(GoldTags, SpecExamples) {
  EXPECT_EQ(gold_tags_from_grid(oracle::parse_row("- | - | -")), oracle::from_letters("BB"));
  EXPECT_EQ(gold_tags_from_grid(oracle::parse_row("soil | soil | leaf")), oracle::from_letters("EM"));
  EXPECT_EQ(gold_tags_from_grid(oracle::parse_row("- | ? | leaf | -")), oracle::from_letters("CED"));
}

TEST(GoldTags, RecreationIsAnAnnotationError) {
  EXPECT_THROW(gold_tags_from_grid(oracle::parse_row("- | soil | - | soil")), AnnotationError);
}

TEST(GoldTags, FlaggedParagraphReportsEntity) {
  Paragraph p;
  p.id = "flag";
  p.sentences = {oracle::sentence("a/N"), oracle::sentence("b/N"), oracle::sentence("c/N")};
  p.entities = {{"good", {"good"}}, {"bad", {"bad"}}};
  p.grid = EntityGrid{{oracle::parse_row("- | x | x | x"), oracle::parse_row("- | x | - | x")}};
  auto g = derive_gold_tags(p);
  EXPECT_FALSE(g.ok());
  ASSERT_EQ(g.errors.size(), 1u);
  EXPECT_NE(g.errors[0].find("bad"), std::string::npos) << g.errors[0];
}

Cell random_cell(Rng& rng) {
  static const std::vector<std::string> places = {"soil", "leaf", "root"};
  switch (rng.below(3)) {
    case 0: return Cell::absent();
    case 1: return Cell::unknown();
    default: return Cell::at(rng.choice(places));
  }
}

// Random rows of the shape "absent prefix, existence, absent suffix" never
// re-create, so derivation must succeed, the tags must lie in the lifecycle
// language, and the existence pattern must round-trip.
TEST(GoldTags, PropertyRoundTripOnRandomRows) {
  Rng rng(17);
  for (int trial = 0; trial < 3000; ++trial) {
    const std::size_t width = 2 + rng.below(8);
    const std::size_t born = rng.below(width + 1);
    const std::size_t dies = born + rng.below(width - born + 1);
    GridRow row(width, Cell::absent());
    for (std::size_t i = born; i < dies; ++i) {
      row[i] = random_cell(rng);
      while (!row[i].exists()) row[i] = random_cell(rng);
    }
    auto tags = gold_tags_from_grid(row);
    ASSERT_EQ(tags.size(), width - 1);
    ASSERT_TRUE(oracle::lifecycle_ok(tags)) << oracle::letters(tags);
    auto exists = existence_from_tags(tags);
    for (std::size_t i = 0; i < width; ++i) ASSERT_EQ(exists[i], row[i].exists()) << oracle::letters(tags);
  }
}

TEST(LocationTargets, SpecExamples) {
  Paragraph p;
  p.id = "t";
  p.sentences = {oracle::sentence("The seed/N sits in soil/N"), oracle::sentence("then a leaf/N and the earth/N")};
  p.entities = {{"seed", {"seed"}}};
  auto candidates = extract_candidates(p);
  const auto unk = unk_index(candidates);

  auto targets = gold_location_targets(oracle::parse_row("- | soil | deep in the earth"), candidates);
  ASSERT_EQ(targets.size(), 2u);
  ASSERT_TRUE(targets[0]);
  EXPECT_EQ(candidates[*targets[0]].normalized_text, "soil");
  ASSERT_TRUE(targets[1]);
  EXPECT_EQ(*targets[1], unk);  // "deep in the earth" has no exact candidate

  auto masked = gold_location_targets(oracle::parse_row("soil | - | ?"), candidates);
  EXPECT_FALSE(masked[0]);
  ASSERT_TRUE(masked[1]);
  EXPECT_EQ(*masked[1], unk);

  auto leaf = gold_location_targets(oracle::parse_row("- | The Leaf | leaf"), candidates);
  EXPECT_EQ(candidates[*leaf[0]].normalized_text, "leaf");
}

TEST(Paragraph, SentenceOffsets) {
  Paragraph p;
  p.sentences = {oracle::sentence("a b c"), oracle::sentence("d"), oracle::sentence("e f")};
  EXPECT_EQ(p.token_count(), 6u);
  EXPECT_EQ(p.sentence_offset(0), 0u);
  EXPECT_EQ(p.sentence_offset(1), 3u);
  EXPECT_EQ(p.sentence_offset(2), 4u);
}

}  // namespace

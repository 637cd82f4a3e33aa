#include <gtest/gtest.h>

#include <algorithm>

#include "entrack/evaluation.hpp"
#include "entrack/random.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace {

using namespace entrack;

EventAnswer yes(std::vector<std::size_t> steps, std::vector<std::string> locations) {
  return {true, std::move(steps), std::move(locations)};
}

TEST(Task1, CreateMoveDestroyRow) {
  auto a = derive_task1(oracle::parse_row("- | soil | leaf | -"));
  EXPECT_EQ(a.created, yes({1}, {"soil"}));
  EXPECT_EQ(a.moved, yes({2}, {"soil->leaf"}));
  EXPECT_EQ(a.destroyed, yes({3}, {"leaf"}));
}

TEST(Task1, AbsentAndStaticRowsAnswerNo) {
  for (const char* row : {"- | - | -", "soil | soil"}) {
    auto a = derive_task1(oracle::parse_row(row));
    EXPECT_FALSE(a.created.yes);
    EXPECT_FALSE(a.moved.yes);
    EXPECT_FALSE(a.destroyed.yes);
  }
}

TEST(Task1, FixtureTable) {
  const auto cases = oracle::load_task1_cases();
  ASSERT_GE(cases.size(), 30u);
  for (const auto& c : cases) {
    SCOPED_TRACE("fixture line " + std::to_string(c.line) + ": " + c.grid_text);
    if (!c.tags) {
      EXPECT_THROW(gold_tags_from_grid(c.row), AnnotationError);
      continue;
    }
    EXPECT_EQ(oracle::letters(gold_tags_from_grid(c.row)), oracle::letters(*c.tags));
    EXPECT_EQ(derive_task1(c.row), c.answers);
  }
}

TEST(Task1, IdenticalAnswersScoreHundred) {
  std::vector<Task1Answers> gold;
  for (const auto& c : oracle::load_task1_cases()) {
    if (c.tags) gold.push_back(c.answers);
  }
  auto s = score_task1(gold, gold);
  EXPECT_EQ(s.cat1.score(), 100.0);
  EXPECT_EQ(s.cat2.score(), 100.0);
  EXPECT_EQ(s.cat3.score(), 100.0);
  EXPECT_EQ(s.macro(), 100.0);
  EXPECT_EQ(s.micro(), 100.0);
}

TEST(Task1, AllNoWithoutGoldEventsIsVacuous) {
  std::vector<Task1Answers> gold(4), pred(4);
  auto s = score_task1(pred, gold);
  EXPECT_EQ(s.cat1.score(), 100.0);
  EXPECT_EQ(s.cat1.total, 12u);
  EXPECT_EQ(s.cat2.total, 0u);
  EXPECT_EQ(s.cat2.score(), 0.0);
  EXPECT_EQ(s.cat3.total, 0u);
  EXPECT_EQ(s.cat3.score(), 0.0);
}

TEST(Task1, EntityCountMismatchThrows) {
  EXPECT_THROW(score_task1(std::vector<Task1Answers>(2), std::vector<Task1Answers>(3)), std::invalid_argument);
}

Paragraph gold_paragraph(std::string id, std::vector<std::string> names, std::vector<std::string> rows) {
  Paragraph p;
  p.id = std::move(id);
  const std::size_t steps = oracle::parse_row(rows[0]).size() - 1;
  for (std::size_t t = 0; t < steps; ++t) p.sentences.push_back(oracle::sentence("s"));
  EntityGrid g;
  for (std::size_t e = 0; e < names.size(); ++e) {
    p.entities.push_back({names[e], {names[e]}});
    g.rows.push_back(oracle::parse_row(rows[e]));
  }
  p.grid = g;
  return p;
}

EntityPrediction predicted(std::string name, const char* tags, const char* row) {
  return {std::move(name), oracle::from_letters(tags), oracle::parse_row(row)};
}

// Three paragraphs scored by hand; the sheet is in the comments.
struct Sheet {
  std::vector<Paragraph> gold = {
      gold_paragraph("a", {"water", "vapor"}, {"lake | cloud | -", "- | - | cloud"}),
      gold_paragraph("b", {"seed"}, {"soil | soil"}),
      gold_paragraph("c", {"rock"}, {"- | cave | cave | river"}),
  };
  std::vector<ParagraphPrediction> pred = {
      // water: moved step ok, location wrong; destroyed step ok, location wrong.
      // vapor: creation missed.
      {"a", {predicted("water", "MD", "lake | river | -"), predicted("vapor", "BB", "- | - | -")}},
      // seed: spurious move.
      {"b", {predicted("seed", "M", "soil | leaf")}},
      // rock: creation right; an extra move at step 2 breaks strict step and location credit.
      {"c", {predicted("rock", "CMM", "- | cave | lake | river")}},
  };
};

TEST(Evaluate, HandScoredSheetStrict) {
  Sheet s;
  auto r = evaluate(s.gold, s.pred);
  EXPECT_EQ(r.paragraphs, 3u);
  EXPECT_EQ(r.entities, 4u);
  // Cat-1: 12 judgments, wrong on vapor/created and seed/moved.
  EXPECT_EQ(r.task1.cat1.correct, 10u);
  EXPECT_EQ(r.task1.cat1.total, 12u);
  // Cat-2: gold events water/moved, water/destroyed, vapor/created, rock/created, rock/moved.
  EXPECT_EQ(r.task1.cat2.correct, 3u);
  EXPECT_EQ(r.task1.cat2.total, 5u);
  // Cat-3: only rock/created has the right location.
  EXPECT_EQ(r.task1.cat3.correct, 1u);
  EXPECT_EQ(r.task1.cat3.total, 5u);
  EXPECT_DOUBLE_EQ(r.task1.micro(), 100.0 * 14.0 / 22.0);
  EXPECT_DOUBLE_EQ(r.task1.macro(), (100.0 * 10 / 12 + 60.0 + 20.0) / 3.0);
  // Task 2. Gold: input water, output vapor, conversion water>vapor@2 cloud,
  // move water@1, output rock, move rock@3. Predicted: input water, move
  // water@1 lake>river, move seed@1, output rock, two rock moves.
  EXPECT_EQ(r.task2.gold, 6u);
  EXPECT_EQ(r.task2.predicted, 6u);
  EXPECT_EQ(r.task2.matched, 2u);
  EXPECT_NEAR(r.task2.f1(), 100.0 / 3.0, 1e-12);
}

TEST(Evaluate, HandScoredSheetAnyMove) {
  Sheet s;
  auto r = evaluate(s.gold, s.pred, Task1Options{false});
  EXPECT_EQ(r.task1.cat2.correct, 4u);  // rock/moved now credited on step 3
  EXPECT_EQ(r.task1.cat3.correct, 1u);  // no predicted move is cave->river
}

TEST(Evaluate, SymmetricUnderParagraphReordering) {
  Sheet s;
  const auto base = evaluate(s.gold, s.pred).to_json();
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    rng.shuffle(s.gold);
    rng.shuffle(s.pred);
    EXPECT_EQ(evaluate(s.gold, s.pred).to_json(), base);
  }
}

TEST(Evaluate, PerfectPredictionScoresHundred) {
  Sheet s;
  std::vector<ParagraphPrediction> perfect;
  for (const auto& p : s.gold) {
    ParagraphPrediction pp{p.id, {}};
    for (std::size_t e = 0; e < p.entities.size(); ++e) {
      pp.entities.push_back({p.entities[e].canonical_name, gold_tags_from_grid(p.grid->rows[e]), p.grid->rows[e]});
    }
    perfect.push_back(pp);
  }
  auto r = evaluate(s.gold, perfect);
  EXPECT_EQ(r.task1.cat1.score(), 100.0);
  EXPECT_EQ(r.task1.cat2.score(), 100.0);
  EXPECT_EQ(r.task1.cat3.score(), 100.0);
  EXPECT_EQ(r.task2.f1(), 100.0);
}

TEST(Evaluate, MismatchesThrow) {
  Sheet s;
  auto missing = s.pred;
  missing.pop_back();
  EXPECT_THROW(evaluate(s.gold, missing), std::invalid_argument);
  auto renamed = s.pred;
  renamed[1].entities[0].name = "rock";
  EXPECT_THROW(evaluate(s.gold, renamed), std::invalid_argument);
}

TEST(Evaluate, AnnotationErrorsAreSkipped) {
  Sheet s;
  s.gold[1].grid->rows[0] = oracle::parse_row("soil | -");
  s.gold.push_back(gold_paragraph("d", {"x"}, {"- | soil | - | soil"}));
  s.pred.push_back({"d", {predicted("x", "BBB", "- | - | - | -")}});
  auto r = evaluate(s.gold, s.pred);
  EXPECT_EQ(r.skipped_paragraphs, 1u);
  EXPECT_EQ(r.paragraphs, 3u);
}

TEST(Report, JsonAndTableCarryScores) {
  Sheet s;
  auto r = evaluate(s.gold, s.pred);
  EXPECT_NE(r.to_json().find("\"cat1\""), std::string::npos);
  EXPECT_NE(r.to_table().find("Cat-1"), std::string::npos);
  EXPECT_NE(r.to_table().find("83.33"), std::string::npos);
}

TEST(Task2, FixtureTable) {
  const auto cases = oracle::load_task2_cases();
  ASSERT_GE(cases.size(), 10u);
  for (const auto& c : cases) {
    SCOPED_TRACE(c.name);
    std::vector<TagSequence> tags;
    for (const auto& row : c.rows) tags.push_back(gold_tags_from_grid(row));
    auto got = derive_task2(c.entities, tags, c.rows);
    EXPECT_EQ(got.inputs, c.expected.inputs);
    EXPECT_EQ(got.outputs, c.expected.outputs);
    EXPECT_EQ(got.conversions, c.expected.conversions);
    EXPECT_EQ(got.moves, c.expected.moves);
  }
}

TEST(Task2, OneSpuriousOneMissingOfFour) {
  Task2Tuples gold;
  gold.inputs = {"water"};
  gold.outputs = {"sugar"};
  gold.conversions = {{{"water"}, {"sugar"}, 2, "leaf"}};
  gold.moves = {{"water", 1, "soil", "leaf"}};
  Task2Tuples pred = gold;
  pred.moves = {{"water", 1, "soil", "root"}};
  auto s = score_task2({pred}, {gold});
  EXPECT_DOUBLE_EQ(s.precision(), 75.0);
  EXPECT_DOUBLE_EQ(s.recall(), 75.0);
  EXPECT_DOUBLE_EQ(s.f1(), 75.0);
}

TEST(Task2, EmptyPredictionConvention) {
  Task2Tuples gold;
  gold.outputs = {"sugar"};
  auto s = score_task2({Task2Tuples{}}, {gold});
  EXPECT_EQ(s.precision(), 0.0);
  EXPECT_EQ(s.recall(), 0.0);
  EXPECT_EQ(s.f1(), 0.0);
  auto same = score_task2({gold}, {gold});
  EXPECT_EQ(same.f1(), 100.0);
}

}  // namespace

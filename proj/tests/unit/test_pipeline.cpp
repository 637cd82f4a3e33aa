#include <gtest/gtest.h>

#include <algorithm>
#include <tuple>

#include "entrack/crf.hpp"
#include "entrack/pipeline.hpp"
#include "entrack/random.hpp"
#include "entrack/synth.hpp"
#include "tiny.hpp"

namespace {

using namespace entrack;

// Picker answering from a fixed script keyed by (kind, step).
LocationPicker scripted(std::vector<std::tuple<PickKind, std::size_t, Cell>> script) {
  return [script](PickKind kind, std::size_t step, const Cell&) {
    for (const auto& [k, s, c] : script) {
      if (k == kind && s == step) return c;
    }
    ADD_FAILURE() << "unexpected query at step " << step;
    return Cell::unknown();
  };
}

TEST(FillGrid, AllOutsideIsAbsent) {
  auto row = fill_grid(oracle::from_letters("BBB"), scripted({}));
  EXPECT_EQ(row, oracle::parse_row("- | - | - | -"));
}

TEST(FillGrid, CreateEditMove) {
  auto row = fill_grid(oracle::from_letters("CEM"), scripted({{PickKind::Create, 0, Cell::at("soil")},
                                                              {PickKind::Move, 2, Cell::at("leaf")}}));
  EXPECT_EQ(row, oracle::parse_row("- | soil | soil | leaf"));
}

TEST(FillGrid, PreexistingThenDestroyed) {
  auto row = fill_grid(oracle::from_letters("ED"), scripted({{PickKind::Initial, 0, Cell::at("soil")}}));
  EXPECT_EQ(row, oracle::parse_row("soil | soil | -"));
}

TEST(FillGrid, DestroyAtFirstStepQueriesInitial) {
  auto row = fill_grid(oracle::from_letters("DAA"), scripted({{PickKind::Initial, 0, Cell::unknown()}}));
  EXPECT_EQ(row, oracle::parse_row("? | - | - | -"));
}

TEST(FillGrid, MovePassesPreviousCell) {
  Cell seen;
  auto row = fill_grid(oracle::from_letters("BCEM"), [&](PickKind kind, std::size_t, const Cell& previous) {
    if (kind == PickKind::Move) {
      seen = previous;
      return Cell::at("root");
    }
    return Cell::at("stem");
  });
  EXPECT_EQ(seen, Cell::at("stem"));
  EXPECT_EQ(row, oracle::parse_row("- | - | stem | stem | root"));
}

// The fill rule inverts the derivation rule whenever the picker honours the
// move contract.
TEST(FillGrid, PropertyRoundTripsThroughDerivation) {
  Rng rng(21);
  const std::vector<std::string> places = {"soil", "leaf", "root", "cave"};
  for (std::size_t steps = 1; steps <= 7; ++steps) {
    for (const auto& tags : oracle::all_lifecycles(steps)) {
      auto pick = [&](PickKind kind, std::size_t, const Cell& previous) {
        Cell c = Cell::at(rng.choice(places));
        while (kind == PickKind::Move && c == previous) c = Cell::at(rng.choice(places));
        return c;
      };
      auto row = fill_grid(tags, pick);
      ASSERT_EQ(row.size(), steps + 1);
      ASSERT_EQ(gold_tags_from_grid(row), tags) << oracle::letters(tags);
      auto exists = existence_from_tags(tags);
      for (std::size_t i = 0; i <= steps; ++i) ASSERT_EQ(row[i].exists(), exists[i]);
    }
  }
}

struct Trained {
  std::vector<Paragraph> corpus;
  Model model = tiny::model();

  Trained() {
    SynthConfig sc;
    sc.embedding_dim = 4;
    corpus = synth_corpus(3, 6, sc);
    assign_embedding_ids(corpus, tiny::embeddings());
  }
};

TEST(Decode, ProducesValidSequencesAndConsistentGrids) {
  Trained t;
  for (const auto& p : t.corpus) {
    auto pred = decode(t.model, p);
    EXPECT_EQ(pred.id, p.id);
    ASSERT_EQ(pred.entities.size(), p.entities.size());
    for (std::size_t e = 0; e < p.entities.size(); ++e) {
      const auto& ep = pred.entities[e];
      EXPECT_EQ(ep.name, p.entities[e].canonical_name);
      EXPECT_TRUE(oracle::lifecycle_ok(ep.tags)) << oracle::letters(ep.tags);
      ASSERT_EQ(ep.row.size(), p.steps() + 1);
      auto exists = existence_from_tags(ep.tags);
      for (std::size_t i = 0; i < ep.row.size(); ++i) EXPECT_EQ(ep.row[i].exists(), exists[i]);
    }
  }
}

TEST(Decode, DeterministicAcrossRunsAndThreads) {
  Trained t;
  auto a = decode_corpus(t.model, t.corpus, 1);
  auto b = decode_corpus(t.model, t.corpus, 1);
  auto c = decode_corpus(t.model, t.corpus, 3);
  EXPECT_EQ(write_predictions(a, "full6"), write_predictions(b, "full6"));
  EXPECT_EQ(write_predictions(a, "full6"), write_predictions(c, "full6"));
}

TEST(Decode, SortedById) {
  Trained t;
  std::reverse(t.corpus.begin(), t.corpus.end());
  auto preds = decode_corpus(t.model, t.corpus, 2);
  for (std::size_t i = 1; i < preds.size(); ++i) EXPECT_LT(preds[i - 1].id, preds[i].id);
}

TEST(Decode, EmptyCorpusGivesEmptyOutput) {
  Trained t;
  auto preds = decode_corpus(t.model, {}, 2);
  EXPECT_TRUE(preds.empty());
  EXPECT_TRUE(write_predictions(preds, "full6").empty());
  EXPECT_TRUE(export_grid_tsv(preds).empty());
}

TEST(Predictions, WriteParseRoundTrip) {
  Trained t;
  auto preds = decode_corpus(t.model, t.corpus);
  const auto text = write_predictions(preds, "full6");
  auto again = parse_predictions(text);
  ASSERT_EQ(again.size(), preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    EXPECT_EQ(again[i].id, preds[i].id);
    EXPECT_EQ(again[i].grid(), preds[i].grid());
    for (std::size_t e = 0; e < preds[i].entities.size(); ++e) {
      EXPECT_EQ(again[i].entities[e].tags, preds[i].entities[e].tags);
    }
  }
  EXPECT_EQ(write_predictions(again, "full6"), text);
  EXPECT_NE(text.find("step1_distribution"), std::string::npos);
}

TEST(Predictions, TsvHasOneLinePerCell) {
  ParagraphPrediction p{"p1", {{"water", oracle::from_letters("CD"), oracle::parse_row("- | soil | -")}}};
  EXPECT_EQ(export_grid_tsv({p}),
            "p1\t0\twater\tNONE\t-\n"
            "p1\t1\twater\tCREATE\tsoil\n"
            "p1\t2\twater\tDESTROY\t-\n");
}

}  // namespace

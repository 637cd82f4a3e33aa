#include "entrack/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace entrack {

namespace {

std::string location_of(const Cell& c) {
  return c.kind == Cell::Kind::Location ? normalize_location(c.location) : std::string("?");
}

}  // namespace

Task1Answers derive_task1(const TagSequence& tags, const GridRow& row) {
  if (row.size() != tags.size() + 1) throw std::invalid_argument("derive_task1: row width must be tags + 1");
  Task1Answers a;
  for (std::size_t t = 0; t < tags.size(); ++t) {
    const std::size_t step = t + 1;
    switch (tags[t]) {
      case Tag::C:
        a.created.yes = true;
        a.created.steps.push_back(step);
        a.created.locations.push_back(location_of(row[t + 1]));
        break;
      case Tag::D:
        a.destroyed.yes = true;
        a.destroyed.steps.push_back(step);
        a.destroyed.locations.push_back(location_of(row[t]));
        break;
      case Tag::M:
        a.moved.yes = true;
        a.moved.steps.push_back(step);
        a.moved.locations.push_back(location_of(row[t]) + "->" + location_of(row[t + 1]));
        break;
      default:
        break;
    }
  }
  return a;
}

Task1Answers derive_task1(const GridRow& row) { return derive_task1(gold_tags_from_grid(row), row); }

double Task1Scores::micro() const {
  const std::size_t total = cat1.total + cat2.total + cat3.total;
  if (total == 0) return 0.0;
  return 100.0 * static_cast<double>(cat1.correct + cat2.correct + cat3.correct) / static_cast<double>(total);
}

namespace {

bool steps_match(const EventAnswer& p, const EventAnswer& g, bool strict) {
  if (!p.yes) return false;
  if (strict) return p.steps == g.steps;
  return std::any_of(g.steps.begin(), g.steps.end(), [&](std::size_t s) {
    return std::find(p.steps.begin(), p.steps.end(), s) != p.steps.end();
  });
}

bool locations_match(const EventAnswer& p, const EventAnswer& g, bool strict) {
  if (!p.yes) return false;
  if (strict) return p.locations == g.locations;
  return std::any_of(g.locations.begin(), g.locations.end(), [&](const std::string& s) {
    return std::find(p.locations.begin(), p.locations.end(), s) != p.locations.end();
  });
}

void score_event(const EventAnswer& p, const EventAnswer& g, bool strict, Task1Scores& s) {
  ++s.cat1.total;
  if (p.yes == g.yes) ++s.cat1.correct;
  if (!g.yes) return;
  ++s.cat2.total;
  ++s.cat3.total;
  if (steps_match(p, g, strict)) ++s.cat2.correct;
  if (locations_match(p, g, strict)) ++s.cat3.correct;
}

}  // namespace

Task1Scores score_task1(const std::vector<Task1Answers>& predicted, const std::vector<Task1Answers>& gold,
                        const Task1Options& options) {
  if (predicted.size() != gold.size()) throw std::invalid_argument("score_task1: entity count mismatch");
  Task1Scores s;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    // Created and Destroyed happen at most once, so strictness only matters for moves.
    score_event(predicted[i].created, gold[i].created, true, s);
    score_event(predicted[i].moved, gold[i].moved, options.strict_moves, s);
    score_event(predicted[i].destroyed, gold[i].destroyed, true, s);
  }
  return s;
}

Task2Tuples derive_task2(const std::vector<std::string>& names, const std::vector<TagSequence>& tags,
                         const std::vector<GridRow>& rows) {
  if (names.size() != tags.size() || names.size() != rows.size()) {
    throw std::invalid_argument("derive_task2: entity count mismatch");
  }
  Task2Tuples out;
  std::map<std::size_t, std::vector<std::size_t>> created_at, destroyed_at;
  for (std::size_t e = 0; e < names.size(); ++e) {
    const auto& seq = tags[e];
    const auto& row = rows[e];
    const bool has_c = std::find(seq.begin(), seq.end(), Tag::C) != seq.end();
    const bool has_d = std::find(seq.begin(), seq.end(), Tag::D) != seq.end();
    if (row.at(0).exists() && has_d && !has_c) out.inputs.push_back(names[e]);
    if (has_c && !has_d) out.outputs.push_back(names[e]);
    for (std::size_t t = 0; t < seq.size(); ++t) {
      if (seq[t] == Tag::C) created_at[t].push_back(e);
      if (seq[t] == Tag::D) destroyed_at[t].push_back(e);
      if (seq[t] == Tag::M) out.moves.push_back({names[e], t + 1, location_of(row[t]), location_of(row[t + 1])});
    }
  }
  for (const auto& [t, created] : created_at) {
    auto it = destroyed_at.find(t);
    if (it == destroyed_at.end()) continue;
    Conversion c;
    c.step = t + 1;
    std::set<std::string> before, after;
    for (std::size_t e : it->second) {
      c.destroyed.push_back(names[e]);
      if (rows[e][t].kind == Cell::Kind::Location) before.insert(location_of(rows[e][t]));
    }
    for (std::size_t e : created) {
      c.created.push_back(names[e]);
      if (rows[e][t + 1].kind == Cell::Kind::Location) after.insert(location_of(rows[e][t + 1]));
    }
    c.location = "?";
    for (const auto& l : after) {
      if (before.count(l)) {
        c.location = l;
        break;
      }
    }
    if (c.location == "?" && !after.empty()) c.location = *after.begin();
    std::sort(c.destroyed.begin(), c.destroyed.end());
    std::sort(c.created.begin(), c.created.end());
    out.conversions.push_back(std::move(c));
  }
  std::sort(out.inputs.begin(), out.inputs.end());
  std::sort(out.outputs.begin(), out.outputs.end());
  std::sort(out.moves.begin(), out.moves.end());
  return out;
}

double Task2Scores::precision() const {
  return predicted == 0 ? 0.0 : 100.0 * static_cast<double>(matched) / static_cast<double>(predicted);
}
double Task2Scores::recall() const {
  return gold == 0 ? 0.0 : 100.0 * static_cast<double>(matched) / static_cast<double>(gold);
}
double Task2Scores::f1() const {
  const double p = precision(), r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

namespace {

template <typename T>
std::size_t multiset_overlap(std::vector<T> a, std::vector<T> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<T> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  return common.size();
}

}  // namespace

Task2Scores score_task2(const std::vector<Task2Tuples>& predicted, const std::vector<Task2Tuples>& gold) {
  if (predicted.size() != gold.size()) throw std::invalid_argument("score_task2: paragraph count mismatch");
  Task2Scores s;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto& p = predicted[i];
    const auto& g = gold[i];
    s.predicted += p.inputs.size() + p.outputs.size() + p.conversions.size() + p.moves.size();
    s.gold += g.inputs.size() + g.outputs.size() + g.conversions.size() + g.moves.size();
    s.matched += multiset_overlap(p.inputs, g.inputs) + multiset_overlap(p.outputs, g.outputs) +
                 multiset_overlap(p.conversions, g.conversions) + multiset_overlap(p.moves, g.moves);
  }
  return s;
}

EvaluationReport evaluate(const std::vector<Paragraph>& gold, const std::vector<ParagraphPrediction>& predicted,
                          const Task1Options& options) {
  std::map<std::string, const ParagraphPrediction*> by_id;
  for (const auto& p : predicted) by_id[p.id] = &p;

  EvaluationReport report;
  std::vector<Task1Answers> pred1, gold1;
  std::vector<Task2Tuples> pred2, gold2;
  for (const auto& para : gold) {
    if (!para.grid) throw std::invalid_argument("paragraph '" + para.id + "' has no gold grid");
    auto it = by_id.find(para.id);
    if (it == by_id.end()) throw std::invalid_argument("no prediction for paragraph '" + para.id + "'");
    const auto& pred = *it->second;
    if (pred.entities.size() != para.entities.size()) {
      throw std::invalid_argument("paragraph '" + para.id + "': entity count mismatch");
    }
    for (std::size_t e = 0; e < para.entities.size(); ++e) {
      if (pred.entities[e].name != para.entities[e].canonical_name) {
        throw std::invalid_argument("paragraph '" + para.id + "': entity '" + pred.entities[e].name +
                                    "' does not match gold '" + para.entities[e].canonical_name + "'");
      }
    }
    auto tags = derive_gold_tags(para);
    if (!tags.ok()) {
      ++report.skipped_paragraphs;
      continue;
    }
    ++report.paragraphs;
    std::vector<std::string> names;
    std::vector<TagSequence> ptags;
    std::vector<GridRow> prows;
    for (std::size_t e = 0; e < para.entities.size(); ++e) {
      ++report.entities;
      const auto& row = para.grid->rows[e];
      gold1.push_back(derive_task1(tags.per_entity[e], row));
      pred1.push_back(derive_task1(pred.entities[e].tags, pred.entities[e].row));
      names.push_back(para.entities[e].canonical_name);
      ptags.push_back(pred.entities[e].tags);
      prows.push_back(pred.entities[e].row);
    }
    gold2.push_back(derive_task2(names, tags.per_entity, para.grid->rows));
    pred2.push_back(derive_task2(names, ptags, prows));
  }
  report.task1 = score_task1(pred1, gold1, options);
  report.task2 = score_task2(pred2, gold2);
  return report;
}

std::string EvaluationReport::to_json() const {
  auto cat = [](const CategoryScore& c) {
    return nlohmann::json{{"score", c.score()}, {"correct", c.correct}, {"total", c.total}};
  };
  nlohmann::json j = {
      {"paragraphs", paragraphs},
      {"entities", entities},
      {"skipped_paragraphs", skipped_paragraphs},
      {"task1",
       {{"cat1", cat(task1.cat1)},
        {"cat2", cat(task1.cat2)},
        {"cat3", cat(task1.cat3)},
        {"macro", task1.macro()},
        {"micro", task1.micro()}}},
      {"task2",
       {{"precision", task2.precision()},
        {"recall", task2.recall()},
        {"f1", task2.f1()},
        {"predicted", task2.predicted},
        {"gold", task2.gold},
        {"matched", task2.matched}}},
  };
  return j.dump(2);
}

std::string EvaluationReport::to_table() const {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%-8s %-8s %-8s %-10s %-10s | %-8s %-8s %-8s\n"
                "%-8.2f %-8.2f %-8.2f %-10.2f %-10.2f | %-8.2f %-8.2f %-8.2f\n",
                "Cat-1", "Cat-2", "Cat-3", "Macro-Avg", "Micro-Avg", "P", "R", "F1", task1.cat1.score(),
                task1.cat2.score(), task1.cat3.score(), task1.macro(), task1.micro(), task2.precision(),
                task2.recall(), task2.f1());
  return buf;
}

}  // namespace entrack

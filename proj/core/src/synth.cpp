#include "entrack/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>

#include "entrack/random.hpp"

namespace entrack {

namespace {

const std::vector<std::string> kEntities = {
    "water", "sugar", "seed",  "rock",   "sediment", "oxygen", "carbon dioxide", "magma",
    "ice",   "salt",  "spore", "pollen", "nutrient", "mineral", "glucose",       "vapor"};
const std::vector<std::string> kPlaces = {"soil",  "leaf", "root",  "river", "cloud", "ocean",
                                          "stem",  "cave", "lake",  "air",   "valley", "crust"};
const std::vector<std::string> kAdjectives = {"wet", "green", "deep", "cold"};

const std::vector<std::string> kCreateVerbs = {"forms", "appears", "develops", "emerges"};
const std::vector<std::string> kMoveVerbs = {"moves", "travels", "flows", "drifts"};
const std::vector<std::string> kDestroyVerbs = {"disappears", "dissolves", "decays", "evaporates"};
const std::vector<std::string> kConvertVerbs = {"turns", "changes"};
const std::vector<std::string> kStayVerbs = {"stays", "remains", "rests"};
const std::vector<std::string> kFillerVerbs = {"passes", "continues"};
const std::vector<std::string> kFunction = {"the", "in", "from", "to", "into", ".", "time", "process"};

struct Builder {
  std::vector<Token> tokens;

  Builder& word(const std::string& w, Pos pos) {
    tokens.push_back({w, pos, pos == Pos::Verb, 0});
    return *this;
  }
  Builder& other(const std::string& w) { return word(w, Pos::Other); }
  Builder& verb(const std::string& w) { return word(w, Pos::Verb); }
  Builder& nouns(const std::string& phrase) {
    for (const auto& w : split_words(phrase)) word(w, Pos::Noun);
    return *this;
  }
  Builder& place(const std::string& phrase) {
    auto words = split_words(phrase);
    for (std::size_t i = 0; i < words.size(); ++i) word(words[i], i + 1 < words.size() ? Pos::Adj : Pos::Noun);
    return *this;
  }
  std::vector<Token> done() {
    tokens.front().surface[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(tokens.front().surface[0])));
    return std::move(tokens);
  }
};

enum class Status { NotYet, Exists, Gone };

struct EntityState {
  Status status = Status::NotYet;
  Cell cell = Cell::absent();
};

std::string random_place(Rng& rng) {
  std::string p = rng.choice(kPlaces);
  if (rng.coin(0.25)) p = rng.choice(kAdjectives) + " " + p;
  return p;
}

std::string other_place(Rng& rng, const Cell& current) {
  for (;;) {
    auto p = random_place(rng);
    if (current.kind != Cell::Kind::Location || normalize_location(p) != normalize_location(current.location)) {
      return p;
    }
  }
}

Paragraph make_paragraph(Rng& rng, const std::string& id, const SynthConfig& config) {
  const std::size_t steps = config.min_steps + rng.below(config.max_steps - config.min_steps + 1);
  const std::size_t n_entities = config.min_entities + rng.below(config.max_entities - config.min_entities + 1);

  std::vector<std::string> pool = kEntities;
  rng.shuffle(pool);
  Paragraph p;
  p.id = id;
  std::vector<EntityState> state(n_entities);
  EntityGrid grid;
  grid.rows.assign(n_entities, {});
  for (std::size_t e = 0; e < n_entities; ++e) {
    p.entities.push_back({pool[e], {pool[e]}});
    if (rng.coin(0.5)) state[e] = {Status::Exists, Cell::at(random_place(rng))};
    grid.rows[e].push_back(state[e].cell);
  }

  for (std::size_t t = 0; t < steps; ++t) {
    std::vector<std::size_t> not_yet, located, existing;
    for (std::size_t e = 0; e < n_entities; ++e) {
      if (state[e].status == Status::NotYet) not_yet.push_back(e);
      if (state[e].status == Status::Exists) existing.push_back(e);
      if (state[e].status == Status::Exists && state[e].cell.kind == Cell::Kind::Location) located.push_back(e);
    }
    // Weighted choice among the actions that are possible right now.
    std::vector<std::pair<int, double>> actions = {{5, 0.5}};  // filler
    if (!not_yet.empty()) actions.push_back({0, 3.0});
    if (!located.empty()) actions.push_back({1, 3.0});
    if (!existing.empty()) actions.push_back({2, 2.0});
    if (!not_yet.empty() && !located.empty()) actions.push_back({3, 1.5});
    if (!located.empty()) actions.push_back({4, 1.0});
    double total = 0.0;
    for (auto& a : actions) total += a.second;
    double r = rng.unit() * total;
    int action = actions.back().first;
    for (auto& a : actions) {
      if (r < a.second) {
        action = a.first;
        break;
      }
      r -= a.second;
    }

    Builder b;
    switch (action) {
      case 0: {  // create
        const std::size_t e = rng.choice(not_yet);
        b.other("the").nouns(p.entities[e].canonical_name).verb(rng.choice(kCreateVerbs));
        if (rng.coin(config.unknown_create_rate)) {
          state[e] = {Status::Exists, Cell::unknown()};
        } else {
          const auto place = random_place(rng);
          b.other("in").other("the").place(place);
          state[e] = {Status::Exists, Cell::at(normalize_location(place))};
        }
        break;
      }
      case 1: {  // move
        const std::size_t e = rng.choice(located);
        const auto to = other_place(rng, state[e].cell);
        b.other("the").nouns(p.entities[e].canonical_name).verb(rng.choice(kMoveVerbs));
        if (rng.coin(0.5)) b.other("from").other("the").place(state[e].cell.location);
        b.other("to").other("the").place(to);
        state[e].cell = Cell::at(normalize_location(to));
        break;
      }
      case 2: {  // destroy
        const std::size_t e = rng.choice(existing);
        b.other("the").nouns(p.entities[e].canonical_name).verb(rng.choice(kDestroyVerbs));
        state[e] = {Status::Gone, Cell::absent()};
        break;
      }
      case 3: {  // conversion of one entity into another at the same place
        const std::size_t d = rng.choice(located);
        const std::size_t c = rng.choice(not_yet);
        const auto where = state[d].cell.location;
        b.other("the").nouns(p.entities[d].canonical_name).verb(rng.choice(kConvertVerbs)).other("into");
        b.nouns(p.entities[c].canonical_name).other("in").other("the").place(where);
        state[d] = {Status::Gone, Cell::absent()};
        state[c] = {Status::Exists, Cell::at(where)};
        break;
      }
      case 4: {  // stay
        const std::size_t e = rng.choice(located);
        b.other("the").nouns(p.entities[e].canonical_name).verb(rng.choice(kStayVerbs));
        b.other("in").other("the").place(state[e].cell.location);
        break;
      }
      default:
        b.other("time").verb(rng.choice(kFillerVerbs));
        break;
    }
    b.other(".");
    p.sentences.push_back(b.done());
    for (std::size_t e = 0; e < n_entities; ++e) grid.rows[e].push_back(state[e].cell);
  }
  p.grid = std::move(grid);
  return p;
}

}  // namespace

std::vector<Paragraph> synth_corpus(std::uint64_t seed, std::size_t n, const SynthConfig& config) {
  if (config.min_steps < 1 || config.max_steps < config.min_steps) {
    throw std::invalid_argument("synth: need 1 <= min_steps <= max_steps");
  }
  if (config.min_entities < 1 || config.max_entities < config.min_entities ||
      config.max_entities > kEntities.size()) {
    throw std::invalid_argument("synth: bad entity count range");
  }
  Rng rng(seed);
  std::vector<Paragraph> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    char id[64];
    std::snprintf(id, sizeof id, "synth-%llu-%05zu", static_cast<unsigned long long>(seed), i);
    out.push_back(make_paragraph(rng, id, config));
  }
  return out;
}

namespace {

std::vector<std::pair<std::string, int>> role_table() {
  std::vector<std::pair<std::string, int>> words;
  std::set<std::string> seen;
  auto add = [&](const std::vector<std::string>& list, int role) {
    for (const auto& phrase : list) {
      for (const auto& w : split_words(phrase)) {
        if (seen.insert(w).second) words.push_back({w, role});
      }
    }
  };
  add(kEntities, 0);
  add(kPlaces, 1);
  add(kAdjectives, 2);
  add(kCreateVerbs, 3);
  add(kMoveVerbs, 4);
  add(kDestroyVerbs, 5);
  add(kConvertVerbs, 6);
  add(kStayVerbs, 7);
  add(kFillerVerbs, 8);
  add(kFunction, 9);
  return words;
}

}  // namespace

std::vector<std::string> synth_vocabulary() {
  std::vector<std::string> out;
  for (auto& [w, role] : role_table()) out.push_back(w);
  return out;
}

Embeddings synth_embeddings(const SynthConfig& config) {
  const std::size_t d = config.embedding_dim;
  Rng rng(config.embedding_seed);
  std::map<int, std::vector<double>> centres;
  auto words = role_table();
  for (auto& [w, role] : words) {
    if (centres.count(role)) continue;
    std::vector<double> c(d);
    for (double& x : c) x = rng.normal();
    centres[role] = c;
  }
  std::vector<std::string> vocab;
  Tensor table = Tensor::zeros({words.size() + 1, d});
  for (std::size_t i = 0; i < words.size(); ++i) {
    vocab.push_back(words[i].first);
    const auto& c = centres[words[i].second];
    for (std::size_t k = 0; k < d; ++k) table.values[i * d + k] = 0.6 * c[k] + 0.6 * rng.normal();
  }
  vocab.emplace_back(kUnkToken);
  for (std::size_t k = 0; k < d; ++k) table.values[words.size() * d + k] = 0.1 * rng.normal();
  return Embeddings(std::move(vocab), std::move(table));
}

}  // namespace entrack

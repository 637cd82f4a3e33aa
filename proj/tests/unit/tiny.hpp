// Small models and paragraphs shared by the unit tests.

#pragma once

#include <string>
#include <vector>

#include "entrack/embeddings.hpp"
#include "entrack/model.hpp"
#include "entrack/synth.hpp"
#include "oracles.hpp"

namespace tiny {

inline entrack::Embeddings embeddings(std::size_t dim = 4) {
  entrack::SynthConfig sc;
  sc.embedding_dim = dim;
  return entrack::synth_embeddings(sc);
}

inline entrack::ModelConfig config(std::size_t hidden = 3) {
  entrack::ModelConfig mc;
  mc.token_hidden = mc.entity_hidden = mc.location_hidden = hidden;
  mc.init_range = 0.5;
  return mc;
}

inline entrack::Model model(const entrack::ModelConfig& mc = config(), std::uint64_t seed = 7) {
  return entrack::Model::create(mc, embeddings(), seed);
}

// Sentences in the oracle::sentence notation, with embedding ids assigned.
inline entrack::Paragraph paragraph(const std::vector<std::string>& sentences,
                                    const std::vector<std::string>& entities, const std::string& id = "tiny") {
  entrack::Paragraph p;
  p.id = id;
  for (const auto& s : sentences) p.sentences.push_back(oracle::sentence(s));
  for (const auto& e : entities) {
    entrack::Entity entity;
    entity.canonical_name = e;
    entity.aliases = {e};
    p.entities.push_back(entity);
  }
  std::vector<entrack::Paragraph> one = {p};
  entrack::assign_embedding_ids(one, embeddings());
  return one[0];
}

}  // namespace tiny

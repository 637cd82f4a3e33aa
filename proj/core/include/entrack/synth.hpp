// Template-generated process paragraphs with consistent gold grids, plus a
// matching word-vector table, for self-contained training and tests.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "entrack/corpus.hpp"
#include "entrack/embeddings.hpp"

namespace entrack {

struct SynthConfig {
  std::size_t min_steps = 3;
  std::size_t max_steps = 8;
  std::size_t min_entities = 2;
  std::size_t max_entities = 3;
  double unknown_create_rate = 0.1;  // creations with no stated location
  std::size_t embedding_dim = 16;
  std::uint64_t embedding_seed = 20240601;
};

// Deterministic per (seed, n, config). Paragraph ids are "synth-<seed>-<i>"
// with i zero-padded, so id order is generation order. Tokens carry no
// embedding ids yet; see assign_embedding_ids().
std::vector<Paragraph> synth_corpus(std::uint64_t seed, std::size_t n, const SynthConfig& config = {});

// Every lower-cased word the generator can emit.
std::vector<std::string> synth_vocabulary();

// Vectors for the generator vocabulary plus "<unk>". Words of the same role
// (entity, place, each verb class, function word) share a random centre so
// the table carries some of the structure real embeddings would.
Embeddings synth_embeddings(const SynthConfig& config = {});

}  // namespace entrack

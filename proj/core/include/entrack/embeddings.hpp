#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "entrack/autodiff.hpp"
#include "entrack/corpus.hpp"

namespace entrack {

inline constexpr std::string_view kUnkToken = "<unk>";

// Frozen word-vector table loaded from the sidecar text format:
//   <vocab_size> <dim>
//   <token> <v_1> ... <v_dim>
// A "<unk>" row is required.
class Embeddings {
 public:
  Embeddings() = default;
  Embeddings(std::vector<std::string> vocab, Tensor table);

  std::size_t size() const { return vocab_.size(); }
  std::size_t dim() const { return table_.size() == 0 ? 0 : table_.cols(); }
  std::size_t unk_id() const { return unk_; }
  const std::vector<std::string>& vocab() const { return vocab_; }
  const Tensor& table() const { return table_; }

  // Exact match, then lower-cased match, then <unk>.
  std::size_t lookup(std::string_view surface) const;
  std::span<const double> row(std::size_t id) const;

 private:
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::size_t> index_;
  Tensor table_;
  std::size_t unk_ = 0;
};

Embeddings parse_embeddings(std::string_view text);
Embeddings load_embeddings(const std::string& path);
std::string write_embeddings(const Embeddings& embeddings);
void save_embeddings(const std::string& path, const Embeddings& embeddings);

// Sets Token::embedding_id for every token.
void assign_embedding_ids(std::span<Paragraph> paragraphs, const Embeddings& embeddings);

}  // namespace entrack

#include "entrack/embeddings.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace entrack {

Embeddings::Embeddings(std::vector<std::string> vocab, Tensor table)
    : vocab_(std::move(vocab)), table_(std::move(table)) {
  if (table_.rank() != 2 || table_.rows() != vocab_.size()) {
    throw ShapeError("embedding table " + shape_string(table_.shape) + " does not match vocabulary of " +
                     std::to_string(vocab_.size()));
  }
  bool have_unk = false;
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    if (!index_.emplace(vocab_[i], i).second) {
      throw std::invalid_argument("duplicate embedding token '" + vocab_[i] + "'");
    }
    if (vocab_[i] == kUnkToken) {
      unk_ = i;
      have_unk = true;
    }
  }
  if (!have_unk) throw std::invalid_argument("embedding table has no <unk> row");
}

std::size_t Embeddings::lookup(std::string_view surface) const {
  if (auto it = index_.find(std::string(surface)); it != index_.end()) return it->second;
  if (auto it = index_.find(to_lower(surface)); it != index_.end()) return it->second;
  return unk_;
}

std::span<const double> Embeddings::row(std::size_t id) const {
  const std::size_t d = dim();
  return std::span<const double>(table_.values).subspan(id * d, d);
}

Embeddings parse_embeddings(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& msg) {
    return std::runtime_error("embeddings line " + std::to_string(line_no) + ": " + msg);
  };
  if (!std::getline(in, line)) throw fail("missing header");
  ++line_no;
  std::size_t vocab_size = 0, dim = 0;
  {
    std::istringstream header(line);
    if (!(header >> vocab_size >> dim) || dim == 0) throw fail("header must be '<vocab_size> <dim>'");
  }
  std::vector<std::string> vocab;
  std::vector<double> values;
  vocab.reserve(vocab_size);
  values.reserve(vocab_size * dim);
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto words = split_words(line);
    if (words.size() != dim + 1) {
      throw fail("expected token and " + std::to_string(dim) + " values, got " +
                 std::to_string(words.size()) + " fields");
    }
    vocab.push_back(words[0]);
    for (std::size_t i = 1; i < words.size(); ++i) {
      double v = 0;
      auto [ptr, ec] = std::from_chars(words[i].data(), words[i].data() + words[i].size(), v);
      if (ec != std::errc() || ptr != words[i].data() + words[i].size()) {
        throw fail("bad number '" + words[i] + "'");
      }
      values.push_back(v);
    }
  }
  if (vocab.size() != vocab_size) {
    throw std::runtime_error("embeddings header declares " + std::to_string(vocab_size) +
                             " rows, found " + std::to_string(vocab.size()));
  }
  return Embeddings(std::move(vocab), Tensor::matrix(vocab_size, dim, std::move(values)));
}

Embeddings load_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open embeddings file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_embeddings(buf.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::string write_embeddings(const Embeddings& embeddings) {
  std::string out = std::to_string(embeddings.size()) + " " + std::to_string(embeddings.dim()) + "\n";
  char buf[64];
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    out += embeddings.vocab()[i];
    for (double v : embeddings.row(i)) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out.push_back(' ');
      out.append(buf, ptr);
    }
    out.push_back('\n');
  }
  return out;
}

void save_embeddings(const std::string& path, const Embeddings& embeddings) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write embeddings file " + path);
  out << write_embeddings(embeddings);
}

void assign_embedding_ids(std::span<Paragraph> paragraphs, const Embeddings& embeddings) {
  for (auto& p : paragraphs) {
    for (auto& s : p.sentences) {
      for (auto& t : s) t.embedding_id = embeddings.lookup(t.surface);
    }
  }
}

}  // namespace entrack

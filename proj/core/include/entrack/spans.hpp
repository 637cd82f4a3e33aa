#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace entrack {

// Inclusive token range within one sentence.
struct Span {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t length() const { return last - first + 1; }
  friend bool operator==(const Span&, const Span&) = default;
};

struct LocationCandidate {
  enum class Kind { Span, Null, Unk };

  Kind kind = Kind::Span;
  std::string normalized_text;  // "<null>" / "<unk>" for the pseudo-candidates
  // First occurrence (SPAN only): sentence index and sentence-local span.
  std::size_t sentence = 0;
  Span span;
  // Per sentence: every place the candidate's words occur.
  std::vector<std::vector<Span>> occurrences;

  bool is_span() const { return kind == Kind::Span; }
};

}  // namespace entrack

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "longcoref/document.hpp"

namespace longcoref {

enum class Tag : std::uint8_t { B = 0, I = 1, E = 2, S = 3, O = 4 };
inline constexpr std::size_t kNumTags = 5;

char tag_char(Tag t);
/// "S O B I E" style rendering, one letter per token.
std::string tags_to_string(const std::vector<Tag>& tags);
/// Inverse of tags_to_string; whitespace is ignored.
std::vector<Tag> parse_tags(const std::string& text);

/// Tags for one nesting level. Throws ValidationError when spans overlap or
/// run past `n_tokens`.
std::vector<Tag> bioes_encode(const std::vector<Span>& spans, std::size_t n_tokens);

struct ScoredSpan {
  Span span;
  double confidence = 1.0;
};

struct TagDecoding {
  std::vector<ScoredSpan> spans;
  /// One entry per dropped ill-formed fragment (orphan I/E, unterminated B).
  std::vector<std::string> diagnostics;
};

/// Well-formed B I* E and S segments become spans scored by their mean token
/// confidence. An empty `confidence` vector means 1.0 everywhere.
TagDecoding bioes_decode(const std::vector<Tag>& tags, const std::vector<double>& confidence = {});

}  // namespace longcoref

#include "longcoref/bioes.hpp"

#include <algorithm>

#include "longcoref/errors.hpp"

namespace longcoref {

char tag_char(Tag t) { return "BIESO"[static_cast<int>(t)]; }

std::string tags_to_string(const std::vector<Tag>& tags) {
  std::string out;
  for (Tag t : tags) {
    if (!out.empty()) out += ' ';
    out += tag_char(t);
  }
  return out;
}

std::vector<Tag> parse_tags(const std::string& text) {
  std::vector<Tag> out;
  for (char c : text) {
    switch (c) {
      case 'B': out.push_back(Tag::B); break;
      case 'I': out.push_back(Tag::I); break;
      case 'E': out.push_back(Tag::E); break;
      case 'S': out.push_back(Tag::S); break;
      case 'O': out.push_back(Tag::O); break;
      case ' ': case ',': case '\t': break;
      default: throw ParseError("", std::string("unknown tag '") + c + "'");
    }
  }
  return out;
}

std::vector<Tag> bioes_encode(const std::vector<Span>& spans, std::size_t n_tokens) {
  std::vector<Tag> tags(n_tokens, Tag::O);
  std::vector<Span> sorted = spans;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& s = sorted[i];
    if (s.end < s.start || s.end >= n_tokens) {
      throw ValidationError("span (" + std::to_string(s.start) + "," + std::to_string(s.end) + ") outside " +
                            std::to_string(n_tokens) + " tokens");
    }
    if (i > 0 && sorted[i - 1].end >= s.start) {
      throw ValidationError("spans (" + std::to_string(sorted[i - 1].start) + "," + std::to_string(sorted[i - 1].end) +
                            ") and (" + std::to_string(s.start) + "," + std::to_string(s.end) +
                            ") overlap on one level");
    }
    if (s.start == s.end) {
      tags[s.start] = Tag::S;
    } else {
      tags[s.start] = Tag::B;
      for (std::size_t t = s.start + 1; t < s.end; ++t) tags[t] = Tag::I;
      tags[s.end] = Tag::E;
    }
  }
  return tags;
}

TagDecoding bioes_decode(const std::vector<Tag>& tags, const std::vector<double>& confidence) {
  TagDecoding out;
  const std::size_t n = tags.size();
  auto conf = [&](std::size_t i) { return confidence.empty() ? 1.0 : confidence.at(i); };
  auto mean = [&](std::size_t a, std::size_t b) {
    double s = 0.0;
    for (std::size_t i = a; i <= b; ++i) s += conf(i);
    return s / static_cast<double>(b - a + 1);
  };
  auto fragment = [&](std::size_t a, std::size_t b) {
    out.diagnostics.push_back("dropped ill-formed fragment at tokens " + std::to_string(a) + ".." + std::to_string(b));
  };
  std::size_t i = 0;
  while (i < n) {
    switch (tags[i]) {
      case Tag::O:
        ++i;
        break;
      case Tag::S:
        out.spans.push_back({{i, i}, conf(i)});
        ++i;
        break;
      case Tag::B: {
        std::size_t j = i + 1;
        while (j < n && tags[j] == Tag::I) ++j;
        if (j < n && tags[j] == Tag::E) {
          out.spans.push_back({{i, j}, mean(i, j)});
          i = j + 1;
        } else {
          fragment(i, j - 1);
          i = j;
        }
        break;
      }
      case Tag::I:
      case Tag::E: {
        std::size_t j = i;
        while (j < n && (tags[j] == Tag::I || tags[j] == Tag::E)) ++j;
        fragment(i, j - 1);
        i = j;
        break;
      }
    }
  }
  return out;
}

}  // namespace longcoref

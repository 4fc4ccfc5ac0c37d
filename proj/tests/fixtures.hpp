#pragma once

#include <cctype>
#include <string>
#include <tuple>
#include <vector>

#include "longcoref/document.hpp"
#include "longcoref/io.hpp"
#include "longcoref/lexicon.hpp"

namespace fixtures {

struct MentionSpec {
  std::size_t start;
  std::size_t end;
  std::string chain;
  longcoref::MentionCategory category = longcoref::MentionCategory::common;
  bool plural = false;
};

/// Whitespace-separated words in one sentence; "||" starts a new sentence and
/// "##" a new paragraph. Hints come from the French closed-class table, and
/// capitalized words are proper nouns unless the table says otherwise.
inline longcoref::Document make_document(const std::string& text, const std::vector<MentionSpec>& mentions,
                                         const std::string& id = "fixture") {
  longcoref::Document doc;
  doc.doc_id = id;
  std::size_t sentence = 0, paragraph = 0, pos = 0;
  while (pos < text.size()) {
    auto sp = text.find(' ', pos);
    std::string w = text.substr(pos, sp == std::string::npos ? std::string::npos : sp - pos);
    pos = sp == std::string::npos ? text.size() : sp + 1;
    if (w.empty()) continue;
    if (w == "||") { ++sentence; continue; }
    if (w == "##") { ++sentence; ++paragraph; continue; }
    longcoref::Token t;
    t.index = doc.tokens.size();
    t.text = w;
    t.sentence_index = sentence;
    t.paragraph_index = paragraph;
    doc.tokens.push_back(t);
  }
  longcoref::apply_french_hints(doc);
  for (auto& t : doc.tokens) {
    if (t.category_hint == longcoref::CategoryHint::unknown) {
      t.category_hint = std::isupper(static_cast<unsigned char>(t.text[0])) ? longcoref::CategoryHint::proper
                                                                           : longcoref::CategoryHint::common;
    }
  }
  for (const auto& s : mentions) {
    longcoref::Mention m;
    m.start = s.start;
    m.end = s.end;
    m.head_token = s.end;
    m.chain_id = s.chain;
    m.category = s.category;
    m.is_plural = s.plural;
    doc.mentions.push_back(m);
  }
  longcoref::normalize_document(doc);
  return doc;
}

inline std::string data_path(const std::string& name) { return std::string(LONGCOREF_TEST_DATA) + "/" + name; }

}  // namespace fixtures

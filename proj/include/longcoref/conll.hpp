#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "longcoref/document.hpp"
#include "longcoref/types.hpp"

namespace longcoref {

/// CoNLL-2012-style export: one token per line
/// `doc_id  part  token_index  word  coref`, blank line between sentences,
/// chains numbered from 1 in ChainSet order. The coref column uses "(k" /
/// "k)" / "(k)" joined by '|', '-' when empty. Throws Error on crossing spans.
std::string export_conll(const Document& doc, const ChainSet& chains);

struct ConllDocument {
  std::string doc_id;
  std::vector<std::string> tokens;
  /// Spans per chain, keyed by the numeric chain id in file order.
  std::vector<std::vector<Span>> chains;
};

/// Parses one or more `#begin document` blocks. Throws ParseError on
/// unbalanced brackets.
std::vector<ConllDocument> import_conll(std::string_view text);

}  // namespace longcoref

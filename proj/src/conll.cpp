#include "longcoref/conll.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "longcoref/errors.hpp"

namespace longcoref {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

std::string export_conll(const Document& doc, const ChainSet& chains) {
  std::vector<Span> spans;
  for (const auto& chain : chains) {
    for (MentionId id : chain) {
      const auto& m = doc.mentions.at(id);
      spans.push_back({m.start, m.end});
    }
  }
  try {
    compute_nesting_levels(spans);
  } catch (const ValidationError& e) {
    throw Error(std::string("cannot encode chains in CoNLL format: ") + e.what());
  }

  const std::size_t n = doc.tokens.size();
  std::vector<std::vector<std::pair<TokenIndex, std::size_t>>> opens(n), closes(n);
  std::vector<std::vector<std::size_t>> singles(n);
  for (std::size_t c = 0; c < chains.size(); ++c) {
    for (MentionId id : chains[c]) {
      const auto& m = doc.mentions[id];
      if (m.start == m.end) {
        singles[m.start].push_back(c + 1);
      } else {
        opens[m.start].push_back({m.end, c + 1});
        closes[m.end].push_back({m.start, c + 1});
      }
    }
  }

  std::ostringstream os;
  os << "#begin document (" << doc.doc_id << "); part 000\n";
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0 && doc.tokens[t].sentence_index != doc.tokens[t - 1].sentence_index) os << "\n";
    // Outer spans open first and close last.
    std::sort(opens[t].begin(), opens[t].end(), std::greater<>());
    std::sort(closes[t].begin(), closes[t].end(), std::greater<>());
    std::string col;
    auto add = [&](const std::string& s) {
      if (!col.empty()) col += '|';
      col += s;
    };
    for (const auto& [end, id] : opens[t]) add("(" + std::to_string(id));
    for (std::size_t id : singles[t]) add("(" + std::to_string(id) + ")");
    for (const auto& [start, id] : closes[t]) add(std::to_string(id) + ")");
    os << doc.doc_id << "\t0\t" << t << "\t" << doc.tokens[t].text << "\t" << (col.empty() ? "-" : col) << "\n";
  }
  os << "\n#end document\n";
  return os.str();
}

std::vector<ConllDocument> import_conll(std::string_view text) {
  std::vector<ConllDocument> docs;
  ConllDocument* cur = nullptr;
  std::map<std::size_t, std::vector<TokenIndex>> open;
  std::map<std::size_t, std::vector<Span>> found;
  std::size_t line_no = 0, pos = 0;

  auto finish = [&] {
    if (!cur) return;
    for (const auto& [id, stack] : open) {
      if (!stack.empty()) throw ParseError(cur->doc_id, "unclosed mention for chain " + std::to_string(id));
    }
    for (auto& [id, spans] : found) {
      std::sort(spans.begin(), spans.end(), canonical_less);
      cur->chains.push_back(std::move(spans));
    }
    open.clear();
    found.clear();
    cur = nullptr;
  };

  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string where = "line " + std::to_string(line_no);
    if (line.starts_with("#begin document")) {
      finish();
      docs.emplace_back();
      cur = &docs.back();
      auto l = line.find('('), r = line.find(')');
      if (l != std::string_view::npos && r != std::string_view::npos && r > l) {
        cur->doc_id = std::string(line.substr(l + 1, r - l - 1));
      }
      continue;
    }
    if (line.starts_with("#end document")) {
      finish();
      continue;
    }
    auto cols = split_ws(line);
    if (cols.empty() || cols.front().starts_with("#")) continue;
    if (!cur) throw ParseError(where, "token line outside a document");
    if (cols.size() < 2) throw ParseError(where, "too few columns");
    const TokenIndex t = cur->tokens.size();
    cur->tokens.emplace_back(cols.size() >= 4 ? cols[3] : cols[0]);
    std::string_view coref = cols.back();
    if (coref == "-") continue;
    std::size_t p = 0;
    while (p < coref.size()) {
      auto bar = coref.find('|', p);
      std::string_view item = coref.substr(p, bar == std::string_view::npos ? std::string_view::npos : bar - p);
      p = bar == std::string_view::npos ? coref.size() : bar + 1;
      const bool opens = item.starts_with('('), closes = item.ends_with(')');
      std::string_view digits = item.substr(opens ? 1 : 0);
      if (closes) digits.remove_suffix(1);
      if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        throw ParseError(where, "bad coreference item '" + std::string(item) + "'");
      }
      const std::size_t id = std::stoul(std::string(digits));
      if (opens && closes) {
        found[id].push_back({t, t});
      } else if (opens) {
        open[id].push_back(t);
      } else if (closes) {
        auto& stack = open[id];
        if (stack.empty()) throw ParseError(where, "close without open for chain " + std::to_string(id));
        found[id].push_back({stack.back(), t});
        stack.pop_back();
      } else {
        throw ParseError(where, "bad coreference item '" + std::string(item) + "'");
      }
    }
  }
  finish();
  return docs;
}

}  // namespace longcoref

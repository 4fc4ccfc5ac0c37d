#include "longcoref/document.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "longcoref/errors.hpp"

namespace longcoref {
namespace {

struct NestingScan {
  std::vector<int> levels;
  std::vector<std::pair<std::size_t, std::size_t>> crossings;
};

NestingScan scan_nesting(std::span<const Span> spans) {
  NestingScan out;
  out.levels.assign(spans.size(), 0);
  std::vector<std::size_t> order(spans.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return canonical_less(spans[a], spans[b]);
  });
  // Chain of open containers; each element contains the next.
  std::vector<std::size_t> open;
  for (std::size_t idx : order) {
    const Span& s = spans[idx];
    while (!open.empty() && spans[open.back()].end < s.start) open.pop_back();
    if (!open.empty()) {
      const Span& top = spans[open.back()];
      if (top == s) {
        out.levels[idx] = out.levels[open.back()];
        continue;
      }
      if (top.end < s.end) {
        out.crossings.emplace_back(open.back(), idx);
        // Treat the crossing span as if the container had closed.
        while (!open.empty() && spans[open.back()].end < s.end) open.pop_back();
      }
    }
    out.levels[idx] = static_cast<int>(open.size());
    open.push_back(idx);
  }
  return out;
}

std::string span_str(TokenIndex a, TokenIndex b) {
  return "[" + std::to_string(a) + "," + std::to_string(b) + "]";
}

bool is_modifier_relation(std::string_view rel) {
  static const std::set<std::string_view> kModifiers = {
      "det", "amod", "nummod", "case", "cc", "punct", "flat", "flat:name", "fixed",
      "compound", "advmod", "mark", "aux", "cop", "dep"};
  return kModifiers.contains(rel);
}

}  // namespace

bool canonical_less(const Span& a, const Span& b) {
  if (a.start != b.start) return a.start < b.start;
  return a.end > b.end;
}

std::vector<int> compute_nesting_levels(std::span<const Span> spans) {
  for (const auto& s : spans) {
    if (s.end < s.start) throw ValidationError("span " + span_str(s.start, s.end) + " has end < start");
  }
  auto scan = scan_nesting(spans);
  if (!scan.crossings.empty()) {
    const auto& [a, b] = scan.crossings.front();
    throw ValidationError("malformed annotation: crossing spans " +
                          span_str(spans[a].start, spans[a].end) + " and " +
                          span_str(spans[b].start, spans[b].end));
  }
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (scan.levels[i] > kMaxNestingLevel) {
      throw ValidationError("span " + span_str(spans[i].start, spans[i].end) + " has nesting level " +
                            std::to_string(scan.levels[i]) + " (maximum " +
                            std::to_string(kMaxNestingLevel) + ")");
    }
  }
  return scan.levels;
}

Classification classify_mention(const Mention& mention, std::span<const Token> tokens) {
  if (mention.head_token >= tokens.size()) return {MentionCategory::common, true};
  switch (tokens[mention.head_token].category_hint) {
    case CategoryHint::pronoun: return {MentionCategory::pronoun, false};
    case CategoryHint::proper: return {MentionCategory::proper, false};
    case CategoryHint::common: return {MentionCategory::common, false};
    case CategoryHint::other:
    case CategoryHint::unknown: break;
  }
  return {MentionCategory::common, true};
}

TokenIndex select_head(TokenIndex start, TokenIndex end, std::span<const Token> tokens) {
  for (TokenIndex t = start; t <= end && t < tokens.size(); ++t) {
    const auto hint = tokens[t].category_hint;
    const bool nominal = hint == CategoryHint::pronoun || hint == CategoryHint::proper ||
                         hint == CategoryHint::common;
    if (nominal && !is_modifier_relation(tokens[t].dependency_relation)) return t;
  }
  return end;
}

std::string_view to_string(ValidationIssue::Kind k) {
  switch (k) {
    case ValidationIssue::Kind::token: return "token";
    case ValidationIssue::Kind::span: return "span";
    case ValidationIssue::Kind::nesting: return "nesting";
    case ValidationIssue::Kind::mention: return "mention";
    case ValidationIssue::Kind::chain: return "chain";
    case ValidationIssue::Kind::partition: return "partition";
    case ValidationIssue::Kind::embedding: return "embedding";
  }
  return "?";
}

std::size_t ValidationReport::count(ValidationIssue::Kind k) const {
  return static_cast<std::size_t>(
      std::count_if(issues.begin(), issues.end(), [k](const auto& i) { return i.kind == k; }));
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& i : issues) {
    os << to_string(i.kind) << " " << i.location << ": " << i.message << "\n";
  }
  return os.str();
}

ValidationReport validate_document(const Document& doc) {
  using K = ValidationIssue::Kind;
  ValidationReport report;
  auto add = [&](K k, std::string loc, std::string msg) {
    report.issues.push_back({k, std::move(loc), std::move(msg)});
  };

  const auto& toks = doc.tokens;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const std::string loc = "tokens[" + std::to_string(i) + "]";
    if (toks[i].index != i) add(K::token, loc, "index " + std::to_string(toks[i].index) + " is not contiguous");
    if (i > 0 && toks[i].sentence_index < toks[i - 1].sentence_index) {
      add(K::token, loc, "sentence index decreases");
    }
    if (i > 0 && toks[i].paragraph_index < toks[i - 1].paragraph_index) {
      add(K::token, loc, "paragraph index decreases");
    }
  }

  const auto& ms = doc.mentions;
  std::vector<Span> spans;
  bool spans_ok = true;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const auto& m = ms[i];
    const std::string loc = "mentions[" + std::to_string(i) + "]";
    if (m.id != i) add(K::mention, loc, "id " + std::to_string(m.id) + " differs from position");
    if (m.end < m.start) {
      add(K::span, loc, "end < start in " + span_str(m.start, m.end));
      spans_ok = false;
      continue;
    }
    if (m.end >= toks.size()) {
      add(K::span, loc, "span " + span_str(m.start, m.end) + " exceeds token range");
      spans_ok = false;
    }
    if (m.head_token < m.start || m.head_token > m.end) add(K::mention, loc, "head outside span");
    if (!(m.confidence >= 0.0 && m.confidence <= 1.0)) add(K::mention, loc, "confidence outside [0,1]");
    if (i > 0 && ms[i - 1].end >= ms[i - 1].start) {
      const Span prev{ms[i - 1].start, ms[i - 1].end}, cur{m.start, m.end};
      if (prev == cur) {
        add(K::span, loc, "duplicate span " + span_str(m.start, m.end));
      } else if (!canonical_less(prev, cur)) {
        add(K::mention, loc, "mentions not in canonical order");
      }
    }
  }
  if (spans_ok) {
    for (const auto& m : ms) spans.push_back({m.start, m.end});
    auto scan = scan_nesting(spans);
    for (const auto& [a, b] : scan.crossings) {
      add(K::nesting, "mentions[" + std::to_string(b) + "]",
          "crosses " + span_str(spans[a].start, spans[a].end));
    }
    for (std::size_t i = 0; i < ms.size(); ++i) {
      const std::string loc = "mentions[" + std::to_string(i) + "]";
      if (scan.levels[i] > kMaxNestingLevel) {
        add(K::nesting, loc, "nesting level " + std::to_string(scan.levels[i]) + " exceeds maximum");
      } else if (scan.crossings.empty() && ms[i].nesting_level != scan.levels[i]) {
        add(K::nesting, loc, "declared level " + std::to_string(ms[i].nesting_level) +
                                 " but " + std::to_string(scan.levels[i]) + " containers");
      }
    }
  }

  std::vector<int> owner(ms.size(), -1);
  for (std::size_t c = 0; c < doc.chains.size(); ++c) {
    const auto& ch = doc.chains[c];
    const std::string loc = "chains[" + std::to_string(c) + "]";
    if (ch.mention_ids.empty()) add(K::chain, loc, "empty chain");
    if (!std::is_sorted(ch.mention_ids.begin(), ch.mention_ids.end())) add(K::chain, loc, "mention ids not sorted");
    for (MentionId id : ch.mention_ids) {
      if (id >= ms.size()) {
        add(K::chain, loc, "mention id " + std::to_string(id) + " does not resolve");
        continue;
      }
      if (owner[id] >= 0 && owner[id] != static_cast<int>(c)) {
        add(K::partition, "mentions[" + std::to_string(id) + "]",
            "belongs to chains " + std::to_string(owner[id]) + " and " + std::to_string(c));
      }
      owner[id] = static_cast<int>(c);
      if (ms[id].chain_id != ch.chain_id) {
        add(K::chain, "mentions[" + std::to_string(id) + "]",
            "chain id '" + ms[id].chain_id + "' disagrees with chain '" + ch.chain_id + "'");
      }
    }
  }
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (owner[i] < 0) add(K::partition, "mentions[" + std::to_string(i) + "]", "not in any chain");
  }

  if (doc.embeddings && doc.embeddings->rows() != toks.size()) {
    add(K::embedding, "embeddings",
        std::to_string(doc.embeddings->rows()) + " rows for " + std::to_string(toks.size()) + " tokens");
  }
  return report;
}

void normalize_document(Document& doc) {
  std::map<std::string, Gender> genders;
  for (const auto& c : doc.chains) genders[c.chain_id] = c.gender_label;

  std::stable_sort(doc.mentions.begin(), doc.mentions.end(), [](const Mention& a, const Mention& b) {
    return canonical_less({a.start, a.end}, {b.start, b.end});
  });
  std::vector<Span> spans;
  spans.reserve(doc.mentions.size());
  for (std::size_t i = 0; i < doc.mentions.size(); ++i) {
    auto& m = doc.mentions[i];
    m.id = i;
    spans.push_back({m.start, m.end});
  }
  const auto levels = compute_nesting_levels(spans);

  doc.chains.clear();
  std::map<std::string, std::size_t> chain_index;
  for (auto& m : doc.mentions) {
    m.nesting_level = levels[m.id];
    if (m.chain_id.empty() || m.chain_id == kSingletonChain) {
      m.chain_id = "singleton-" + std::to_string(m.id);
    }
    auto [it, inserted] = chain_index.try_emplace(m.chain_id, doc.chains.size());
    if (inserted) {
      Chain c;
      c.chain_id = m.chain_id;
      if (auto g = genders.find(m.chain_id); g != genders.end()) c.gender_label = g->second;
      doc.chains.push_back(std::move(c));
    }
    doc.chains[it->second].mention_ids.push_back(m.id);
  }
}

std::vector<MentionId> direct_children(const Document& doc, MentionId id) {
  std::vector<MentionId> out;
  const auto& parent = doc.mentions.at(id);
  for (MentionId j = id + 1; j < doc.mentions.size(); ++j) {
    const auto& m = doc.mentions[j];
    if (m.start > parent.end) break;
    if (parent.contains(m) && !parent.same_span(m) && m.nesting_level == parent.nesting_level + 1) {
      out.push_back(j);
    }
  }
  return out;
}

}  // namespace longcoref

#pragma once

#include <span>
#include <string>
#include <vector>

#include "longcoref/types.hpp"

namespace longcoref {

inline constexpr int kMaxNestingLevel = 2;

struct Span {
  TokenIndex start = 0;
  TokenIndex end = 0;  // inclusive
  friend bool operator==(const Span&, const Span&) = default;
  friend auto operator<=>(const Span&, const Span&) = default;
};

/// Canonical mention order: start ascending, then end descending, so every
/// container precedes the mentions nested inside it.
bool canonical_less(const Span& a, const Span& b);

/// Level of each span = number of distinct spans strictly containing it.
/// Identical spans share a level. Result is indexed like the input.
/// Throws ValidationError on crossing spans or a level above kMaxNestingLevel.
std::vector<int> compute_nesting_levels(std::span<const Span> spans);

struct Classification {
  MentionCategory category = MentionCategory::common;
  bool flagged = false;  // head hint was neither pronoun/common/proper
};

Classification classify_mention(const Mention& mention, std::span<const Token> tokens);

/// Head for a span without an annotated head: first nominal token that is not
/// attached by a modifier relation, else the last token.
TokenIndex select_head(TokenIndex start, TokenIndex end, std::span<const Token> tokens);

struct ValidationIssue {
  enum class Kind { token, span, nesting, mention, chain, partition, embedding };
  Kind kind;
  std::string location;
  std::string message;
};

std::string_view to_string(ValidationIssue::Kind k);

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  std::size_t count(ValidationIssue::Kind k) const;
  std::string summary() const;
};

ValidationReport validate_document(const Document& doc);

/// Sorts mentions canonically, renumbers ids, recomputes nesting levels,
/// turns singleton markers into one-element chains and rebuilds
/// Document::chains from per-mention chain ids. Gender labels already set on
/// chains are kept. Throws ValidationError on unrecoverable spans.
void normalize_document(Document& doc);

/// Mentions nested exactly one level below `id` inside its span, in id order.
std::vector<MentionId> direct_children(const Document& doc, MentionId id);

}  // namespace longcoref

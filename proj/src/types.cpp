#include "longcoref/types.hpp"

#include <algorithm>
#include <map>

#include "longcoref/errors.hpp"

namespace longcoref {

std::string_view to_string(CategoryHint v) {
  switch (v) {
    case CategoryHint::pronoun: return "pronoun";
    case CategoryHint::common: return "common";
    case CategoryHint::proper: return "proper";
    case CategoryHint::other: return "other";
    case CategoryHint::unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(MentionCategory v) {
  switch (v) {
    case MentionCategory::pronoun: return "pronoun";
    case MentionCategory::common: return "common";
    case MentionCategory::proper: return "proper";
  }
  return "common";
}

std::string_view to_string(Gender v) {
  switch (v) {
    case Gender::masculine: return "m";
    case Gender::feminine: return "f";
    case Gender::unknown: return "u";
  }
  return "u";
}

std::string_view to_string(Number v) {
  switch (v) {
    case Number::singular: return "sg";
    case Number::plural: return "pl";
    case Number::unknown: return "u";
  }
  return "u";
}

std::string_view to_string(Person v) {
  switch (v) {
    case Person::first: return "1";
    case Person::second: return "2";
    case Person::third: return "3";
    case Person::unknown: return "u";
  }
  return "u";
}

std::string_view to_string(ClusteringStrategy v) {
  return v == ClusteringStrategy::left_to_right ? "left_to_right" : "easy_first_global";
}

std::optional<CategoryHint> parse_category_hint(std::string_view s) {
  if (s == "pronoun") return CategoryHint::pronoun;
  if (s == "common") return CategoryHint::common;
  if (s == "proper") return CategoryHint::proper;
  if (s == "other") return CategoryHint::other;
  if (s == "unknown" || s.empty()) return CategoryHint::unknown;
  return std::nullopt;
}

std::optional<MentionCategory> parse_mention_category(std::string_view s) {
  if (s == "pronoun") return MentionCategory::pronoun;
  if (s == "common") return MentionCategory::common;
  if (s == "proper") return MentionCategory::proper;
  return std::nullopt;
}

std::optional<Gender> parse_gender(std::string_view s) {
  if (s == "m" || s == "masculine") return Gender::masculine;
  if (s == "f" || s == "feminine") return Gender::feminine;
  if (s == "u" || s == "unknown" || s.empty()) return Gender::unknown;
  return std::nullopt;
}

std::optional<Number> parse_number(std::string_view s) {
  if (s == "sg" || s == "singular") return Number::singular;
  if (s == "pl" || s == "plural") return Number::plural;
  if (s == "u" || s == "unknown" || s.empty()) return Number::unknown;
  return std::nullopt;
}

std::optional<Person> parse_person(std::string_view s) {
  if (s == "1" || s == "first") return Person::first;
  if (s == "2" || s == "second") return Person::second;
  if (s == "3" || s == "third") return Person::third;
  if (s == "u" || s == "unknown" || s.empty()) return Person::unknown;
  return std::nullopt;
}

std::optional<ClusteringStrategy> parse_strategy(std::string_view s) {
  if (s == "left_to_right") return ClusteringStrategy::left_to_right;
  if (s == "easy_first_global") return ClusteringStrategy::easy_first_global;
  return std::nullopt;
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data)
    : rows_(rows), dim_(dim), data_(std::move(data)) {
  if (data_.size() != rows_ * dim_) {
    throw DimensionError("embedding payload has " + std::to_string(data_.size()) +
                         " values, expected " + std::to_string(rows_ * dim_));
  }
}

std::string Document::span_text(TokenIndex start, TokenIndex end) const {
  std::string out;
  for (TokenIndex t = start; t <= end && t < tokens.size(); ++t) {
    if (!out.empty()) out += ' ';
    out += tokens[t].text;
  }
  return out;
}

void canonicalize(ChainSet& chains) {
  for (auto& c : chains) std::sort(c.begin(), c.end());
  std::erase_if(chains, [](const auto& c) { return c.empty(); });
  std::sort(chains.begin(), chains.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
}

ChainSet gold_chains(const Document& doc) {
  ChainSet out;
  out.reserve(doc.chains.size());
  for (const auto& c : doc.chains) out.push_back(c.mention_ids);
  canonicalize(out);
  return out;
}

void PipelineConfig::validate() const {
  if (pronoun_window < 1 || noun_window < 1) {
    throw ValidationError("antecedent windows must be >= 1");
  }
  if (!(null_threshold > 0.0 && null_threshold < 1.0)) {
    throw ValidationError("null_threshold must lie in (0,1)");
  }
  if (embedding_dim < 1) throw ValidationError("embedding_dim must be positive");
}

}  // namespace longcoref

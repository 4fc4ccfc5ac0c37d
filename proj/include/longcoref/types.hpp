#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace longcoref {

enum class CategoryHint : std::uint8_t { pronoun, common, proper, other, unknown };
enum class MentionCategory : std::uint8_t { pronoun, common, proper };
enum class Gender : std::uint8_t { masculine, feminine, unknown };
enum class Number : std::uint8_t { singular, plural, unknown };
enum class Person : std::uint8_t { first, second, third, unknown };
enum class ClusteringStrategy : std::uint8_t { left_to_right, easy_first_global };

std::string_view to_string(CategoryHint v);
std::string_view to_string(MentionCategory v);
std::string_view to_string(Gender v);
std::string_view to_string(Number v);
std::string_view to_string(Person v);
std::string_view to_string(ClusteringStrategy v);

// Parsers accept the names above; the short morphology codes ("m", "f",
// "sg", "pl", "1", "2", "3", "u") are accepted as well.
std::optional<CategoryHint> parse_category_hint(std::string_view s);
std::optional<MentionCategory> parse_mention_category(std::string_view s);
std::optional<Gender> parse_gender(std::string_view s);
std::optional<Number> parse_number(std::string_view s);
std::optional<Person> parse_person(std::string_view s);
std::optional<ClusteringStrategy> parse_strategy(std::string_view s);

using MentionId = std::size_t;
using TokenIndex = std::size_t;

struct Token {
  TokenIndex index = 0;
  std::string text;
  std::size_t sentence_index = 0;
  std::size_t paragraph_index = 0;
  CategoryHint category_hint = CategoryHint::unknown;
  std::string dependency_relation;
  Gender gender_hint = Gender::unknown;
  Number number_hint = Number::unknown;
  Person person_hint = Person::unknown;
};

/// Chain id carried by mentions that are not linked to anything at
/// ingestion time.
inline constexpr std::string_view kSingletonChain = "_";

struct Mention {
  MentionId id = 0;
  TokenIndex start = 0;
  TokenIndex end = 0;  // inclusive
  int nesting_level = 0;
  MentionCategory category = MentionCategory::common;
  TokenIndex head_token = 0;
  std::string chain_id{kSingletonChain};
  bool is_plural = false;
  double confidence = 1.0;

  std::size_t length() const { return end - start + 1; }
  bool contains(const Mention& o) const { return start <= o.start && o.end <= end; }
  bool same_span(const Mention& o) const { return start == o.start && end == o.end; }
};

struct Chain {
  std::string chain_id;
  std::vector<MentionId> mention_ids;
  Gender gender_label = Gender::unknown;

  bool is_singleton() const { return mention_ids.size() == 1; }
};

/// Row-major per-token float vectors.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t dim)
      : rows_(rows), dim_(dim), data_(rows * dim, 0.0f) {}
  EmbeddingMatrix(std::size_t rows, std::size_t dim, std::vector<float> data);

  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }
  std::span<const float> row(std::size_t r) const { return {data_.data() + r * dim_, dim_}; }
  std::span<float> row(std::size_t r) { return {data_.data() + r * dim_, dim_}; }
  const std::vector<float>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> data_;
};

struct Document {
  std::string doc_id;
  std::vector<Token> tokens;
  std::vector<Mention> mentions;
  std::vector<Chain> chains;
  std::shared_ptr<const EmbeddingMatrix> embeddings;

  std::string span_text(TokenIndex start, TokenIndex end) const;
  std::string mention_text(const Mention& m) const { return span_text(m.start, m.end); }
};

/// Predicted entity partition over a document's mention ids. Each chain is
/// sorted; chains are ordered by their first mention.
using ChainSet = std::vector<std::vector<MentionId>>;

void canonicalize(ChainSet& chains);

/// Gold partition read from Document::chains.
ChainSet gold_chains(const Document& doc);

struct PipelineConfig {
  std::size_t pronoun_window = 30;
  std::size_t noun_window = 300;
  double null_threshold = 0.5;
  ClusteringStrategy clustering_strategy = ClusteringStrategy::left_to_right;
  std::size_t embedding_dim = 1024;
  /// Folded forms (possibly multi-word) that join the two members of a
  /// plural coordination.
  std::vector<std::string> conjunctions{"et", "ainsi que", "ni"};

  /// Throws ValidationError on out-of-range fields.
  void validate() const;
  std::size_t window_for(MentionCategory c) const {
    return c == MentionCategory::pronoun ? pronoun_window : noun_window;
  }
};

}  // namespace longcoref

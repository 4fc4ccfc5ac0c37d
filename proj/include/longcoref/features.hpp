#pragma once

#include <string>
#include <vector>

#include "longcoref/nn.hpp"
#include "longcoref/types.hpp"

namespace longcoref {

/// Up to `window` mentions immediately before `i`, nearest first. The window
/// is the pronoun window for pronouns and the noun window otherwise.
std::vector<MentionId> candidate_antecedents(const std::vector<Mention>& mentions, MentionId i,
                                             const PipelineConfig& config);

/// 37 universal dependency relations plus a trailing "unknown" slot;
/// subtypes ("nmod:poss") map to their base relation.
const std::vector<std::string>& dependency_labels();
std::size_t dependency_slot(std::string_view relation);

/// log2 distance bucket: 0 for 0, 1 + floor(log2 d) otherwise, with
/// everything at or beyond 65536 in the last bucket.
std::size_t distance_bucket(std::size_t d);
inline constexpr std::size_t kDistanceBuckets = 18;

/// Column names of the per-mention feature block.
const std::vector<std::string>& mention_feature_names();
/// Column names of the pair feature block.
const std::vector<std::string>& pair_feature_names();

std::vector<double> mention_feature_vector(const Mention& m, const Document& doc);
std::vector<double> pair_feature_vector(const Mention& antecedent, const Mention& anaphor, const Document& doc);

struct Segment {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// Named, contiguous segments of an encoded pair.
struct PairFeatureLayout {
  std::vector<Segment> segments;

  /// Default order: embedding_a, embedding_b, mention_a, mention_b, pair.
  static PairFeatureLayout standard(std::size_t embedding_dim);
  /// Same segments in the given name order.
  static PairFeatureLayout ordered(std::size_t embedding_dim, const std::vector<std::string>& order);
  std::size_t total_dim() const;
  std::size_t embedding_dim() const { return segment("embedding_a").size; }
  const Segment& segment(std::string_view name) const;
  bool operator==(const PairFeatureLayout& o) const;
};

/// Mean of the first and last token embeddings.
std::vector<double> mention_representation(const Mention& m, const Document& doc);

/// Writes the encoded pair into `out` (length layout.total_dim()).
void encode_pair(const Mention& antecedent, const Mention& anaphor, const Document& doc,
                 const PairFeatureLayout& layout, double* out);
std::vector<double> encode_pair(const Mention& antecedent, const Mention& anaphor, const Document& doc,
                                const PairFeatureLayout& layout);

}  // namespace longcoref

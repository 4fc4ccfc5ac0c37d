#pragma once

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "longcoref/metrics.hpp"
#include "longcoref/types.hpp"

namespace longcoref {

struct SplitResult {
  std::vector<Document> samples;
  /// Trailing tokens past the last full sample.
  std::size_t dropped_tokens = 0;
  /// Mentions crossing a sample boundary or lying in the remainder.
  std::size_t dropped_mentions = 0;
  std::vector<std::string> diagnostics;
};

/// floor(n / length) consecutive samples of exactly `length` tokens, ids
/// "<doc_id>@<k>". Chains are re-scoped per sample and embeddings sliced.
/// Throws ValidationError when length is 0.
SplitResult split_document(const Document& doc, std::size_t length);

using ChainPredictor = std::function<ChainSet(const Document&)>;

struct LengthPoint {
  std::size_t length = 0;
  std::size_t retained_docs = 0;
  /// Per retained document, in corpus order.
  std::vector<std::size_t> samples_per_doc;
  std::size_t dropped_mentions = 0;
  /// Macro average over retained documents of the per-document sample mean.
  MetricReport macro;
  bool empty() const { return retained_docs == 0; }
};

/// Splits every document at each length, runs `predict` on each sample and
/// averages per document, then across documents. `jobs` > 1 scores samples
/// on worker threads; results do not depend on it.
std::vector<LengthPoint> length_sweep(const std::vector<Document>& corpus, const std::vector<std::size_t>& lengths,
                                      const ChainPredictor& predict, std::size_t jobs = 1);

/// Rows: length, docs, samples, dropped_mentions, muc_f1, b3_f1, ceafe_f1, conll_f1.
std::string length_sweep_tsv(const std::vector<LengthPoint>& points);

struct CorpusStats {
  std::size_t documents = 0;
  std::size_t tokens = 0;
  std::size_t mentions = 0;
  std::size_t chains = 0;
  std::size_t singletons = 0;
  double mentions_per_doc = 0.0;
  double chains_per_doc = 0.0;
  double singleton_ratio = 0.0;
  double mentions_per_chain = 0.0;
  std::size_t max_mentions_per_chain = 0;
  /// Token distance from the first to the last mention, over chains with at
  /// least two mentions.
  double average_spread = 0.0;
  std::size_t max_spread = 0;
  /// False when no chain has two mentions; the spreads are then 0.
  bool spread_defined = false;
  std::array<double, 3> level_ratio{};
  double plural_ratio = 0.0;
  double proper_ratio = 0.0;
  double common_ratio = 0.0;
  double pronoun_ratio = 0.0;
};

CorpusStats corpus_stats(const std::vector<Document>& corpus);
/// Two-column TSV, one statistic per row.
std::string corpus_stats_tsv(const CorpusStats& s);

/// Nearest-rank percentile (p in (0, 100]) of an unsorted sample; 0 when empty.
std::size_t nearest_rank(std::vector<std::size_t> values, double p);

inline constexpr std::array<double, 5> kDistancePercentiles{50, 90, 95, 99, 100};

struct DistanceDistribution {
  /// Mention-id distance to the previous mention of the same gold chain.
  std::map<MentionCategory, std::vector<std::size_t>> distances;
  std::size_t percentile(MentionCategory c, double p) const;
};

DistanceDistribution antecedent_distance_distribution(const std::vector<Document>& corpus);
/// Rows: category, count, then one column per kDistancePercentiles entry.
std::string distance_table_tsv(const DistanceDistribution& d);

}  // namespace longcoref

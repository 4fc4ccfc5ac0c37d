#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "longcoref/document.hpp"
#include "longcoref/metrics.hpp"
#include "longcoref/pair_model.hpp"
#include "longcoref/resolver.hpp"
#include "longcoref/tagger.hpp"

namespace longcoref {

/// Scores every windowed (candidate, anaphor) pair with `model`, `batch`
/// rows at a time, and ranks the candidates of each mention.
std::vector<AntecedentDecision> score_antecedents(const PairScorerModel& model, const Document& doc,
                                                  const PipelineConfig& config, std::size_t batch = 4096);

struct PipelineResult {
  /// Input document, with detected mentions when detection ran.
  Document doc;
  std::vector<AntecedentDecision> decisions;
  Resolution resolution;
};

/// Detection (skipped when `outer` is null, which keeps the gold mentions),
/// pair scoring and clustering with config.clustering_strategy.
PipelineResult run_pipeline(const Document& doc, const PairScorerModel& scorer, const TaggerModel* outer,
                            const TaggerModel* inner, const PipelineConfig& config);

// Chain output JSON
// {doc_id, strategy, chains:[[mention_id,...],...], mentions:[[start,end],...],
//  diagnostics:[...]}
// "mentions" lists the span of every id so predicted-mention runs can be
// scored against gold by boundaries; without it ids refer to the gold
// document's mentions.

struct ChainOutput {
  std::string doc_id;
  std::string strategy;
  ChainSet chains;
  std::vector<Span> mentions;
  std::vector<std::string> diagnostics;
};

ChainOutput make_chain_output(const Document& doc, const ChainSet& chains, ClusteringStrategy strategy,
                              std::vector<std::string> diagnostics = {});
std::string write_chain_output(const ChainOutput& out, int indent = 2);
/// Throws ParseError with the JSON path of the offending field.
ChainOutput parse_chain_output(std::string_view json_text);

/// Span-keyed partition of a chain output; `gold` supplies spans when the
/// output has none.
Partition output_partition(const ChainOutput& out, const Document& gold);

/// Reads `path` as a document when it has "tokens", else as a chain output,
/// and returns its partition against `gold`.
Partition load_predicted_partition(const std::filesystem::path& path, const Document& gold);

}  // namespace longcoref

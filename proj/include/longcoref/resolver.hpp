#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "longcoref/types.hpp"

namespace longcoref {

struct ScoredCandidate {
  MentionId id = 0;
  double score = 0.0;
};

struct AntecedentDecision {
  MentionId anaphor = 0;
  std::optional<MentionId> antecedent;
  /// Highest candidate score, 0 without candidates.
  double best_score = 0.0;
  /// Candidates nearest first with their scores.
  std::vector<ScoredCandidate> candidates;
};

/// Argmax over `scored` (nearest first); ties go to the nearest candidate and
/// the result is null unless the best score exceeds the threshold.
AntecedentDecision rank_antecedents(MentionId anaphor, std::vector<ScoredCandidate> scored,
                                    const PipelineConfig& config);

/// Links every anaphor to its chosen antecedent. `n_mentions` defaults to the
/// number of decisions. Throws ValidationError when an antecedent does not
/// precede its anaphor.
ChainSet cluster_left_to_right(const std::vector<AntecedentDecision>& decisions, std::size_t n_mentions = 0);

using MentionPair = std::pair<MentionId, MentionId>;  // first < second
MentionPair ordered_pair(MentionId a, MentionId b);

/// Folded words of a proper mention without honorifics, determiners and
/// punctuation, sorted and space-joined. Empty for other categories or when
/// nothing is left.
std::string proper_key(const Mention& m, const Document& doc);

struct ConstraintSet {
  std::vector<MentionPair> must_link;
  /// Mention-level pairs that may never share a cluster.
  std::set<MentionPair> cannot_link;
  /// Proper-key pairs whose mentions may never share a cluster.
  std::set<std::pair<std::string, std::string>> cannot_link_keys;
  /// proper_key of every mention; required when cannot_link_keys is used.
  std::vector<std::string> keys;

  /// Every mention-level pair implied by the sets above.
  std::set<MentionPair> expanded_cannot_links() const;
};

/// Cannot-links between the two members of plural coordinations
/// "[[X] conj [Y]]", extended to every mention pair with the same two
/// proper keys.
ConstraintSet extract_cannot_links(const Document& doc, const PipelineConfig& config);

struct PropagationReport {
  /// Key pairs with unanimous positive local evidence.
  std::vector<std::pair<std::string, std::string>> linked_keys;
  /// Key pairs with mixed evidence or blocked by a cannot-link.
  std::vector<std::pair<std::string, std::string>> rejected_keys;
  std::vector<std::string> diagnostics;
};

/// Adds must-links that connect all mentions of key pairs whose locally
/// scored pairs were all predicted coreferent. Linked mentions are emitted
/// as a spanning set: co-clustering follows from transitive closure.
PropagationReport global_proper_propagation(const Document& doc, const std::vector<AntecedentDecision>& decisions,
                                            const PipelineConfig& config, ConstraintSet& constraints);

struct Clustering {
  ChainSet chains;
  std::vector<std::string> diagnostics;
};

/// Must-links first, then positive decisions by descending best score; a
/// merge that would join a cannot-link pair falls back to the next candidate
/// above threshold.
Clustering cluster_easy_first(const std::vector<AntecedentDecision>& decisions, const ConstraintSet& constraints,
                              const PipelineConfig& config, std::size_t n_mentions = 0);

/// Number of chains holding at least one cannot-linked pair.
std::size_t count_cannot_link_violations(const ChainSet& chains, const ConstraintSet& constraints);

struct Resolution {
  ChainSet chains;
  ConstraintSet constraints;
  std::vector<std::string> diagnostics;
};

/// Clusters `doc` (whose mentions the decisions refer to) with the configured
/// strategy.
Resolution resolve(const Document& doc, const std::vector<AntecedentDecision>& decisions,
                   const PipelineConfig& config);

/// Candidates in the anaphor's gold chain scored 1, all others 0; ties go to
/// the nearest, so the chosen antecedent is the nearest gold one in reach.
std::vector<AntecedentDecision> oracle_decisions(const Document& doc, const PipelineConfig& config);

struct AntecedentErrors {
  std::size_t mentions = 0;
  std::size_t correct = 0;
  std::size_t out_of_window_wrong_link = 0;
  std::size_t out_of_window_wrong_null = 0;
  std::size_t in_window_wrong_link = 0;
  std::size_t in_window_wrong_null = 0;
  /// First mention of its gold entity linked to something.
  std::size_t new_entity_linked = 0;

  double rate(std::size_t count) const {
    return mentions ? static_cast<double>(count) / static_cast<double>(mentions) : 0.0;
  }
  AntecedentErrors& operator+=(const AntecedentErrors& o);
};

/// Classifies each decision against the gold chains of `doc`.
AntecedentErrors antecedent_error_report(const std::vector<AntecedentDecision>& decisions, const Document& doc,
                                         const PipelineConfig& config);

}  // namespace longcoref

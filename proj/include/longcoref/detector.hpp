#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "longcoref/metrics.hpp"
#include "longcoref/tagger.hpp"

namespace longcoref {

struct TaggerTrainConfig {
  std::size_t batch_sentences = 16;
  double learning_rate = 1.4e-4;
  double weight_decay = 1e-5;
  double plateau_factor = 0.5;
  int plateau_patience = 2;
  std::size_t max_epochs = 20;
  double train_fraction = 0.85;  // the rest is validation
  std::uint64_t seed = 7;
  /// Stop early once validation F1 reaches this value.
  double target_f1 = 2.0;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double validation_f1 = 0.0;
  double learning_rate = 0.0;
};

struct TaggerTraining {
  TaggerModel model;
  std::vector<EpochRecord> log;
  std::size_t best_epoch = 0;
  double best_f1 = 0.0;
  std::size_t train_sentences = 0;
  std::size_t validation_sentences = 0;
  std::size_t skipped_spans = 0;
};

/// Fits a tagger for one nesting level and returns the best-validation
/// parameters. Each epoch is appended to `log` as one JSON line when given.
/// Throws ValidationError when the corpus has no mention at `level` and
/// Error on a non-finite loss.
TaggerTraining train_tagger(const std::vector<Document>& corpus, const TaggerArch& arch,
                            const TaggerTrainConfig& config, std::ostream* log = nullptr);

struct MentionCounts {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;
  Prf prf() const;
  MentionCounts& operator+=(const MentionCounts& o);
};

/// Exact (start, end) matching.
MentionCounts evaluate_mentions(const std::vector<Span>& predicted, const std::vector<Span>& gold);

/// Exact-match score of a tagger on every sentence of `docs` at its level.
MentionCounts evaluate_tagger(const TaggerModel& model, const std::vector<Document>& docs);

/// Spans from both levels; identical spans keep the higher confidence and of
/// two crossing spans the less confident one goes.
std::vector<ScoredSpan> merge_level_spans(std::vector<ScoredSpan> spans);

/// Predicted mentions for `doc`, canonical order, each in its own singleton
/// chain, with nesting levels, heads and categories recomputed. `inner` may
/// be null.
std::vector<Mention> detect_mentions(const TaggerModel& outer, const TaggerModel* inner, const Document& doc);

/// Copy of `doc` whose mentions are replaced by `mentions` (chains reset).
Document with_mentions(const Document& doc, std::vector<Mention> mentions);

}  // namespace longcoref

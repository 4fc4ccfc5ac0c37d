#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <vector>

#include "longcoref/features.hpp"
#include "longcoref/metrics.hpp"
#include "longcoref/nn.hpp"

namespace longcoref {

using nn::Mat;
using nn::Vec;

struct PairModelArch {
  std::size_t hidden = 1900;
  std::size_t layers = 3;
  double dropout = 0.6;
  std::uint64_t seed = 17;
};

/// Rectified feedforward layers, a scalar output and a sigmoid.
class PairScorerModel {
 public:
  PairScorerModel(PairFeatureLayout layout, const PairModelArch& arch);

  const PairFeatureLayout& layout() const { return layout_; }
  const PairModelArch& arch() const { return arch_; }
  std::size_t input_dim() const { return layout_.total_dim(); }

  /// Pre-sigmoid scores, one per row, dropout off.
  Vec logits(const Mat& batch) const;
  /// Scores in (0, 1), one per row. Throws DimensionError on a width
  /// mismatch and ValidationError on non-finite input.
  Vec score(const Mat& batch) const;
  /// Mean binary cross-entropy of the batch.
  double loss(const Mat& batch, const Vec& labels) const;
  /// Adds the gradient of the mean batch loss; a null `rng` disables dropout.
  double accumulate_gradient(const Mat& batch, const Vec& labels, nn::Rng* rng);

  nn::ParamList params();
  /// Sets the output layer to zero so every score is 0.5.
  void zero_output();

  void save(std::ostream& out);
  void save(const std::filesystem::path& path);
  static PairScorerModel load(std::istream& in, const std::string& where = "");
  static PairScorerModel load(const std::filesystem::path& path);

 private:
  void check_input(const Mat& batch) const;
  PairFeatureLayout layout_;
  PairModelArch arch_;
  std::vector<nn::Linear> hidden_;
  nn::Linear output_;
};

/// Scores above the threshold count as coreferent; a tie does not.
inline bool is_coreferent(double score, double threshold = 0.5) { return score > threshold; }

struct PairExample {
  std::size_t doc = 0;
  MentionId antecedent = 0;
  MentionId anaphor = 0;
  bool coreferent = false;
};

/// Every (candidate, anaphor) pair inside the windows, labeled by gold chain.
std::vector<PairExample> collect_pairs(const std::vector<Document>& corpus, const PipelineConfig& config);

/// Rows of encoded pairs for `examples[begin, end)`.
Mat encode_examples(const std::vector<Document>& corpus, const PairFeatureLayout& layout,
                    const std::vector<PairExample>& examples, const std::vector<std::size_t>& which);

/// Random-access supply of encoded training pairs.
struct PairSource {
  std::size_t size = 0;
  std::function<void(const std::vector<std::size_t>& which, Mat& x, Vec& y)> fetch;
};

PairSource corpus_pair_source(const std::vector<Document>& corpus, const PairFeatureLayout& layout,
                              const std::vector<PairExample>& examples);

struct PairTrainConfig {
  std::size_t batch_pairs = 16000;
  double learning_rate = 1.4e-4;
  double weight_decay = 1e-5;
  double train_fraction = 0.85;
  std::size_t max_epochs = 10;
  std::uint64_t seed = 11;

  void validate() const;
};

struct PairEpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
  double validation_accuracy = 0.0;
};

struct PairTraining {
  PairScorerModel model;
  std::vector<PairEpochRecord> log;
  std::size_t best_epoch = 0;
};

/// Minimizes binary cross-entropy and keeps the parameters with the lowest
/// validation loss. Throws ValidationError on an empty pair set and Error on
/// a non-finite loss.
PairTraining train_pair_model(const PairSource& source, const PairFeatureLayout& layout, const PairModelArch& arch,
                              const PairTrainConfig& config, std::ostream* log = nullptr);

PairTraining train_pair_scorer(const std::vector<Document>& corpus, const PairModelArch& arch,
                               const PipelineConfig& pipeline, const PairTrainConfig& config,
                               std::ostream* log = nullptr);

struct ScoreBucket {
  double low = 0.0;
  double high = 0.0;
  std::size_t pairs = 0;
  std::size_t errors = 0;
  double error_rate() const { return pairs ? static_cast<double>(errors) / static_cast<double>(pairs) : 0.0; }
};

struct PairEvaluation {
  Prf non_coreferent;
  Prf coreferent;
  std::size_t support_non_coreferent = 0;
  std::size_t support_coreferent = 0;
  double accuracy = 0.0;
  /// Deciles of the predicted score.
  std::array<ScoreBucket, 10> buckets{};
};

PairEvaluation evaluate_pair_scores(const std::vector<double>& scores, const std::vector<bool>& labels,
                                    double threshold = 0.5);
PairEvaluation evaluate_pair_scorer(const PairScorerModel& model, const std::vector<Document>& corpus,
                                    const PipelineConfig& pipeline, std::size_t batch = 4096);

}  // namespace longcoref

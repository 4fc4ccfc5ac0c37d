#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <vector>

#include "longcoref/bioes.hpp"
#include "longcoref/crf.hpp"
#include "longcoref/encoder.hpp"
#include "longcoref/types.hpp"

namespace longcoref {

using nn::Mat;

struct TaggerArch {
  std::size_t embedding_dim = 1024;
  std::size_t projection_dim = 2048;
  std::size_t hidden = 256;  // per direction
  nn::EncoderKind encoder = nn::EncoderKind::bilstm;
  std::size_t window = 2;  // half width, window mixer only
  double dropout = 0.5;
  int level = 0;
  std::uint64_t seed = 13;
};

struct TaggerOutput {
  std::vector<Tag> tags;
  /// Posterior marginal of the chosen tag at each token.
  std::vector<double> confidence;
};

/// Highway projection, sequence encoder, emission layer and BIOES CRF.
class TaggerModel {
 public:
  explicit TaggerModel(const TaggerArch& arch);
  TaggerModel(TaggerModel&&) noexcept = default;
  TaggerModel& operator=(TaggerModel&&) noexcept = default;

  const TaggerArch& arch() const { return arch_; }
  /// n x kNumTags emission scores without dropout.
  Mat emissions(const Mat& x) const;
  /// Best well-formed tag path. `mask_invalid = false` decodes with the raw
  /// learned transitions.
  TaggerOutput decode(const Mat& x, bool mask_invalid = true) const;
  /// Adds the gradient of the sentence NLL to every parameter's grad and
  /// returns the loss. A null `rng` disables dropout.
  double accumulate_gradient(const Mat& x, const std::vector<Tag>& gold, nn::Rng* rng);
  /// NLL only, no dropout, no gradient.
  double loss(const Mat& x, const std::vector<Tag>& gold) const;

  nn::ParamList params();
  nn::Param& transitions() { return transitions_; }
  const nn::Param& transitions() const { return transitions_; }

  void save(std::ostream& out);
  void save(const std::filesystem::path& path);
  static TaggerModel load(std::istream& in, const std::string& where = "");
  static TaggerModel load(const std::filesystem::path& path);

 private:
  TaggerArch arch_;
  nn::Highway highway_;
  std::unique_ptr<nn::SequenceEncoder> encoder_;
  nn::Linear emission_;
  nn::Param transitions_;
};

/// Token ranges [start, end] of each sentence, in order.
std::vector<Span> sentence_spans(const Document& doc);
/// Rows `s.start..s.end` of the document embeddings, widened to double.
Mat embedding_rows(const Document& doc, const Span& s);

struct LevelTags {
  std::vector<Tag> tags;
  /// Mentions at the level that cross the sentence boundary and are left out.
  std::size_t skipped = 0;
};

/// Gold tags of one sentence for mentions at `level`.
LevelTags gold_tags(const Document& doc, const Span& sentence, int level);

}  // namespace longcoref

#pragma once

#include <memory>
#include <string>

#include "longcoref/nn.hpp"

namespace longcoref::nn {

enum class EncoderKind : std::uint32_t { window_mixer = 0, bilstm = 1 };

std::string to_string(EncoderKind k);
EncoderKind parse_encoder_kind(const std::string& s);

/// Maps an n x in sequence to n x output_dim(), looking both ways.
class SequenceEncoder {
 public:
  virtual ~SequenceEncoder() = default;
  virtual std::size_t output_dim() const = 0;
  virtual Mat forward(const Mat& x, Tape* tape) const = 0;
  virtual Mat backward(const Mat& x, const Tape& tape, const Mat& dy) = 0;
  virtual void collect(ParamList& out) = 0;
};

/// tanh over an affine map of the zero-padded window [t - w, t + w].
class WindowMixer final : public SequenceEncoder {
 public:
  WindowMixer(std::size_t in, std::size_t out, std::size_t half_width, Rng& rng);
  std::size_t output_dim() const override { return out_; }
  Mat forward(const Mat& x, Tape* tape) const override;
  Mat backward(const Mat& x, const Tape& tape, const Mat& dy) override;
  void collect(ParamList& out) override { mix_.collect(out); }

 private:
  Mat unfold(const Mat& x) const;
  std::size_t in_, out_, half_;
  Linear mix_;
};

/// Forward and backward LSTMs with `hidden` units each; output is their
/// concatenation (2 * hidden).
class BiLstm final : public SequenceEncoder {
 public:
  BiLstm(std::size_t in, std::size_t hidden, Rng& rng);
  std::size_t output_dim() const override { return 2 * hidden_; }
  Mat forward(const Mat& x, Tape* tape) const override;
  Mat backward(const Mat& x, const Tape& tape, const Mat& dy) override;
  void collect(ParamList& out) override;

 private:
  struct Direction {
    Param w;  // 4h x in, gate order i f g o
    Param u;  // 4h x h
    Param b;  // 1 x 4h
  };
  // Writes h (n x hidden) and appends [i f g o c h] to the tape.
  Mat run(const Direction& d, const Mat& x, bool reverse, Tape* tape) const;
  Mat back(Direction& d, const Mat& x, bool reverse, const Mat* saved, const Mat& dh_out);
  std::size_t in_, hidden_;
  Direction fwd_, bwd_;
};

std::unique_ptr<SequenceEncoder> make_encoder(EncoderKind kind, std::size_t in, std::size_t hidden,
                                              std::size_t half_width, Rng& rng);

}  // namespace longcoref::nn

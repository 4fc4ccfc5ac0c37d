#include "longcoref/tagger.hpp"

#include <fstream>

#include "longcoref/errors.hpp"
#include "longcoref/io.hpp"

namespace longcoref {
namespace {

constexpr std::uint32_t kTaggerVersion = 1;

}  // namespace

TaggerModel::TaggerModel(const TaggerArch& arch) : arch_(arch) {
  if (arch.embedding_dim == 0 || arch.projection_dim == 0 || arch.hidden == 0) {
    throw ValidationError("tagger dimensions must be positive");
  }
  if (arch.dropout < 0.0 || arch.dropout >= 1.0) throw ValidationError("dropout must lie in [0, 1)");
  nn::Rng rng(arch.seed);
  highway_ = nn::Highway("highway", arch.embedding_dim, arch.projection_dim, rng);
  encoder_ = nn::make_encoder(arch.encoder, arch.projection_dim, arch.hidden, arch.window, rng);
  emission_ = nn::Linear("emission", encoder_->output_dim(), kNumTags, rng);
  transitions_ = nn::Param("transitions", crf::kStates, crf::kStates);
}

nn::ParamList TaggerModel::params() {
  nn::ParamList out;
  highway_.collect(out);
  encoder_->collect(out);
  emission_.collect(out);
  out.push_back(&transitions_);
  return out;
}

Mat TaggerModel::emissions(const Mat& x) const {
  if (x.cols() != static_cast<Eigen::Index>(arch_.embedding_dim)) {
    throw DimensionError("embedding width " + std::to_string(x.cols()) + " does not match tagger input " +
                         std::to_string(arch_.embedding_dim));
  }
  if (x.rows() == 0) return Mat(0, static_cast<Eigen::Index>(kNumTags));
  return emission_.forward(encoder_->forward(highway_.forward(x, nullptr), nullptr));
}

TaggerOutput TaggerModel::decode(const Mat& x, bool mask_invalid) const {
  const Mat e = emissions(x);
  const Mat t = mask_invalid ? Mat(transitions_.value + crf::structural_mask()) : transitions_.value;
  const auto path = crf::viterbi(e, t);
  const auto post = crf::forward_backward(e, t);
  TaggerOutput out;
  for (std::size_t i = 0; i < path.labels.size(); ++i) {
    out.tags.push_back(static_cast<Tag>(path.labels[i]));
    out.confidence.push_back(post.marginals(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(path.labels[i])));
  }
  return out;
}

double TaggerModel::accumulate_gradient(const Mat& x, const std::vector<Tag>& gold, nn::Rng* rng) {
  if (x.cols() != static_cast<Eigen::Index>(arch_.embedding_dim)) throw DimensionError("embedding width mismatch");
  if (x.rows() == 0) return 0.0;
  const double rate = rng ? arch_.dropout : 0.0;
  Mat in_mask = rng ? nn::locked_dropout_mask(arch_.embedding_dim, rate, *rng) : Mat();
  Mat x0 = rng ? Mat(x.array().rowwise() * in_mask.row(0).array()) : x;

  nn::Tape t_high, t_enc;
  const Mat p = highway_.forward(x0, &t_high);
  const Mat h = encoder_->forward(p, &t_enc);
  Mat out_mask = rng ? nn::locked_dropout_mask(static_cast<std::size_t>(h.cols()), rate, *rng) : Mat();
  const Mat h2 = rng ? Mat(h.array().rowwise() * out_mask.row(0).array()) : h;
  const Mat e = emission_.forward(h2);

  std::vector<std::size_t> labels(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) labels[i] = static_cast<std::size_t>(gold[i]);
  const auto nll = crf::negative_log_likelihood(e, transitions_.value, labels);

  transitions_.grad += nll.d_transitions;
  Mat dh = emission_.backward(h2, nll.d_emissions);
  if (rng) dh = dh.array().rowwise() * out_mask.row(0).array();
  const Mat dp = encoder_->backward(p, t_enc, dh);
  highway_.backward(x0, t_high, dp);
  return nll.value;
}

double TaggerModel::loss(const Mat& x, const std::vector<Tag>& gold) const {
  std::vector<std::size_t> labels(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) labels[i] = static_cast<std::size_t>(gold[i]);
  return crf::negative_log_likelihood(emissions(x), transitions_.value, labels).value;
}

void TaggerModel::save(std::ostream& out) {
  out.write("PRTM", 4);
  binio::write_u32(out, kTaggerVersion);
  binio::write_u32(out, static_cast<std::uint32_t>(arch_.encoder));
  binio::write_u64(out, arch_.embedding_dim);
  binio::write_u64(out, arch_.projection_dim);
  binio::write_u64(out, arch_.hidden);
  binio::write_u64(out, arch_.window);
  binio::write_u32(out, static_cast<std::uint32_t>(arch_.level));
  binio::write_f32(out, static_cast<float>(arch_.dropout));
  binio::write_u64(out, arch_.seed);
  nn::write_params(out, params());
  if (!out) throw Error("failed writing tagger checkpoint");
}

void TaggerModel::save(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  save(out);
}

TaggerModel TaggerModel::load(std::istream& in, const std::string& where) {
  try {
    binio::expect_magic(in, "PRTM");
    const auto version = binio::read_u32(in);
    if (version != kTaggerVersion) throw ParseError("", "unsupported tagger version " + std::to_string(version));
    TaggerArch a;
    const auto kind = binio::read_u32(in);
    if (kind > 1) throw ParseError("", "unknown encoder kind " + std::to_string(kind));
    a.encoder = static_cast<nn::EncoderKind>(kind);
    a.embedding_dim = binio::read_u64(in);
    a.projection_dim = binio::read_u64(in);
    a.hidden = binio::read_u64(in);
    a.window = binio::read_u64(in);
    a.level = static_cast<int>(binio::read_u32(in));
    a.dropout = binio::read_f32(in);
    a.seed = binio::read_u64(in);
    if (a.embedding_dim > (1u << 16) || a.projection_dim > (1u << 16) || a.hidden > (1u << 14) || a.window > 64) {
      throw ParseError("", "implausible tagger shape");
    }
    TaggerModel m(a);
    nn::read_params(in, m.params(), where);
    if (in.peek() != std::char_traits<char>::eof()) throw ParseError("", "trailing bytes after checkpoint");
    return m;
  } catch (const ParseError& e) {
    if (where.empty()) throw;
    throw ParseError(where, e.what());
  } catch (const ValidationError& e) {
    throw ParseError(where, e.what());
  }
}

TaggerModel TaggerModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), "cannot open");
  return load(in, path.string());
}

std::vector<Span> sentence_spans(const Document& doc) {
  std::vector<Span> out;
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    if (i == 0 || doc.tokens[i].sentence_index != doc.tokens[i - 1].sentence_index) {
      out.push_back({i, i});
    } else {
      out.back().end = i;
    }
  }
  return out;
}

Mat embedding_rows(const Document& doc, const Span& s) {
  if (!doc.embeddings) throw ValidationError("document '" + doc.doc_id + "' has no embeddings");
  const auto& e = *doc.embeddings;
  if (s.end >= e.rows()) throw DimensionError("embedding rows do not cover the sentence");
  Mat x(static_cast<Eigen::Index>(s.end - s.start + 1), static_cast<Eigen::Index>(e.dim()));
  for (std::size_t r = s.start; r <= s.end; ++r) {
    const auto row = e.row(r);
    for (std::size_t c = 0; c < e.dim(); ++c) x(static_cast<Eigen::Index>(r - s.start), static_cast<Eigen::Index>(c)) = row[c];
  }
  return x;
}

LevelTags gold_tags(const Document& doc, const Span& sentence, int level) {
  LevelTags out;
  std::vector<Span> spans;
  for (const auto& m : doc.mentions) {
    if (m.nesting_level != level) continue;
    if (m.end < sentence.start || m.start > sentence.end) continue;
    if (m.start < sentence.start || m.end > sentence.end) {
      if (m.start >= sentence.start) ++out.skipped;
      continue;
    }
    spans.push_back({m.start - sentence.start, m.end - sentence.start});
  }
  out.tags = bioes_encode(spans, sentence.end - sentence.start + 1);
  return out;
}

}  // namespace longcoref

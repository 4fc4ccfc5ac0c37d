#include "longcoref/pair_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "longcoref/errors.hpp"
#include "longcoref/io.hpp"

namespace longcoref {
namespace {

constexpr std::uint32_t kPairVersion = 1;

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

Mat dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, nn::Rng& rng) {
  Mat m(rows, cols);
  std::bernoulli_distribution keep(1.0 - rate);
  const double scale = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = keep(rng) ? scale : 0.0;
  return m;
}

}  // namespace

PairScorerModel::PairScorerModel(PairFeatureLayout layout, const PairModelArch& arch)
    : layout_(std::move(layout)), arch_(arch) {
  if (arch.hidden == 0 || arch.layers == 0) throw ValidationError("pair model needs at least one hidden unit and layer");
  if (arch.dropout < 0.0 || arch.dropout >= 1.0) throw ValidationError("dropout must lie in [0, 1)");
  nn::Rng rng(arch.seed);
  std::size_t in = layout_.total_dim();
  for (std::size_t k = 0; k < arch.layers; ++k) {
    hidden_.emplace_back("hidden" + std::to_string(k), in, arch.hidden, rng);
    in = arch.hidden;
  }
  output_ = nn::Linear("output", in, 1, rng);
}

nn::ParamList PairScorerModel::params() {
  nn::ParamList out;
  for (auto& l : hidden_) l.collect(out);
  output_.collect(out);
  return out;
}

void PairScorerModel::zero_output() {
  output_.weight().value.setZero();
  output_.bias().value.setZero();
}

void PairScorerModel::check_input(const Mat& batch) const {
  if (batch.cols() != static_cast<Eigen::Index>(input_dim())) {
    throw DimensionError("pair batch width " + std::to_string(batch.cols()) + " does not match model input " +
                         std::to_string(input_dim()));
  }
  if (!batch.allFinite()) throw ValidationError("pair batch contains non-finite values");
}

Vec PairScorerModel::logits(const Mat& batch) const {
  check_input(batch);
  Mat a = batch;
  for (const auto& l : hidden_) a = l.forward(a).cwiseMax(0.0);
  return output_.forward(a).col(0);
}

Vec PairScorerModel::score(const Mat& batch) const {
  return logits(batch).unaryExpr([](double z) { return nn::sigmoid(z); });
}

double PairScorerModel::loss(const Mat& batch, const Vec& labels) const {
  const Vec z = logits(batch);
  double s = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) s += softplus(z(i)) - labels(i) * z(i);
  return z.size() ? s / static_cast<double>(z.size()) : 0.0;
}

double PairScorerModel::accumulate_gradient(const Mat& batch, const Vec& labels, nn::Rng* rng) {
  check_input(batch);
  const auto n = batch.rows();
  if (n == 0) return 0.0;
  std::vector<Mat> inputs{batch}, pre, masks;
  for (const auto& l : hidden_) {
    pre.push_back(l.forward(inputs.back()));
    Mat a = pre.back().cwiseMax(0.0);
    if (rng && arch_.dropout > 0.0) {
      masks.push_back(dropout_mask(a.rows(), a.cols(), arch_.dropout, *rng));
      a = a.cwiseProduct(masks.back());
    }
    inputs.push_back(std::move(a));
  }
  const Vec z = output_.forward(inputs.back()).col(0);
  double loss = 0.0;
  Mat dz(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    loss += softplus(z(i)) - labels(i) * z(i);
    dz(i, 0) = (nn::sigmoid(z(i)) - labels(i)) / static_cast<double>(n);
  }
  Mat d = output_.backward(inputs.back(), dz);
  for (std::size_t k = hidden_.size(); k-- > 0;) {
    if (!masks.empty()) d = d.cwiseProduct(masks[k]);
    d = d.cwiseProduct(pre[k].unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
    d = hidden_[k].backward(inputs[k], d);
  }
  return loss / static_cast<double>(n);
}

void PairScorerModel::save(std::ostream& out) {
  out.write("PRPS", 4);
  binio::write_u32(out, kPairVersion);
  binio::write_u32(out, static_cast<std::uint32_t>(layout_.segments.size()));
  for (const auto& s : layout_.segments) {
    binio::write_string(out, s.name);
    binio::write_u64(out, s.offset);
    binio::write_u64(out, s.size);
  }
  binio::write_u64(out, arch_.hidden);
  binio::write_u64(out, arch_.layers);
  binio::write_f32(out, static_cast<float>(arch_.dropout));
  binio::write_u64(out, arch_.seed);
  nn::write_params(out, params());
  if (!out) throw Error("failed writing pair-scorer checkpoint");
}

void PairScorerModel::save(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  save(out);
}

PairScorerModel PairScorerModel::load(std::istream& in, const std::string& where) {
  try {
    binio::expect_magic(in, "PRPS");
    const auto version = binio::read_u32(in);
    if (version != kPairVersion) throw ParseError("", "unsupported pair-scorer version " + std::to_string(version));
    const auto n = binio::read_u32(in);
    if (n > 16) throw ParseError("", "implausible layout with " + std::to_string(n) + " segments");
    std::vector<std::string> order;
    std::vector<Segment> segs;
    for (std::uint32_t i = 0; i < n; ++i) {
      Segment s;
      s.name = binio::read_string(in);
      s.offset = binio::read_u64(in);
      s.size = binio::read_u64(in);
      order.push_back(s.name);
      segs.push_back(s);
    }
    const auto emb = std::find_if(segs.begin(), segs.end(), [](const Segment& s) { return s.name == "embedding_a"; });
    if (emb == segs.end() || emb->size > (1u << 16)) throw ParseError("", "layout lacks a usable embedding segment");
    auto layout = PairFeatureLayout::ordered(emb->size, order);
    for (std::size_t i = 0; i < segs.size(); ++i) {
      if (layout.segments[i].offset != segs[i].offset || layout.segments[i].size != segs[i].size) {
        throw ParseError("", "layout segment '" + segs[i].name + "' does not match this build's feature set");
      }
    }
    PairModelArch arch;
    arch.hidden = binio::read_u64(in);
    arch.layers = binio::read_u64(in);
    arch.dropout = binio::read_f32(in);
    arch.seed = binio::read_u64(in);
    if (arch.hidden > (1u << 16) || arch.layers > 64) throw ParseError("", "implausible pair-scorer shape");
    PairScorerModel m(std::move(layout), arch);
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

PairScorerModel PairScorerModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), "cannot open");
  return load(in, path.string());
}

std::vector<PairExample> collect_pairs(const std::vector<Document>& corpus, const PipelineConfig& config) {
  std::vector<PairExample> out;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const auto& ms = corpus[d].mentions;
    for (MentionId i = 0; i < ms.size(); ++i) {
      for (MentionId j : candidate_antecedents(ms, i, config)) {
        out.push_back({d, j, i, ms[j].chain_id == ms[i].chain_id});
      }
    }
  }
  return out;
}

Mat encode_examples(const std::vector<Document>& corpus, const PairFeatureLayout& layout,
                    const std::vector<PairExample>& examples, const std::vector<std::size_t>& which) {
  const auto dim = static_cast<Eigen::Index>(layout.total_dim());
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> x(static_cast<Eigen::Index>(which.size()), dim);
  for (std::size_t r = 0; r < which.size(); ++r) {
    const auto& e = examples[which[r]];
    const auto& doc = corpus[e.doc];
    encode_pair(doc.mentions[e.antecedent], doc.mentions[e.anaphor], doc, layout, x.row(static_cast<Eigen::Index>(r)).data());
  }
  return x;
}

PairSource corpus_pair_source(const std::vector<Document>& corpus, const PairFeatureLayout& layout,
                              const std::vector<PairExample>& examples) {
  PairSource s;
  s.size = examples.size();
  s.fetch = [&corpus, layout, &examples](const std::vector<std::size_t>& which, Mat& x, Vec& y) {
    x = encode_examples(corpus, layout, examples, which);
    y.resize(static_cast<Eigen::Index>(which.size()));
    for (std::size_t r = 0; r < which.size(); ++r) y(static_cast<Eigen::Index>(r)) = examples[which[r]].coreferent;
  };
  return s;
}

void PairTrainConfig::validate() const {
  if (batch_pairs == 0) throw ValidationError("batch_pairs must be positive");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (weight_decay < 0.0) throw ValidationError("weight_decay must be non-negative");
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) throw ValidationError("train_fraction must lie in (0, 1]");
}

PairTraining train_pair_model(const PairSource& source, const PairFeatureLayout& layout, const PairModelArch& arch,
                              const PairTrainConfig& config, std::ostream* log) {
  config.validate();
  if (source.size == 0) throw ValidationError("no mention pairs to train on");
  nn::Rng rng(config.seed);
  std::vector<std::size_t> order(source.size);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(config.train_fraction * static_cast<double>(source.size))), 1, source.size);
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> val(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  if (val.empty()) val = train;

  PairTraining result{PairScorerModel(layout, arch), {}, 0};
  auto& model = result.model;
  const auto params = model.params();
  nn::AdamW opt;
  opt.lr = config.learning_rate;
  opt.weight_decay = config.weight_decay;

  auto validate = [&](double& loss, double& acc) {
    loss = 0.0;
    std::size_t right = 0;
    Mat x;
    Vec y;
    for (std::size_t b = 0; b < val.size(); b += config.batch_pairs) {
      std::vector<std::size_t> idx(val.begin() + static_cast<std::ptrdiff_t>(b),
                                   val.begin() + static_cast<std::ptrdiff_t>(std::min(val.size(), b + config.batch_pairs)));
      source.fetch(idx, x, y);
      loss += model.loss(x, y) * static_cast<double>(idx.size());
      const Vec s = model.score(x);
      for (Eigen::Index i = 0; i < s.size(); ++i) right += is_coreferent(s(i)) == (y(i) > 0.5);
    }
    loss /= static_cast<double>(val.size());
    acc = static_cast<double>(right) / static_cast<double>(val.size());
  };
  auto record = [&](const PairEpochRecord& r) {
    result.log.push_back(r);
    if (log) {
      *log << nlohmann::json{{"epoch", r.epoch},
                             {"train_loss", r.train_loss},
                             {"validation_loss", r.validation_loss},
                             {"validation_accuracy", r.validation_accuracy}}
                  .dump()
           << "\n";
    }
  };

  PairEpochRecord first;
  validate(first.validation_loss, first.validation_accuracy);
  first.train_loss = first.validation_loss;
  record(first);
  double best = first.validation_loss;
  auto best_params = nn::snapshot(params);

  Mat x;
  Vec y;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(train.begin(), train.end(), rng);
    double total = 0.0;
    for (std::size_t b = 0; b < train.size(); b += config.batch_pairs) {
      std::vector<std::size_t> idx(train.begin() + static_cast<std::ptrdiff_t>(b),
                                   train.begin() + static_cast<std::ptrdiff_t>(std::min(train.size(), b + config.batch_pairs)));
      source.fetch(idx, x, y);
      nn::zero_grads(params);
      const double l = model.accumulate_gradient(x, y, &rng);
      if (!std::isfinite(l)) throw Error("non-finite pair loss at epoch " + std::to_string(epoch));
      opt.step(params);
      total += l * static_cast<double>(idx.size());
    }
    PairEpochRecord r;
    r.epoch = epoch;
    r.train_loss = total / static_cast<double>(train.size());
    validate(r.validation_loss, r.validation_accuracy);
    record(r);
    if (r.validation_loss < best) {
      best = r.validation_loss;
      result.best_epoch = epoch;
      best_params = nn::snapshot(params);
    }
  }
  nn::restore(params, best_params);
  return result;
}

PairTraining train_pair_scorer(const std::vector<Document>& corpus, const PairModelArch& arch,
                               const PipelineConfig& pipeline, const PairTrainConfig& config, std::ostream* log) {
  if (corpus.empty() || !corpus.front().embeddings) throw ValidationError("pair training needs documents with embeddings");
  const auto layout = PairFeatureLayout::standard(corpus.front().embeddings->dim());
  const auto examples = collect_pairs(corpus, pipeline);
  return train_pair_model(corpus_pair_source(corpus, layout, examples), layout, arch, config, log);
}

PairEvaluation evaluate_pair_scores(const std::vector<double>& scores, const std::vector<bool>& labels,
                                    double threshold) {
  if (scores.size() != labels.size()) throw DimensionError("scores and labels differ in length");
  PairEvaluation ev;
  for (std::size_t b = 0; b < ev.buckets.size(); ++b) {
    ev.buckets[b].low = static_cast<double>(b) / 10.0;
    ev.buckets[b].high = static_cast<double>(b + 1) / 10.0;
  }
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = is_coreferent(scores[i], threshold);
    const bool gold = labels[i];
    (pred ? (gold ? tp : fp) : (gold ? fn : tn))++;
    auto& bucket = ev.buckets[std::min<std::size_t>(9, static_cast<std::size_t>(std::max(0.0, scores[i]) * 10.0))];
    ++bucket.pairs;
    bucket.errors += pred != gold;
  }
  auto ratio = [](std::size_t a, std::size_t b) { return b ? static_cast<double>(a) / static_cast<double>(b) : 0.0; };
  ev.coreferent = make_prf(ratio(tp, tp + fp), ratio(tp, tp + fn));
  ev.non_coreferent = make_prf(ratio(tn, tn + fn), ratio(tn, tn + fp));
  ev.support_coreferent = tp + fn;
  ev.support_non_coreferent = tn + fp;
  ev.accuracy = ratio(tp + tn, scores.size());
  return ev;
}

PairEvaluation evaluate_pair_scorer(const PairScorerModel& model, const std::vector<Document>& corpus,
                                    const PipelineConfig& pipeline, std::size_t batch) {
  const auto examples = collect_pairs(corpus, pipeline);
  std::vector<double> scores;
  std::vector<bool> labels;
  for (std::size_t b = 0; b < examples.size(); b += batch) {
    std::vector<std::size_t> idx(std::min(examples.size(), b + batch) - b);
    std::iota(idx.begin(), idx.end(), b);
    const Vec s = model.score(encode_examples(corpus, model.layout(), examples, idx));
    for (Eigen::Index i = 0; i < s.size(); ++i) scores.push_back(s(i));
    for (std::size_t i : idx) labels.push_back(examples[i].coreferent);
  }
  return evaluate_pair_scores(scores, labels);
}

}  // namespace longcoref

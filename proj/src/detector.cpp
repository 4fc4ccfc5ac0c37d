#include "longcoref/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>

#include <json.hpp>

#include "longcoref/document.hpp"
#include "longcoref/errors.hpp"

namespace longcoref {
namespace {

struct SentenceRef {
  std::size_t doc;
  Span span;
  std::vector<Tag> gold;
};

std::vector<Span> spans_of(const std::vector<Tag>& tags) {
  std::vector<Span> out;
  for (const auto& s : bioes_decode(tags).spans) out.push_back(s.span);
  return out;
}

MentionCounts score_sentences(const TaggerModel& model, const std::vector<Document>& corpus,
                              const std::vector<SentenceRef>& sents, const std::vector<std::size_t>& which) {
  MentionCounts total;
  for (std::size_t i : which) {
    const auto& s = sents[i];
    const auto out = model.decode(embedding_rows(corpus[s.doc], s.span));
    total += evaluate_mentions(spans_of(out.tags), spans_of(s.gold));
  }
  return total;
}

bool crossing(const Span& a, const Span& b) {
  return (a.start < b.start && b.start <= a.end && a.end < b.end) ||
         (b.start < a.start && a.start <= b.end && b.end < a.end);
}

}  // namespace

void TaggerTrainConfig::validate() const {
  if (batch_sentences == 0) throw ValidationError("batch_sentences must be positive");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (weight_decay < 0.0) throw ValidationError("weight_decay must be non-negative");
  if (!(plateau_factor > 0.0 && plateau_factor < 1.0)) throw ValidationError("plateau_factor must lie in (0, 1)");
  if (plateau_patience < 0) throw ValidationError("plateau_patience must be non-negative");
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) throw ValidationError("train_fraction must lie in (0, 1]");
}

Prf MentionCounts::prf() const {
  const double tp = static_cast<double>(true_positive);
  const double p = true_positive + false_positive ? tp / static_cast<double>(true_positive + false_positive) : 0.0;
  const double r = true_positive + false_negative ? tp / static_cast<double>(true_positive + false_negative) : 0.0;
  return make_prf(p, r);
}

MentionCounts& MentionCounts::operator+=(const MentionCounts& o) {
  true_positive += o.true_positive;
  false_positive += o.false_positive;
  false_negative += o.false_negative;
  return *this;
}

MentionCounts evaluate_mentions(const std::vector<Span>& predicted, const std::vector<Span>& gold) {
  const std::set<Span> p(predicted.begin(), predicted.end()), g(gold.begin(), gold.end());
  MentionCounts c;
  for (const auto& s : p) (g.contains(s) ? c.true_positive : c.false_positive)++;
  c.false_negative = g.size() - c.true_positive;
  return c;
}

MentionCounts evaluate_tagger(const TaggerModel& model, const std::vector<Document>& docs) {
  MentionCounts total;
  for (const auto& doc : docs) {
    for (const auto& s : sentence_spans(doc)) {
      const auto out = model.decode(embedding_rows(doc, s));
      total += evaluate_mentions(spans_of(out.tags), spans_of(gold_tags(doc, s, model.arch().level).tags));
    }
  }
  return total;
}

TaggerTraining train_tagger(const std::vector<Document>& corpus, const TaggerArch& arch,
                            const TaggerTrainConfig& config, std::ostream* log) {
  config.validate();
  std::vector<SentenceRef> sents;
  std::size_t n_spans = 0, skipped = 0;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    const auto& doc = corpus[d];
    if (!doc.embeddings) throw ValidationError("document '" + doc.doc_id + "' has no embeddings");
    if (doc.embeddings->dim() != arch.embedding_dim) {
      throw DimensionError("document '" + doc.doc_id + "' embeddings have width " +
                           std::to_string(doc.embeddings->dim()) + ", tagger expects " +
                           std::to_string(arch.embedding_dim));
    }
    for (const auto& s : sentence_spans(doc)) {
      auto g = gold_tags(doc, s, arch.level);
      skipped += g.skipped;
      for (Tag t : g.tags) n_spans += (t == Tag::S || t == Tag::B);
      sents.push_back({d, s, std::move(g.tags)});
    }
  }
  if (n_spans == 0) throw ValidationError("no mentions at nesting level " + std::to_string(arch.level));

  nn::Rng rng(config.seed);
  std::vector<std::size_t> order(sents.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(config.train_fraction * static_cast<double>(sents.size()))), 1,
      sents.size());
  std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> val(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  if (val.empty()) val = train;

  TaggerTraining result{TaggerModel(arch), {}, 0, 0.0, train.size(), val.size(), skipped};
  auto& model = result.model;
  const auto params = model.params();
  nn::AdamW opt;
  opt.lr = config.learning_rate;
  opt.weight_decay = config.weight_decay;
  nn::PlateauScheduler sched(config.plateau_factor, config.plateau_patience);

  auto record = [&](const EpochRecord& r) {
    result.log.push_back(r);
    if (log) {
      *log << nlohmann::json{{"level", arch.level},
                             {"epoch", r.epoch},
                             {"train_loss", r.train_loss},
                             {"validation_f1", r.validation_f1},
                             {"learning_rate", r.learning_rate}}
                  .dump()
           << "\n";
    }
  };

  {
    double loss = 0.0;
    for (std::size_t i : train) loss += model.loss(embedding_rows(corpus[sents[i].doc], sents[i].span), sents[i].gold);
    const double f1 = score_sentences(model, corpus, sents, val).prf().f1;
    result.best_f1 = f1;
    record({0, loss / static_cast<double>(train.size()), f1, opt.lr});
  }
  auto best = nn::snapshot(params);

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(train.begin(), train.end(), rng);
    double total = 0.0;
    for (std::size_t b = 0; b < train.size(); b += config.batch_sentences) {
      const std::size_t e = std::min(train.size(), b + config.batch_sentences);
      nn::zero_grads(params);
      double batch_loss = 0.0;
      for (std::size_t k = b; k < e; ++k) {
        const auto& s = sents[train[k]];
        batch_loss += model.accumulate_gradient(embedding_rows(corpus[s.doc], s.span), s.gold, &rng);
      }
      if (!std::isfinite(batch_loss)) throw Error("non-finite training loss at epoch " + std::to_string(epoch));
      const double scale = 1.0 / static_cast<double>(e - b);
      for (auto* p : params) p->grad *= scale;
      opt.step(params);
      total += batch_loss;
    }
    if (!nn::all_finite(params)) throw Error("non-finite parameters at epoch " + std::to_string(epoch));
    const double f1 = score_sentences(model, corpus, sents, val).prf().f1;
    record({epoch, total / static_cast<double>(train.size()), f1, opt.lr});
    if (f1 > result.best_f1) {
      result.best_f1 = f1;
      result.best_epoch = epoch;
      best = nn::snapshot(params);
    }
    sched.observe(f1, opt.lr);
    if (f1 >= config.target_f1) break;
  }
  nn::restore(params, best);
  return result;
}

std::vector<ScoredSpan> merge_level_spans(std::vector<ScoredSpan> spans) {
  std::stable_sort(spans.begin(), spans.end(), [](const ScoredSpan& a, const ScoredSpan& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return canonical_less(a.span, b.span);
  });
  std::vector<ScoredSpan> kept;
  for (const auto& s : spans) {
    const bool clash = std::any_of(kept.begin(), kept.end(), [&](const ScoredSpan& k) {
      return k.span == s.span || crossing(k.span, s.span);
    });
    if (!clash) kept.push_back(s);
  }
  std::sort(kept.begin(), kept.end(), [](const ScoredSpan& a, const ScoredSpan& b) {
    return canonical_less(a.span, b.span);
  });
  return kept;
}

std::vector<Mention> detect_mentions(const TaggerModel& outer, const TaggerModel* inner, const Document& doc) {
  std::vector<Mention> out;
  for (const auto& sent : sentence_spans(doc)) {
    const Mat x = embedding_rows(doc, sent);
    std::vector<ScoredSpan> found;
    for (const TaggerModel* m : {&outer, inner}) {
      if (!m) continue;
      const auto tagged = m->decode(x);
      for (auto s : bioes_decode(tagged.tags, tagged.confidence).spans) {
        s.span.start += sent.start;
        s.span.end += sent.start;
        found.push_back(s);
      }
    }
    for (const auto& s : merge_level_spans(std::move(found))) {
      Mention m;
      m.start = s.span.start;
      m.end = s.span.end;
      m.confidence = s.confidence;
      m.head_token = select_head(m.start, m.end, doc.tokens);
      m.category = classify_mention(m, doc.tokens).category;
      out.push_back(m);
    }
  }
  return with_mentions(doc, std::move(out)).mentions;
}

Document with_mentions(const Document& doc, std::vector<Mention> mentions) {
  Document d;
  d.doc_id = doc.doc_id;
  d.tokens = doc.tokens;
  d.embeddings = doc.embeddings;
  d.mentions = std::move(mentions);
  for (auto& m : d.mentions) m.chain_id = kSingletonChain;
  normalize_document(d);
  return d;
}

}  // namespace longcoref

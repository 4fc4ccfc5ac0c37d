#include <doctest.h>

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "longcoref/bioes.hpp"
#include "longcoref/crf.hpp"
#include "longcoref/detector.hpp"
#include "longcoref/errors.hpp"
#include "longcoref/tagger.hpp"
#include "oracles.hpp"
#include "toy_corpus.hpp"

using namespace longcoref;
using nn::Mat;

namespace {

Mat random_mat(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

std::vector<Span> spans_only(const TagDecoding& d) {
  std::vector<Span> out;
  for (const auto& s : d.spans) out.push_back(s.span);
  return out;
}

TaggerArch toy_arch(nn::EncoderKind kind, std::size_t dim = 8) {
  TaggerArch a;
  a.embedding_dim = dim;
  a.projection_dim = 8;
  a.hidden = 8;
  a.encoder = kind;
  a.window = 1;
  a.dropout = 0.0;
  return a;
}

}  // namespace

TEST_CASE("BIOES encoding") {
  CHECK(tags_to_string(bioes_encode({{0, 0}, {2, 4}}, 6)) == "S O B I E O");
  CHECK(tags_to_string(bioes_encode({}, 3)) == "O O O");
  CHECK(tags_to_string(bioes_encode({{0, 1}}, 2)) == "B E");
  CHECK_THROWS_AS(bioes_encode({{0, 2}, {2, 3}}, 5), ValidationError);
  CHECK_THROWS_AS(bioes_encode({{3, 5}}, 5), ValidationError);
}

TEST_CASE("BIOES decoding") {
  CHECK(spans_only(bioes_decode(parse_tags("SOBIEO"))) == std::vector<Span>{{0, 0}, {2, 4}});
  const auto orphan = bioes_decode(parse_tags("IEO"));
  CHECK(orphan.spans.empty());
  CHECK(orphan.diagnostics.size() == 1);
  const auto conf = bioes_decode(parse_tags("BE"), {0.8, 0.6});
  REQUIRE(conf.spans.size() == 1);
  CHECK(conf.spans[0].confidence == doctest::Approx(0.7));
  const auto open = bioes_decode(parse_tags("BIOS"));
  CHECK(spans_only(open) == std::vector<Span>{{3, 3}});
  CHECK(open.diagnostics.size() == 1);
}

TEST_CASE("decode inverts encode on random non-overlapping spans") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(0, 20)(rng);
    std::vector<Span> spans;
    std::size_t t = 0;
    while (t < n) {
      if (std::bernoulli_distribution(0.4)(rng)) {
        const std::size_t len = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
        if (t + len <= n) spans.push_back({t, t + len - 1});
        t += len;
      }
      t += std::uniform_int_distribution<std::size_t>(0, 2)(rng);
    }
    const auto d = bioes_decode(bioes_encode(spans, n));
    CHECK(spans_only(d) == spans);
    CHECK(d.diagnostics.empty());
  }
}

TEST_CASE("structural transitions") {
  using crf::allowed_transition;
  const auto B = static_cast<std::size_t>(Tag::B), I = static_cast<std::size_t>(Tag::I),
             E = static_cast<std::size_t>(Tag::E), S = static_cast<std::size_t>(Tag::S),
             O = static_cast<std::size_t>(Tag::O);
  CHECK_FALSE(allowed_transition(O, E));
  CHECK_FALSE(allowed_transition(crf::kStart, I));
  CHECK_FALSE(allowed_transition(B, crf::kStop));
  CHECK_FALSE(allowed_transition(I, O));
  CHECK(allowed_transition(B, E));
  CHECK(allowed_transition(E, S));
  CHECK(allowed_transition(S, crf::kStop));
}

TEST_CASE("Viterbi agrees with exhaustive search") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const Mat tr = random_mat(crf::kStates, crf::kStates, rng);
    for (Eigen::Index n = 0; n <= 7; ++n) {
      const Mat e = random_mat(n, kNumTags, rng, 2.0);
      const auto v = crf::viterbi(e, tr);
      const auto brute = oracles::crf_exhaustive(e, tr);
      CHECK(v.score == doctest::Approx(brute.score).epsilon(1e-12));
      CHECK(v.labels == brute.labels);
      CHECK(crf::path_score(e, tr, v.labels) == doctest::Approx(v.score).epsilon(1e-12));
    }
  }
}

TEST_CASE("Viterbi beats random paths and respects the mask") {
  std::mt19937_64 rng(23);
  const Mat tr = random_mat(crf::kStates, crf::kStates, rng);
  const Mat e = random_mat(30, kNumTags, rng, 2.0);
  const auto v = crf::viterbi(e, tr);
  std::uniform_int_distribution<std::size_t> label(0, kNumTags - 1);
  for (int k = 0; k < 1000; ++k) {
    std::vector<std::size_t> p(30);
    for (auto& x : p) x = label(rng);
    CHECK(crf::path_score(e, tr, p) <= v.score + 1e-12);
  }
  const auto masked = crf::viterbi(e, tr + crf::structural_mask());
  std::vector<Tag> tags;
  for (auto l : masked.labels) tags.push_back(static_cast<Tag>(l));
  CHECK(bioes_decode(tags).diagnostics.empty());
}

TEST_CASE("equal transitions reduce decoding to per-token argmax") {
  std::mt19937_64 rng(29);
  const Mat tr = Mat::Constant(crf::kStates, crf::kStates, 0.3);
  const Mat e = random_mat(12, kNumTags, rng);
  const auto v = crf::viterbi(e, tr);
  for (Eigen::Index t = 0; t < e.rows(); ++t) {
    Eigen::Index arg;
    e.row(t).maxCoeff(&arg);
    CHECK(v.labels[static_cast<std::size_t>(t)] == static_cast<std::size_t>(arg));
  }
}

TEST_CASE("empty sentence") {
  const Mat tr = Mat::Zero(crf::kStates, crf::kStates);
  CHECK(crf::viterbi(Mat(0, kNumTags), tr).labels.empty());
  CHECK(crf::forward_backward(Mat(0, kNumTags), tr).marginals.rows() == 0);
}

TEST_CASE("posterior marginals are distributions and match enumeration") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat tr = random_mat(crf::kStates, crf::kStates, rng);
    const Mat e = random_mat(4, kNumTags, rng);
    const auto post = crf::forward_backward(e, tr);
    for (Eigen::Index t = 0; t < 4; ++t) CHECK(std::abs(post.marginals.row(t).sum() - 1.0) < 1e-9);
    // enumerate 5^4 paths
    Mat brute = Mat::Zero(4, kNumTags);
    double z = 0.0;
    std::vector<std::size_t> p(4);
    for (std::size_t code = 0; code < 625; ++code) {
      std::size_t c = code;
      for (auto& x : p) {
        x = c % 5;
        c /= 5;
      }
      const double w = std::exp(crf::path_score(e, tr, p));
      z += w;
      for (std::size_t t = 0; t < 4; ++t) brute(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(p[t])) += w;
    }
    CHECK(post.log_partition == doctest::Approx(std::log(z)).epsilon(1e-12));
    CHECK((brute / z - post.marginals).cwiseAbs().maxCoeff() < 1e-12);
  }
  const Mat masked = Mat::Zero(crf::kStates, crf::kStates) + crf::structural_mask();
  const auto post = crf::forward_backward(random_mat(6, kNumTags, rng), masked);
  for (Eigen::Index t = 0; t < 6; ++t) CHECK(std::abs(post.marginals.row(t).sum() - 1.0) < 1e-9);
}

TEST_CASE("CRF gradient matches finite differences") {
  std::mt19937_64 rng(37);
  nn::Param e("e", 3, kNumTags), tr("t", crf::kStates, crf::kStates);
  e.value = random_mat(3, kNumTags, rng);
  tr.value = random_mat(crf::kStates, crf::kStates, rng);
  const std::vector<std::size_t> gold{3, 4, 0};
  const auto loss = [&] { return crf::negative_log_likelihood(e.value, tr.value, gold).value; };
  const auto grads = [&] {
    const auto l = crf::negative_log_likelihood(e.value, tr.value, gold);
    e.grad = l.d_emissions;
    tr.grad = l.d_transitions;
  };
  CHECK(oracles::gradient_check({&e, &tr}, loss, grads) < 1e-4);
  CHECK(loss() > 0.0);
}

TEST_CASE("tagger gradient matches finite differences") {
  std::mt19937_64 rng(41);
  for (auto kind : {nn::EncoderKind::window_mixer, nn::EncoderKind::bilstm}) {
    CAPTURE(nn::to_string(kind));
    TaggerModel model(toy_arch(kind, 5));
    const Mat x = random_mat(3, 5, rng);
    const auto gold = parse_tags("BEO");
    const auto params = model.params();
    const auto loss = [&] { return model.loss(x, gold); };
    const auto grads = [&] { model.accumulate_gradient(x, gold, nullptr); };
    CHECK(oracles::gradient_check(params, loss, grads) < 1e-4);
  }
}

TEST_CASE("a small gradient step lowers the batch loss") {
  std::mt19937_64 rng(43);
  TaggerModel model(toy_arch(nn::EncoderKind::bilstm, 6));
  const Mat x = random_mat(7, 6, rng);
  const auto gold = parse_tags("SOBIEOS");
  const auto params = model.params();
  nn::zero_grads(params);
  const double before = model.accumulate_gradient(x, gold, nullptr);
  for (auto* p : params) p->value -= 1e-4 * p->grad;
  CHECK(model.loss(x, gold) < before);
}

TEST_CASE("tagger checkpoint round trip") {
  auto arch = toy_arch(nn::EncoderKind::bilstm, 4);
  arch.level = 1;
  TaggerModel model(arch);
  std::stringstream buf;
  model.save(buf);
  auto back = TaggerModel::load(buf);
  CHECK(back.arch().level == 1);
  CHECK(back.arch().encoder == nn::EncoderKind::bilstm);
  auto a = model.params(), b = back.params();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(b[i]->value == a[i]->value.cast<float>().cast<double>());
  }
  std::stringstream again;
  back.save(again);
  buf.clear();
  buf.seekg(0);
  CHECK(again.str() == buf.str());

  std::string bytes = buf.str();
  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(TaggerModel::load(truncated), ParseError);
  bytes[0] = 'Q';
  std::stringstream bad(bytes);
  CHECK_THROWS_AS(TaggerModel::load(bad), ParseError);
}

TEST_CASE("decoding checks the embedding width") {
  TaggerModel model(toy_arch(nn::EncoderKind::window_mixer, 4));
  CHECK_THROWS_AS(model.decode(Mat::Zero(3, 5)), DimensionError);
  CHECK(model.decode(Mat(0, 4)).tags.empty());
}

TEST_CASE("training learns the capitalized-token task") {
  const auto corpus = toy::capitalized_corpus(4, 40, 8, 99);
  auto arch = toy_arch(nn::EncoderKind::window_mixer);
  arch.dropout = 0.1;
  TaggerTrainConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.max_epochs = 20;
  std::ostringstream log;
  const auto run = train_tagger(corpus, arch, cfg, &log);
  CHECK(run.best_f1 >= 0.99);
  CHECK(run.log.size() >= 2);
  CHECK(log.str().find("\"validation_f1\"") != std::string::npos);
  const auto counts = evaluate_tagger(run.model, toy::capitalized_corpus(2, 20, 8, 99));
  CHECK(counts.prf().f1 >= 0.99);
}

TEST_CASE("training is reproducible with a fixed seed") {
  const auto corpus = toy::capitalized_corpus(1, 20, 8, 5);
  auto arch = toy_arch(nn::EncoderKind::bilstm);
  arch.dropout = 0.5;
  TaggerTrainConfig cfg;
  cfg.learning_rate = 5e-3;
  cfg.max_epochs = 2;
  auto a = train_tagger(corpus, arch, cfg);
  auto b = train_tagger(corpus, arch, cfg);
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) CHECK(a.log[i].train_loss == b.log[i].train_loss);
  auto pa = a.model.params(), pb = b.model.params();
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value == pb[i]->value);
}

TEST_CASE("zero epochs returns the initialized model") {
  const auto corpus = toy::capitalized_corpus(1, 20, 8, 6);
  TaggerTrainConfig cfg;
  cfg.max_epochs = 0;
  const auto arch = toy_arch(nn::EncoderKind::window_mixer);
  auto run = train_tagger(corpus, arch, cfg);
  REQUIRE(run.log.size() == 1);
  CHECK(run.best_epoch == 0);
  CHECK(run.log[0].validation_f1 < 0.5);
  TaggerModel fresh(arch);
  auto a = run.model.params(), b = fresh.params();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i]->value == b[i]->value);
}

TEST_CASE("training rejects a level without mentions") {
  const auto corpus = toy::capitalized_corpus(1, 5, 8, 1);
  auto arch = toy_arch(nn::EncoderKind::window_mixer);
  arch.level = 1;
  CHECK_THROWS_AS(train_tagger(corpus, arch, TaggerTrainConfig{}), ValidationError);
  TaggerTrainConfig bad;
  bad.train_fraction = 0.0;
  CHECK_THROWS_AS(train_tagger(corpus, toy_arch(nn::EncoderKind::window_mixer), bad), ValidationError);
}

TEST_CASE("merging spans from two levels") {
  SUBCASE("nested spans both survive") {
    const auto kept = merge_level_spans({{{2, 5}, 0.8}, {{3, 3}, 0.6}});
    CHECK(kept.size() == 2);
    auto doc = fixtures::make_document("a b c d e f g", {});
    std::vector<Mention> ms;
    for (const auto& s : kept) {
      Mention m;
      m.start = s.span.start;
      m.end = s.span.end;
      m.head_token = m.end;
      ms.push_back(m);
    }
    const auto d = with_mentions(doc, ms);
    CHECK(d.mentions[0].nesting_level == 0);
    CHECK(d.mentions[1].nesting_level == 1);
  }
  SUBCASE("crossing spans keep the more confident one") {
    const auto kept = merge_level_spans({{{0, 2}, 0.9}, {{2, 4}, 0.4}});
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].span == Span{0, 2});
  }
  SUBCASE("identical spans collapse to the more confident copy") {
    const auto kept = merge_level_spans({{{1, 2}, 0.5}, {{1, 2}, 0.7}});
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].confidence == doctest::Approx(0.7));
  }
}

TEST_CASE("detected mentions are well formed") {
  const auto corpus = toy::capitalized_corpus(1, 10, 8, 12);
  TaggerModel outer(toy_arch(nn::EncoderKind::window_mixer)), inner(toy_arch(nn::EncoderKind::bilstm));
  const auto ms = detect_mentions(outer, &inner, corpus[0]);
  const auto d = with_mentions(corpus[0], ms);
  CHECK(validate_document(d).ok());
  for (const auto& m : ms) {
    CHECK(m.confidence > 0.0);
    CHECK(m.confidence <= 1.0 + 1e-12);
  }
}

TEST_CASE("exact-match mention scoring") {
  const std::vector<Span> gold{{0, 0}, {2, 4}};
  CHECK(evaluate_mentions(gold, gold).prf().f1 == doctest::Approx(1.0));
  const auto c = evaluate_mentions({{0, 0}, {2, 3}}, gold);
  CHECK(c.prf().precision == doctest::Approx(0.5));
  CHECK(c.prf().recall == doctest::Approx(0.5));
  CHECK(c.prf().f1 == doctest::Approx(0.5));
  CHECK(evaluate_mentions({}, {}).prf().f1 == 0.0);
}

#include <doctest.h>

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "longcoref/errors.hpp"
#include "longcoref/harness.hpp"
#include "longcoref/io.hpp"
#include "longcoref/metrics.hpp"
#include "longcoref/pipeline.hpp"
#include "longcoref/resolver.hpp"
#include "longcoref/synthetic.hpp"

using namespace longcoref;

namespace {

Document filler_document(std::size_t n) {
  std::string text;
  for (std::size_t i = 0; i < n; ++i) text += (i % 20 == 19 ? "x ||" : "x") + std::string(i + 1 < n ? " " : "");
  return fixtures::make_document(text, {});
}

ChainSet oracle_chains(const Document& d) {
  return cluster_left_to_right(oracle_decisions(d, PipelineConfig{}), d.mentions.size());
}

double conll(const Document& d, const ChainSet& chains) {
  return evaluate(to_partition(d, gold_chains(d)), to_partition(d, chains)).conll_f1;
}

}  // namespace

TEST_CASE("document splitting") {
  SUBCASE("exact division") {
    const auto s = split_document(filler_document(10000), 2000);
    CHECK(s.samples.size() == 5);
    CHECK(s.dropped_tokens == 0);
    for (const auto& d : s.samples) CHECK(d.tokens.size() == 2000);
    CHECK(s.samples[3].doc_id == "fixture@3");
  }
  SUBCASE("remainder dropped") {
    const auto s = split_document(filler_document(9999), 2000);
    CHECK(s.samples.size() == 4);
    CHECK(s.dropped_tokens == 1999);
  }
  SUBCASE("length above the document keeps nothing") {
    const auto s = split_document(filler_document(50), 51);
    CHECK(s.samples.empty());
    CHECK(s.dropped_tokens == 50);
  }
  SUBCASE("zero length") { CHECK_THROWS_AS(split_document(filler_document(5), 0), ValidationError); }
  SUBCASE("chains are re-scoped and crossing mentions dropped") {
    // a chain with mentions in both halves, and a mention across the cut
    auto doc = fixtures::make_document("Paul dort x elle || Paul rit ici Paul",
                                       {{0, 0, "p", MentionCategory::proper},
                                        {3, 4, "q"},
                                        {5, 5, "p", MentionCategory::proper},
                                        {7, 7, "p", MentionCategory::proper}});
    doc.chains.front().gender_label = Gender::masculine;
    auto emb = std::make_shared<EmbeddingMatrix>(8, 2);
    for (std::size_t t = 0; t < 8; ++t) emb->row(t)[0] = static_cast<float>(t);
    doc.embeddings = emb;
    const auto s = split_document(doc, 4);
    REQUIRE(s.samples.size() == 2);
    CHECK(s.dropped_mentions == 1);
    CHECK(s.diagnostics.size() == 1);
    CHECK(s.samples[0].mentions.size() == 1);
    CHECK(s.samples[1].mentions.size() == 2);
    CHECK(s.samples[1].mentions[0].start == 1);
    CHECK(s.samples[1].chains.size() == 1);
    CHECK(s.samples[1].chains[0].gender_label == Gender::masculine);
    CHECK(s.samples[1].tokens[0].sentence_index == 0);
    CHECK(s.samples[1].embeddings->row(2)[0] == 6.0f);
    CHECK(validate_document(s.samples[1]).ok());
  }
}

TEST_CASE("token conservation across lengths") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 1 + rng() % 400;
    const auto doc = filler_document(n);
    for (std::size_t length : {1, 7, 50, 128, 399}) {
      const auto s = split_document(doc, length);
      std::size_t kept = 0;
      for (const auto& d : s.samples) kept += d.tokens.size();
      CHECK(kept + s.dropped_tokens == n);
      CHECK(s.samples.size() == n / length);
    }
  }
}

TEST_CASE("length sweep") {
  SyntheticCorpusConfig c;
  c.n_docs = 2;
  c.tokens_per_doc = 2000;
  const auto corpus = generate_synthetic_corpus(c).docs;

  SUBCASE("one sample per document equals direct evaluation") {
    auto predict = [](const Document& d) {
      ChainSet singles;
      for (MentionId i = 0; i < d.mentions.size(); ++i) singles.push_back({i});
      return singles;
    };
    const auto points = length_sweep({corpus[0]}, {2000}, predict);
    REQUIRE(points.size() == 1);
    CHECK(points[0].retained_docs == 1);
    CHECK(points[0].samples_per_doc == std::vector<std::size_t>{1});
    CHECK(points[0].macro.conll_f1 == doctest::Approx(conll(corpus[0], predict(corpus[0]))).epsilon(1e-12));
  }
  SUBCASE("perfect predictions average to one and lengths past the corpus are empty") {
    const auto points = length_sweep(corpus, {500, 1000, 5000}, oracle_chains);
    CHECK(points[0].macro.conll_f1 == doctest::Approx(1.0));
    CHECK(points[0].samples_per_doc == std::vector<std::size_t>{4, 4});
    CHECK(points[1].macro.conll_f1 == doctest::Approx(1.0));
    CHECK(points[2].empty());
    const auto tsv = length_sweep_tsv(points);
    CHECK(tsv.find("5000\t0\t0\t0\tNA") != std::string::npos);
  }
  SUBCASE("worker threads do not change results") {
    const auto a = length_sweep(corpus, {300}, oracle_chains, 1);
    const auto b = length_sweep(corpus, {300}, oracle_chains, 3);
    CHECK(a[0].macro.conll_f1 == b[0].macro.conll_f1);
    CHECK(a[0].dropped_mentions == b[0].dropped_mentions);
  }
}

TEST_CASE("corpus statistics") {
  SUBCASE("spread of a two-mention chain") {
    std::string text = "Paul";
    for (int i = 1; i < 99; ++i) text += " x";
    text += " Paul";
    const auto doc = fixtures::make_document(text, {{0, 0, "p", MentionCategory::proper},
                                                    {99, 99, "p", MentionCategory::proper}});
    const auto s = corpus_stats({doc});
    CHECK(s.max_spread == 99);
    CHECK(s.average_spread == 99.0);
    CHECK(s.spread_defined);
  }
  SUBCASE("only singletons") {
    const auto doc = fixtures::make_document("Paul et Marie", {{0, 0, "a"}, {2, 2, "b"}});
    const auto s = corpus_stats({doc});
    CHECK(s.singleton_ratio == 1.0);
    CHECK_FALSE(s.spread_defined);
    CHECK(s.max_spread == 0);
  }
  SUBCASE("example sentence hand counts") {
    const auto s = corpus_stats({load_document(fixtures::data_path("example_sentence.json"))});
    CHECK(s.mentions == 8);
    CHECK(s.chains == 6);
    CHECK(s.singletons == 4);
    CHECK(s.singleton_ratio == 0.5);
    CHECK(s.max_mentions_per_chain == 2);
    CHECK(s.average_spread == 4.5);
    CHECK(s.max_spread == 6);
    CHECK(s.level_ratio[1] == 3.0 / 8);
    CHECK(s.level_ratio[2] == 1.0 / 8);
    CHECK(s.plural_ratio == 3.0 / 8);
    CHECK(s.pronoun_ratio == 3.0 / 8);
    CHECK(s.proper_ratio == 3.0 / 8);
    CHECK(s.common_ratio == 2.0 / 8);
    CHECK(corpus_stats_tsv(s).find("singleton_ratio\t0.5000") != std::string::npos);
  }
}

TEST_CASE("antecedent distances") {
  SUBCASE("distances are mention-id differences") {
    std::vector<fixtures::MentionSpec> ms;
    for (std::size_t i = 0; i < 10; ++i) {
      const bool in_chain = i == 3 || i == 5 || i == 9;
      ms.push_back({i, i, in_chain ? "c" : "s" + std::to_string(i), MentionCategory::pronoun});
    }
    const auto doc = fixtures::make_document("a b c d e f g h i j", ms);
    const auto d = antecedent_distance_distribution({doc});
    CHECK(d.distances.at(MentionCategory::pronoun) == std::vector<std::size_t>{2, 4});
    CHECK(d.distances.at(MentionCategory::proper).empty());
  }
  SUBCASE("nearest-rank percentiles") {
    const std::vector<std::size_t> v{15, 20, 35, 40, 50};
    CHECK(nearest_rank(v, 5) == 15);
    CHECK(nearest_rank(v, 30) == 20);
    CHECK(nearest_rank(v, 40) == 20);
    CHECK(nearest_rank(v, 50) == 35);
    CHECK(nearest_rank(v, 100) == 50);
    CHECK(nearest_rank({}, 50) == 0);
    CHECK_THROWS_AS(nearest_rank(v, 0), ValidationError);
  }
}

TEST_CASE("synthetic generator") {
  SyntheticCorpusConfig c;
  c.n_docs = 3;
  SUBCASE("fixed seed gives identical bytes") {
    const auto a = generate_synthetic_corpus(c), b = generate_synthetic_corpus(c);
    for (std::size_t i = 0; i < a.docs.size(); ++i) {
      CHECK(write_document(a.docs[i]) == write_document(b.docs[i]));
      CHECK(a.docs[i].embeddings->data() == b.docs[i].embeddings->data());
    }
    CHECK(write_firstname_lexicon(a.first_names) == write_firstname_lexicon(b.first_names));
    c.seed = 2;
    CHECK(write_document(generate_synthetic_corpus(c).docs[0]) != write_document(a.docs[0]));
  }
  SUBCASE("documents are valid and sized as configured") {
    for (const auto& d : generate_synthetic_corpus(c).docs) {
      CHECK(d.tokens.size() == c.tokens_per_doc);
      CHECK(validate_document(d).ok());
      CHECK(d.embeddings->rows() == d.tokens.size());
      CHECK(d.embeddings->dim() == c.embedding_dim);
    }
  }
  SUBCASE("one character and no fillers") {
    c.n_entities = 1;
    c.singleton_rate = 0.0;
    c.coordination_rate = 0.0;
    for (const auto& d : generate_synthetic_corpus(c).docs) {
      REQUIRE(d.chains.size() == 1);
      for (std::size_t i = 1; i < d.mentions.size(); ++i) CHECK(d.mentions[i].chain_id == d.mentions[i - 1].chain_id);
    }
  }
  SUBCASE("measured gaps follow the configured means") {
    const auto d = antecedent_distance_distribution(generate_synthetic_corpus(c).docs);
    for (auto [cat, mean] : {std::pair{MentionCategory::pronoun, c.pronoun_gap},
                             std::pair{MentionCategory::common, c.common_gap},
                             std::pair{MentionCategory::proper, c.proper_gap}}) {
      CAPTURE(to_string(cat));
      const auto median = static_cast<double>(d.percentile(cat, 50));
      CHECK(median >= 0.8 * mean);
      CHECK(median <= 1.2 * mean);
    }
    CHECK(d.percentile(MentionCategory::pronoun, 95) <= 7);
  }
  SUBCASE("gold antecedents within the windows give exact oracle chains") {
    for (const auto& d : generate_synthetic_corpus(c).docs) CHECK(conll(d, oracle_chains(d)) == doctest::Approx(1.0));
  }
  SUBCASE("coordinations produce cannot-links that clustering respects") {
    c.coordination_rate = 0.05;
    std::size_t links = 0;
    for (const auto& d : generate_synthetic_corpus(c).docs) {
      PipelineConfig pc;
      pc.clustering_strategy = ClusteringStrategy::easy_first_global;
      const auto r = resolve(d, oracle_decisions(d, pc), pc);
      links += r.constraints.cannot_link.size();
      CHECK(count_cannot_link_violations(r.chains, r.constraints) == 0);
    }
    CHECK(links > 0);
  }
  SUBCASE("invalid settings") {
    c.proper_gap = 5000;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c.proper_gap = 50;
    c.pronoun_ratio = 0.9;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c.pronoun_ratio = 0.6;
    c.n_entities = 0;
    CHECK_THROWS_AS(generate_synthetic_corpus(c), ValidationError);
  }
  SUBCASE("settings text") {
    apply_synthetic_settings(c, "# family\nn_docs = 7\nproper_gap=400 # long\nseed = 18446744073709551615\n");
    CHECK(c.n_docs == 7);
    CHECK(c.proper_gap == 400.0);
    CHECK(c.seed == 18446744073709551615ULL);
    CHECK_THROWS_AS(apply_synthetic_settings(c, "colour = red"), ParseError);
    CHECK_THROWS_AS(apply_synthetic_settings(c, "n_docs = -1"), ParseError);
    CHECK_THROWS_AS(apply_synthetic_settings(c, "echo_rate = lots"), ParseError);
    CHECK_THROWS_AS(apply_synthetic_settings(c, "just words"), ParseError);
  }
}

TEST_CASE("window-split family separates the strategies") {
  SyntheticCorpusConfig c;
  c.n_docs = 2;
  c.tokens_per_doc = 10000;
  c.n_entities = 60;
  c.proper_gap = 400;
  c.echo_rate = 1.0;
  const auto corpus = generate_synthetic_corpus(c).docs;
  PipelineConfig l2r, ef;
  ef.clustering_strategy = ClusteringStrategy::easy_first_global;
  for (const auto& d : corpus) {
    const auto decisions = oracle_decisions(d, l2r);
    const double a = conll(d, resolve(d, decisions, l2r).chains);
    const double b = conll(d, resolve(d, decisions, ef).chains);
    CHECK(b - a >= 0.03);
  }
  auto run = [](const PipelineConfig& cfg) {
    return [cfg](const Document& d) { return resolve(d, oracle_decisions(d, cfg), cfg).chains; };
  };
  const auto short_l2r = length_sweep(corpus, {1000}, run(l2r));
  const auto short_ef = length_sweep(corpus, {1000}, run(ef));
  CHECK(std::abs(short_ef[0].macro.conll_f1 - short_l2r[0].macro.conll_f1) < 0.005);
}

TEST_CASE("pair scoring over a document") {
  SyntheticCorpusConfig c;
  c.n_docs = 1;
  c.tokens_per_doc = 600;
  const auto doc = generate_synthetic_corpus(c).docs[0];
  PipelineConfig pc;
  PairScorerModel model(PairFeatureLayout::standard(c.embedding_dim), {8, 2, 0.0, 3});
  const auto big = score_antecedents(model, doc, pc);
  const auto small = score_antecedents(model, doc, pc, 3);
  REQUIRE(big.size() == doc.mentions.size());
  for (std::size_t i = 0; i < big.size(); ++i) {
    REQUIRE(big[i].candidates.size() == small[i].candidates.size());
    for (std::size_t k = 0; k < big[i].candidates.size(); ++k) {
      CHECK(big[i].candidates[k].id == small[i].candidates[k].id);
      CHECK(big[i].candidates[k].score == doctest::Approx(small[i].candidates[k].score).epsilon(1e-12));
    }
  }
  const auto& d = big[5];
  REQUIRE(!d.candidates.empty());
  const auto row = encode_pair(doc.mentions[d.candidates[0].id], doc.mentions[5], doc, model.layout());
  const Mat x = Eigen::Map<const Eigen::RowVectorXd>(row.data(), static_cast<Eigen::Index>(row.size()));
  CHECK(model.score(x)(0) == doctest::Approx(d.candidates[0].score).epsilon(1e-12));

  model.zero_output();
  for (const auto& dec : score_antecedents(model, doc, pc)) CHECK_FALSE(dec.antecedent);
  CHECK_THROWS_AS(score_antecedents(model, doc, pc, 0), ValidationError);

  const auto run = run_pipeline(doc, model, nullptr, nullptr, pc);
  CHECK(run.resolution.chains.size() == doc.mentions.size());
}

TEST_CASE("chain output files") {
  const auto doc = load_document(fixtures::data_path("example_sentence.json"));
  const ChainSet chains{{0, 2}, {1}, {3}, {4}, {5, 7}, {6}};
  const auto out = make_chain_output(doc, chains, ClusteringStrategy::easy_first_global, {"note"});
  const auto back = parse_chain_output(write_chain_output(out));
  CHECK(back.doc_id == "example-sentence");
  CHECK(back.strategy == "easy_first_global");
  CHECK(back.chains == chains);
  CHECK(back.mentions.size() == 8);
  CHECK(back.diagnostics == std::vector<std::string>{"note"});
  const auto gold = to_partition(doc, gold_chains(doc));
  CHECK(evaluate(gold, output_partition(back, doc)).conll_f1 == doctest::Approx(1.0));

  auto bare = back;
  bare.mentions.clear();
  CHECK(evaluate(gold, output_partition(bare, doc)).conll_f1 == doctest::Approx(1.0));
  bare.chains.push_back({40});
  CHECK_THROWS_AS(output_partition(bare, doc), ValidationError);

  CHECK_THROWS_AS(parse_chain_output("[1]"), ParseError);
  CHECK_THROWS_AS(parse_chain_output(R"({"chains": [[0, -1]]})"), ParseError);
  CHECK_THROWS_AS(parse_chain_output(R"({"chains": [[0]], "mentions": [[3, 1]]})"), ParseError);
  CHECK_THROWS_AS(parse_chain_output(R"({"chains": [[2]], "mentions": [[0, 1]]})"), ParseError);
  CHECK_THROWS_AS(parse_chain_output(R"({"chains": [[0], [0]], "mentions": [[0, 1]]})"), ParseError);
  try {
    parse_chain_output(R"({"chains": [[0, "a"]]})");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.path() == "/chains/0/1");
  }
}

#include <doctest.h>

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "longcoref/document.hpp"
#include "longcoref/errors.hpp"

using namespace longcoref;

TEST_CASE("nesting levels of the possessive example") {
  // "my parents": [my] inside [my parents]
  const std::vector<Span> spans{{7, 7}, {7, 8}};
  const auto levels = compute_nesting_levels(spans);
  CHECK(levels == std::vector<int>{1, 0});
}

TEST_CASE("single span has level 0") {
  const std::vector<Span> spans{{3, 5}};
  CHECK(compute_nesting_levels(spans) == std::vector<int>{0});
}

TEST_CASE("third-level nesting inside a coordination") {
  // [[Mrs. Smith] and [[her] husband]]
  const std::vector<Span> spans{{13, 13}, {13, 14}, {10, 14}};
  CHECK(compute_nesting_levels(spans) == std::vector<int>{2, 1, 0});
}

TEST_CASE("crossing spans are malformed") {
  const std::vector<Span> spans{{0, 2}, {2, 4}};
  CHECK_THROWS_AS(compute_nesting_levels(spans), ValidationError);
}

TEST_CASE("nesting deeper than level 2 is an error") {
  const std::vector<Span> spans{{0, 6}, {1, 5}, {2, 4}, {3, 3}};
  CHECK_THROWS_WITH_AS(compute_nesting_levels(spans), doctest::Contains("nesting level 3"), ValidationError);
}

TEST_CASE("nesting levels are order independent and idempotent") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    // Build a laminar family by recursive subdivision of [0, 20).
    std::vector<Span> spans;
    std::uniform_int_distribution<int> coin(0, 2);
    std::function<void(std::size_t, std::size_t, int)> grow = [&](std::size_t a, std::size_t b, int depth) {
      if (a > b || depth > 2) return;
      spans.push_back({a, b});
      if (a == b) return;
      const std::size_t mid = a + (b - a) / 2;
      if (coin(rng)) grow(a, mid, depth + 1);
      if (coin(rng)) grow(mid + 1, b, depth + 1);
    };
    grow(0, 19, 0);
    const auto levels = compute_nesting_levels(spans);
    std::vector<std::size_t> perm(spans.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Span> shuffled;
    for (auto i : perm) shuffled.push_back(spans[i]);
    const auto levels2 = compute_nesting_levels(shuffled);
    for (std::size_t k = 0; k < perm.size(); ++k) CHECK(levels2[k] == levels[perm[k]]);
    CHECK(compute_nesting_levels(spans) == levels);
  }
}

TEST_CASE("canonical order puts containers first") {
  std::vector<Span> spans{{13, 13}, {10, 11}, {13, 14}, {10, 14}, {1, 1}};
  std::sort(spans.begin(), spans.end(), canonical_less);
  for (std::size_t i = 0; i < spans.size(); ++i)
    for (std::size_t j = i + 1; j < spans.size(); ++j) {
      const bool j_contains_i = spans[j].start <= spans[i].start && spans[i].end <= spans[j].end;
      CHECK_FALSE((j_contains_i && spans[i] != spans[j]));
    }
}

TEST_CASE("classify_mention follows the head hint") {
  auto doc = fixtures::make_document("il vit John dans la maison", {});
  Mention m;
  m.start = m.end = m.head_token = 0;
  CHECK(classify_mention(m, doc.tokens).category == MentionCategory::pronoun);
  m.start = m.end = m.head_token = 2;
  CHECK(classify_mention(m, doc.tokens).category == MentionCategory::proper);
  m.start = m.end = m.head_token = 4;  // "la" carries the `other` hint
  auto c = classify_mention(m, doc.tokens);
  CHECK(c.category == MentionCategory::common);
  CHECK(c.flagged);
}

TEST_CASE("select_head skips determiners and falls back to the last token") {
  auto doc = fixtures::make_document("le petit garçon", {});
  doc.tokens[0].dependency_relation = "det";
  doc.tokens[1].dependency_relation = "amod";
  doc.tokens[2].dependency_relation = "nsubj";
  CHECK(select_head(0, 2, doc.tokens) == 2);
  doc.tokens[2].category_hint = CategoryHint::other;
  CHECK(select_head(0, 2, doc.tokens) == 2);
}

TEST_CASE("validate_document") {
  auto doc = fixtures::make_document("Marie dit qu' elle part", {{0, 0, "a"}, {3, 3, "a"}});
  SUBCASE("well-formed fixture has an empty report") { CHECK(validate_document(doc).ok()); }
  SUBCASE("end before start") {
    doc.mentions[1].start = 4;
    doc.mentions[1].end = 3;
    doc.mentions[1].head_token = 3;
    auto r = validate_document(doc);
    CHECK(r.count(ValidationIssue::Kind::span) == 1);
  }
  SUBCASE("mention in two chains") {
    doc.chains.push_back({"b", {1}, Gender::unknown});
    auto r = validate_document(doc);
    CHECK(r.count(ValidationIssue::Kind::partition) == 1);
  }
  SUBCASE("embedding rows must match tokens") {
    doc.embeddings = std::make_shared<EmbeddingMatrix>(3, 2);
    CHECK(validate_document(doc).count(ValidationIssue::Kind::embedding) == 1);
  }
}

TEST_CASE("normalization turns singletons into one-element chains") {
  auto doc = fixtures::make_document("Marie voit Jean et Paul", {{0, 0, "a"}, {2, 2, "_"}, {4, 4, "_"}});
  REQUIRE(doc.chains.size() == 3);
  std::size_t total = 0;
  for (const auto& c : doc.chains) total += c.mention_ids.size();
  CHECK(total == doc.mentions.size());
  CHECK(doc.chains[1].is_singleton());
  CHECK(validate_document(doc).ok());
}

TEST_CASE("direct_children") {
  auto doc = fixtures::make_document("On their way to visit John , my parents met Mrs. Smith and her husband .",
                                     {{10, 14, "6"}, {10, 11, "4"}, {13, 13, "4"}, {13, 14, "5"}});
  // sorted: (10,14) (10,11) (13,14) (13,13)
  CHECK(direct_children(doc, 0) == std::vector<MentionId>{1, 2});
  CHECK(direct_children(doc, 2) == std::vector<MentionId>{3});
}

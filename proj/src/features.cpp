#include "longcoref/features.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "longcoref/errors.hpp"
#include "longcoref/lexicon.hpp"

namespace longcoref {
namespace {

const std::vector<std::string> kDeps{
    "acl",      "advcl",   "advmod", "amod",  "appos",      "aux",  "case",   "cc",    "ccomp",     "clf",
    "compound", "conj",    "cop",    "csubj", "dep",        "det",  "discourse", "dislocated", "expl", "fixed",
    "flat",     "goeswith", "iobj",  "list",  "mark",       "nmod", "nsubj",  "nummod", "obj",      "obl",
    "orphan",   "parataxis", "punct", "reparandum", "root", "vocative", "xcomp", "unknown"};

constexpr std::size_t kMentionDim = 2 + 3 + 38 + 3 + 3 + 4;
constexpr std::size_t kPairDim = 5 * kDistanceBuckets + 6;

std::size_t gap(std::size_t a, std::size_t b) { return a > b ? a - b : b - a; }

std::vector<std::string> folded_tokens(const Mention& m, const Document& doc) {
  std::vector<std::string> out;
  for (TokenIndex t = m.start; t <= m.end; ++t) out.push_back(fold_text(doc.tokens[t].text));
  return out;
}

}  // namespace

std::vector<MentionId> candidate_antecedents(const std::vector<Mention>& mentions, MentionId i,
                                             const PipelineConfig& config) {
  if (i >= mentions.size()) throw std::out_of_range("mention index out of range");
  const std::size_t w = std::min<std::size_t>(config.window_for(mentions[i].category), i);
  std::vector<MentionId> out;
  out.reserve(w);
  for (std::size_t k = 1; k <= w; ++k) out.push_back(i - k);
  return out;
}

const std::vector<std::string>& dependency_labels() { return kDeps; }

std::size_t dependency_slot(std::string_view relation) {
  const auto base = relation.substr(0, relation.find(':'));
  for (std::size_t i = 0; i + 1 < kDeps.size(); ++i)
    if (kDeps[i] == base) return i;
  return kDeps.size() - 1;
}

std::size_t distance_bucket(std::size_t d) {
  if (d == 0) return 0;
  if (d >= 65536) return kDistanceBuckets - 1;
  std::size_t b = 0;
  while (d >>= 1) ++b;
  return 1 + b;
}

const std::vector<std::string>& mention_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n{"length", "sentence_position", "category=pronoun", "category=common",
                               "category=proper"};
    for (const auto& d : kDeps) n.push_back("dep=" + d);
    for (auto g : {"m", "f", "u"}) n.push_back(std::string("gender=") + g);
    for (auto x : {"sg", "pl", "u"}) n.push_back(std::string("number=") + x);
    for (auto p : {"1", "2", "3", "u"}) n.push_back(std::string("person=") + p);
    return n;
  }();
  return names;
}

const std::vector<std::string>& pair_feature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (auto f : {"id_distance", "start_distance", "end_distance", "sentence_distance", "paragraph_distance"})
      for (std::size_t b = 0; b < kDistanceBuckets; ++b) n.push_back(std::string(f) + "=" + std::to_string(b));
    for (auto f : {"level_difference", "shared_token_ratio", "exact_text_match", "head_text_match",
                   "head_relation_match", "entity_type_match"})
      n.push_back(f);
    return n;
  }();
  return names;
}

std::vector<double> mention_feature_vector(const Mention& m, const Document& doc) {
  std::vector<double> v(kMentionDim, 0.0);
  const auto& head = doc.tokens.at(m.head_token);
  std::size_t sentence_start = m.start;
  while (sentence_start > 0 && doc.tokens[sentence_start - 1].sentence_index == doc.tokens[m.start].sentence_index)
    --sentence_start;
  v[0] = static_cast<double>(m.length());
  v[1] = static_cast<double>(m.start - sentence_start);
  std::size_t o = 2;
  v[o + static_cast<std::size_t>(m.category)] = 1.0;
  o += 3;
  v[o + dependency_slot(head.dependency_relation)] = 1.0;
  o += kDeps.size();
  Number number = head.number_hint;
  if (m.is_plural) number = Number::plural;
  v[o + static_cast<std::size_t>(head.gender_hint)] = 1.0;
  o += 3;
  v[o + static_cast<std::size_t>(number)] = 1.0;
  o += 3;
  v[o + static_cast<std::size_t>(head.person_hint)] = 1.0;
  return v;
}

std::vector<double> pair_feature_vector(const Mention& a, const Mention& b, const Document& doc) {
  std::vector<double> v(kPairDim, 0.0);
  const auto& ta = doc.tokens.at(a.start);
  const auto& tb = doc.tokens.at(b.start);
  const std::size_t dists[] = {gap(a.id, b.id), gap(a.start, b.start), gap(a.end, b.end),
                               gap(ta.sentence_index, tb.sentence_index), gap(ta.paragraph_index, tb.paragraph_index)};
  for (std::size_t k = 0; k < 5; ++k) v[k * kDistanceBuckets + distance_bucket(dists[k])] = 1.0;
  std::size_t o = 5 * kDistanceBuckets;
  v[o++] = std::abs(a.nesting_level - b.nesting_level);

  const auto fa = folded_tokens(a, doc), fb = folded_tokens(b, doc);
  const std::set<std::string> sa(fa.begin(), fa.end()), sb(fb.begin(), fb.end());
  std::size_t common = 0;
  for (const auto& w : sa) common += sb.count(w);
  v[o++] = static_cast<double>(common) / static_cast<double>(sa.size() + sb.size() - common);
  v[o++] = fa == fb ? 1.0 : 0.0;
  const auto& ha = doc.tokens.at(a.head_token);
  const auto& hb = doc.tokens.at(b.head_token);
  v[o++] = fold_text(ha.text) == fold_text(hb.text) ? 1.0 : 0.0;
  v[o++] = !ha.dependency_relation.empty() && ha.dependency_relation == hb.dependency_relation ? 1.0 : 0.0;
  v[o++] = 1.0;  // only PER entities are annotated
  return v;
}

PairFeatureLayout PairFeatureLayout::standard(std::size_t embedding_dim) {
  return ordered(embedding_dim, {"embedding_a", "embedding_b", "mention_a", "mention_b", "pair"});
}

PairFeatureLayout PairFeatureLayout::ordered(std::size_t embedding_dim, const std::vector<std::string>& order) {
  const std::vector<std::string> names{"embedding_a", "embedding_b", "mention_a", "mention_b", "pair"};
  auto size_of = [&](const std::string& n) -> std::size_t {
    if (n == "embedding_a" || n == "embedding_b") return embedding_dim;
    if (n == "mention_a" || n == "mention_b") return kMentionDim;
    if (n == "pair") return kPairDim;
    throw ValidationError("unknown layout segment '" + n + "'");
  };
  if (order.size() != names.size() || !std::is_permutation(order.begin(), order.end(), names.begin())) {
    throw ValidationError("layout must name each segment exactly once");
  }
  PairFeatureLayout l;
  std::size_t off = 0;
  for (const auto& n : order) {
    l.segments.push_back({n, off, size_of(n)});
    off += size_of(n);
  }
  return l;
}

std::size_t PairFeatureLayout::total_dim() const {
  std::size_t t = 0;
  for (const auto& s : segments) t += s.size;
  return t;
}

const Segment& PairFeatureLayout::segment(std::string_view name) const {
  for (const auto& s : segments)
    if (s.name == name) return s;
  throw ValidationError("layout has no segment '" + std::string(name) + "'");
}

bool PairFeatureLayout::operator==(const PairFeatureLayout& o) const {
  if (segments.size() != o.segments.size()) return false;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto &a = segments[i], &b = o.segments[i];
    if (a.name != b.name || a.offset != b.offset || a.size != b.size) return false;
  }
  return true;
}

std::vector<double> mention_representation(const Mention& m, const Document& doc) {
  if (!doc.embeddings) throw ValidationError("document '" + doc.doc_id + "' has no embeddings");
  const auto first = doc.embeddings->row(m.start);
  const auto last = doc.embeddings->row(m.end);
  std::vector<double> v(first.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 0.5 * (static_cast<double>(first[i]) + static_cast<double>(last[i]));
  return v;
}

void encode_pair(const Mention& a, const Mention& b, const Document& doc, const PairFeatureLayout& layout,
                 double* out) {
  if (!doc.embeddings) throw ValidationError("document '" + doc.doc_id + "' has no embeddings");
  if (doc.embeddings->dim() != layout.embedding_dim()) {
    throw DimensionError("embedding width " + std::to_string(doc.embeddings->dim()) + " does not match layout " +
                         std::to_string(layout.embedding_dim()));
  }
  auto put = [&](std::string_view name, const std::vector<double>& v) {
    std::copy(v.begin(), v.end(), out + layout.segment(name).offset);
  };
  put("embedding_a", mention_representation(a, doc));
  put("embedding_b", mention_representation(b, doc));
  put("mention_a", mention_feature_vector(a, doc));
  put("mention_b", mention_feature_vector(b, doc));
  put("pair", pair_feature_vector(a, b, doc));
}

std::vector<double> encode_pair(const Mention& a, const Mention& b, const Document& doc,
                                const PairFeatureLayout& layout) {
  std::vector<double> v(layout.total_dim());
  encode_pair(a, b, doc, layout, v.data());
  return v;
}

}  // namespace longcoref

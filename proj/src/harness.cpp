#include "longcoref/harness.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include "longcoref/document.hpp"
#include "longcoref/errors.hpp"

namespace longcoref {

SplitResult split_document(const Document& doc, std::size_t length) {
  if (length == 0) throw ValidationError("sample length must be positive");
  SplitResult out;
  const std::size_t n = doc.tokens.size();
  const std::size_t k = n / length;
  out.dropped_tokens = n - k * length;

  std::map<std::string, Gender> genders;
  for (const auto& c : doc.chains) genders[c.chain_id] = c.gender_label;

  std::vector<std::vector<const Mention*>> inside(k);
  for (const auto& m : doc.mentions) {
    const std::size_t s = m.start / length;
    if (s < k && m.end / length == s) {
      inside[s].push_back(&m);
    } else {
      ++out.dropped_mentions;
    }
  }
  if (out.dropped_mentions) {
    out.diagnostics.push_back(doc.doc_id + ": dropped " + std::to_string(out.dropped_mentions) +
                              " mentions crossing a sample boundary at length " + std::to_string(length));
  }

  for (std::size_t s = 0; s < k; ++s) {
    const TokenIndex base = s * length;
    Document d;
    d.doc_id = doc.doc_id + "@" + std::to_string(s);
    d.tokens.assign(doc.tokens.begin() + static_cast<std::ptrdiff_t>(base),
                    doc.tokens.begin() + static_cast<std::ptrdiff_t>(base + length));
    const std::size_t sent0 = d.tokens.front().sentence_index, para0 = d.tokens.front().paragraph_index;
    for (std::size_t t = 0; t < length; ++t) {
      d.tokens[t].index = t;
      d.tokens[t].sentence_index -= sent0;
      d.tokens[t].paragraph_index -= para0;
    }
    for (const Mention* src : inside[s]) {
      Mention m = *src;
      m.start -= base;
      m.end -= base;
      m.head_token -= base;
      d.mentions.push_back(std::move(m));
    }
    for (const auto& m : d.mentions) {
      if (auto g = genders.find(m.chain_id); g != genders.end() && g->second != Gender::unknown) {
        d.chains.push_back({m.chain_id, {}, g->second});
      }
    }
    if (doc.embeddings) {
      const auto dim = doc.embeddings->dim();
      const auto& src = doc.embeddings->data();
      std::vector<float> rows(src.begin() + static_cast<std::ptrdiff_t>(base * dim),
                              src.begin() + static_cast<std::ptrdiff_t>((base + length) * dim));
      d.embeddings = std::make_shared<const EmbeddingMatrix>(length, dim, std::move(rows));
    }
    normalize_document(d);
    out.samples.push_back(std::move(d));
  }
  return out;
}

std::vector<LengthPoint> length_sweep(const std::vector<Document>& corpus, const std::vector<std::size_t>& lengths,
                                      const ChainPredictor& predict, std::size_t jobs) {
  std::vector<LengthPoint> points;
  for (std::size_t length : lengths) {
    LengthPoint point;
    point.length = length;
    std::vector<MetricReport> per_doc;
    for (const auto& doc : corpus) {
      auto split = split_document(doc, length);
      if (split.samples.empty()) continue;
      point.dropped_mentions += split.dropped_mentions;

      auto score = [&predict](const Document& sample) {
        const auto gold = to_partition(sample, gold_chains(sample));
        return evaluate(gold, to_partition(sample, predict(sample)));
      };
      std::vector<MetricReport> reports(split.samples.size());
      if (jobs <= 1) {
        for (std::size_t i = 0; i < split.samples.size(); ++i) reports[i] = score(split.samples[i]);
      } else {
        for (std::size_t first = 0; first < split.samples.size(); first += jobs) {
          std::vector<std::future<MetricReport>> running;
          const std::size_t last = std::min(split.samples.size(), first + jobs);
          for (std::size_t i = first; i < last; ++i)
            running.push_back(std::async(std::launch::async, score, std::cref(split.samples[i])));
          for (std::size_t i = first; i < last; ++i) reports[i] = running[i - first].get();
        }
      }
      per_doc.push_back(average(reports));
      point.samples_per_doc.push_back(split.samples.size());
    }
    point.retained_docs = per_doc.size();
    point.macro = average(per_doc);
    points.push_back(std::move(point));
  }
  return points;
}

std::string length_sweep_tsv(const std::vector<LengthPoint>& points) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(5);
  os << "length\tdocs\tsamples\tdropped_mentions\tmuc_f1\tb3_f1\tceafe_f1\tconll_f1\n";
  for (const auto& p : points) {
    std::size_t samples = 0;
    for (auto s : p.samples_per_doc) samples += s;
    os << p.length << '\t' << p.retained_docs << '\t' << samples << '\t' << p.dropped_mentions << '\t';
    if (p.empty()) {
      os << "NA\tNA\tNA\tNA\n";
    } else {
      os << p.macro.muc.f1 << '\t' << p.macro.b_cubed.f1 << '\t' << p.macro.ceaf_e.f1 << '\t' << p.macro.conll_f1
         << '\n';
    }
  }
  return os.str();
}

CorpusStats corpus_stats(const std::vector<Document>& corpus) {
  CorpusStats s;
  s.documents = corpus.size();
  std::size_t spread_sum = 0, spread_chains = 0;
  std::array<std::size_t, 3> levels{};
  std::size_t plural = 0, proper = 0, common = 0, pronoun = 0;
  for (const auto& doc : corpus) {
    s.tokens += doc.tokens.size();
    s.mentions += doc.mentions.size();
    for (const auto& m : doc.mentions) {
      if (m.nesting_level >= 0 && m.nesting_level < 3) ++levels[static_cast<std::size_t>(m.nesting_level)];
      plural += m.is_plural;
      switch (m.category) {
        case MentionCategory::proper: ++proper; break;
        case MentionCategory::common: ++common; break;
        case MentionCategory::pronoun: ++pronoun; break;
      }
    }
    for (const auto& c : doc.chains) {
      if (c.mention_ids.empty()) continue;
      ++s.chains;
      s.max_mentions_per_chain = std::max(s.max_mentions_per_chain, c.mention_ids.size());
      if (c.is_singleton()) {
        ++s.singletons;
        continue;
      }
      TokenIndex first = doc.mentions[c.mention_ids.front()].start, last = first;
      for (MentionId id : c.mention_ids) {
        first = std::min(first, doc.mentions[id].start);
        last = std::max(last, doc.mentions[id].start);
      }
      spread_sum += last - first;
      ++spread_chains;
      s.max_spread = std::max(s.max_spread, last - first);
    }
  }
  auto ratio = [](std::size_t a, std::size_t b) { return b ? static_cast<double>(a) / static_cast<double>(b) : 0.0; };
  s.mentions_per_doc = ratio(s.mentions, s.documents);
  s.chains_per_doc = ratio(s.chains, s.documents);
  s.singleton_ratio = ratio(s.singletons, s.mentions);
  s.mentions_per_chain = ratio(s.mentions, s.chains);
  s.spread_defined = spread_chains > 0;
  s.average_spread = ratio(spread_sum, spread_chains);
  for (std::size_t l = 0; l < 3; ++l) s.level_ratio[l] = ratio(levels[l], s.mentions);
  s.plural_ratio = ratio(plural, s.mentions);
  s.proper_ratio = ratio(proper, s.mentions);
  s.common_ratio = ratio(common, s.mentions);
  s.pronoun_ratio = ratio(pronoun, s.mentions);
  return s;
}

std::string corpus_stats_tsv(const CorpusStats& s) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "documents\t" << s.documents << "\n"
     << "tokens\t" << s.tokens << "\n"
     << "mentions\t" << s.mentions << "\n"
     << "mentions_per_doc\t" << s.mentions_per_doc << "\n"
     << "singleton_ratio\t" << s.singleton_ratio << "\n"
     << "chains_per_doc\t" << s.chains_per_doc << "\n"
     << "mentions_per_chain\t" << s.mentions_per_chain << "\n"
     << "max_mentions_per_chain\t" << s.max_mentions_per_chain << "\n"
     << "average_spread\t" << s.average_spread << "\n"
     << "max_spread\t" << s.max_spread << "\n"
     << "spread_defined\t" << (s.spread_defined ? "yes" : "no") << "\n"
     << "level1_ratio\t" << s.level_ratio[1] << "\n"
     << "level2_ratio\t" << s.level_ratio[2] << "\n"
     << "plural_ratio\t" << s.plural_ratio << "\n"
     << "proper_ratio\t" << s.proper_ratio << "\n"
     << "common_ratio\t" << s.common_ratio << "\n"
     << "pronoun_ratio\t" << s.pronoun_ratio << "\n";
  return os.str();
}

std::size_t nearest_rank(std::vector<std::size_t> values, double p) {
  if (values.empty()) return 0;
  if (!(p > 0.0 && p <= 100.0)) throw ValidationError("percentile must lie in (0, 100]");
  std::sort(values.begin(), values.end());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(values.size())));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

std::size_t DistanceDistribution::percentile(MentionCategory c, double p) const {
  auto it = distances.find(c);
  return it == distances.end() ? 0 : nearest_rank(it->second, p);
}

DistanceDistribution antecedent_distance_distribution(const std::vector<Document>& corpus) {
  DistanceDistribution d;
  for (auto c : {MentionCategory::pronoun, MentionCategory::common, MentionCategory::proper}) d.distances[c];
  for (const auto& doc : corpus) {
    std::unordered_map<std::string, MentionId> last;
    for (const auto& m : doc.mentions) {
      if (auto it = last.find(m.chain_id); it != last.end()) d.distances[m.category].push_back(m.id - it->second);
      last[m.chain_id] = m.id;
    }
  }
  return d;
}

std::string distance_table_tsv(const DistanceDistribution& d) {
  std::ostringstream os;
  os << "category\tcount";
  for (double p : kDistancePercentiles) os << "\tp" << p;
  os << "\n";
  for (const auto& [c, values] : d.distances) {
    os << to_string(c) << '\t' << values.size();
    for (double p : kDistancePercentiles) os << '\t' << nearest_rank(values, p);
    os << "\n";
  }
  return os.str();
}

}  // namespace longcoref

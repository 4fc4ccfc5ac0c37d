#include "longcoref/resolver.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <unordered_map>

#include "longcoref/document.hpp"
#include "longcoref/errors.hpp"
#include "longcoref/features.hpp"
#include "longcoref/lexicon.hpp"
#include "longcoref/union_find.hpp"

namespace longcoref {
namespace {

ChainSet to_chains(UnionFind& uf) {
  ChainSet out;
  for (auto& g : uf.groups()) out.emplace_back(g.begin(), g.end());
  canonicalize(out);
  return out;
}

bool has_word_char(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return u >= 0x80 || std::isalnum(u);
  });
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

bool contains_phrase(const std::vector<std::string>& words, const std::vector<std::string>& phrase) {
  if (phrase.empty() || phrase.size() > words.size()) return false;
  for (std::size_t i = 0; i + phrase.size() <= words.size(); ++i)
    if (std::equal(phrase.begin(), phrase.end(), words.begin() + static_cast<std::ptrdiff_t>(i))) return true;
  return false;
}

std::vector<std::string> all_keys(const Document& doc) {
  std::vector<std::string> keys;
  keys.reserve(doc.mentions.size());
  for (const auto& m : doc.mentions) keys.push_back(proper_key(m, doc));
  return keys;
}

std::size_t mention_count(const std::vector<AntecedentDecision>& decisions, std::size_t n) {
  n = std::max(n, decisions.size());
  for (const auto& d : decisions) n = std::max(n, d.anaphor + 1);
  return n;
}

// Clusters that remember their members and proper keys, so a merge can be
// checked against cannot-links before it happens.
class ConstrainedClusters {
 public:
  ConstrainedClusters(std::size_t n, const ConstraintSet& c) : uf_(n), members_(n), keys_(n), adj_(n) {
    for (std::size_t i = 0; i < n; ++i) {
      members_[i] = {i};
      if (i < c.keys.size() && !c.keys[i].empty()) keys_[i].insert(c.keys[i]);
    }
    for (const auto& [a, b] : c.cannot_link) {
      if (a >= n || b >= n) throw ValidationError("cannot-link refers to a missing mention");
      adj_[a].push_back(b);
      adj_[b].push_back(a);
    }
    for (const auto& [a, b] : c.cannot_link_keys) {
      forbid_[a].insert(b);
      forbid_[b].insert(a);
    }
  }

  std::size_t find(std::size_t x) { return uf_.find(x); }

  bool conflicts(std::size_t a, std::size_t b) {
    a = uf_.find(a);
    b = uf_.find(b);
    if (a == b) return false;
    if (members_[a].size() > members_[b].size()) std::swap(a, b);
    for (std::size_t x : members_[a])
      for (std::size_t y : adj_[x])
        if (uf_.find(y) == b) return true;
    for (const auto& k : keys_[a]) {
      auto it = forbid_.find(k);
      if (it == forbid_.end()) continue;
      for (const auto& k2 : it->second)
        if (keys_[b].contains(k2)) return true;
    }
    return false;
  }

  void merge(std::size_t a, std::size_t b) {
    a = uf_.find(a);
    b = uf_.find(b);
    if (a == b) return;
    const std::size_t root = uf_.unite(a, b);
    const std::size_t gone = root == a ? b : a;
    members_[root].insert(members_[root].end(), members_[gone].begin(), members_[gone].end());
    keys_[root].insert(keys_[gone].begin(), keys_[gone].end());
    members_[gone].clear();
    keys_[gone].clear();
  }

  ChainSet chains() { return to_chains(uf_); }

 private:
  UnionFind uf_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<std::set<std::string>> keys_;
  std::vector<std::vector<std::size_t>> adj_;
  std::unordered_map<std::string, std::set<std::string>> forbid_;
};

}  // namespace

AntecedentDecision rank_antecedents(MentionId anaphor, std::vector<ScoredCandidate> scored,
                                    const PipelineConfig& config) {
  AntecedentDecision d;
  d.anaphor = anaphor;
  d.candidates = std::move(scored);
  const ScoredCandidate* best = nullptr;
  for (const auto& c : d.candidates)
    if (!best || c.score > best->score) best = &c;
  if (best) {
    d.best_score = best->score;
    if (best->score > config.null_threshold) d.antecedent = best->id;
  }
  return d;
}

ChainSet cluster_left_to_right(const std::vector<AntecedentDecision>& decisions, std::size_t n_mentions) {
  const std::size_t n = mention_count(decisions, n_mentions);
  UnionFind uf(n);
  for (const auto& d : decisions) {
    if (!d.antecedent) continue;
    if (*d.antecedent >= d.anaphor) {
      throw ValidationError("antecedent " + std::to_string(*d.antecedent) + " does not precede mention " +
                            std::to_string(d.anaphor));
    }
    uf.unite(*d.antecedent, d.anaphor);
  }
  return to_chains(uf);
}

MentionPair ordered_pair(MentionId a, MentionId b) { return a < b ? MentionPair{a, b} : MentionPair{b, a}; }

std::string proper_key(const Mention& m, const Document& doc) {
  if (m.category != MentionCategory::proper) return {};
  std::vector<std::string> words;
  for (TokenIndex t = m.start; t <= m.end; ++t) {
    auto w = fold_text(doc.tokens.at(t).text);
    if (!has_word_char(w) || is_honorific_word(w) || is_determiner_word(w)) continue;
    words.push_back(std::move(w));
  }
  std::sort(words.begin(), words.end());
  std::string key;
  for (const auto& w : words) {
    if (!key.empty()) key += ' ';
    key += w;
  }
  return key;
}

std::set<MentionPair> ConstraintSet::expanded_cannot_links() const {
  std::set<MentionPair> out = cannot_link;
  if (cannot_link_keys.empty()) return out;
  std::map<std::string, std::vector<MentionId>> by_key;
  for (MentionId i = 0; i < keys.size(); ++i)
    if (!keys[i].empty()) by_key[keys[i]].push_back(i);
  for (const auto& [a, b] : cannot_link_keys) {
    for (MentionId x : by_key[a])
      for (MentionId y : by_key[b])
        if (x != y) out.insert(ordered_pair(x, y));
  }
  return out;
}

ConstraintSet extract_cannot_links(const Document& doc, const PipelineConfig& config) {
  ConstraintSet out;
  out.keys = all_keys(doc);
  std::vector<std::vector<std::string>> conjunctions;
  for (const auto& c : config.conjunctions) conjunctions.push_back(split_words(fold_text(c)));
  for (const auto& m : doc.mentions) {
    const auto kids = direct_children(doc, m.id);
    if (kids.size() != 2) continue;
    const auto& a = doc.mentions[kids[0]];
    const auto& b = doc.mentions[kids[1]];
    const Mention& first = a.start <= b.start ? a : b;
    const Mention& second = a.start <= b.start ? b : a;
    if (first.end >= second.start) continue;
    std::vector<std::string> between;
    for (TokenIndex t = first.end + 1; t < second.start; ++t) {
      for (auto& w : split_words(fold_text(doc.tokens[t].text))) between.push_back(std::move(w));
    }
    const bool joined = std::any_of(conjunctions.begin(), conjunctions.end(),
                                    [&](const auto& c) { return contains_phrase(between, c); });
    if (!joined) continue;
    out.cannot_link.insert(ordered_pair(first.id, second.id));
    const auto &ka = out.keys[first.id], &kb = out.keys[second.id];
    if (!ka.empty() && !kb.empty() && ka != kb) out.cannot_link_keys.insert(std::minmax(ka, kb));
  }
  return out;
}

PropagationReport global_proper_propagation(const Document& doc, const std::vector<AntecedentDecision>& decisions,
                                            const PipelineConfig& config, ConstraintSet& constraints) {
  PropagationReport report;
  if (constraints.keys.size() != doc.mentions.size()) constraints.keys = all_keys(doc);
  const auto& keys = constraints.keys;

  // unanimity over every locally scored pair of keyed mentions
  std::map<std::pair<std::string, std::string>, bool> evidence;
  for (const auto& d : decisions) {
    if (d.anaphor >= keys.size() || keys[d.anaphor].empty()) continue;
    for (const auto& c : d.candidates) {
      if (c.id >= keys.size() || keys[c.id].empty()) continue;
      const auto kp = std::minmax(keys[c.id], keys[d.anaphor]);
      const bool positive = c.score > config.null_threshold;
      auto [it, fresh] = evidence.try_emplace(kp, positive);
      if (!fresh) it->second = it->second && positive;
    }
  }

  std::map<std::string, std::size_t> key_index;
  for (const auto& k : keys)
    if (!k.empty()) key_index.try_emplace(k, key_index.size());
  std::vector<std::string> key_names(key_index.size());
  for (const auto& [k, i] : key_index) key_names[i] = k;

  // mention-level cannot-links between keyed mentions, seen as key pairs
  std::set<std::pair<std::string, std::string>> blocked = constraints.cannot_link_keys;
  for (const auto& [x, y] : constraints.cannot_link) {
    if (x < keys.size() && y < keys.size() && !keys[x].empty() && !keys[y].empty())
      blocked.insert(std::minmax(keys[x], keys[y]));
  }

  UnionFind groups(key_index.size());
  std::vector<std::vector<std::string>> members(key_index.size());
  for (std::size_t i = 0; i < key_names.size(); ++i) members[i] = {key_names[i]};
  std::vector<bool> active(key_index.size(), false);

  auto clash = [&](const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::string> all = a;
    if (&a != &b) all.insert(all.end(), b.begin(), b.end());
    for (const auto& [p, q] : blocked) {
      const bool hp = std::find(all.begin(), all.end(), p) != all.end();
      const bool hq = std::find(all.begin(), all.end(), q) != all.end();
      if (hp && hq) return true;
    }
    return false;
  };

  for (const auto& [kp, unanimous] : evidence) {
    if (!unanimous) {
      report.rejected_keys.push_back(kp);
      continue;
    }
    const std::size_t a = groups.find(key_index.at(kp.first)), b = groups.find(key_index.at(kp.second));
    if (clash(members[a], members[b])) {
      report.rejected_keys.push_back(kp);
      report.diagnostics.push_back("propagation of '" + kp.first + "' ~ '" + kp.second +
                                   "' blocked by a cannot-link");
      continue;
    }
    report.linked_keys.push_back(kp);
    active[a] = active[b] = true;
    if (a != b) {
      const std::size_t root = groups.unite(a, b);
      const std::size_t gone = root == a ? b : a;
      members[root].insert(members[root].end(), members[gone].begin(), members[gone].end());
      members[gone].clear();
      active[root] = true;
    }
  }

  std::map<std::size_t, std::vector<MentionId>> linked;
  for (MentionId i = 0; i < keys.size(); ++i) {
    if (keys[i].empty()) continue;
    const std::size_t g = groups.find(key_index.at(keys[i]));
    if (active[g]) linked[g].push_back(i);
  }
  for (const auto& [g, ids] : linked) {
    for (std::size_t k = 1; k < ids.size(); ++k) constraints.must_link.push_back({ids[k - 1], ids[k]});
  }
  return report;
}

Clustering cluster_easy_first(const std::vector<AntecedentDecision>& decisions, const ConstraintSet& constraints,
                              const PipelineConfig& config, std::size_t n_mentions) {
  std::size_t n = mention_count(decisions, n_mentions);
  for (const auto& [a, b] : constraints.must_link) n = std::max(n, std::max(a, b) + 1);
  Clustering out;
  ConstrainedClusters clusters(n, constraints);

  for (const auto& [a, b] : constraints.must_link) {
    if (clusters.conflicts(a, b)) {
      out.diagnostics.push_back("must-link (" + std::to_string(a) + ", " + std::to_string(b) +
                                ") overrides a cannot-link");
    }
    clusters.merge(a, b);
  }

  std::vector<const AntecedentDecision*> order;
  for (const auto& d : decisions)
    if (d.best_score > config.null_threshold) order.push_back(&d);
  std::stable_sort(order.begin(), order.end(), [](const AntecedentDecision* x, const AntecedentDecision* y) {
    if (x->best_score != y->best_score) return x->best_score > y->best_score;
    return x->anaphor < y->anaphor;
  });

  std::size_t fallbacks = 0, blocked = 0;
  for (const auto* d : order) {
    std::vector<ScoredCandidate> ranked = d->candidates;
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const ScoredCandidate& x, const ScoredCandidate& y) { return x.score > y.score; });
    bool first = true;
    bool placed = false;
    for (const auto& c : ranked) {
      if (c.score <= config.null_threshold) break;
      if (c.id >= d->anaphor) throw ValidationError("candidate does not precede its anaphor");
      if (clusters.find(c.id) == clusters.find(d->anaphor)) {
        placed = true;
        break;
      }
      if (clusters.conflicts(c.id, d->anaphor)) {
        first = false;
        continue;
      }
      clusters.merge(c.id, d->anaphor);
      placed = true;
      break;
    }
    if (!first) (placed ? fallbacks : blocked)++;
  }
  if (fallbacks || blocked) {
    out.diagnostics.push_back("cannot-links redirected " + std::to_string(fallbacks) + " links and nulled " +
                              std::to_string(blocked));
  }
  out.chains = clusters.chains();
  return out;
}

std::size_t count_cannot_link_violations(const ChainSet& chains, const ConstraintSet& constraints) {
  std::size_t bad = 0;
  for (const auto& chain : chains) {
    const std::set<MentionId> members(chain.begin(), chain.end());
    std::set<std::string> keys;
    for (MentionId m : chain)
      if (m < constraints.keys.size() && !constraints.keys[m].empty()) keys.insert(constraints.keys[m]);
    bool hit = false;
    for (const auto& [a, b] : constraints.cannot_link) hit = hit || (members.contains(a) && members.contains(b));
    for (const auto& [a, b] : constraints.cannot_link_keys) hit = hit || (keys.contains(a) && keys.contains(b));
    bad += hit;
  }
  return bad;
}

Resolution resolve(const Document& doc, const std::vector<AntecedentDecision>& decisions,
                   const PipelineConfig& config) {
  Resolution r;
  const std::size_t n = doc.mentions.size();
  if (config.clustering_strategy == ClusteringStrategy::left_to_right) {
    r.chains = cluster_left_to_right(decisions, n);
    return r;
  }
  r.constraints = extract_cannot_links(doc, config);
  auto prop = global_proper_propagation(doc, decisions, config, r.constraints);
  r.diagnostics = std::move(prop.diagnostics);
  auto c = cluster_easy_first(decisions, r.constraints, config, n);
  r.chains = std::move(c.chains);
  r.diagnostics.insert(r.diagnostics.end(), c.diagnostics.begin(), c.diagnostics.end());
  return r;
}

std::vector<AntecedentDecision> oracle_decisions(const Document& doc, const PipelineConfig& config) {
  std::vector<AntecedentDecision> out;
  const auto& ms = doc.mentions;
  for (MentionId i = 0; i < ms.size(); ++i) {
    std::vector<ScoredCandidate> scored;
    for (MentionId j : candidate_antecedents(ms, i, config))
      scored.push_back({j, ms[j].chain_id == ms[i].chain_id ? 1.0 : 0.0});
    out.push_back(rank_antecedents(i, std::move(scored), config));
  }
  return out;
}

AntecedentErrors& AntecedentErrors::operator+=(const AntecedentErrors& o) {
  mentions += o.mentions;
  correct += o.correct;
  out_of_window_wrong_link += o.out_of_window_wrong_link;
  out_of_window_wrong_null += o.out_of_window_wrong_null;
  in_window_wrong_link += o.in_window_wrong_link;
  in_window_wrong_null += o.in_window_wrong_null;
  new_entity_linked += o.new_entity_linked;
  return *this;
}

AntecedentErrors antecedent_error_report(const std::vector<AntecedentDecision>& decisions, const Document& doc,
                                         const PipelineConfig& config) {
  const auto& ms = doc.mentions;
  std::vector<std::optional<MentionId>> previous(ms.size());
  std::unordered_map<std::string, MentionId> last;
  for (MentionId i = 0; i < ms.size(); ++i) {
    if (auto it = last.find(ms[i].chain_id); it != last.end()) previous[i] = it->second;
    last[ms[i].chain_id] = i;
  }
  AntecedentErrors e;
  for (const auto& d : decisions) {
    if (d.anaphor >= ms.size()) throw ValidationError("decision for a missing mention");
    ++e.mentions;
    const auto& m = ms[d.anaphor];
    const auto& gold = previous[d.anaphor];
    if (d.antecedent && ms.at(*d.antecedent).chain_id == m.chain_id) {
      ++e.correct;
    } else if (!gold) {
      (d.antecedent ? e.new_entity_linked : e.correct)++;
    } else if (d.anaphor - *gold > config.window_for(m.category)) {
      (d.antecedent ? e.out_of_window_wrong_link : e.out_of_window_wrong_null)++;
    } else {
      (d.antecedent ? e.in_window_wrong_link : e.in_window_wrong_null)++;
    }
  }
  return e;
}

}  // namespace longcoref

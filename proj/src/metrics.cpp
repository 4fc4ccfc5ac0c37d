#include "longcoref/metrics.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "longcoref/hungarian.hpp"

namespace longcoref {
namespace {

struct Aligned {
  Partition gold;
  Partition pred;
  std::size_t twinless_gold = 0;
  std::size_t twinless_pred = 0;
};

// Adds every mention missing from one side to that side as a singleton.
Aligned align(const Partition& gold, const Partition& pred) {
  Aligned a{gold, pred};
  std::unordered_set<MentionKey> in_gold, in_pred;
  for (const auto& c : gold) in_gold.insert(c.begin(), c.end());
  for (const auto& c : pred) in_pred.insert(c.begin(), c.end());
  for (const auto& c : pred) {
    for (MentionKey k : c) {
      if (!in_gold.contains(k)) {
        a.gold.push_back({k});
        ++a.twinless_pred;
      }
    }
  }
  for (const auto& c : gold) {
    for (MentionKey k : c) {
      if (!in_pred.contains(k)) {
        a.pred.push_back({k});
        ++a.twinless_gold;
      }
    }
  }
  return a;
}

std::unordered_map<MentionKey, std::size_t> cell_index(const Partition& p) {
  std::unordered_map<MentionKey, std::size_t> idx;
  for (std::size_t c = 0; c < p.size(); ++c)
    for (MentionKey k : p[c]) idx[k] = c;
  return idx;
}

// Link recall of `key` against `response`: sum(|K| - p(K)) / sum(|K| - 1).
double muc_recall(const Partition& key, const Partition& response) {
  const auto resp = cell_index(response);
  double num = 0.0, den = 0.0;
  for (const auto& k : key) {
    if (k.empty()) continue;
    std::unordered_set<std::size_t> cells;
    for (MentionKey m : k) cells.insert(resp.at(m));
    num += static_cast<double>(k.size() - cells.size());
    den += static_cast<double>(k.size() - 1);
  }
  return den > 0.0 ? num / den : 0.0;
}

double b_cubed_recall(const Partition& key, const Partition& response) {
  const auto resp = cell_index(response);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& k : key) {
    std::unordered_map<std::size_t, std::size_t> overlap;
    for (MentionKey m : k) ++overlap[resp.at(m)];
    for (const auto& [cell, count] : overlap) {
      // each of the `count` mentions contributes count / |K|
      sum += static_cast<double>(count) * static_cast<double>(count) / static_cast<double>(k.size());
    }
    n += k.size();
  }
  return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

}  // namespace

Partition to_partition(const Document& doc, const ChainSet& chains) {
  Partition p;
  p.reserve(chains.size());
  for (const auto& c : chains) {
    std::vector<MentionKey> cell;
    cell.reserve(c.size());
    for (MentionId id : c) {
      const auto& m = doc.mentions.at(id);
      cell.push_back(span_key(m.start, m.end));
    }
    p.push_back(std::move(cell));
  }
  return p;
}

Prf make_prf(double precision, double recall) {
  const double s = precision + recall;
  return {precision, recall, s > 0.0 ? 2.0 * precision * recall / s : 0.0};
}

Prf muc(const Partition& gold, const Partition& pred) {
  const auto a = align(gold, pred);
  return make_prf(muc_recall(a.pred, a.gold), muc_recall(a.gold, a.pred));
}

Prf b_cubed(const Partition& gold, const Partition& pred) {
  const auto a = align(gold, pred);
  return make_prf(b_cubed_recall(a.pred, a.gold), b_cubed_recall(a.gold, a.pred));
}

Prf ceaf_e(const Partition& gold, const Partition& pred) {
  const auto a = align(gold, pred);
  if (a.gold.empty() || a.pred.empty()) return {};
  const auto pred_idx = cell_index(a.pred);
  std::vector<std::vector<double>> phi(a.gold.size(), std::vector<double>(a.pred.size(), 0.0));
  for (std::size_t g = 0; g < a.gold.size(); ++g) {
    std::unordered_map<std::size_t, std::size_t> overlap;
    for (MentionKey m : a.gold[g]) ++overlap[pred_idx.at(m)];
    for (const auto& [p, count] : overlap) {
      phi[g][p] = 2.0 * static_cast<double>(count) /
                  static_cast<double>(a.gold[g].size() + a.pred[p].size());
    }
  }
  const auto match = solve_max_assignment(phi);
  double total = 0.0;
  for (std::size_t g = 0; g < match.size(); ++g) {
    if (match[g] < a.pred.size()) total += phi[g][match[g]];
  }
  return make_prf(total / static_cast<double>(a.pred.size()), total / static_cast<double>(a.gold.size()));
}

double conll_f1(double muc_f1, double b_cubed_f1, double ceaf_e_f1) {
  return (muc_f1 + b_cubed_f1 + ceaf_e_f1) / 3.0;
}

double conll_f1(const MetricReport& r) { return conll_f1(r.muc.f1, r.b_cubed.f1, r.ceaf_e.f1); }

MetricReport evaluate(const Partition& gold, const Partition& pred) {
  MetricReport r;
  r.muc = muc(gold, pred);
  r.b_cubed = b_cubed(gold, pred);
  r.ceaf_e = ceaf_e(gold, pred);
  r.conll_f1 = conll_f1(r);
  const auto a = align(gold, pred);
  r.twinless_gold = a.twinless_gold;
  r.twinless_pred = a.twinless_pred;
  return r;
}

MetricReport average(const std::vector<MetricReport>& reports) {
  MetricReport out;
  if (reports.empty()) return out;
  const double n = static_cast<double>(reports.size());
  auto acc = [n](Prf& dst, const Prf& src) {
    dst.precision += src.precision / n;
    dst.recall += src.recall / n;
    dst.f1 += src.f1 / n;
  };
  for (const auto& r : reports) {
    acc(out.muc, r.muc);
    acc(out.b_cubed, r.b_cubed);
    acc(out.ceaf_e, r.ceaf_e);
    out.conll_f1 += r.conll_f1 / n;
    out.twinless_gold += r.twinless_gold;
    out.twinless_pred += r.twinless_pred;
  }
  return out;
}

}  // namespace longcoref

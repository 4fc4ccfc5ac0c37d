#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "longcoref/types.hpp"

namespace longcoref {

/// Mention identity used for scoring; spans are packed as (start << 32) | end
/// so gold and predicted mentions align by exact boundaries.
using MentionKey = std::uint64_t;
using Partition = std::vector<std::vector<MentionKey>>;

inline MentionKey span_key(TokenIndex start, TokenIndex end) {
  return (static_cast<MentionKey>(start) << 32) | static_cast<MentionKey>(end);
}

/// Partition over span keys built from a ChainSet on `doc`.
Partition to_partition(const Document& doc, const ChainSet& chains);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Harmonic mean with F1 = 0 when P + R = 0.
Prf make_prf(double precision, double recall);

struct MetricReport {
  Prf muc;
  Prf b_cubed;
  Prf ceaf_e;
  double conll_f1 = 0.0;
  /// Mentions present on only one side, scored as singletons on the other.
  std::size_t twinless_gold = 0;
  std::size_t twinless_pred = 0;
};

Prf muc(const Partition& gold, const Partition& pred);
Prf b_cubed(const Partition& gold, const Partition& pred);
Prf ceaf_e(const Partition& gold, const Partition& pred);
double conll_f1(const MetricReport& report);
/// Arithmetic mean of three F1 scores.
double conll_f1(double muc_f1, double b_cubed_f1, double ceaf_e_f1);

MetricReport evaluate(const Partition& gold, const Partition& pred);

/// Field-wise mean of `reports`; an empty input yields all zeros.
MetricReport average(const std::vector<MetricReport>& reports);

}  // namespace longcoref

#pragma once

#include <array>
#include <string>
#include <vector>

#include "longcoref/lexicon.hpp"
#include "longcoref/metrics.hpp"
#include "longcoref/types.hpp"

namespace longcoref {

enum class GenderSource : std::uint8_t { none, heuristic, firstname, propagated };
std::string_view to_string(GenderSource s);

struct MentionGender {
  Gender label = Gender::unknown;
  GenderSource source = GenderSource::none;
};

struct ChainGender {
  Gender label = Gender::unknown;
  /// Majority share among decided mentions; 0 when undecided.
  double ratio = 0.0;
  /// False for singleton and plural chains, which are left alone.
  bool eligible = false;
};

struct GenderAssignment {
  std::vector<MentionGender> mentions;
  /// Parallel to the ChainSet used for propagation; empty before it.
  std::vector<ChainGender> chains;
};

/// Agreeing clues from the mention's own tokens (nested mentions excluded);
/// unknown with no clue or with clues of both genders.
Gender heuristic_gender(const Mention& m, const Document& doc, const GenderClueLexicon& clues);

/// First-name lookup for proper mentions: the first word that is not an
/// honorific or determiner, decided when its majority share reaches
/// `ratio_threshold`.
Gender firstname_gender(const Mention& m, const Document& doc, const FirstNameLexicon& names,
                        double ratio_threshold = 0.9);

/// A chain is plural when more than half of its mentions are.
bool is_plural_chain(const Document& doc, const std::vector<MentionId>& chain);

/// Majority vote over decided mentions of each eligible chain, written to every
/// mention of the chain. Ties and chains with nothing decided stay unknown.
GenderAssignment propagate_gender(const Document& doc, const ChainSet& chains, std::vector<MentionGender> labels);

inline constexpr std::array<const char*, 3> kGenderStages{"rules", "+lexicon", "+coreference"};

/// Cumulative assignments after each stage: clues, first names, propagation
/// over `chains`.
std::array<GenderAssignment, 3> staged_gender(const Document& doc, const ChainSet& chains,
                                              const GenderClueLexicon& clues, const FirstNameLexicon& names,
                                              double ratio_threshold = 0.9);

/// Per-class counts over mentions of gold chains that have a gender label and
/// are neither singleton nor plural.
struct GenderCounts {
  std::array<std::size_t, 2> true_positive{};
  std::array<std::size_t, 2> predicted{};
  std::array<std::size_t, 2> gold{};
  std::size_t evaluated = 0;

  Prf prf(Gender g) const;
  GenderCounts& operator+=(const GenderCounts& o);
};

GenderCounts evaluate_gender(const Document& doc, const GenderAssignment& assignment);

/// Rows: stage, class, precision, recall, f1, support.
std::string gender_report_tsv(const std::array<GenderCounts, 3>& stages);

/// {doc_id, mentions:[{id, start, end, text, label, source}],
///  chains:[{mentions, label, ratio}]}
std::string gender_assignment_json(const Document& doc, const ChainSet& chains, const GenderAssignment& a);

}  // namespace longcoref

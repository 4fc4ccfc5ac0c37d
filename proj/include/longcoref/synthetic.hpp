#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "longcoref/lexicon.hpp"
#include "longcoref/types.hpp"

namespace longcoref {

/// Knobs of the synthetic novel generator. Gaps are mean distances, in
/// mentions, from a mention to the previous mention of its entity; each gap is
/// drawn uniformly from [mean/2, 3*mean/2].
struct SyntheticCorpusConfig {
  std::size_t n_docs = 4;
  std::size_t tokens_per_doc = 5000;
  /// Recurring characters per document.
  std::size_t n_entities = 14;
  /// Category mix of recurring-character mentions after the introduction.
  double pronoun_ratio = 0.6;
  double proper_ratio = 0.25;
  double pronoun_gap = 3.0;
  double common_gap = 12.0;
  double proper_gap = 50.0;
  /// Chance that a proper mention is followed, a pronoun gap later, by another
  /// proper mention of the same character.
  double echo_rate = 0.0;
  /// Chance per mention slot of a plural "[[X] et [Y]]" coordination of two
  /// characters.
  double coordination_rate = 0.01;
  /// Share of pronoun and common mentions carrying an explicit gender clue.
  double clue_rate = 0.5;
  /// Slots nobody is due for become singletons with this probability, else
  /// the character due soonest speaks early.
  double singleton_rate = 1.0;
  double mention_density = 0.14;
  std::size_t embedding_dim = 16;
  double embedding_noise = 0.1;
  std::uint64_t seed = 1;

  /// Throws ValidationError on out-of-range values or gaps longer than the
  /// expected number of mentions per document.
  void validate() const;
};

struct SyntheticCorpus {
  std::vector<Document> docs;
  /// Counts for every first name the generator used.
  FirstNameLexicon first_names;
};

SyntheticCorpus generate_synthetic_corpus(const SyntheticCorpusConfig& config);

/// TSV rows in the format read by parse_firstname_lexicon.
std::string write_firstname_lexicon(const FirstNameLexicon& lexicon);

/// Applies "key = value" lines ('#' comments) to `config`. Throws ParseError
/// naming the line on unknown keys or malformed values.
void apply_synthetic_settings(SyntheticCorpusConfig& config, std::string_view text);
std::string write_synthetic_settings(const SyntheticCorpusConfig& config);

}  // namespace longcoref

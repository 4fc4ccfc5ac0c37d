#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "longcoref/types.hpp"

namespace longcoref {

/// Lowercases ASCII and Latin-1/Latin Extended-A letters, strips diacritics
/// (precomposed and combining marks) and maps typographic apostrophes to '.
std::string fold_text(std::string_view s);

/// fold_text, then keeps the first component of a hyphenated compound
/// ("Jean-Pierre" -> "jean").
std::string fold_name(std::string_view s);

struct NameCounts {
  std::uint64_t male = 0;
  std::uint64_t female = 0;
  std::uint64_t total() const { return male + female; }
  friend bool operator==(const NameCounts&, const NameCounts&) = default;
};

class FirstNameLexicon {
 public:
  /// Adds counts under fold_name(name); duplicate names are summed.
  void add(std::string_view name, NameCounts counts);
  std::optional<NameCounts> lookup(std::string_view name) const;
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, NameCounts>& entries() const { return entries_; }

 private:
  std::map<std::string, NameCounts> entries_;
};

/// TSV rows `name<TAB>male_count<TAB>female_count`, '#' comments, UTF-8.
FirstNameLexicon parse_firstname_lexicon(std::string_view tsv);
FirstNameLexicon load_firstname_lexicon(const std::filesystem::path& path);

enum class ClueKind : std::uint8_t { pronoun, noun, article, adjective, honorific };
std::string_view to_string(ClueKind k);
std::optional<ClueKind> parse_clue_kind(std::string_view s);

struct GenderClue {
  Gender gender = Gender::unknown;
  ClueKind kind = ClueKind::noun;
};

class GenderClueLexicon {
 public:
  /// Throws ValidationError if the form already carries the other gender for
  /// the same clue kind.
  void add(std::string_view form, Gender gender, ClueKind kind);
  /// Clues for fold_text(form); empty when absent.
  std::vector<GenderClue> lookup(std::string_view form) const;
  bool is_honorific(std::string_view form) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, std::vector<GenderClue>> entries_;
};

/// TSV rows `form<TAB>m|f<TAB>pronoun|noun|article|adjective|honorific`.
GenderClueLexicon parse_gender_clue_lexicon(std::string_view tsv);
GenderClueLexicon load_gender_clue_lexicon(const std::filesystem::path& path);

/// Built-in French closed-class clues (pronouns, articles, honorifics) and a
/// small set of gendered nouns and adjectives.
const GenderClueLexicon& default_french_gender_clues();

/// Fills unknown token hints (category, gender, number, person) from a French
/// closed-class table. Known hints are left untouched.
void apply_french_hints(Document& doc);

/// True for honorifics and titles that are skipped when building name keys
/// and extracting first names ("M.", "Mme", "Sir", ...). Input is folded.
bool is_honorific_word(std::string_view folded);
/// True for determiners and elided articles ("le", "la", "l'", "de", ...).
bool is_determiner_word(std::string_view folded);

}  // namespace longcoref

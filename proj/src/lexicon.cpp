#include "longcoref/lexicon.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "longcoref/errors.hpp"

namespace longcoref {
namespace {

using namespace std::string_view_literals;

// Base letters for U+00C0..U+00FF; '\0' keeps the code point, '*' marks a
// two-letter expansion handled separately.
constexpr std::string_view kLatin1 =
    "aaaaaa*ceeeeiiiidnooooo\0ouuuuy**"
    "aaaaaa*ceeeeiiiidnooooo\0ouuuuy*y"sv;

// Base letters for U+0100..U+017F.
constexpr std::string_view kLatinExtA =
    "aaaaaaccccccccddddeeeeeeeeeegggggggghhhhiiiiiiiiii**jjkkkllllllllllnnnnnnnnnoooooo**rrrrrrssssssssttttttuuuuuuuuuuuuwwyyyzzzzzzs";

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Decodes one code point; invalid bytes are passed through as U+FFFD.
char32_t next_code_point(std::string_view s, std::size_t& i) {
  const auto c = static_cast<unsigned char>(s[i]);
  int len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
  if (len == 0 || i + len > s.size()) {
    ++i;
    return 0xFFFD;
  }
  char32_t cp = len == 1 ? c : len == 2 ? (c & 0x1F) : len == 3 ? (c & 0x0F) : (c & 0x07);
  for (int k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
  i += len;
  return cp;
}

std::string_view expansion(char32_t cp) {
  switch (cp) {
    case 0xC6: case 0xE6: return "ae";
    case 0xDE: case 0xFE: return "th";
    case 0xDF: return "ss";
    case 0x132: case 0x133: return "ij";
    case 0x152: case 0x153: return "oe";
    default: return {};
  }
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto tab = line.find('\t', pos);
    out.push_back(line.substr(pos, tab == std::string_view::npos ? std::string_view::npos : tab - pos));
    if (tab == std::string_view::npos) break;
    pos = tab + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename F>
void for_each_data_line(std::string_view text, F&& f) {
  std::size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto line = trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    ++line_no;
    if (!line.empty() && line.front() != '#') f(line, line_no);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t parse_count(std::string_view s, const std::string& where) {
  s = trim(s);
  std::uint64_t v = 0;
  if (s.empty() || s.front() == '-') throw ParseError(where, "count must be a non-negative integer, got '" + std::string(s) + "'");
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ParseError(where, "non-numeric count '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::string fold_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const char32_t cp = next_code_point(s, i);
    if (cp < 0x80) {
      out += static_cast<char>(cp >= 'A' && cp <= 'Z' ? cp - 'A' + 'a' : cp);
    } else if (cp >= 0x300 && cp <= 0x36F) {
      // combining mark
    } else if (cp == 0x2019 || cp == 0x2018 || cp == 0x02BC) {
      out += '\'';
    } else if (auto ex = expansion(cp); !ex.empty()) {
      out += ex;
    } else if (cp >= 0xC0 && cp <= 0xFF && kLatin1[cp - 0xC0] != '\0') {
      out += kLatin1[cp - 0xC0];
    } else if (cp >= 0x100 && cp <= 0x17F) {
      out += kLatinExtA[cp - 0x100];
    } else {
      append_utf8(out, cp);
    }
  }
  return out;
}

std::string fold_name(std::string_view s) {
  std::string f = fold_text(s);
  if (auto dash = f.find('-'); dash != std::string::npos && dash > 0) f.resize(dash);
  return f;
}

void FirstNameLexicon::add(std::string_view name, NameCounts counts) {
  auto& e = entries_[fold_name(name)];
  e.male += counts.male;
  e.female += counts.female;
}

std::optional<NameCounts> FirstNameLexicon::lookup(std::string_view name) const {
  auto it = entries_.find(fold_name(name));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

FirstNameLexicon parse_firstname_lexicon(std::string_view tsv) {
  FirstNameLexicon lex;
  for_each_data_line(tsv, [&](std::string_view line, std::size_t no) {
    const std::string where = "line " + std::to_string(no);
    auto cols = split_tabs(line);
    if (cols.size() != 3) throw ParseError(where, "expected 3 tab-separated columns");
    auto name = trim(cols[0]);
    if (name.empty()) throw ParseError(where, "empty name");
    lex.add(name, {parse_count(cols[1], where), parse_count(cols[2], where)});
  });
  if (lex.size() == 0) throw ParseError("", "first-name lexicon is empty");
  for (const auto& [name, c] : lex.entries()) {
    if (c.total() == 0) throw ParseError(name, "male and female counts are both zero");
  }
  return lex;
}

FirstNameLexicon load_firstname_lexicon(const std::filesystem::path& path) {
  try {
    return parse_firstname_lexicon(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string(), e.what());
  }
}

std::string_view to_string(ClueKind k) {
  switch (k) {
    case ClueKind::pronoun: return "pronoun";
    case ClueKind::noun: return "noun";
    case ClueKind::article: return "article";
    case ClueKind::adjective: return "adjective";
    case ClueKind::honorific: return "honorific";
  }
  return "noun";
}

std::optional<ClueKind> parse_clue_kind(std::string_view s) {
  if (s == "pronoun") return ClueKind::pronoun;
  if (s == "noun") return ClueKind::noun;
  if (s == "article") return ClueKind::article;
  if (s == "adjective") return ClueKind::adjective;
  if (s == "honorific") return ClueKind::honorific;
  return std::nullopt;
}

void GenderClueLexicon::add(std::string_view form, Gender gender, ClueKind kind) {
  if (gender == Gender::unknown) throw ValidationError("gender clue '" + std::string(form) + "' has no gender");
  auto& clues = entries_[fold_text(form)];
  for (const auto& c : clues) {
    if (c.kind != kind) continue;
    if (c.gender != gender) {
      throw ValidationError("gender clue '" + std::string(form) + "' maps to both genders as " +
                            std::string(to_string(kind)));
    }
    return;
  }
  clues.push_back({gender, kind});
}

std::vector<GenderClue> GenderClueLexicon::lookup(std::string_view form) const {
  auto it = entries_.find(fold_text(form));
  return it == entries_.end() ? std::vector<GenderClue>{} : it->second;
}

bool GenderClueLexicon::is_honorific(std::string_view form) const {
  for (const auto& c : lookup(form)) {
    if (c.kind == ClueKind::honorific) return true;
  }
  return false;
}

GenderClueLexicon parse_gender_clue_lexicon(std::string_view tsv) {
  GenderClueLexicon lex;
  for_each_data_line(tsv, [&](std::string_view line, std::size_t no) {
    const std::string where = "line " + std::to_string(no);
    auto cols = split_tabs(line);
    if (cols.size() != 3) throw ParseError(where, "expected 3 tab-separated columns");
    auto g = parse_gender(trim(cols[1]));
    auto k = parse_clue_kind(trim(cols[2]));
    if (!g || *g == Gender::unknown) throw ParseError(where, "gender must be m or f");
    if (!k) throw ParseError(where, "unknown clue kind '" + std::string(cols[2]) + "'");
    try {
      lex.add(trim(cols[0]), *g, *k);
    } catch (const ValidationError& e) {
      throw ParseError(where, e.what());
    }
  });
  return lex;
}

GenderClueLexicon load_gender_clue_lexicon(const std::filesystem::path& path) {
  try {
    return parse_gender_clue_lexicon(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string(), e.what());
  }
}

const GenderClueLexicon& default_french_gender_clues() {
  static const GenderClueLexicon lex = [] {
    constexpr std::string_view kTable =
        "il\tm\tpronoun\nelle\tf\tpronoun\nils\tm\tpronoun\nelles\tf\tpronoun\n"
        "eux\tm\tpronoun\ncelui\tm\tpronoun\ncelle\tf\tpronoun\ncelui-ci\tm\tpronoun\n"
        "celle-ci\tf\tpronoun\ncelui-la\tm\tpronoun\ncelle-la\tf\tpronoun\n"
        "le\tm\tarticle\nla\tf\tarticle\nun\tm\tarticle\nune\tf\tarticle\n"
        "ce\tm\tarticle\ncet\tm\tarticle\ncette\tf\tarticle\ndu\tm\tarticle\n"
        "m.\tm\thonorific\nmonsieur\tm\thonorific\nmme\tf\thonorific\nmadame\tf\thonorific\n"
        "mlle\tf\thonorific\nmademoiselle\tf\thonorific\nsir\tm\thonorific\nlady\tf\thonorific\n"
        "mr.\tm\thonorific\nmr\tm\thonorific\nmrs.\tf\thonorific\nmrs\tf\thonorific\n"
        "miss\tf\thonorific\n"
        "homme\tm\tnoun\nfemme\tf\tnoun\nfille\tf\tnoun\ngarcon\tm\tnoun\nmari\tm\tnoun\n"
        "epoux\tm\tnoun\nepouse\tf\tnoun\npere\tm\tnoun\nmere\tf\tnoun\nfrere\tm\tnoun\n"
        "soeur\tf\tnoun\nfils\tm\tnoun\noncle\tm\tnoun\ntante\tf\tnoun\nroi\tm\tnoun\n"
        "reine\tf\tnoun\ncomte\tm\tnoun\ncomtesse\tf\tnoun\nmarquis\tm\tnoun\n"
        "marquise\tf\tnoun\ndame\tf\tnoun\ndemoiselle\tf\tnoun\nveuve\tf\tnoun\n"
        "servante\tf\tnoun\nserviteur\tm\tnoun\ncolonel\tm\tnoun\nabbe\tm\tnoun\n"
        "cure\tm\tnoun\nami\tm\tnoun\namie\tf\tnoun\nhusband\tm\tnoun\nwife\tf\tnoun\n"
        "man\tm\tnoun\nwoman\tf\tnoun\n"
        "petit\tm\tadjective\npetite\tf\tadjective\nvieux\tm\tadjective\nvieille\tf\tadjective\n"
        "beau\tm\tadjective\nbelle\tf\tadjective\ncher\tm\tadjective\nchere\tf\tadjective\n"
        "heureux\tm\tadjective\nheureuse\tf\tadjective\n";
    return parse_gender_clue_lexicon(kTable);
  }();
  return lex;
}

bool is_honorific_word(std::string_view folded) {
  static const std::set<std::string_view> kWords = {
      "m.", "m", "mr", "mr.", "mrs", "mrs.", "ms", "ms.", "mme", "mme.", "mlle", "mlle.",
      "monsieur", "madame", "mademoiselle", "sir", "lady", "lord", "dr", "dr.", "docteur",
      "abbe", "comte", "comtesse", "marquis", "marquise", "baron", "baronne", "sieur", "miss"};
  return kWords.contains(folded);
}

bool is_determiner_word(std::string_view folded) {
  static const std::set<std::string_view> kWords = {
      "le", "la", "les", "l'", "un", "une", "des", "du", "de", "d'", "ce", "cet", "cette",
      "the", "a", "an"};
  return kWords.contains(folded);
}

void apply_french_hints(Document& doc) {
  struct Entry {
    CategoryHint cat;
    Gender g;
    Number n;
    Person p;
  };
  using C = CategoryHint;
  using G = Gender;
  using N = Number;
  using P = Person;
  static const std::map<std::string, Entry, std::less<>> kTable = {
      {"il", {C::pronoun, G::masculine, N::singular, P::third}},
      {"elle", {C::pronoun, G::feminine, N::singular, P::third}},
      {"ils", {C::pronoun, G::masculine, N::plural, P::third}},
      {"elles", {C::pronoun, G::feminine, N::plural, P::third}},
      {"eux", {C::pronoun, G::masculine, N::plural, P::third}},
      {"lui", {C::pronoun, G::unknown, N::singular, P::third}},
      {"leur", {C::pronoun, G::unknown, N::plural, P::third}},
      {"se", {C::pronoun, G::unknown, N::unknown, P::third}},
      {"s'", {C::pronoun, G::unknown, N::unknown, P::third}},
      {"soi", {C::pronoun, G::unknown, N::singular, P::third}},
      {"je", {C::pronoun, G::unknown, N::singular, P::first}},
      {"j'", {C::pronoun, G::unknown, N::singular, P::first}},
      {"me", {C::pronoun, G::unknown, N::singular, P::first}},
      {"m'", {C::pronoun, G::unknown, N::singular, P::first}},
      {"moi", {C::pronoun, G::unknown, N::singular, P::first}},
      {"tu", {C::pronoun, G::unknown, N::singular, P::second}},
      {"te", {C::pronoun, G::unknown, N::singular, P::second}},
      {"toi", {C::pronoun, G::unknown, N::singular, P::second}},
      {"nous", {C::pronoun, G::unknown, N::plural, P::first}},
      {"vous", {C::pronoun, G::unknown, N::unknown, P::second}},
      {"son", {C::pronoun, G::unknown, N::singular, P::third}},
      {"sa", {C::pronoun, G::unknown, N::singular, P::third}},
      {"ses", {C::pronoun, G::unknown, N::singular, P::third}},
      {"mon", {C::pronoun, G::unknown, N::singular, P::first}},
      {"ma", {C::pronoun, G::unknown, N::singular, P::first}},
      {"le", {C::other, G::masculine, N::singular, P::unknown}},
      {"la", {C::other, G::feminine, N::singular, P::unknown}},
      {"les", {C::other, G::unknown, N::plural, P::unknown}},
      {"l'", {C::other, G::unknown, N::singular, P::unknown}},
      {"un", {C::other, G::masculine, N::singular, P::unknown}},
      {"une", {C::other, G::feminine, N::singular, P::unknown}},
      {"et", {C::other, G::unknown, N::unknown, P::unknown}},
  };
  for (auto& t : doc.tokens) {
    auto it = kTable.find(fold_text(t.text));
    if (it == kTable.end()) continue;
    const Entry& e = it->second;
    if (t.category_hint == C::unknown) t.category_hint = e.cat;
    if (t.gender_hint == G::unknown) t.gender_hint = e.g;
    if (t.number_hint == N::unknown) t.number_hint = e.n;
    if (t.person_hint == P::unknown) t.person_hint = e.p;
  }
}

}  // namespace longcoref

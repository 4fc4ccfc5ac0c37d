#include "longcoref/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "longcoref/document.hpp"
#include "longcoref/errors.hpp"
#include "longcoref/settings.hpp"

namespace longcoref {
namespace {

using Rng = std::mt19937_64;

const std::vector<std::string> kMaleNames{
    "Ralph", "Jean", "Pierre", "Louis", "Henri", "Jacques", "Paul", "Victor", "Julien", "Lucien", "Octave",
    "Raphael", "Armand", "Gaston", "Edmond", "Maurice", "Charles", "Emile", "Felix", "Gustave", "Leon",
    "Marcel", "Honore", "Adolphe"};
const std::vector<std::string> kFemaleNames{
    "Indiana", "Marie", "Jeanne", "Louise", "Rose", "Claire", "Julie", "Emma", "Berthe", "Lucie", "Adele",
    "Helene", "Mathilde", "Pauline", "Sophie", "Therese", "Noemi", "Cecile", "Eugenie", "Juliette",
    "Madeleine", "Valentine", "Lelia", "Consuelo"};
const std::vector<std::string> kSyllables{"bar", "del", "mar", "ven", "lo",  "ri",  "cha", "ber", "mon", "tal",
                                          "gue", "ra",  "vel", "dor", "san", "fer", "lan", "vil", "ro",  "ne"};
const std::vector<std::string> kFillers{"marchait", "regardait", "parla", "attendit", "sourit", "revint", "pensait",
                                        "vers",     "puis",      "alors", "souvent",  "ici",    "encore", "dans",
                                        "maison",   "jardin",    "soir",  "longtemps", "sans",  "avec"};

struct Form {
  std::vector<std::string> words;
  std::size_t head = 0;  // index into words
};

// Masculine, feminine and clue-free variants per category.
const std::vector<Form> kMalePronouns{{{"il"}, 0}};
const std::vector<Form> kFemalePronouns{{{"elle"}, 0}};
const std::vector<Form> kNeutralPronouns{{{"lui"}, 0}, {{"je"}, 0}, {{"me"}, 0}};
const std::vector<Form> kMaleCommon{{{"le", "garçon"}, 1}, {{"le", "mari"}, 1}, {{"le", "colonel"}, 1},
                                    {{"son", "frère"}, 1}};
const std::vector<Form> kFemaleCommon{{{"la", "femme"}, 1}, {{"la", "veuve"}, 1}, {{"la", "reine"}, 1},
                                      {{"sa", "sœur"}, 1}};
const std::vector<Form> kNeutralCommon{{{"l'enfant"}, 0}, {{"l'inconnu"}, 0}, {{"l'artiste"}, 0},
                                       {{"son", "voisin"}, 1}};

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

/// Distinct capitalized names: the curated list first, then syllable words.
class NamePool {
 public:
  std::string take(const std::vector<std::string>& curated, Rng& rng) {
    for (const auto& n : curated) {
      if (!used_.contains(n)) {
        used_.insert(n);
        return n;
      }
    }
    return invent(rng);
  }
  std::string invent(Rng& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, kSyllables.size() - 1), len(2, 3);
    while (true) {
      std::string w;
      for (std::size_t k = len(rng); k > 0; --k) w += kSyllables[pick(rng)];
      w = capitalize(w);
      if (used_.insert(w).second) return w;
    }
  }

 private:
  std::set<std::string> used_;
};

struct Character {
  std::string chain;
  Gender gender = Gender::masculine;
  std::string first;
  std::string surname;
  std::vector<float> base;
  std::size_t due = 0;
  std::size_t planned_gap = 0;
  MentionCategory next = MentionCategory::proper;
  bool echo_next = false;
  bool introduced = false;
};

class DocumentBuilder {
 public:
  DocumentBuilder(const SyntheticCorpusConfig& c, Rng& rng) : c_(c), rng_(rng) {
    std::normal_distribution<float> n01(0.0f, 1.0f);
    for (auto& v : category_offset_)
      for (std::size_t k = 0; k < c.embedding_dim; ++k) v.push_back(0.5f * n01(rng_));
  }

  std::size_t tokens() const { return doc_.tokens.size(); }

  /// Exactly `k` tokens of filler words and sentence breaks.
  void fillers(std::size_t k) {
    std::uniform_int_distribution<std::size_t> pick(0, kFillers.size() - 1);
    while (k > 0) {
      add_token(kFillers[pick(rng_)], CategoryHint::other, pick(rng_) % 2 ? "advmod" : "root", nullptr);
      --k;
      if (k > 0 && maybe_end_sentence()) --k;
    }
  }

  /// Appends a mention and returns its token span.
  std::pair<TokenIndex, TokenIndex> mention(const Form& form, MentionCategory cat, const std::vector<float>& base,
                                            const std::string& chain, bool plural, std::string head_dep) {
    const TokenIndex start = tokens();
    for (std::size_t w = 0; w < form.words.size(); ++w) {
      const bool head = w == form.head;
      CategoryHint hint = CategoryHint::common;
      if (cat == MentionCategory::pronoun) hint = CategoryHint::pronoun;
      if (cat == MentionCategory::proper) hint = CategoryHint::proper;
      if (!head && cat != MentionCategory::proper) hint = CategoryHint::other;
      std::string dep = head ? head_dep : (cat == MentionCategory::proper ? "flat" : "det");
      std::vector<float> row(c_.embedding_dim);
      std::normal_distribution<float> noise(0.0f, static_cast<float>(c_.embedding_noise));
      const auto& off = category_offset_[static_cast<std::size_t>(cat)];
      for (std::size_t k = 0; k < row.size(); ++k) row[k] = base[k] + off[k] + noise(rng_);
      add_token(form.words[w], hint, dep, &row);
    }
    Mention m;
    m.start = start;
    m.end = tokens() - 1;
    m.head_token = start + form.head;
    m.category = cat;
    m.chain_id = chain;
    m.is_plural = plural;
    doc_.mentions.push_back(m);
    return {m.start, m.end};
  }

  void add_group(Mention m) { doc_.mentions.push_back(std::move(m)); }

  void add_token(const std::string& text, CategoryHint hint, std::string dep, const std::vector<float>* row) {
    Token t;
    t.index = tokens();
    t.text = text;
    t.sentence_index = sentence_;
    t.paragraph_index = paragraph_;
    t.category_hint = hint;
    t.dependency_relation = std::move(dep);
    doc_.tokens.push_back(std::move(t));
    if (row) {
      emb_.insert(emb_.end(), row->begin(), row->end());
    } else {
      std::normal_distribution<float> noise(0.0f, static_cast<float>(c_.embedding_noise));
      for (std::size_t k = 0; k < c_.embedding_dim; ++k) emb_.push_back(noise(rng_));
    }
    ++in_sentence_;
  }

  Document finish(std::string id, const std::map<std::string, Gender>& genders) {
    doc_.doc_id = std::move(id);
    for (const auto& [chain, g] : genders) doc_.chains.push_back({chain, {}, g});
    apply_french_hints(doc_);
    normalize_document(doc_);
    doc_.embeddings = std::make_shared<const EmbeddingMatrix>(tokens(), c_.embedding_dim, std::move(emb_));
    return std::move(doc_);
  }

 private:
  bool maybe_end_sentence() {
    if (in_sentence_ < 8) return false;
    std::uniform_int_distribution<int> stop(0, 5);
    if (in_sentence_ < 20 && stop(rng_) != 0) return false;
    add_token(".", CategoryHint::other, "punct", nullptr);
    in_sentence_ = 0;
    ++sentence_;
    if (sentence_ % 6 == 0) ++paragraph_;
    return true;
  }

  const SyntheticCorpusConfig& c_;
  Rng& rng_;
  Document doc_;
  std::vector<float> emb_;
  std::array<std::vector<float>, 3> category_offset_;
  std::size_t sentence_ = 0, paragraph_ = 0, in_sentence_ = 0;
};

std::size_t draw_gap(double mean, Rng& rng) {
  const auto m = static_cast<std::size_t>(std::max(1.0, std::round(mean)));
  return std::uniform_int_distribution<std::size_t>(m - m / 2, m + m / 2)(rng);
}

std::vector<float> random_vector(std::size_t dim, Rng& rng) {
  std::normal_distribution<float> n01(0.0f, 1.0f);
  std::vector<float> v(dim);
  for (auto& x : v) x = n01(rng);
  return v;
}

Document generate_document(const SyntheticCorpusConfig& c, std::size_t index, Rng& rng, FirstNameLexicon& names,
                           std::map<std::string, Gender>& name_gender) {
  DocumentBuilder b(c, rng);
  NamePool pool;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::map<std::string, Gender> genders;

  std::vector<Character> cast(c.n_entities);
  const auto expected_mentions = static_cast<double>(c.tokens_per_doc) * c.mention_density;
  std::uniform_int_distribution<std::size_t> intro(0, static_cast<std::size_t>(std::min(expected_mentions / 4.0, 40.0)));
  for (std::size_t e = 0; e < cast.size(); ++e) {
    auto& ch = cast[e];
    ch.chain = "e" + std::to_string(e);
    ch.gender = u(rng) < 0.5 ? Gender::masculine : Gender::feminine;
    ch.first = pool.take(ch.gender == Gender::masculine ? kMaleNames : kFemaleNames, rng);
    ch.surname = pool.invent(rng);
    ch.base = random_vector(c.embedding_dim, rng);
    ch.due = intro(rng);
    ch.planned_gap = std::numeric_limits<std::size_t>::max();
    genders[ch.chain] = ch.gender;
    if (!name_gender.contains(ch.first)) {
      name_gender[ch.first] = ch.gender;
      std::uniform_int_distribution<std::uint64_t> big(500, 5000), small(0, 20);
      const auto major = big(rng), minor = small(rng);
      names.add(ch.first, ch.gender == Gender::masculine ? NameCounts{major, minor} : NameCounts{minor, major});
    }
  }

  auto pick = [&](const std::vector<Form>& forms) -> const Form& {
    return forms[std::uniform_int_distribution<std::size_t>(0, forms.size() - 1)(rng)];
  };
  auto head_dep = [&] {
    static const std::vector<std::string> deps{"nsubj", "obj", "obl", "nmod"};
    return deps[std::uniform_int_distribution<std::size_t>(0, deps.size() - 1)(rng)];
  };
  auto proper_form = [&](const Character& ch) {
    const double r = u(rng);
    if (r < 0.5) return Form{{ch.first}, 0};
    if (r < 0.8) return Form{{ch.gender == Gender::masculine ? "M." : "Mme", ch.surname}, 1};
    return Form{{ch.first, ch.surname}, 0};
  };
  auto character_form = [&](const Character& ch, MentionCategory cat) {
    const bool clue = u(rng) < c.clue_rate;
    const bool male = ch.gender == Gender::masculine;
    switch (cat) {
      case MentionCategory::pronoun: return pick(clue ? (male ? kMalePronouns : kFemalePronouns) : kNeutralPronouns);
      case MentionCategory::common: return pick(clue ? (male ? kMaleCommon : kFemaleCommon) : kNeutralCommon);
      case MentionCategory::proper: break;
    }
    return proper_form(ch);
  };
  auto reschedule = [&](Character& ch, std::size_t slot) {
    ch.introduced = true;
    if (ch.echo_next) {
      ch.echo_next = false;
      ch.next = MentionCategory::proper;
      ch.planned_gap = draw_gap(c.pronoun_gap, rng);
    } else {
      const double r = u(rng);
      ch.next = r < c.pronoun_ratio                    ? MentionCategory::pronoun
                : r < c.pronoun_ratio + c.proper_ratio ? MentionCategory::proper
                                                       : MentionCategory::common;
      const double mean = ch.next == MentionCategory::pronoun  ? c.pronoun_gap
                          : ch.next == MentionCategory::proper ? c.proper_gap
                                                               : c.common_gap;
      ch.planned_gap = draw_gap(mean, rng);
      ch.echo_next = ch.next == MentionCategory::proper && u(rng) < c.echo_rate;
    }
    ch.due = slot + ch.planned_gap;
  };

  const double filler_mean = std::max(1.0, 1.0 / c.mention_density - 1.5);
  std::uniform_int_distribution<std::size_t> filler(1, static_cast<std::size_t>(std::max(1.0, 2.0 * filler_mean - 1.0)));
  std::size_t slot = 0, singles = 0;
  b.fillers(filler(rng));
  while (b.tokens() + 12 < c.tokens_per_doc) {
    std::vector<std::size_t> due;
    for (std::size_t e = 0; e < cast.size(); ++e)
      if (cast[e].due <= slot) due.push_back(e);
    auto earlier = [&](std::size_t a, std::size_t b2) {
      const auto& x = cast[a];
      const auto& y = cast[b2];
      if (x.planned_gap != y.planned_gap) return x.planned_gap < y.planned_gap;
      if (x.due != y.due) return x.due < y.due;
      return a < b2;
    };

    std::vector<std::size_t> active;
    for (std::size_t e = 0; e < cast.size(); ++e)
      if (cast[e].introduced) active.push_back(e);
    if (active.size() >= 2 && u(rng) < c.coordination_rate) {
      std::sort(active.begin(), active.end(), [&](std::size_t a, std::size_t b2) {
        return cast[a].due != cast[b2].due ? cast[a].due < cast[b2].due : a < b2;
      });
      auto& x = cast[active[0]];
      auto& y = cast[active[1]];
      const Form fx = proper_form(x), fy = proper_form(y);
      const TokenIndex start = b.tokens();
      b.mention(fx, MentionCategory::proper, x.base, x.chain, false, head_dep());
      b.add_token("et", CategoryHint::other, "cc", nullptr);
      b.mention(fy, MentionCategory::proper, y.base, y.chain, false, "conj");
      Mention g;
      g.start = start;
      g.end = b.tokens() - 1;
      g.head_token = start + fx.head;
      g.category = MentionCategory::proper;
      g.chain_id = "g" + std::to_string(slot);
      g.is_plural = true;
      b.add_group(g);
      reschedule(x, slot + 1);
      reschedule(y, slot + 2);
      slot += 3;
    } else if (!due.empty() || u(rng) >= c.singleton_rate) {
      std::size_t who;
      if (!due.empty()) {
        who = *std::min_element(due.begin(), due.end(), earlier);
      } else {
        who = 0;
        for (std::size_t e = 1; e < cast.size(); ++e)
          if (cast[e].due < cast[who].due) who = e;
      }
      auto& ch = cast[who];
      const MentionCategory cat = ch.introduced ? ch.next : MentionCategory::proper;
      b.mention(character_form(ch, cat), cat, ch.base, ch.chain, false, head_dep());
      reschedule(ch, slot);
      ++slot;
    } else {
      const bool male = u(rng) < 0.5;
      const Form f = u(rng) < 0.5 ? Form{{male ? "un" : "une", male ? "passant" : "passante"}, 1}
                                  : Form{{"l'inconnu"}, 0};
      b.mention(f, MentionCategory::common, random_vector(c.embedding_dim, rng), "s" + std::to_string(singles++),
                false, head_dep());
      ++slot;
    }
    b.fillers(filler(rng));
  }
  b.fillers(c.tokens_per_doc - b.tokens());
  return b.finish("synthetic-" + std::to_string(index), genders);
}

}  // namespace

void SyntheticCorpusConfig::validate() const {
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(std::string(name) + " must lie in [0, 1]");
  };
  unit(pronoun_ratio, "pronoun_ratio");
  unit(proper_ratio, "proper_ratio");
  unit(echo_rate, "echo_rate");
  unit(coordination_rate, "coordination_rate");
  unit(clue_rate, "clue_rate");
  unit(singleton_rate, "singleton_rate");
  if (pronoun_ratio + proper_ratio > 1.0) throw ValidationError("pronoun_ratio + proper_ratio exceeds 1");
  if (n_docs == 0 || n_entities == 0 || embedding_dim == 0) {
    throw ValidationError("n_docs, n_entities and embedding_dim must be positive");
  }
  if (tokens_per_doc < 50) throw ValidationError("tokens_per_doc must be at least 50");
  if (!(mention_density > 0.0 && mention_density <= 0.5)) throw ValidationError("mention_density must lie in (0, 0.5]");
  if (!(embedding_noise >= 0.0)) throw ValidationError("embedding_noise must be non-negative");
  const double mentions = static_cast<double>(tokens_per_doc) * mention_density;
  for (double g : {pronoun_gap, common_gap, proper_gap}) {
    if (!(g >= 1.0)) throw ValidationError("gap means must be at least 1");
    if (g > mentions) {
      throw ValidationError("gap mean " + std::to_string(g) + " exceeds the " + std::to_string(mentions) +
                            " mentions expected per document");
    }
  }
}

SyntheticCorpus generate_synthetic_corpus(const SyntheticCorpusConfig& config) {
  config.validate();
  SyntheticCorpus out;
  std::map<std::string, Gender> name_gender;
  for (std::size_t d = 0; d < config.n_docs; ++d) {
    Rng rng(config.seed * 1000003ULL + d);
    out.docs.push_back(generate_document(config, d, rng, out.first_names, name_gender));
  }
  return out;
}

std::string write_firstname_lexicon(const FirstNameLexicon& lexicon) {
  std::ostringstream os;
  os << "# name\tmale\tfemale\n";
  for (const auto& [name, counts] : lexicon.entries()) os << name << '\t' << counts.male << '\t' << counts.female << '\n';
  return os.str();
}

void apply_synthetic_settings(SyntheticCorpusConfig& c, std::string_view text) {
  const std::map<std::string, double*> reals{{"pronoun_ratio", &c.pronoun_ratio},
                                             {"proper_ratio", &c.proper_ratio},
                                             {"pronoun_gap", &c.pronoun_gap},
                                             {"common_gap", &c.common_gap},
                                             {"proper_gap", &c.proper_gap},
                                             {"echo_rate", &c.echo_rate},
                                             {"coordination_rate", &c.coordination_rate},
                                             {"clue_rate", &c.clue_rate},
                                             {"singleton_rate", &c.singleton_rate},
                                             {"mention_density", &c.mention_density},
                                             {"embedding_noise", &c.embedding_noise}};
  const std::map<std::string, std::size_t*> counts{{"n_docs", &c.n_docs},
                                                   {"tokens_per_doc", &c.tokens_per_doc},
                                                   {"n_entities", &c.n_entities},
                                                   {"embedding_dim", &c.embedding_dim}};
  for (const auto& s : parse_settings(text)) {
    if (auto it = reals.find(s.key); it != reals.end()) {
      *it->second = setting_real(s);
    } else if (auto jt = counts.find(s.key); jt != counts.end()) {
      *jt->second = setting_count(s);
    } else if (s.key == "seed") {
      c.seed = setting_count(s);
    } else {
      throw ParseError("line " + std::to_string(s.line), "unknown setting '" + s.key + "'");
    }
  }
}

std::string write_synthetic_settings(const SyntheticCorpusConfig& c) {
  std::ostringstream os;
  os << "n_docs = " << c.n_docs << "\n"
     << "tokens_per_doc = " << c.tokens_per_doc << "\n"
     << "n_entities = " << c.n_entities << "\n"
     << "pronoun_ratio = " << c.pronoun_ratio << "\n"
     << "proper_ratio = " << c.proper_ratio << "\n"
     << "pronoun_gap = " << c.pronoun_gap << "\n"
     << "common_gap = " << c.common_gap << "\n"
     << "proper_gap = " << c.proper_gap << "\n"
     << "echo_rate = " << c.echo_rate << "\n"
     << "coordination_rate = " << c.coordination_rate << "\n"
     << "clue_rate = " << c.clue_rate << "\n"
     << "singleton_rate = " << c.singleton_rate << "\n"
     << "mention_density = " << c.mention_density << "\n"
     << "embedding_dim = " << c.embedding_dim << "\n"
     << "embedding_noise = " << c.embedding_noise << "\n"
     << "seed = " << c.seed << "\n";
  return os.str();
}

}  // namespace longcoref

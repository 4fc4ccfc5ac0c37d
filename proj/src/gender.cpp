#include "longcoref/gender.hpp"

#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "longcoref/errors.hpp"

namespace longcoref {
namespace {

std::size_t slot(Gender g) { return g == Gender::masculine ? 0 : 1; }

std::vector<GenderClue> clues_for(const std::string& text, const GenderClueLexicon& lex) {
  auto found = lex.lookup(text);
  if (found.empty()) {
    const auto folded = fold_text(text);
    if (auto q = folded.find('\''); q != std::string::npos && q + 1 < folded.size()) found = lex.lookup(folded.substr(q + 1));
  }
  return found;
}

bool has_word_char(std::string_view s) {
  for (char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (u >= 0x80 || std::isalnum(u)) return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(GenderSource s) {
  switch (s) {
    case GenderSource::none: return "none";
    case GenderSource::heuristic: return "heuristic";
    case GenderSource::firstname: return "firstname";
    case GenderSource::propagated: return "propagated";
  }
  return "none";
}

Gender heuristic_gender(const Mention& m, const Document& doc, const GenderClueLexicon& clues) {
  std::vector<bool> nested(m.length(), false);
  for (const auto& o : doc.mentions) {
    if (o.id == m.id || o.same_span(m) || !m.contains(o)) continue;
    for (TokenIndex t = o.start; t <= o.end; ++t) nested[t - m.start] = true;
  }
  bool male = false, female = false;
  for (TokenIndex t = m.start; t <= m.end; ++t) {
    if (nested[t - m.start]) continue;
    for (const auto& c : clues_for(doc.tokens.at(t).text, clues)) {
      male = male || c.gender == Gender::masculine;
      female = female || c.gender == Gender::feminine;
    }
  }
  if (male == female) return Gender::unknown;
  return male ? Gender::masculine : Gender::feminine;
}

Gender firstname_gender(const Mention& m, const Document& doc, const FirstNameLexicon& names, double ratio_threshold) {
  if (m.category != MentionCategory::proper) return Gender::unknown;
  for (TokenIndex t = m.start; t <= m.end; ++t) {
    const auto folded = fold_text(doc.tokens.at(t).text);
    if (!has_word_char(folded) || is_honorific_word(folded) || is_determiner_word(folded)) continue;
    const auto counts = names.lookup(doc.tokens[t].text);
    if (!counts || counts->total() == 0) return Gender::unknown;
    const auto total = static_cast<double>(counts->total());
    if (static_cast<double>(counts->male) / total >= ratio_threshold) return Gender::masculine;
    if (static_cast<double>(counts->female) / total >= ratio_threshold) return Gender::feminine;
    return Gender::unknown;
  }
  return Gender::unknown;
}

bool is_plural_chain(const Document& doc, const std::vector<MentionId>& chain) {
  std::size_t plural = 0;
  for (MentionId id : chain) plural += doc.mentions.at(id).is_plural;
  return 2 * plural > chain.size();
}

GenderAssignment propagate_gender(const Document& doc, const ChainSet& chains, std::vector<MentionGender> labels) {
  if (labels.size() != doc.mentions.size()) throw ValidationError("one gender label per mention is required");
  GenderAssignment out;
  out.mentions = std::move(labels);
  out.chains.resize(chains.size());
  for (std::size_t c = 0; c < chains.size(); ++c) {
    const auto& chain = chains[c];
    auto& cg = out.chains[c];
    cg.eligible = chain.size() > 1 && !is_plural_chain(doc, chain);
    if (!cg.eligible) continue;
    std::size_t male = 0, female = 0;
    for (MentionId id : chain) {
      const auto g = out.mentions.at(id).label;
      male += g == Gender::masculine;
      female += g == Gender::feminine;
    }
    if (male == female) continue;
    cg.label = male > female ? Gender::masculine : Gender::feminine;
    cg.ratio = static_cast<double>(std::max(male, female)) / static_cast<double>(male + female);
    for (MentionId id : chain) {
      auto& mg = out.mentions[id];
      if (mg.label != cg.label) mg = {cg.label, GenderSource::propagated};
    }
  }
  return out;
}

std::array<GenderAssignment, 3> staged_gender(const Document& doc, const ChainSet& chains,
                                              const GenderClueLexicon& clues, const FirstNameLexicon& names,
                                              double ratio_threshold) {
  std::array<GenderAssignment, 3> out;
  auto& rules = out[0].mentions;
  for (const auto& m : doc.mentions) {
    const auto g = heuristic_gender(m, doc, clues);
    rules.push_back({g, g == Gender::unknown ? GenderSource::none : GenderSource::heuristic});
  }
  out[1].mentions = rules;
  for (const auto& m : doc.mentions) {
    auto& mg = out[1].mentions[m.id];
    if (mg.label != Gender::unknown) continue;
    if (const auto g = firstname_gender(m, doc, names, ratio_threshold); g != Gender::unknown) {
      mg = {g, GenderSource::firstname};
    }
  }
  out[2] = propagate_gender(doc, chains, out[1].mentions);
  return out;
}

Prf GenderCounts::prf(Gender g) const {
  const std::size_t k = slot(g);
  const double p = predicted[k] ? static_cast<double>(true_positive[k]) / static_cast<double>(predicted[k]) : 0.0;
  const double r = gold[k] ? static_cast<double>(true_positive[k]) / static_cast<double>(gold[k]) : 0.0;
  return make_prf(p, r);
}

GenderCounts& GenderCounts::operator+=(const GenderCounts& o) {
  for (std::size_t k = 0; k < 2; ++k) {
    true_positive[k] += o.true_positive[k];
    predicted[k] += o.predicted[k];
    gold[k] += o.gold[k];
  }
  evaluated += o.evaluated;
  return *this;
}

GenderCounts evaluate_gender(const Document& doc, const GenderAssignment& assignment) {
  if (assignment.mentions.size() != doc.mentions.size()) {
    throw ValidationError("gender assignment does not match the document's mentions");
  }
  GenderCounts counts;
  for (const auto& chain : doc.chains) {
    if (chain.gender_label == Gender::unknown || chain.is_singleton() || is_plural_chain(doc, chain.mention_ids)) {
      continue;
    }
    const std::size_t g = slot(chain.gender_label);
    for (MentionId id : chain.mention_ids) {
      ++counts.evaluated;
      ++counts.gold[g];
      const auto label = assignment.mentions[id].label;
      if (label == Gender::unknown) continue;
      ++counts.predicted[slot(label)];
      if (slot(label) == g) ++counts.true_positive[g];
    }
  }
  return counts;
}

std::string gender_report_tsv(const std::array<GenderCounts, 3>& stages) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << "stage\tclass\tprecision\trecall\tf1\tsupport\n";
  for (std::size_t s = 0; s < stages.size(); ++s) {
    for (Gender g : {Gender::masculine, Gender::feminine}) {
      const auto p = stages[s].prf(g);
      os << kGenderStages[s] << '\t' << to_string(g) << '\t' << p.precision << '\t' << p.recall << '\t' << p.f1
         << '\t' << stages[s].gold[slot(g)] << '\n';
    }
  }
  return os.str();
}

std::string gender_assignment_json(const Document& doc, const ChainSet& chains, const GenderAssignment& a) {
  using json = nlohmann::json;
  json mentions = json::array();
  for (const auto& m : doc.mentions) {
    const auto& g = a.mentions.at(m.id);
    mentions.push_back({{"id", m.id},
                        {"start", m.start},
                        {"end", m.end},
                        {"text", doc.mention_text(m)},
                        {"label", to_string(g.label)},
                        {"source", to_string(g.source)}});
  }
  json out_chains = json::array();
  for (std::size_t c = 0; c < chains.size() && c < a.chains.size(); ++c) {
    out_chains.push_back({{"mentions", chains[c]}, {"label", to_string(a.chains[c].label)}, {"ratio", a.chains[c].ratio}});
  }
  return json{{"doc_id", doc.doc_id}, {"mentions", std::move(mentions)}, {"chains", std::move(out_chains)}}.dump(2) +
         "\n";
}

}  // namespace longcoref

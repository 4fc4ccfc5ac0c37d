#include "longcoref/pipeline.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "longcoref/detector.hpp"
#include "longcoref/errors.hpp"
#include "longcoref/features.hpp"
#include "longcoref/io.hpp"

namespace longcoref {
namespace {

using json = nlohmann::json;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<AntecedentDecision> score_antecedents(const PairScorerModel& model, const Document& doc,
                                                  const PipelineConfig& config, std::size_t batch) {
  if (batch == 0) throw ValidationError("batch size must be positive");
  const auto& ms = doc.mentions;
  std::vector<std::vector<ScoredCandidate>> scored(ms.size());
  std::vector<std::pair<MentionId, MentionId>> pending;  // (anaphor, candidate)
  const auto& layout = model.layout();

  auto flush = [&] {
    if (pending.empty()) return;
    RowMat x(static_cast<Eigen::Index>(pending.size()), static_cast<Eigen::Index>(layout.total_dim()));
    for (std::size_t r = 0; r < pending.size(); ++r) {
      const auto [i, j] = pending[r];
      encode_pair(ms[j], ms[i], doc, layout, x.row(static_cast<Eigen::Index>(r)).data());
    }
    const Vec s = model.score(x);
    for (std::size_t r = 0; r < pending.size(); ++r)
      scored[pending[r].first].push_back({pending[r].second, s(static_cast<Eigen::Index>(r))});
    pending.clear();
  };

  for (MentionId i = 0; i < ms.size(); ++i) {
    for (MentionId j : candidate_antecedents(ms, i, config)) {
      pending.push_back({i, j});
      if (pending.size() == batch) flush();
    }
  }
  flush();

  std::vector<AntecedentDecision> out;
  out.reserve(ms.size());
  for (MentionId i = 0; i < ms.size(); ++i) out.push_back(rank_antecedents(i, std::move(scored[i]), config));
  return out;
}

PipelineResult run_pipeline(const Document& doc, const PairScorerModel& scorer, const TaggerModel* outer,
                            const TaggerModel* inner, const PipelineConfig& config) {
  PipelineResult r;
  r.doc = outer ? with_mentions(doc, detect_mentions(*outer, inner, doc)) : doc;
  r.decisions = score_antecedents(scorer, r.doc, config);
  r.resolution = resolve(r.doc, r.decisions, config);
  return r;
}

ChainOutput make_chain_output(const Document& doc, const ChainSet& chains, ClusteringStrategy strategy,
                              std::vector<std::string> diagnostics) {
  ChainOutput out;
  out.doc_id = doc.doc_id;
  out.strategy = std::string(to_string(strategy));
  out.chains = chains;
  for (const auto& m : doc.mentions) out.mentions.push_back({m.start, m.end});
  out.diagnostics = std::move(diagnostics);
  return out;
}

std::string write_chain_output(const ChainOutput& out, int indent) {
  json spans = json::array();
  for (const auto& s : out.mentions) spans.push_back({s.start, s.end});
  json root{{"doc_id", out.doc_id},
            {"strategy", out.strategy},
            {"chains", out.chains},
            {"mentions", std::move(spans)},
            {"diagnostics", out.diagnostics}};
  return root.dump(indent) + "\n";
}

ChainOutput parse_chain_output(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError("", e.what());
  }
  if (!root.is_object()) throw ParseError("", "expected an object");
  ChainOutput out;
  auto index = [](const json& v, const std::string& path) {
    if (!v.is_number_unsigned()) throw ParseError(path, "expected a non-negative integer");
    return v.get<std::size_t>();
  };
  if (auto it = root.find("doc_id"); it != root.end()) {
    if (!it->is_string()) throw ParseError("/doc_id", "expected a string");
    out.doc_id = it->get<std::string>();
  }
  if (auto it = root.find("strategy"); it != root.end() && it->is_string()) out.strategy = it->get<std::string>();
  const auto chains = root.find("chains");
  if (chains == root.end() || !chains->is_array()) throw ParseError("/chains", "expected an array");
  for (std::size_t c = 0; c < chains->size(); ++c) {
    const auto& chain = (*chains)[c];
    const std::string p = "/chains/" + std::to_string(c);
    if (!chain.is_array() || chain.empty()) throw ParseError(p, "expected a non-empty array");
    std::vector<MentionId> ids;
    for (std::size_t k = 0; k < chain.size(); ++k) ids.push_back(index(chain[k], p + "/" + std::to_string(k)));
    out.chains.push_back(std::move(ids));
  }
  if (auto it = root.find("mentions"); it != root.end()) {
    if (!it->is_array()) throw ParseError("/mentions", "expected an array");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const auto& s = (*it)[k];
      const std::string p = "/mentions/" + std::to_string(k);
      if (!s.is_array() || s.size() != 2) throw ParseError(p, "expected [start, end]");
      const Span span{index(s[0], p + "/0"), index(s[1], p + "/1")};
      if (span.end < span.start) throw ParseError(p, "end precedes start");
      out.mentions.push_back(span);
    }
  }
  if (auto it = root.find("diagnostics"); it != root.end() && it->is_array()) {
    for (const auto& d : *it)
      if (d.is_string()) out.diagnostics.push_back(d.get<std::string>());
  }
  std::vector<bool> seen(out.mentions.empty() ? 0 : out.mentions.size(), false);
  for (std::size_t c = 0; c < out.chains.size(); ++c) {
    for (MentionId id : out.chains[c]) {
      if (out.mentions.empty()) continue;
      if (id >= out.mentions.size()) {
        throw ParseError("/chains/" + std::to_string(c), "mention " + std::to_string(id) + " is not listed");
      }
      if (seen[id]) throw ParseError("/chains/" + std::to_string(c), "mention " + std::to_string(id) + " repeated");
      seen[id] = true;
    }
  }
  return out;
}

Partition output_partition(const ChainOutput& out, const Document& gold) {
  Partition p;
  for (const auto& chain : out.chains) {
    std::vector<MentionKey> cell;
    for (MentionId id : chain) {
      if (!out.mentions.empty()) {
        cell.push_back(span_key(out.mentions[id].start, out.mentions[id].end));
      } else {
        if (id >= gold.mentions.size()) {
          throw ValidationError("chain output for '" + out.doc_id + "' refers to missing mention " +
                                std::to_string(id));
        }
        cell.push_back(span_key(gold.mentions[id].start, gold.mentions[id].end));
      }
    }
    p.push_back(std::move(cell));
  }
  return p;
}

Partition load_predicted_partition(const std::filesystem::path& path, const Document& gold) {
  const std::string text = slurp(path);
  bool is_document = false;
  try {
    const auto root = json::parse(text);
    is_document = root.is_object() && root.contains("tokens");
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), e.what());
  }
  try {
    if (is_document) {
      const auto doc = parse_document(text);
      return to_partition(doc, gold_chains(doc));
    }
    return output_partition(parse_chain_output(text), gold);
  } catch (const ParseError& e) {
    throw ParseError(path.string(), e.what());
  }
}

}  // namespace longcoref

#include "longcoref/io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "longcoref/document.hpp"
#include "longcoref/errors.hpp"

namespace longcoref {
namespace {

using json = nlohmann::json;

const json& member(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + "/" + key, "missing required field");
  return *it;
}

std::size_t as_index(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ParseError(path, "expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ParseError(path, "expected a string");
  return v.get<std::string>();
}

std::string optional_string(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  return as_string(*it, path + "/" + key);
}

template <typename T, typename F>
T parse_enum(const json& obj, const char* key, const std::string& path, F parse, T fallback) {
  const std::string s = optional_string(obj, key, path);
  if (s.empty()) return fallback;
  auto v = parse(s);
  if (!v) throw ParseError(path + "/" + key, "unknown value '" + s + "'");
  return *v;
}

std::string chain_from_json(const json& v, const std::string& path) {
  if (v.is_null()) return std::string(kSingletonChain);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  throw ParseError(path, "chain must be a string, integer or null");
}

}  // namespace

Document parse_document(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError("", std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("", "document must be a JSON object");

  Document doc;
  doc.doc_id = as_string(member(root, "doc_id", ""), "/doc_id");

  const json& toks = member(root, "tokens", "");
  if (!toks.is_array()) throw ParseError("/tokens", "expected an array");
  doc.tokens.reserve(toks.size());
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const std::string p = "/tokens/" + std::to_string(i);
    const json& t = toks[i];
    if (!t.is_object()) throw ParseError(p, "expected an object");
    Token tok;
    tok.index = i;
    tok.text = as_string(member(t, "text", p), p + "/text");
    tok.sentence_index = as_index(member(t, "sentence", p), p + "/sentence");
    tok.paragraph_index = t.contains("paragraph") ? as_index(t["paragraph"], p + "/paragraph") : 0;
    tok.category_hint = parse_enum(t, "category", p, parse_category_hint, CategoryHint::unknown);
    tok.dependency_relation = optional_string(t, "dep", p);
    tok.gender_hint = parse_enum(t, "gender", p, parse_gender, Gender::unknown);
    tok.number_hint = parse_enum(t, "number", p, parse_number, Number::unknown);
    tok.person_hint = parse_enum(t, "person", p, parse_person, Person::unknown);
    doc.tokens.push_back(std::move(tok));
  }

  std::map<std::pair<TokenIndex, TokenIndex>, int> declared_levels;
  const json& ms = root.contains("mentions") ? root["mentions"] : json::array();
  if (!ms.is_array()) throw ParseError("/mentions", "expected an array");
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const std::string p = "/mentions/" + std::to_string(i);
    const json& j = ms[i];
    if (!j.is_object()) throw ParseError(p, "expected an object");
    Mention m;
    m.start = as_index(member(j, "start", p), p + "/start");
    m.end = as_index(member(j, "end", p), p + "/end");
    if (m.end < m.start) throw ValidationError(p + ": end < start");
    if (m.end >= doc.tokens.size()) throw ValidationError(p + ": span exceeds token range");
    m.head_token = j.contains("head") ? as_index(j["head"], p + "/head")
                                      : select_head(m.start, m.end, doc.tokens);
    if (j.contains("category")) {
      m.category = parse_enum(j, "category", p, parse_mention_category, MentionCategory::common);
    } else {
      m.category = classify_mention(m, doc.tokens).category;
    }
    m.chain_id = j.contains("chain") ? chain_from_json(j["chain"], p + "/chain") : std::string(kSingletonChain);
    if (j.contains("plural")) {
      if (!j["plural"].is_boolean()) throw ParseError(p + "/plural", "expected a boolean");
      m.is_plural = j["plural"].get<bool>();
    }
    if (j.contains("confidence")) {
      if (!j["confidence"].is_number()) throw ParseError(p + "/confidence", "expected a number");
      m.confidence = j["confidence"].get<double>();
    }
    if (j.contains("level")) {
      declared_levels[{m.start, m.end}] = static_cast<int>(as_index(j["level"], p + "/level"));
    }
    doc.mentions.push_back(std::move(m));
  }

  if (auto it = root.find("chain_genders"); it != root.end()) {
    if (!it->is_object()) throw ParseError("/chain_genders", "expected an object");
    for (const auto& [key, val] : it->items()) {
      const std::string p = "/chain_genders/" + key;
      auto g = parse_gender(as_string(val, p));
      if (!g) throw ParseError(p, "expected \"m\", \"f\" or \"u\"");
      doc.chains.push_back({key, {}, *g});
    }
  }

  normalize_document(doc);
  auto report = validate_document(doc);
  for (const auto& m : doc.mentions) {
    auto it = declared_levels.find({m.start, m.end});
    if (it != declared_levels.end() && it->second != m.nesting_level) {
      report.issues.push_back({ValidationIssue::Kind::nesting, "mentions[" + std::to_string(m.id) + "]",
                               "declared level " + std::to_string(it->second) + " but computed " +
                                   std::to_string(m.nesting_level)});
    }
  }
  if (!report.ok()) throw ValidationError("document '" + doc.doc_id + "' is malformed:\n" + report.summary());
  return doc;
}

std::string write_document(const Document& doc, int indent, const std::string& embeddings_ref) {
  json root;
  root["doc_id"] = doc.doc_id;
  json toks = json::array();
  for (const auto& t : doc.tokens) {
    toks.push_back({{"text", t.text},
                    {"sentence", t.sentence_index},
                    {"paragraph", t.paragraph_index},
                    {"category", to_string(t.category_hint)},
                    {"dep", t.dependency_relation},
                    {"gender", to_string(t.gender_hint)},
                    {"number", to_string(t.number_hint)},
                    {"person", to_string(t.person_hint)}});
  }
  root["tokens"] = std::move(toks);
  json ms = json::array();
  for (const auto& m : doc.mentions) {
    json j = {{"start", m.start},
              {"end", m.end},
              {"head", m.head_token},
              {"level", m.nesting_level},
              {"category", to_string(m.category)},
              {"chain", m.chain_id},
              {"plural", m.is_plural}};
    if (m.confidence != 1.0) j["confidence"] = m.confidence;
    ms.push_back(std::move(j));
  }
  root["mentions"] = std::move(ms);
  json genders = json::object();
  for (const auto& c : doc.chains) {
    if (c.gender_label != Gender::unknown) genders[c.chain_id] = to_string(c.gender_label);
  }
  root["chain_genders"] = std::move(genders);
  if (!embeddings_ref.empty()) root["embeddings"] = embeddings_ref;
  return root.dump(indent);
}

Document load_document(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  Document doc;
  try {
    doc = parse_document(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string(), e.what());
  }
  auto root = json::parse(text);
  if (auto it = root.find("embeddings"); it != root.end() && it->is_string()) {
    std::filesystem::path emb = it->get<std::string>();
    if (emb.is_relative()) emb = path.parent_path() / emb;
    attach_embeddings(doc, std::make_shared<EmbeddingMatrix>(read_embeddings(emb)));
  }
  return doc;
}

void save_document(const Document& doc, const std::filesystem::path& path, const std::string& embeddings_ref) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << write_document(doc, 1, embeddings_ref) << "\n";
}

namespace binio {

void write_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> b;
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b.data(), 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b;
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b.data(), 8);
}

void write_f32(std::ostream& out, float v) { write_u32(out, std::bit_cast<std::uint32_t>(v)); }

void write_string(std::ostream& out, std::string_view s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t read_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) throw ParseError("", "truncated input");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  std::array<unsigned char, 8> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 8)) throw ParseError("", "truncated input");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

float read_f32(std::istream& in) { return std::bit_cast<float>(read_u32(in)); }

std::string read_string(std::istream& in) {
  const auto n = read_u32(in);
  if (n > (1u << 20)) throw ParseError("", "string length out of range");
  std::string s(n, '\0');
  if (n && !in.read(s.data(), n)) throw ParseError("", "truncated input");
  return s;
}

void expect_magic(std::istream& in, std::string_view magic) {
  std::string got(magic.size(), '\0');
  if (!in.read(got.data(), static_cast<std::streamsize>(got.size())) || got != magic) {
    throw ParseError("", "bad magic, expected \"" + std::string(magic) + "\"");
  }
}

}  // namespace binio

void write_embeddings(const EmbeddingMatrix& m, std::ostream& out) {
  out.write("PRPC", 4);
  binio::write_u32(out, kEmbeddingVersion);
  binio::write_u64(out, m.rows());
  binio::write_u32(out, static_cast<std::uint32_t>(m.dim()));
  for (float v : m.data()) binio::write_f32(out, v);
  if (!out) throw Error("failed writing embeddings");
}

void write_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_embeddings(m, out);
}

EmbeddingMatrix read_embeddings(std::istream& in) {
  binio::expect_magic(in, "PRPC");
  const auto version = binio::read_u32(in);
  if (version != kEmbeddingVersion) {
    throw ParseError("", "unsupported embedding version " + std::to_string(version));
  }
  const auto rows = binio::read_u64(in);
  const auto dim = binio::read_u32(in);
  const std::uint64_t count = rows * dim;
  std::vector<char> raw(count * 4);
  in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  const auto got = static_cast<std::uint64_t>(in.gcount());
  if (got != raw.size()) {
    throw ParseError("", "truncated payload: header declares " + std::to_string(rows) + " rows x " +
                             std::to_string(dim) + " but only " + std::to_string(got / 4 / std::max<std::uint64_t>(dim, 1)) +
                             " complete rows present");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError("", "trailing bytes after declared payload");
  }
  std::vector<float> data(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint32_t v = 0;
    for (int b = 3; b >= 0; --b) v = (v << 8) | static_cast<unsigned char>(raw[i * 4 + b]);
    data[i] = std::bit_cast<float>(v);
  }
  return EmbeddingMatrix(rows, dim, std::move(data));
}

EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return read_embeddings(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string(), e.what());
  }
}

void attach_embeddings(Document& doc, std::shared_ptr<const EmbeddingMatrix> m, std::size_t expected_dim) {
  if (!m) throw DimensionError("null embedding matrix");
  if (m->rows() != doc.tokens.size()) {
    throw DimensionError("embedding rows (" + std::to_string(m->rows()) + ") differ from token count (" +
                         std::to_string(doc.tokens.size()) + ") for document '" + doc.doc_id + "'");
  }
  if (expected_dim != 0 && m->dim() != expected_dim) {
    throw DimensionError("embedding dim " + std::to_string(m->dim()) + " differs from configured " +
                         std::to_string(expected_dim));
  }
  doc.embeddings = std::move(m);
}

}  // namespace longcoref

#include "cli_support.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

#include "longcoref/errors.hpp"
#include "longcoref/io.hpp"
#include "longcoref/settings.hpp"

#ifndef LONGCOREF_VERSION
#define LONGCOREF_VERSION "0.0.0"
#endif

namespace longcoref::cli {
namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool skipped_in_directory(const fs::path& p, bool chain_outputs) {
  const auto name = p.filename().string();
  return name == "manifest.json" || ends_with(name, ".manifest.json") ||
         (!chain_outputs && ends_with(name, ".chains.json")) || ends_with(name, ".gender.json");
}

std::string iso_time(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace

std::vector<fs::path> expand_inputs(const std::vector<std::string>& args, const std::vector<std::string>& extensions,
                                   bool chain_outputs) {
  std::vector<fs::path> out;
  for (const auto& a : args) {
    const fs::path p(a);
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && std::find(extensions.begin(), extensions.end(), e.path().extension().string()) != extensions.end() &&
             !skipped_in_directory(e.path(), chain_outputs)) {
          found.push_back(e.path());
        }
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::exists(p, ec)) {
      out.push_back(p);
    } else {
      throw ParseError(a, "no such file or directory");
    }
  }
  return out;
}

std::vector<Document> load_documents(const std::vector<fs::path>& paths) {
  std::vector<Document> docs;
  docs.reserve(paths.size());
  for (const auto& p : paths) docs.push_back(load_document(p));
  return docs;
}

fs::path embeddings_path(const fs::path& doc_file) {
  const auto root = nlohmann::json::parse(read_text(doc_file), nullptr, false);
  if (root.is_discarded() || !root.is_object()) return {};
  const auto it = root.find("embeddings");
  if (it == root.end() || !it->is_string()) return {};
  fs::path ref = it->get<std::string>();
  if (ref.is_relative()) ref = doc_file.parent_path() / ref;
  return ref.lexically_normal();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), "cannot open file");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256: digest init failed");
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(md[i]);
  return os.str();
}

std::vector<std::size_t> parse_lengths(const std::vector<std::string>& items) {
  std::vector<std::size_t> out;
  for (const auto& item : items) {
    std::istringstream parts(item);
    std::string part;
    while (std::getline(parts, part, ',')) {
      if (part.empty()) continue;
      Setting s{"lengths", part, 0};
      const auto v = setting_count(s);
      if (v == 0) throw ValidationError("lengths: must be positive");
      out.push_back(v);
    }
  }
  if (out.empty()) throw ValidationError("lengths: none given");
  return out;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), "cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path.string() + ": cannot write");
  out << text;
  if (!out) throw Error(path.string() + ": write failed");
}

RunManifest::RunManifest(std::string command) : command_(std::move(command)) {}

void RunManifest::set_argv(int argc, char** argv) { argv_.assign(argv, argv + argc); }

void RunManifest::set_config(const PipelineConfig& c) {
  config_ = {{"pronoun_window", c.pronoun_window},
             {"noun_window", c.noun_window},
             {"null_threshold", c.null_threshold},
             {"clustering_strategy", std::string(to_string(c.clustering_strategy))},
             {"embedding_dim", c.embedding_dim},
             {"conjunctions", c.conjunctions}};
}

void RunManifest::set_option(const std::string& name, nlohmann::json value) { options_[name] = std::move(value); }

void RunManifest::add_input(const fs::path& path) {
  std::error_code ec;
  inputs_.push_back({{"path", path.string()},
                     {"sha256", sha256_file(path)},
                     {"bytes", static_cast<std::uint64_t>(fs::file_size(path, ec))}});
}

void RunManifest::add_output(const fs::path& path) { outputs_.push_back(path.string()); }

nlohmann::json RunManifest::to_json() const {
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_).count();
  nlohmann::json j;
  j["command"] = command_;
  j["argv"] = argv_;
  j["version"] = LONGCOREF_VERSION;
  j["config"] = config_;
  j["options"] = options_;
  j["seed"] = seed_ ? nlohmann::json(*seed_) : nlohmann::json(nullptr);
  j["inputs"] = inputs_;
  j["outputs"] = outputs_;
  j["exit_code"] = exit_code_;
  j["timings"] = {{"started", iso_time(started_)}, {"seconds", seconds}};
  return j;
}

void RunManifest::write(const fs::path& path) const { write_text(path, to_json().dump(2) + "\n"); }

}  // namespace longcoref::cli

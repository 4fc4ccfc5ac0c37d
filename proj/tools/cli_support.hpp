#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "longcoref/types.hpp"

namespace longcoref::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kUsage = 1, kInput = 2, kRuntime = 3 };

/// Files as given; directories expand to their files with one of
/// `extensions`, sorted, leaving out manifests, gender assignments and (unless
/// `chain_outputs`) *.chains.json.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& args,
                                   const std::vector<std::string>& extensions = {".json"}, bool chain_outputs = false);

std::vector<Document> load_documents(const std::vector<fs::path>& paths);

/// The "embeddings" reference of a document file resolved against its
/// directory; empty when absent.
fs::path embeddings_path(const fs::path& doc_file);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const fs::path& path);

/// "1000,2000" style lists; every entry must be a positive integer.
std::vector<std::size_t> parse_lengths(const std::vector<std::string>& items);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

class RunManifest {
 public:
  explicit RunManifest(std::string command);

  void set_argv(int argc, char** argv);
  void set_config(const PipelineConfig& config);
  void set_option(const std::string& name, nlohmann::json value);
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  void add_input(const fs::path& path);
  void add_output(const fs::path& path);
  void set_exit(int code) { exit_code_ = code; }

  nlohmann::json to_json() const;
  void write(const fs::path& path) const;

 private:
  std::string command_;
  std::vector<std::string> argv_;
  nlohmann::json config_ = nlohmann::json::object();
  nlohmann::json options_ = nlohmann::json::object();
  std::optional<std::uint64_t> seed_;
  nlohmann::json inputs_ = nlohmann::json::array();
  std::vector<std::string> outputs_;
  int exit_code_ = 0;
  std::chrono::system_clock::time_point started_ = std::chrono::system_clock::now();
  std::chrono::steady_clock::time_point clock_ = std::chrono::steady_clock::now();
};

/// fn(i) for i in [0, n), `jobs` at a time; jobs <= 1 runs in order on the
/// calling thread.
template <class Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn fn) {
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  for (std::size_t begin = 0; begin < n; begin += jobs) {
    std::vector<std::future<void>> batch;
    for (std::size_t i = begin; i < std::min(n, begin + jobs); ++i) batch.push_back(std::async(std::launch::async, fn, i));
    for (auto& f : batch) f.get();
  }
}

}  // namespace longcoref::cli

#include "longcoref/settings.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "longcoref/errors.hpp"

namespace longcoref {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

ParseError bad(const Setting& s, const std::string& what) {
  return ParseError("line " + std::to_string(s.line), s.key + ": " + what);
}

}  // namespace

std::vector<Setting> parse_settings(std::string_view text) {
  std::vector<Setting> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("line " + std::to_string(line_no), "expected key = value");
    out.push_back({std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))), line_no});
  }
  return out;
}

double setting_real(const Setting& s) {
  try {
    std::size_t used = 0;
    const double d = std::stod(s.value, &used);
    if (used == s.value.size()) return d;
  } catch (const std::exception&) {
  }
  throw bad(s, "expected a number, got '" + s.value + "'");
}

std::size_t setting_count(const Setting& s) {
  if (s.value.empty() || !std::all_of(s.value.begin(), s.value.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw bad(s, "expected a non-negative integer, got '" + s.value + "'");
  }
  try {
    return static_cast<std::size_t>(std::stoull(s.value));
  } catch (const std::out_of_range&) {
    throw bad(s, "value out of range");
  }
}

void apply_pipeline_settings(PipelineConfig& config, std::string_view text) {
  for (const auto& s : parse_settings(text)) {
    if (s.key == "pronoun_window") {
      config.pronoun_window = setting_count(s);
    } else if (s.key == "noun_window") {
      config.noun_window = setting_count(s);
    } else if (s.key == "null_threshold") {
      config.null_threshold = setting_real(s);
    } else if (s.key == "embedding_dim") {
      config.embedding_dim = setting_count(s);
    } else if (s.key == "clustering_strategy") {
      auto v = parse_strategy(s.value);
      if (!v) throw bad(s, "unknown strategy '" + s.value + "'");
      config.clustering_strategy = *v;
    } else if (s.key == "conjunctions") {
      config.conjunctions.clear();
      std::istringstream parts(s.value);
      std::string part;
      while (std::getline(parts, part, ',')) {
        const auto t = trim(part);
        if (!t.empty()) config.conjunctions.emplace_back(t);
      }
    } else {
      throw bad(s, "unknown setting");
    }
  }
}

std::string write_pipeline_settings(const PipelineConfig& config) {
  std::ostringstream os;
  os << "pronoun_window = " << config.pronoun_window << "\n"
     << "noun_window = " << config.noun_window << "\n"
     << "null_threshold = " << config.null_threshold << "\n"
     << "clustering_strategy = " << to_string(config.clustering_strategy) << "\n"
     << "embedding_dim = " << config.embedding_dim << "\n"
     << "conjunctions = ";
  for (std::size_t i = 0; i < config.conjunctions.size(); ++i) os << (i ? ", " : "") << config.conjunctions[i];
  os << "\n";
  return os.str();
}

}  // namespace longcoref

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "longcoref/types.hpp"

namespace longcoref {

struct Setting {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// "key = value" lines; '#' starts a comment. Throws ParseError("line N", ...)
/// on a line without '='.
std::vector<Setting> parse_settings(std::string_view text);

double setting_real(const Setting& s);
std::size_t setting_count(const Setting& s);

/// Keys: pronoun_window, noun_window, null_threshold, clustering_strategy,
/// embedding_dim, conjunctions (comma-separated). Throws ParseError on
/// unknown keys or bad values.
void apply_pipeline_settings(PipelineConfig& config, std::string_view text);

/// The same keys, one per line, in a form apply_pipeline_settings accepts.
std::string write_pipeline_settings(const PipelineConfig& config);

}  // namespace longcoref

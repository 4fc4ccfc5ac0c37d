#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "longcoref/document.hpp"
#include "longcoref/types.hpp"

namespace toy {

/// Sentences of random words where every capitalized word is a one-token
/// mention. Embedding column 0 carries the capitalization sign; the other
/// columns are a per-word code plus noise.
inline std::vector<longcoref::Document> capitalized_corpus(std::size_t n_docs, std::size_t sentences_per_doc,
                                                           std::size_t dim, std::uint64_t seed) {
  static const std::vector<std::string> names{"Marie", "Jean", "Paul", "Lucie", "Emma", "Hugo", "Louis", "Alice"};
  static const std::vector<std::string> words{"le", "chat", "dort", "sur", "la", "table", "et", "mange",
                                              "un", "pain", "vite", "puis", "part", "avec", "lui", "demain"};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::uniform_int_distribution<std::size_t> len(4, 12);
  std::bernoulli_distribution cap(0.25);
  std::vector<std::vector<float>> code(names.size() + words.size(), std::vector<float>(dim));
  for (auto& c : code)
    for (auto& v : c) v = static_cast<float>(noise(rng) * 2.0);

  std::vector<longcoref::Document> docs;
  for (std::size_t d = 0; d < n_docs; ++d) {
    longcoref::Document doc;
    doc.doc_id = "toy-" + std::to_string(d);
    std::vector<float> emb;
    for (std::size_t s = 0; s < sentences_per_doc; ++s) {
      const std::size_t n = len(rng);
      for (std::size_t i = 0; i < n; ++i) {
        const bool is_name = cap(rng);
        const std::size_t w = is_name ? std::uniform_int_distribution<std::size_t>(0, names.size() - 1)(rng)
                                      : std::uniform_int_distribution<std::size_t>(0, words.size() - 1)(rng);
        longcoref::Token t;
        t.index = doc.tokens.size();
        t.text = is_name ? names[w] : words[w];
        t.sentence_index = s;
        t.category_hint = is_name ? longcoref::CategoryHint::proper : longcoref::CategoryHint::other;
        if (is_name) {
          longcoref::Mention m;
          m.start = m.end = m.head_token = t.index;
          m.category = longcoref::MentionCategory::proper;
          doc.mentions.push_back(m);
        }
        const auto& c = code[is_name ? w : names.size() + w];
        for (std::size_t k = 0; k < dim; ++k) {
          emb.push_back(k == 0 ? static_cast<float>((is_name ? 1.0 : -1.0) + noise(rng)) : c[k] + static_cast<float>(noise(rng)));
        }
        doc.tokens.push_back(std::move(t));
      }
    }
    doc.embeddings = std::make_shared<longcoref::EmbeddingMatrix>(doc.tokens.size(), dim, std::move(emb));
    longcoref::normalize_document(doc);
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace toy

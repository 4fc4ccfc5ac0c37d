#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>

#include "longcoref/types.hpp"

namespace longcoref {

// Document JSON
// {doc_id, tokens:[{text, sentence, paragraph, category, dep, gender, number,
//  person}], mentions:[{start, end, head, level, category, chain, plural,
//  confidence}], chain_genders:{chain_id: "m"|"f"|"u"}, embeddings: path}
//
// Optional mention fields: head (syntactic head hint, else select_head),
// level (checked against the computed level), category (else classified from
// the head hint), chain (null or absent = singleton), confidence (1.0).

/// Parses and normalizes a document. Throws ParseError (with JSON path) on
/// schema violations and ValidationError when the result is not well formed.
Document parse_document(std::string_view json_text);
/// `embeddings_ref`, when set, is stored as the "embeddings" path.
std::string write_document(const Document& doc, int indent = -1, const std::string& embeddings_ref = "");

/// Reads a document file; a relative "embeddings" path is resolved against
/// the file's directory and attached (dimension unchecked).
Document load_document(const std::filesystem::path& path);
void save_document(const Document& doc, const std::filesystem::path& path, const std::string& embeddings_ref = "");

// Embedding binary: "PRPC", u32 version=1, u64 n_tokens, u32 dim, then
// n_tokens*dim little-endian f32, row-major.
inline constexpr std::uint32_t kEmbeddingVersion = 1;

void write_embeddings(const EmbeddingMatrix& m, std::ostream& out);
void write_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path);
EmbeddingMatrix read_embeddings(std::istream& in);
EmbeddingMatrix read_embeddings(const std::filesystem::path& path);

/// Throws DimensionError when the row count differs from the token count or
/// (expected_dim != 0) the width differs from expected_dim.
void attach_embeddings(Document& doc, std::shared_ptr<const EmbeddingMatrix> m,
                       std::size_t expected_dim = 0);

/// Little-endian helpers shared by the checkpoint formats.
namespace binio {
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f32(std::ostream& out, float v);
void write_string(std::ostream& out, std::string_view s);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
float read_f32(std::istream& in);
std::string read_string(std::istream& in);
void expect_magic(std::istream& in, std::string_view magic);
}  // namespace binio

}  // namespace longcoref

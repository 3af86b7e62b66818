#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "erld/document.hpp"
#include "erld/schema.hpp"

namespace erld {

/// Documents keyed by primary key.
class PrimaryKeyStore {
 public:
  using Map = std::map<std::string, Document, std::less<>>;

  /// Throws InputError if the id is already present.
  void add(Document doc);
  [[nodiscard]] const Document* find(std::string_view id) const;
  [[nodiscard]] bool contains(std::string_view id) const { return find(id) != nullptr; }
  [[nodiscard]] std::size_t size() const noexcept { return docs_.size(); }
  [[nodiscard]] bool empty() const noexcept { return docs_.empty(); }
  [[nodiscard]] Map::const_iterator begin() const noexcept { return docs_.begin(); }
  [[nodiscard]] Map::const_iterator end() const noexcept { return docs_.end(); }

  friend bool operator==(const PrimaryKeyStore&, const PrimaryKeyStore&) = default;

 private:
  Map docs_;
};

/// Token -> sorted posting set over referential attribute content. Each
/// document's own primary key is indexed as one of its tokens.
class InvertedIndex {
 public:
  using Map = std::map<std::string, IdSet, std::less<>>;

  void add_document(const Document& doc, const SchemaConfig& schema);
  void add_posting(std::string token, std::string doc_id);
  [[nodiscard]] const IdSet& search(std::string_view token) const;
  [[nodiscard]] std::size_t size() const noexcept { return postings_.size(); }
  [[nodiscard]] Map::const_iterator begin() const noexcept { return postings_.begin(); }
  [[nodiscard]] Map::const_iterator end() const noexcept { return postings_.end(); }

  friend bool operator==(const InvertedIndex&, const InvertedIndex&) = default;

 private:
  Map postings_;
};

/// Explicit role: the whole trimmed value. Implicit role: pieces split on
/// whitespace and `delimiters`, case preserved. Non-referential: empty.
[[nodiscard]] IdSet tokenize_referential(std::string_view value, RefRole role,
                                         std::string_view delimiters = kDefaultDelimiters);

struct Indexes {
  PrimaryKeyStore store;
  InvertedIndex inverted;
};

[[nodiscard]] Indexes build_indexes(std::span<const Document> docs, const SchemaConfig& schema);
/// Adds documents to existing indexes (same result as rebuilding over the union).
void add_to_indexes(Indexes& indexes, std::span<const Document> docs, const SchemaConfig& schema);

/// Exact, case-sensitive token lookup.
[[nodiscard]] const IdSet& search_referential(std::string_view token, const InvertedIndex& index);

}  // namespace erld

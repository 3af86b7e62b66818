#include "erld/index.hpp"

#include <cctype>

#include "erld/error.hpp"

namespace erld {

void PrimaryKeyStore::add(Document doc) {
  auto id = doc.id;
  const auto [it, inserted] = docs_.emplace(std::move(id), std::move(doc));
  if (!inserted) throw InputError("duplicate document id '" + it->first + "'");
}

const Document* PrimaryKeyStore::find(std::string_view id) const {
  const auto it = docs_.find(id);
  return it == docs_.end() ? nullptr : &it->second;
}

IdSet tokenize_referential(std::string_view value, RefRole role, std::string_view delimiters) {
  IdSet tokens;
  switch (role) {
    case RefRole::none:
      break;
    case RefRole::explicit_ref: {
      auto whole = trim(value);
      if (!whole.empty()) tokens.insert(std::move(whole));
      break;
    }
    case RefRole::implicit_ref: {
      auto is_delim = [&](char c) {
        return std::isspace(static_cast<unsigned char>(c)) != 0 ||
               delimiters.find(c) != std::string_view::npos;
      };
      std::size_t i = 0;
      while (i < value.size()) {
        while (i < value.size() && is_delim(value[i])) ++i;
        const std::size_t start = i;
        while (i < value.size() && !is_delim(value[i])) ++i;
        if (i > start) tokens.emplace(value.substr(start, i - start));
      }
      break;
    }
  }
  return tokens;
}

void InvertedIndex::add_posting(std::string token, std::string doc_id) {
  postings_[std::move(token)].insert(std::move(doc_id));
}

void InvertedIndex::add_document(const Document& doc, const SchemaConfig& schema) {
  add_posting(doc.id, doc.id);
  for (const auto& [name, values] : doc.attrs) {
    const auto& spec = schema.resolve(doc.primary_type(), name);
    if (!spec.is_referential()) continue;
    for (const auto& v : values) {
      for (auto& token : tokenize_referential(v, spec.ref_role, schema.delimiters())) {
        add_posting(token, doc.id);
      }
    }
  }
}

const IdSet& InvertedIndex::search(std::string_view token) const {
  static const IdSet kEmpty;
  const auto it = postings_.find(token);
  return it == postings_.end() ? kEmpty : it->second;
}

const IdSet& search_referential(std::string_view token, const InvertedIndex& index) {
  return index.search(token);
}

void add_to_indexes(Indexes& indexes, std::span<const Document> docs, const SchemaConfig& schema) {
  for (const auto& d : docs) {
    indexes.store.add(d);
    indexes.inverted.add_document(d, schema);
  }
}

Indexes build_indexes(std::span<const Document> docs, const SchemaConfig& schema) {
  Indexes out;
  add_to_indexes(out, docs, schema);
  return out;
}

}  // namespace erld

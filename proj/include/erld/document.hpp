#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "erld/schema.hpp"
#include "json.hpp"

namespace erld {

using IdSet = std::set<std::string, std::less<>>;
using ValueSet = std::set<std::string, std::less<>>;
using AttributeMap = std::map<std::string, ValueSet, std::less<>>;

/// A record from one source. Attributes are multi-valued sets; a merged
/// document carries the union of its inputs' type tags.
struct Document {
  std::string id;
  std::set<std::string, std::less<>> types;
  AttributeMap attrs;

  [[nodiscard]] const ValueSet* values(std::string_view attribute) const;
  /// First (for source documents: only) type tag.
  [[nodiscard]] const std::string& primary_type() const;

  friend bool operator==(const Document&, const Document&) = default;
};

struct Entity {
  std::string id;
  Document merged;
  IdSet members;

  friend bool operator==(const Entity&, const Entity&) = default;
};

/// Attribute-wise union of the inputs. The result gets a synthetic id that
/// cannot collide with a source id. Throws InputError on empty input.
[[nodiscard]] Document merge(std::span<const Document> docs);
[[nodiscard]] Document merge(const Document& a, const Document& b);
/// In-place union of `from` into `into` (id untouched).
void merge_into(Document& into, const Document& from);

/// Builds one document from a corpus record {"type": str, "attrs": {name: [values]}}.
/// `line` is only used in error messages.
[[nodiscard]] Document parse_record(const nlohmann::json& record, const SchemaConfig& schema,
                                    std::size_t line = 0);
[[nodiscard]] nlohmann::json to_record(const Document& doc);

/// Parses a JSON-Lines corpus; blank lines are skipped. Throws ParseError for
/// bad records and for duplicate ids (naming both lines).
[[nodiscard]] std::vector<Document> parse_corpus(std::istream& in, const SchemaConfig& schema);
[[nodiscard]] std::vector<Document> read_corpus_file(const std::string& path,
                                                     const SchemaConfig& schema);
void write_corpus(std::ostream& out, std::span<const Document> docs);

[[nodiscard]] std::string trim(std::string_view s);

}  // namespace erld

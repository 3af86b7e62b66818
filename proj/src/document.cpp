#include "erld/document.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "erld/detail/checksum.hpp"
#include "erld/error.hpp"

namespace erld {

using nlohmann::json;

std::string trim(std::string_view s) {
  constexpr std::string_view kSpace = " \t\r\n\f\v";
  const auto first = s.find_first_not_of(kSpace);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(kSpace);
  return std::string(s.substr(first, last - first + 1));
}

const ValueSet* Document::values(std::string_view attribute) const {
  const auto it = attrs.find(attribute);
  return it == attrs.end() ? nullptr : &it->second;
}

const std::string& Document::primary_type() const {
  static const std::string kEmpty;
  return types.empty() ? kEmpty : *types.begin();
}

void merge_into(Document& into, const Document& from) {
  into.types.insert(from.types.begin(), from.types.end());
  for (const auto& [name, values] : from.attrs) {
    into.attrs[name].insert(values.begin(), values.end());
  }
}

Document merge(std::span<const Document> docs) {
  if (docs.empty()) throw InputError("merge needs at least one document");
  std::vector<std::string_view> ids;
  ids.reserve(docs.size());
  Document out;
  for (const auto& d : docs) {
    merge_into(out, d);
    ids.push_back(d.id);
  }
  std::sort(ids.begin(), ids.end());
  std::string joined;
  for (auto id : ids) {
    joined.append(id);
    joined.push_back('\x1f');
  }
  // Source ids never contain '#', so this cannot alias one.
  out.id = "merged#" + detail::hex32(detail::crc32_of(joined));
  return out;
}

Document merge(const Document& a, const Document& b) {
  const Document pair[] = {a, b};
  return merge(pair);
}

namespace {

ValueSet parse_values(const json& v, const std::string& attr, std::size_t line) {
  ValueSet out;
  auto add = [&](const json& item) {
    if (!item.is_string()) {
      throw ParseError(line, "attribute '" + attr + "' values must be strings");
    }
    auto value = trim(item.get<std::string>());
    if (!value.empty()) out.insert(std::move(value));
  };
  if (v.is_array()) {
    for (const auto& item : v) add(item);
  } else if (!v.is_null()) {
    add(v);
  }
  return out;
}

}  // namespace

Document parse_record(const json& record, const SchemaConfig& schema, std::size_t line) {
  if (!record.is_object()) throw ParseError(line, "record must be a JSON object");
  if (!record.contains("type") || !record["type"].is_string()) {
    throw ParseError(line, "record has no string \"type\"");
  }
  Document doc;
  const auto type = record["type"].get<std::string>();
  if (!schema.knows_type(type)) throw ParseError(line, "unknown document type '" + type + "'");
  doc.types.insert(type);

  if (record.contains("attrs")) {
    const json& attrs = record["attrs"];
    if (!attrs.is_object()) throw ParseError(line, "\"attrs\" must be an object");
    for (const auto& [name, v] : attrs.items()) {
      auto values = parse_values(v, name, line);
      if (values.empty()) continue;
      if (values.size() > 1 && schema.resolve(type, name).is_unique()) {
        throw ParseError(line, "unique attribute '" + name + "' has more than one value");
      }
      doc.attrs.emplace(name, std::move(values));
    }
  }

  const auto& rule = schema.key_rule(type);
  const ValueSet* key = doc.values(rule.attribute);
  if (key == nullptr || key->empty()) {
    throw ParseError(line, "missing primary key attribute '" + rule.attribute + "' for type '" +
                               type + "'");
  }
  doc.id = rule.prefix + *key->begin();
  if (doc.id.find_first_of("# \t") != std::string::npos) {
    throw ParseError(line, "primary key '" + doc.id + "' contains '#' or whitespace");
  }
  return doc;
}

json to_record(const Document& doc) {
  json attrs = json::object();
  for (const auto& [name, values] : doc.attrs) {
    attrs[name] = std::vector<std::string>(values.begin(), values.end());
  }
  return json{{"type", doc.primary_type()}, {"attrs", attrs}};
}

std::vector<Document> parse_corpus(std::istream& in, const SchemaConfig& schema) {
  std::vector<Document> docs;
  std::unordered_map<std::string, std::size_t> first_line;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (trim(text).empty()) continue;
    json record;
    try {
      record = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(line, std::string("invalid JSON: ") + e.what());
    }
    auto doc = parse_record(record, schema, line);
    const auto [it, inserted] = first_line.emplace(doc.id, line);
    if (!inserted) {
      throw ParseError(0, "duplicate document id '" + doc.id + "' at lines " +
                              std::to_string(it->second) + " and " + std::to_string(line));
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<Document> read_corpus_file(const std::string& path, const SchemaConfig& schema) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open corpus file '" + path + "'");
  return parse_corpus(in, schema);
}

void write_corpus(std::ostream& out, std::span<const Document> docs) {
  for (const auto& d : docs) out << to_record(d).dump() << '\n';
}

}  // namespace erld

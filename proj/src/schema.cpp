#include "erld/schema.hpp"

#include <algorithm>
#include <set>
#include <utility>

#include "erld/detail/checksum.hpp"
#include "erld/error.hpp"

namespace erld {

using nlohmann::json;

std::string_view to_string(MatchRole role) noexcept {
  switch (role) {
    case MatchRole::soft: return "soft";
    case MatchRole::hard: return "hard";
    case MatchRole::unique: return "unique";
  }
  return "soft";
}

std::string_view to_string(RefRole role) noexcept {
  switch (role) {
    case RefRole::none: return "none";
    case RefRole::explicit_ref: return "referential-explicit";
    case RefRole::implicit_ref: return "referential-implicit";
  }
  return "none";
}

namespace {

AttributeSpec parse_attribute(const json& j) {
  if (!j.is_object() || !j.contains("name") || !j["name"].is_string()) {
    throw ConfigError("attribute spec needs a string \"name\"");
  }
  AttributeSpec spec;
  spec.name = j["name"].get<std::string>();
  if (j.contains("roles")) {
    for (const auto& r : j["roles"]) {
      const auto role = r.get<std::string>();
      std::optional<MatchRole> match;
      if (role == "soft") match = MatchRole::soft;
      else if (role == "hard") match = MatchRole::hard;
      else if (role == "unique") match = MatchRole::unique;

      if (match) {
        if (spec.match_role) {
          throw ConfigError("attribute '" + spec.name + "' has more than one of soft/hard/unique");
        }
        spec.match_role = match;
      } else if (role == "referential-explicit" || role == "referential-implicit") {
        if (spec.ref_role != RefRole::none) {
          throw ConfigError("attribute '" + spec.name + "' has more than one referential role");
        }
        spec.ref_role = role == "referential-explicit" ? RefRole::explicit_ref : RefRole::implicit_ref;
      } else {
        throw ConfigError("attribute '" + spec.name + "': unknown role '" + role + "'");
      }
    }
  }
  if (!spec.match_role && spec.ref_role == RefRole::none) spec.match_role = MatchRole::soft;
  if (j.contains("domain") && !j["domain"].is_null()) spec.domain = j["domain"].get<std::string>();
  if (j.contains("metric")) spec.metric = j["metric"].get<std::string>();
  if (j.contains("threshold")) spec.threshold = j["threshold"].get<double>();
  return spec;
}

json attribute_to_json(const AttributeSpec& spec) {
  json roles = json::array();
  if (spec.match_role) roles.push_back(std::string(to_string(*spec.match_role)));
  if (spec.ref_role != RefRole::none) roles.push_back(std::string(to_string(spec.ref_role)));
  json j{{"name", spec.name}, {"roles", roles}};
  if (spec.domain) j["domain"] = *spec.domain;
  if (spec.metric) j["metric"] = *spec.metric;
  if (spec.threshold) j["threshold"] = *spec.threshold;
  return j;
}

}  // namespace

SchemaConfig::SchemaConfig(std::vector<std::string> document_types,
                           std::vector<AttributeSpec> attributes,
                           std::vector<PrimaryKeyRule> key_rules, std::string delimiters)
    : types_(std::move(document_types)),
      attributes_(std::move(attributes)),
      key_rules_(std::move(key_rules)),
      delimiters_(std::move(delimiters)) {
  validate();
}

SchemaConfig SchemaConfig::from_json(const json& input) {
  const json& j = input.contains("schema") ? input["schema"] : input;
  if (!j.is_object()) throw ConfigError("schema must be a JSON object");
  try {
    std::vector<std::string> types;
    for (const auto& t : j.value("document_types", json::array())) types.push_back(t.get<std::string>());

    std::vector<AttributeSpec> attrs;
    for (const auto& a : j.value("attributes", json::array())) attrs.push_back(parse_attribute(a));

    std::vector<PrimaryKeyRule> rules;
    for (const auto& r : j.value("primary_keys", json::array())) {
      PrimaryKeyRule rule;
      rule.doc_type = r.at("type").get<std::string>();
      rule.attribute = r.at("attribute").get<std::string>();
      rule.prefix = r.value("prefix", rule.doc_type);
      rules.push_back(std::move(rule));
    }
    std::string delimiters = j.value("delimiters", std::string(kDefaultDelimiters));
    return SchemaConfig(std::move(types), std::move(attrs), std::move(rules), std::move(delimiters));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed schema: ") + e.what());
  }
}

json SchemaConfig::to_json() const {
  json attrs = json::array();
  for (const auto& a : attributes_) attrs.push_back(attribute_to_json(a));
  json keys = json::array();
  for (const auto& r : key_rules_) {
    keys.push_back({{"type", r.doc_type}, {"attribute", r.attribute}, {"prefix", r.prefix}});
  }
  return json{{"document_types", types_},
              {"attributes", attrs},
              {"primary_keys", keys},
              {"delimiters", delimiters_}};
}

void SchemaConfig::validate() const {
  std::set<std::string> seen_types;
  for (const auto& t : types_) {
    if (t.empty()) throw ConfigError("empty document type tag");
    if (!seen_types.insert(t).second) throw ConfigError("duplicate document type '" + t + "'");
  }
  std::set<std::pair<std::string, std::string>> seen_attrs;
  for (const auto& a : attributes_) {
    if (a.name.empty()) throw ConfigError("attribute with empty name");
    if (a.domain && !seen_types.contains(*a.domain)) {
      throw ConfigError("attribute '" + a.name + "' scoped to unknown type '" + *a.domain + "'");
    }
    if (!seen_attrs.emplace(a.domain.value_or(""), a.name).second) {
      throw ConfigError("attribute '" + a.name + "' declared twice for the same document type");
    }
  }
  std::set<std::string> keyed;
  for (const auto& r : key_rules_) {
    if (!seen_types.contains(r.doc_type)) {
      throw ConfigError("primary key rule for unknown type '" + r.doc_type + "'");
    }
    if (!keyed.insert(r.doc_type).second) {
      throw ConfigError("two primary key rules for type '" + r.doc_type + "'");
    }
    const AttributeSpec* spec = find(r.doc_type, r.attribute);
    if (spec == nullptr || !spec->is_unique()) {
      throw ConfigError("primary key of '" + r.doc_type + "' must be a unique attribute, got '" +
                        r.attribute + "'");
    }
  }
  for (const auto& t : types_) {
    if (!keyed.contains(t)) throw ConfigError("document type '" + t + "' has no primary key rule");
  }
}

bool SchemaConfig::knows_type(std::string_view type) const {
  return std::find(types_.begin(), types_.end(), type) != types_.end();
}

const PrimaryKeyRule& SchemaConfig::key_rule(std::string_view type) const {
  for (const auto& r : key_rules_) {
    if (r.doc_type == type) return r;
  }
  throw ConfigError("no primary key rule for type '" + std::string(type) + "'");
}

const AttributeSpec* SchemaConfig::find(std::string_view type, std::string_view name) const {
  const AttributeSpec* unscoped = nullptr;
  for (const auto& a : attributes_) {
    if (a.name != name) continue;
    if (a.domain) {
      if (*a.domain == type) return &a;
    } else if (unscoped == nullptr) {
      unscoped = &a;
    }
  }
  return unscoped;
}

const AttributeSpec* SchemaConfig::find_any(std::string_view name) const {
  for (const auto& a : attributes_) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

const AttributeSpec& SchemaConfig::resolve(std::string_view type, std::string_view name) const {
  static const AttributeSpec kSoftDefault = [] {
    AttributeSpec s;
    s.match_role = MatchRole::soft;
    return s;
  }();
  const AttributeSpec* spec = find(type, name);
  return spec != nullptr ? *spec : kSoftDefault;
}

std::string SchemaConfig::fingerprint() const {
  return detail::hex32(detail::crc32_of(to_json().dump()));
}

}  // namespace erld

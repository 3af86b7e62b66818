#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace erld {

/// How values of an attribute are compared. Unique implies hard.
enum class MatchRole { soft, hard, unique };

/// Whether an attribute carries references to other documents' keys.
enum class RefRole { none, explicit_ref, implicit_ref };

struct AttributeSpec {
  std::string name;
  std::optional<MatchRole> match_role;
  RefRole ref_role = RefRole::none;
  /// Document type this spec applies to; unset means every type.
  std::optional<std::string> domain;
  /// Similarity settings for soft attributes ("jaro_winkler", "jaccard", ...).
  std::optional<std::string> metric;
  std::optional<double> threshold;

  [[nodiscard]] bool is_referential() const noexcept { return ref_role != RefRole::none; }
  [[nodiscard]] bool is_exact() const noexcept {
    return match_role == MatchRole::hard || match_role == MatchRole::unique;
  }
  [[nodiscard]] bool is_soft() const noexcept { return !is_exact(); }
  [[nodiscard]] bool is_unique() const noexcept { return match_role == MatchRole::unique; }

  friend bool operator==(const AttributeSpec&, const AttributeSpec&) = default;
};

/// Primary key of a document type: `prefix` + value of `attribute`.
struct PrimaryKeyRule {
  std::string doc_type;
  std::string attribute;
  std::string prefix;

  friend bool operator==(const PrimaryKeyRule&, const PrimaryKeyRule&) = default;
};

inline constexpr std::string_view kDefaultDelimiters = ".,:;()\"'";

/// Attribute taxonomy, document types and key construction for one corpus.
/// Immutable once built.
class SchemaConfig {
 public:
  SchemaConfig() = default;
  SchemaConfig(std::vector<std::string> document_types, std::vector<AttributeSpec> attributes,
               std::vector<PrimaryKeyRule> key_rules,
               std::string delimiters = std::string(kDefaultDelimiters));

  /// Accepts either a bare schema object or an object with a "schema" member.
  static SchemaConfig from_json(const nlohmann::json& j);
  [[nodiscard]] nlohmann::json to_json() const;

  [[nodiscard]] bool knows_type(std::string_view type) const;
  [[nodiscard]] const PrimaryKeyRule& key_rule(std::string_view type) const;

  /// Spec for `name` within `type`: a domain-scoped spec wins over an unscoped
  /// one. Returns nullptr for attributes the schema does not declare.
  [[nodiscard]] const AttributeSpec* find(std::string_view type, std::string_view name) const;
  /// First declared spec with this name in any domain.
  [[nodiscard]] const AttributeSpec* find_any(std::string_view name) const;
  /// Like find(), but undeclared attributes resolve to a default soft spec.
  [[nodiscard]] const AttributeSpec& resolve(std::string_view type, std::string_view name) const;

  [[nodiscard]] const std::vector<std::string>& document_types() const noexcept { return types_; }
  [[nodiscard]] const std::vector<AttributeSpec>& attributes() const noexcept { return attributes_; }
  [[nodiscard]] const std::vector<PrimaryKeyRule>& key_rules() const noexcept { return key_rules_; }
  [[nodiscard]] const std::string& delimiters() const noexcept { return delimiters_; }

  /// Hex digest of the canonical JSON form; persisted state is tied to it.
  [[nodiscard]] std::string fingerprint() const;

  friend bool operator==(const SchemaConfig&, const SchemaConfig&) = default;

 private:
  void validate() const;

  std::vector<std::string> types_;
  std::vector<AttributeSpec> attributes_;
  std::vector<PrimaryKeyRule> key_rules_;
  std::string delimiters_ = std::string(kDefaultDelimiters);
};

[[nodiscard]] std::string_view to_string(MatchRole role) noexcept;
[[nodiscard]] std::string_view to_string(RefRole role) noexcept;

}  // namespace erld

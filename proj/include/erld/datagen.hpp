#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "erld/document.hpp"
#include "erld/schema.hpp"
#include "json.hpp"

namespace erld {

/// The five residents domains, in generation order.
inline constexpr std::array<std::string_view, 5> kResidentDomains = {"VOT", "PAN", "DL", "BAN", "PHN"};

struct GeneratorConfig {
  std::size_t num_seed_entities = 1000;
  /// Probability of creating a document in each domain, indexed like kResidentDomains.
  std::array<double, 5> doc_creation_prob = {0.55, 0.55, 0.55, 0.55, 0.55};
  /// Per soft value: skip one or two characters of a word.
  double typo_rate = 0.05;
  double name_swap_prob = 0.02;
  double middle_name_drop_prob = 0.2;
  /// Per hard value (dob, phone, email) of a document.
  double attribute_drop_prob = 0.3;
  /// Chance that a seed entity gets a relative (shared surname and address).
  double related_entity_prob = 0.3;
  /// Chance that each spanning-tree reference of an ordinary entity exists;
  /// a quarter of it is the chance of each extra reference.
  double reference_density = 0.5;
  /// Seed entities whose documents share no hard values but are fully linked.
  double link_only_fraction = 0.1;
  std::uint64_t rng_seed = 42;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
  [[nodiscard]] static GeneratorConfig from_json(const nlohmann::json& j);
  [[nodiscard]] nlohmann::json to_json() const;
};

/// Document id -> entity label.
using GoldStandard = std::map<std::string, std::string, std::less<>>;

struct GeneratedCorpus {
  std::vector<Document> documents;
  GoldStandard gold;
  /// (referrer, referenced) document ids.
  std::vector<std::pair<std::string, std::string>> references;
  std::size_t entities = 0;
  std::size_t link_only_entities = 0;
};

[[nodiscard]] GeneratedCorpus generate(const GeneratorConfig& cfg);

/// Schema of generated corpora: keyed per domain, name/address soft,
/// dob/phone/email hard, proof_id explicit and details implicit references.
[[nodiscard]] SchemaConfig residents_schema();
/// Rule set for generated corpora, optionally with the traversal rule.
[[nodiscard]] nlohmann::json residents_rules(bool with_traversal);

void write_gold(std::ostream& out, const GoldStandard& gold);
/// Reads "doc_id<TAB>label" lines; blank lines and lines starting with '#' are skipped.
[[nodiscard]] GoldStandard read_gold(std::istream& in);

}  // namespace erld

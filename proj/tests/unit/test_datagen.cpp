#include <sstream>

#include "doctest.h"
#include "erld/datagen.hpp"
#include "erld/error.hpp"
#include "erld/index.hpp"
#include "erld/traversal.hpp"
#include "test_support.hpp"

using namespace erld;

namespace {

GeneratorConfig with_seeds(std::size_t n, std::uint64_t seed = 42) {
  GeneratorConfig g;
  g.num_seed_entities = n;
  g.rng_seed = seed;
  return g;
}

std::map<std::string, std::vector<const Document*>> by_label(const GeneratedCorpus& c) {
  std::map<std::string, std::vector<const Document*>> out;
  for (const auto& d : c.documents) out[c.gold.at(d.id)].push_back(&d);
  return out;
}

std::string domain_of(const Document& d) { return *d.types.begin(); }

}  // namespace

TEST_CASE("forced configuration: one document per domain") {
  auto g = with_seeds(1);
  g.doc_creation_prob.fill(1.0);
  g.related_entity_prob = 0.0;
  g.link_only_fraction = 0.0;
  g.attribute_drop_prob = 0.0;
  g.reference_density = 1.0;
  auto c = generate(g);
  REQUIRE(c.documents.size() == 5);
  CHECK(c.entities == 1);
  std::set<std::string> domains;
  for (const auto& d : c.documents) {
    domains.insert(domain_of(d));
    CHECK(d.values("name") != nullptr);
    CHECK(d.values("address") != nullptr);
    CHECK(d.values("dob") != nullptr);
    CHECK(d.values("email") != nullptr);
  }
  CHECK(domains == std::set<std::string>{"BAN", "DL", "PAN", "PHN", "VOT"});
  // Spanning tree at density 1.
  CHECK(c.references.size() >= 4);
}

TEST_CASE("generation is deterministic in the seed") {
  auto a = generate(with_seeds(40, 5));
  auto b = generate(with_seeds(40, 5));
  auto c = generate(with_seeds(40, 6));
  CHECK(a.documents == b.documents);
  CHECK(a.gold == b.gold);
  CHECK(a.references == b.references);
  CHECK_FALSE(a.documents == c.documents);
}

TEST_CASE("documents parse under the residents schema") {
  auto c = generate(with_seeds(60));
  auto schema = residents_schema();
  std::ostringstream out;
  write_corpus(out, c.documents);
  std::istringstream in(out.str());
  auto back = parse_corpus(in, schema);
  CHECK(back == c.documents);
}

TEST_CASE("each entity has one to five documents, at most one per domain") {
  auto c = generate(with_seeds(300));
  CHECK(c.gold.size() == c.documents.size());
  for (const auto& [label, docs] : by_label(c)) {
    CHECK(docs.size() >= 1);
    CHECK(docs.size() <= 5);
    std::set<std::string> domains;
    for (const auto* d : docs) CHECK(domains.insert(domain_of(*d)).second);
  }
  std::set<std::string> ids;
  for (const auto& d : c.documents) CHECK(ids.insert(d.id).second);
}

TEST_CASE("references stay within an entity and are visible in the text") {
  auto c = generate(with_seeds(200));
  REQUIRE_FALSE(c.references.empty());
  std::map<std::string, const Document*> index;
  for (const auto& d : c.documents) index[d.id] = &d;
  for (const auto& [from, to] : c.references) {
    CHECK(c.gold.at(from) == c.gold.at(to));
    const Document& d = *index.at(from);
    bool found = false;
    if (const auto* p = d.values("proof_id")) found = p->contains(to);
    if (const auto* t = d.values("details")) {
      for (const auto& text : *t) found = found || text.find(to) != std::string::npos;
    }
    CHECK(found);
  }
}

TEST_CASE("link-only entities share no hard values across their documents") {
  auto g = with_seeds(300);
  g.link_only_fraction = 0.3;
  auto c = generate(g);
  CHECK(c.link_only_entities > 50);
  std::size_t linked = 0;
  for (const auto& [label, docs] : by_label(c)) {
    if (docs.size() < 2) continue;
    bool shares = false;
    for (std::string attr : {"dob", "email"}) {
      std::size_t holders = 0;
      for (const auto* d : docs) holders += d->values(attr) != nullptr;
      shares = shares || holders > 1;
    }
    linked += !shares;
  }
  CHECK(linked > 0);
}

TEST_CASE("corpus size grows linearly with the seed count") {
  const double small = static_cast<double>(generate(with_seeds(500)).documents.size());
  const double large = static_cast<double>(generate(with_seeds(2000)).documents.size());
  CHECK(large / small == doctest::Approx(4.0).epsilon(0.1));
  // Roughly 2.75 docs per entity, 1.3 entities per seed.
  CHECK(small / 500.0 > 3.0);
  CHECK(small / 500.0 < 4.2);
}

TEST_CASE("traversal sets mostly stay within the gold entity") {
  auto c = generate(with_seeds(300));
  auto schema = residents_schema();
  auto idx = build_indexes(c.documents, schema);
  std::size_t members = 0;
  std::size_t same = 0;
  std::size_t nonempty = 0;
  for (const auto& d : c.documents) {
    auto ts = traversal_set(d, {}, idx.store, idx.inverted, schema);
    nonempty += !ts.members.empty();
    for (const auto& m : ts.members) {
      ++members;
      same += c.gold.at(m) == c.gold.at(d.id);
    }
  }
  CHECK(nonempty > c.documents.size() / 5);
  REQUIRE(members > 0);
  CHECK(static_cast<double>(same) / static_cast<double>(members) >= 0.95);
}

TEST_CASE("config validation and json") {
  auto g = GeneratorConfig::from_json(test::load_json_file(test::data_path("residents/generator.json")));
  CHECK(g.num_seed_entities >= 1);
  auto back = GeneratorConfig::from_json(g.to_json());
  CHECK(back.to_json() == g.to_json());
  auto j = nlohmann::json::parse(R"({"doc_creation_prob": {"PHN": 0.1}, "typo_rate": 0.2})");
  auto h = GeneratorConfig::from_json(j);
  CHECK(h.doc_creation_prob[4] == 0.1);
  CHECK(h.doc_creation_prob[0] == 0.55);
  CHECK(h.typo_rate == 0.2);
  CHECK_THROWS_AS((void)GeneratorConfig::from_json(nlohmann::json::parse(R"({"typo_rate": 1.5})")), ConfigError);
  CHECK_THROWS_AS((void)GeneratorConfig::from_json(nlohmann::json::parse(R"({"num_seed_entities": 0})")), ConfigError);
  CHECK_THROWS_AS((void)GeneratorConfig::from_json(nlohmann::json::parse(R"({"typo_rate": "x"})")), ConfigError);
}

TEST_CASE("gold standard file round trip") {
  auto c = generate(with_seeds(20));
  std::ostringstream out;
  write_gold(out, c.gold);
  std::istringstream in("# comment\n\n" + out.str());
  CHECK(read_gold(in) == c.gold);
  std::istringstream bad("onlyone\n");
  CHECK_THROWS((void)read_gold(bad));
}

TEST_CASE("residents schema and rules") {
  auto schema = residents_schema();
  auto again = SchemaConfig::from_json(schema.to_json());
  CHECK(again.to_json() == schema.to_json());
  CHECK(residents_rules(true).dump().find("traversal") != std::string::npos);
  CHECK(residents_rules(false).dump().find("traversal") == std::string::npos);
  CHECK(test::load_json_file(test::data_path("residents/rules_with_traversal.json")) == residents_rules(true));
  CHECK(test::load_json_file(test::data_path("residents/rules_without_traversal.json")) == residents_rules(false));
}

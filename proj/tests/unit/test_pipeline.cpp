#include "doctest.h"
#include "erld/error.hpp"
#include "erld/eval.hpp"
#include "erld/pipeline.hpp"
#include "scenarios.hpp"
#include "test_support.hpp"

using namespace erld;

namespace {

const std::vector<IdSet> kFixtureEntities = {{"BAN41", "DL31", "PAN11", "VOT21"},
                                             {"BAN91", "PAN83", "VOT103"},
                                             {"DL115"},
                                             {"DL77", "PAN52", "VOT62"}};

GeneratedCorpus small_corpus(std::size_t seeds, std::uint64_t rng_seed) {
  GeneratorConfig g;
  g.num_seed_entities = seeds;
  g.rng_seed = rng_seed;
  return generate(g);
}

std::vector<IdSet> live_partition(const ResolutionState& st) { return test::member_sets(st.all_entities()); }

}  // namespace

TEST_CASE("fixture resolves to the four expected entities") {
  auto res = resolve_batch(test::fixture_corpus(), test::fixture_config());
  CHECK(test::member_sets(res.entities) == kFixtureEntities);
  for (const auto& e : res.entities) CHECK(e.id == "E:" + *e.members.begin());
  CHECK(res.stats.documents == 11);
  CHECK_NOTHROW(res.state.check_invariants());
  CHECK(res.state.doc_entity.at("VOT62") == "E:DL77");
  CHECK(res.state.traversal.at("DL77") == IdSet{"VOT62"});
}

TEST_CASE("fixture result does not depend on document order") {
  auto docs = test::fixture_corpus();
  std::reverse(docs.begin(), docs.end());
  CHECK(test::member_sets(resolve_batch(docs, test::fixture_config()).entities) == kFixtureEntities);
}

TEST_CASE("empty corpus gives an empty, valid state") {
  auto res = resolve_batch({}, test::fixture_config());
  CHECK(res.entities.empty());
  CHECK_NOTHROW(res.state.check_invariants());
}

TEST_CASE("without references and traversal rules only attribute matches remain") {
  auto docs = test::fixture_corpus();
  for (auto& d : docs) {
    d.attrs.erase("proof_id");
    d.attrs.erase("details");
  }
  auto res = resolve_batch(docs, test::fixture_config());
  // d1, d2 and d6 only matched through references.
  for (const auto& e : res.entities) {
    if (e.members.contains("PAN11")) CHECK(e.members == IdSet{"PAN11"});
    if (e.members.contains("VOT62")) CHECK(e.members == IdSet{"VOT62"});
  }
  CHECK(res.state.traversal.empty());
}

TEST_CASE("batch recall tracks the all-pairs baseline at equal precision") {
  auto corpus = small_corpus(110, 7);
  auto cfg = test::residents_config(true);
  auto erld_m = pairwise_metrics(partition_of(resolve_batch(corpus.documents, cfg).entities), corpus.gold);
  auto base_m = pairwise_metrics(partition_of(allpairs_baseline(corpus.documents, cfg).entities), corpus.gold);
  CHECK(erld_m.recall >= base_m.recall - 0.03);
  CHECK(erld_m.precision >= base_m.precision - 1e-9);
}

TEST_CASE("fresh evaluations equal the counter the cache saw") {
  auto corpus = small_corpus(60, 8);
  auto res = resolve_batch(corpus.documents, test::residents_config(true));
  CHECK(res.stats.fresh_evaluations == res.state.cache.size());
  CHECK(res.stats.fresh_evaluations <= res.stats.bucket_pairs * 2);
}

TEST_CASE("held-out bridge document joins both halves") {
  auto cfg = test::fixture_config();
  auto docs = test::fixture_corpus();
  auto first = resolve_batch(test::without(docs, "DL31"), cfg);
  auto sets = test::member_sets(first.entities);
  CHECK(std::find(sets.begin(), sets.end(), IdSet{"PAN11", "VOT21"}) != sets.end());
  CHECK(std::find(sets.begin(), sets.end(), IdSet{"BAN41"}) != sets.end());

  auto st = std::move(first.state);
  auto inc = resolve_incremental({test::doc_by_id(docs, "DL31")}, st, cfg);
  CHECK(live_partition(st) == kFixtureEntities);
  CHECK(inc.touched_entities == IdSet{"E:BAN41", "E:PAN11"});
  CHECK(inc.retired == std::vector<std::string>{"E:PAN11"});
  CHECK(st.resolve_entity_id("E:PAN11") == "E:BAN41");
  CHECK(st.doc_entity.at("VOT21") == "E:BAN41");
  CHECK_NOTHROW(st.check_invariants());
}

TEST_CASE("incremental with no documents changes nothing") {
  auto cfg = test::fixture_config();
  auto res = resolve_batch(test::fixture_corpus(), cfg);
  auto before = res.state;
  auto inc = resolve_incremental({}, res.state, cfg);
  CHECK(inc.updated.empty());
  CHECK(inc.stats.entities_read == 0);
  CHECK(res.state == before);
}

TEST_CASE("incremental rejects id clashes and stale configuration") {
  auto cfg = test::fixture_config();
  auto docs = test::fixture_corpus();
  auto res = resolve_batch(test::without(docs, "DL31"), cfg);
  CHECK_THROWS_AS((void)resolve_incremental({test::doc_by_id(docs, "PAN11")}, res.state, cfg), InputError);
  const auto& d3 = test::doc_by_id(docs, "DL31");
  CHECK_THROWS_AS((void)resolve_incremental({d3, d3}, res.state, cfg), InputError);

  auto other = cfg;
  other.lsh = LshParams::generate(3, 6, 1);
  try {
    (void)resolve_incremental({d3}, res.state, other);
    FAIL("expected a stale-state error");
  } catch (const StateError& e) {
    CHECK(e.reason() == StateError::Reason::stale);
  }
  other = cfg;
  other.match_spec = test::load_json_file(test::data_path("residents/rules_without_traversal.json"));
  CHECK_THROWS_AS((void)resolve_incremental({d3}, res.state, other), StateError);
}

TEST_CASE("95/5 split: incremental quality close to batch") {
  auto corpus = small_corpus(180, 9);
  auto cfg = test::residents_config(true);
  auto rng = test::rng_for(61);
  std::vector<Document> old_docs;
  std::vector<Document> new_docs;
  for (const auto& d : corpus.documents) (test::coin(rng, 0.05) ? new_docs : old_docs).push_back(d);
  REQUIRE_FALSE(new_docs.empty());

  auto full = pairwise_metrics(partition_of(resolve_batch(corpus.documents, cfg).entities), corpus.gold);
  auto base = resolve_batch(old_docs, cfg);
  auto st = std::move(base.state);
  auto inc = resolve_incremental(new_docs, st, cfg);
  CHECK_NOTHROW(st.check_invariants());
  auto split = pairwise_metrics(partition_of(st.all_entities()), corpus.gold);
  CHECK(std::abs(split.f1 - full.f1) <= 0.02);
  CHECK(inc.stats.entities_read <= st.entities.size() + inc.retired.size());
  CHECK(inc.stats.entities_read < base.entities.size() / 2);
}

TEST_CASE("entities outside the touched set are left alone") {
  auto corpus = small_corpus(120, 10);
  auto cfg = test::residents_config(true);
  std::vector<Document> old_docs(corpus.documents.begin(), corpus.documents.end() - 6);
  std::vector<Document> new_docs(corpus.documents.end() - 6, corpus.documents.end());
  auto base = resolve_batch(old_docs, cfg);
  auto before = base.state.entities;
  auto st = std::move(base.state);
  auto inc = resolve_incremental(new_docs, st, cfg);

  // Only touched entities were read.
  CHECK(st.entity_reads() == inc.touched_entities);
  CHECK(inc.stats.entities_read == inc.touched_entities.size());
  std::size_t untouched = 0;
  for (const auto& [id, e] : before) {
    if (inc.touched_entities.contains(id)) continue;
    ++untouched;
    REQUIRE(st.entities.contains(id));
    CHECK(st.entities.at(id) == e);
  }
  CHECK(untouched > 0);
  for (const auto& r : inc.retired) CHECK(inc.touched_entities.contains(r));
}

TEST_CASE("warm cache rerun evaluates nothing new") {
  auto corpus = small_corpus(50, 11);
  auto cfg = test::residents_config(true);
  auto first = resolve_batch(corpus.documents, cfg);
  CHECK(first.stats.fresh_evaluations <= distinct_cobucketed_pairs(first.state.lsh));

  auto replay = test::replay_buckets(first.state, cfg);
  CHECK(replay.fresh == 0);
  CHECK(replay.hits > 0);
}

TEST_CASE("config json helpers round trip") {
  TraversalConfig t{2, 7};
  CHECK(traversal_config_from_json(to_json(t)).max_dst_ust_steps == 2);
  CHECK(traversal_config_from_json(to_json(t)).ust_fanout_threshold == 7);
  auto p = LshParams::generate(2, 5, 3);
  CHECK(lsh_params_from_json(to_json(p)) == p);
  auto cfg = test::fixture_config();
  auto other = cfg;
  CHECK(cfg.match_fingerprint() == other.match_fingerprint());
  other.match_spec = residents_rules(false);
  CHECK(cfg.match_fingerprint() != other.match_fingerprint());
}

TEST_CASE("entity output lines") {
  auto res = resolve_batch(test::fixture_corpus(), test::fixture_config());
  std::ostringstream out;
  write_entities(out, res.entities);
  std::istringstream in(out.str());
  CHECK(test::sorted(read_entity_partition(in)) == kFixtureEntities);
  auto j = entity_to_json(res.entities.front());
  CHECK(j.contains("entity_id"));
  CHECK(j.at("members").is_array());
}

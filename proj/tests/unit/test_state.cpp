#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "doctest.h"
#include "erld/error.hpp"
#include "erld/eval.hpp"
#include "erld/pipeline.hpp"
#include "test_support.hpp"

using namespace erld;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("erld_state_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

StateError::Reason load_failure(const fs::path& dir) {
  try {
    (void)load_state(dir);
  } catch (const StateError& e) {
    return e.reason();
  }
  FAIL("load_state accepted a damaged state");
  return StateError::Reason::io;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_bytes(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << s;
}

ResolutionState generated_state(std::size_t seeds) {
  GeneratorConfig g;
  g.num_seed_entities = seeds;
  return resolve_batch(generate(g).documents, test::residents_config(true)).state;
}

}  // namespace

TEST_CASE("save then load gives an identical state") {
  TempDir dir("roundtrip");
  auto st = resolve_batch(test::fixture_corpus(), test::fixture_config()).state;
  save_state(st, dir.path);
  CHECK(fs::exists(dir.path / "manifest.json"));
  auto back = load_state(dir.path);
  CHECK(back == st);
  CHECK(back.all_entities() == st.all_entities());

  auto manifest = test::load_json_file((dir.path / "manifest.json").string());
  CHECK(manifest.at("version") == ResolutionState::kFormatVersion);
  CHECK(manifest.at("files").size() == 9);
}

TEST_CASE("round trip on a generated corpus after an incremental run") {
  TempDir dir("generated");
  GeneratorConfig g;
  g.num_seed_entities = 80;
  auto corpus = generate(g);
  auto cfg = test::residents_config(true);
  std::vector<Document> head(corpus.documents.begin(), corpus.documents.end() - 10);
  std::vector<Document> tail(corpus.documents.end() - 10, corpus.documents.end());
  auto st = resolve_batch(head, cfg).state;
  (void)resolve_incremental(tail, st, cfg);
  save_state(st, dir.path);
  CHECK(load_state(dir.path) == st);
}

TEST_CASE("saving over an existing state replaces it") {
  TempDir dir("overwrite");
  auto a = resolve_batch(test::without(test::fixture_corpus(), "DL31"), test::fixture_config()).state;
  auto b = resolve_batch(test::fixture_corpus(), test::fixture_config()).state;
  save_state(a, dir.path);
  save_state(b, dir.path);
  CHECK(load_state(dir.path) == b);
}

TEST_CASE("damaged files are rejected") {
  TempDir dir("damage");
  auto st = generated_state(30);
  save_state(st, dir.path);
  for (const auto* name : {"documents.bin", "lsh.bin", "entities.bin", "pair_cache.bin", "traversal.bin"}) {
    CAPTURE(name);
    const auto p = dir.path / name;
    const auto good = read_bytes(p);
    REQUIRE(good.size() > 16);

    write_bytes(p, good.substr(0, good.size() / 2));
    CHECK(load_failure(dir.path) == StateError::Reason::corruption);

    auto flipped = good;
    flipped[good.size() - 3] = static_cast<char>(flipped[good.size() - 3] ^ 0x40);
    write_bytes(p, flipped);
    CHECK(load_failure(dir.path) == StateError::Reason::corruption);

    write_bytes(p, good);
  }
  CHECK_NOTHROW((void)load_state(dir.path));
  fs::remove(dir.path / "tokens.bin");
  CHECK(load_failure(dir.path) == StateError::Reason::corruption);
}

TEST_CASE("format version mismatch is reported as such") {
  TempDir dir("version");
  save_state(resolve_batch(test::fixture_corpus(), test::fixture_config()).state, dir.path);
  auto manifest = test::load_json_file((dir.path / "manifest.json").string());
  manifest["version"] = ResolutionState::kFormatVersion + 1;
  std::ofstream(dir.path / "manifest.json") << manifest.dump(2);
  CHECK(load_failure(dir.path) == StateError::Reason::version);
}

TEST_CASE("missing state directory") {
  TempDir dir("missing");
  CHECK_THROWS_AS((void)load_state(dir.path), StateError);
}

TEST_CASE("loaded state refuses a different configuration") {
  TempDir dir("stale");
  auto cfg = test::fixture_config();
  save_state(resolve_batch(test::without(test::fixture_corpus(), "DL31"), cfg).state, dir.path);
  auto st = load_state(dir.path);
  CHECK_NOTHROW(st.check_invariants());
  auto d3 = test::doc_by_id(test::fixture_corpus(), "DL31");
  auto other = cfg;
  other.schema = residents_schema();
  try {
    (void)resolve_incremental({d3}, st, other);
    FAIL("expected stale");
  } catch (const StateError& e) {
    CHECK(e.reason() == StateError::Reason::stale);
  }
}

TEST_CASE("only one lock per state directory") {
  TempDir dir("lock");
  {
    StateLock first(dir.path);
    try {
      StateLock second(dir.path);
      FAIL("second lock succeeded");
    } catch (const StateError& e) {
      CHECK(e.reason() == StateError::Reason::locked);
    }
  }
  CHECK_NOTHROW(StateLock{dir.path});
}

TEST_CASE("continuing from disk equals continuing in memory") {
  TempDir dir("continue");
  auto cfg = test::fixture_config();
  auto docs = test::fixture_corpus();
  auto mem = resolve_batch(test::without(docs, "DL31"), cfg).state;
  save_state(mem, dir.path);
  auto disk = load_state(dir.path);
  auto a = resolve_incremental({test::doc_by_id(docs, "DL31")}, mem, cfg);
  auto b = resolve_incremental({test::doc_by_id(docs, "DL31")}, disk, cfg);
  CHECK(a.updated == b.updated);
  CHECK(a.retired == b.retired);
  CHECK(mem == disk);
}

TEST_CASE("invariant checks catch hand-made inconsistencies") {
  auto st = resolve_batch(test::fixture_corpus(), test::fixture_config()).state;
  auto broken = st;
  broken.doc_entity.erase("DL77");
  CHECK_THROWS_AS(broken.check_invariants(), StateError);
  broken = st;
  broken.tombstones.emplace("E:DL77", "E:nowhere");
  CHECK_THROWS_AS(broken.check_invariants(), StateError);
  broken = st;
  broken.entities.at("E:DL77").members.insert("PAN11");
  CHECK_THROWS_AS(broken.check_invariants(), StateError);
}

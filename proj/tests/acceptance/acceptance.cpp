// Acceptance run: one line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include <unistd.h>

#include "erld/error.hpp"
#include "erld/eval.hpp"
#include "erld/pipeline.hpp"
#include "erld/rswoosh.hpp"
#include "erld/simd/minhash_kernels.hpp"
#include "erld/traversal.hpp"
#include "oracles.hpp"
#include "scenarios.hpp"
#include "test_support.hpp"

using namespace erld;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::string fmt_ids(const IdSet& s) {
  std::string out = "{";
  for (const auto& id : s) out += (out.size() > 1 ? "," : "") + id;
  return out + "}";
}

const std::vector<IdSet> kFixtureEntities = {{"BAN41", "DL31", "PAN11", "VOT21"},
                                             {"BAN91", "PAN83", "VOT103"},
                                             {"DL115"},
                                             {"DL77", "PAN52", "VOT62"}};

Outcome canonical_fixture() {
  Outcome o;
  auto docs = test::fixture_corpus();
  auto cfg = test::fixture_config();
  const auto t = Clock::now();
  auto res = resolve_batch(docs, cfg);
  const double s = since(t);
  o.require(test::member_sets(res.entities) == kFixtureEntities, "entity member sets");
  o.require(s < 1.0, "under 1 s");
  o.note(std::to_string(res.entities.size()) + " entities in " + fmt("%.4f s", s));
  return o;
}

Outcome traversal_facts() {
  Outcome o;
  auto schema = test::fixture_schema();
  auto docs = test::fixture_corpus();
  auto idx = build_indexes(docs, schema);
  auto dst = [&](const char* id) { return downstream_step(test::doc_by_id(docs, id), idx.store, schema); };
  auto ust = [&](const char* id) { return upstream_step(test::doc_by_id(docs, id), idx.inverted, schema, 10); };
  o.require(dst("PAN11") == IdSet{"VOT21"}, "DST(d1)={d2}");
  o.require(dst("DL31") == IdSet{"VOT21"}, "DST(d3)={d2}");
  o.require(ust("VOT21") == IdSet{"DL31", "PAN11"}, "UST(d2)={d1,d3}");
  o.require(ust("DL77") == IdSet{"VOT62"}, "UST(d7)={d6}");
  o.require(ust("BAN91") == IdSet{"DL115"}, "UST(d9)={d11}");

  // Chain r1 -> r2 -> r3 -> {r4, r5}.
  SchemaConfig cs = schema;
  const std::vector<std::vector<std::string>> refs = {{"PAN2"}, {"PAN3"}, {"PAN4", "PAN5"}, {}, {}};
  std::vector<Document> chain;
  for (int i = 1; i <= 5; ++i) {
    Document d;
    d.id = "PAN" + std::to_string(i);
    d.types.insert("PAN");
    d.attrs["pan_no"].insert(std::to_string(i));
    for (const auto& r : refs[static_cast<std::size_t>(i - 1)]) d.attrs["proof_id"].insert(r);
    chain.push_back(d);
  }
  auto cidx = build_indexes(chain, cs);
  auto closure = traversal_set(chain[0], {}, cidx.store, cidx.inverted, cs).members;
  o.require(closure == IdSet{"PAN2", "PAN3", "PAN4", "PAN5"}, "chain closure " + fmt_ids(closure));
  return o;
}

Outcome lsh_law() {
  Outcome o;
  const auto t = Clock::now();
  std::mt19937_64 rng(0xacce97);
  const std::uint32_t m = 3;
  const std::uint32_t n = 4;
  const int trials = 5000;
  double worst_band = 0.0;
  double worst_func = 0.0;
  for (int step = 1; step <= 9; ++step) {
    const double j = step / 10.0;
    const std::size_t shared = static_cast<std::size_t>(step) * 10;
    const std::size_t only = (100 - shared) / 2;
    std::size_t band_hits = 0;
    std::size_t func_hits = 0;
    for (int t2 = 0; t2 < trials; ++t2) {
      std::set<std::uint32_t> universe;
      while (universe.size() < shared + 2 * only) {
        universe.insert(static_cast<std::uint32_t>(test::uniform(rng, 0, simd::kMersenne31 - 2)));
      }
      std::vector<std::uint32_t> pool(universe.begin(), universe.end());
      std::shuffle(pool.begin(), pool.end(), rng);
      WordSet a(pool.begin(), pool.begin() + static_cast<long>(shared + only));
      WordSet b(pool.begin(), pool.begin() + static_cast<long>(shared));
      b.insert(b.end(), pool.begin() + static_cast<long>(shared + only), pool.end());
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      auto params = LshParams::generate(m, n, rng());
      auto sa = minhash_signature(a, params);
      auto sb = minhash_signature(b, params);
      for (std::size_t k = 0; k < sa.values.size(); ++k) func_hits += sa.values[k] == sb.values[k];
      auto ia = bucket_ids(sa, params);
      auto ib = bucket_ids(sb, params);
      bool hit = false;
      for (std::size_t k = 0; k < n; ++k) hit = hit || ia[k] == ib[k];
      band_hits += hit;
    }
    const double band = static_cast<double>(band_hits) / trials;
    const double func = static_cast<double>(func_hits) / (trials * m * n);
    const double band_err = std::abs(band - collision_probability(j, m, n));
    const double func_err = std::abs(func - j);
    worst_band = std::max(worst_band, band_err);
    worst_func = std::max(worst_func, func_err);
    o.require(band_err <= 0.03, "banded rate at J=" + fmt("%.1f", j) + " off by " + fmt("%.4f", band_err));
    o.require(func_err <= 0.02, "per-function rate at J=" + fmt("%.1f", j) + " off by " + fmt("%.4f", func_err));
  }
  const double s = since(t);
  o.require(s < 120.0, "under 2 min");
  o.note("max banded error " + fmt("%.4f", worst_band) + ", max per-function error " + fmt("%.4f", worst_func) +
         ", " + fmt("%.1f s", s));
  return o;
}

Outcome rswoosh_oracle() {
  Outcome o;
  auto rng = test::rng_for(1004);
  std::size_t divergent = 0;
  for (int round = 0; round < 100; ++round) {
    auto items = test::random_bucket(rng, test::uniform(rng, 1, 8));
    auto spec = test::random_ruleset(rng);
    RuleMatcher rules(RuleSet::from_json(spec, test::bucket_schema()));
    MatchFn fn = [&](const MatchItem& a, const MatchItem& b) { return rules.matches(a, b); };
    if (test::partition_of(rswoosh(items, fn)) != oracle::merge_fixpoint(items, fn)) {
      ++divergent;
      o.note("divergence on ruleset " + spec.dump());
    }
  }
  o.require(divergent == 0, std::to_string(divergent) + " of 100 buckets diverged");
  o.note("100 buckets, " + std::to_string(divergent) + " divergent");
  return o;
}

Outcome components_oracle() {
  Outcome o;
  auto rng = test::rng_for(1005);
  std::size_t bad_bfs = 0;
  std::size_t bad_centre = 0;
  for (int round = 0; round < 50; ++round) {
    auto g = test::random_graph(rng);
    if (test::sorted(connected_components(g.edges, g.nodes)) != oracle::bfs_components(g.edges, g.nodes)) ++bad_bfs;
    auto groups = test::random_groups(rng, g.nodes);
    auto base = test::stars_partition(rng, g, groups, false);
    if (test::stars_partition(rng, g, groups, true) != base) ++bad_centre;
  }
  o.require(bad_bfs == 0, std::to_string(bad_bfs) + " graphs differ from BFS");
  o.require(bad_centre == 0, std::to_string(bad_centre) + " graphs changed with the central node");
  o.note("50 graphs");
  return o;
}

Outcome recall_benefit() {
  Outcome o;
  const auto t = Clock::now();
  GeneratorConfig g;
  g.num_seed_entities = 1000;
  auto c = generate(g);
  o.require(c.entities >= 1000, "at least 1000 entities");
  o.require(c.link_only_entities > 0, "link-only entities present");
  auto r = run_benefit_experiment(c.documents, c.gold, test::residents_config(true), test::residents_config(false));
  const double s = since(t);
  o.require(r.with_traversal.recall > r.without_traversal.recall, "recall strictly higher with traversal");
  o.require(r.precision_change >= -0.005, "precision drop at most 0.005");
  o.require(s < 300.0, "under 5 min");
  o.note(std::to_string(c.entities) + " entities, " + std::to_string(c.documents.size()) + " docs, recall " +
         fmt("%.4f", r.without_traversal.recall) + " -> " + fmt("%.4f", r.with_traversal.recall) + ", precision " +
         fmt("%.4f", r.without_traversal.precision) + " -> " + fmt("%.4f", r.with_traversal.precision) + ", " +
         fmt("%.1f s", s));
  return o;
}

Outcome blocking_payoff() {
  Outcome o;
  auto cfg = test::residents_config(true);
  double previous = 2.0;
  // Nested prefixes of one generated stream, so sizes differ only in N.
  auto full = test::corpus_of_size(20000, 7007);
  for (std::size_t n : {1000, 5000, 20000}) {
    std::vector<Document> docs(full.documents.begin(), full.documents.begin() + static_cast<long>(n));
    auto res = resolve_batch(docs, cfg);
    const double all = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    const double ratio = static_cast<double>(res.stats.fresh_evaluations) / all;
    o.require(ratio < previous, "ratio decreases at N=" + std::to_string(n));
    previous = ratio;
    o.note("N=" + std::to_string(n) + ": " + std::to_string(res.stats.fresh_evaluations) + " evaluations (" +
           fmt("%.4f%%", 100 * ratio) + ") in " + fmt("%.2f s", res.stats.seconds));
    if (n == 20000) o.require(ratio < 0.05, "ratio below 5% at N=20k");
    if (n == 5000) {
      auto base = allpairs_baseline(docs, cfg);
      const double speedup = base.seconds / res.stats.seconds;
      o.require(speedup >= 5.0, "ERLD at least 5x faster than all-pairs at N=5k");
      o.note("all-pairs " + fmt("%.2f s", base.seconds) + ", speedup " + fmt("%.1fx", speedup));
    }
  }
  return o;
}

Outcome incremental_equivalence() {
  Outcome o;
  auto cfg = test::residents_config(true);
  auto c = test::corpus_of_size(5000, 8008);
  auto rng = test::rng_for(1008);
  std::vector<Document> x;
  std::vector<Document> y;
  for (const auto& d : c.documents) (test::coin(rng, 0.05) ? y : x).push_back(d);

  auto full = resolve_batch(c.documents, cfg);
  auto full_m = pairwise_metrics(partition_of(full.entities), c.gold);
  auto base = resolve_batch(x, cfg);
  auto before = base.state.entities;
  auto st = std::move(base.state);
  auto inc = resolve_incremental(y, st, cfg);
  auto inc_m = pairwise_metrics(partition_of(st.all_entities()), c.gold);

  const double df1 = std::abs(inc_m.f1 - full_m.f1);
  o.require(df1 <= 0.01, "F1 within 0.01");
  const double share = inc.stats.seconds / full.stats.seconds;
  o.require(share < 0.40, "incremental under 40% of batch time");

  bool isolated = st.entity_reads() == inc.touched_entities;
  for (const auto& [id, e] : before) {
    if (!inc.touched_entities.contains(id)) isolated = isolated && st.entities.contains(id) && st.entities.at(id) == e;
  }
  o.require(isolated, "entities outside touched buckets untouched and unread");

  auto fx = test::fixture_config();
  auto fdocs = test::fixture_corpus();
  auto fstate = resolve_batch(test::without(fdocs, "DL31"), fx).state;
  auto finc = resolve_incremental({test::doc_by_id(fdocs, "DL31")}, fstate, fx);
  o.require(test::member_sets(fstate.all_entities()) == kFixtureEntities &&
                finc.retired == std::vector<std::string>{"E:PAN11"},
            "held-out d3 merges both entities");

  o.note(std::to_string(x.size()) + "+" + std::to_string(y.size()) + " docs, F1 batch " + fmt("%.4f", full_m.f1) +
         " vs split " + fmt("%.4f", inc_m.f1) + ", time " + fmt("%.3f s", inc.stats.seconds) + " vs " +
         fmt("%.3f s", full.stats.seconds) + " (" + fmt("%.1f%%", 100 * share) + "), entities read " +
         std::to_string(inc.stats.entities_read) + " of " + std::to_string(before.size()));
  return o;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_bytes(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary | std::ios::trunc) << s; }

bool rejected(const fs::path& dir) {
  try {
    (void)load_state(dir);
  } catch (const StateError&) {
    return true;
  }
  return false;
}

Outcome state_round_trip() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / ("erld_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  auto cfg = test::residents_config(true);
  auto c = test::corpus_of_size(2000, 9009);
  std::vector<Document> x(c.documents.begin(), c.documents.end() - 100);
  std::vector<Document> y(c.documents.end() - 100, c.documents.end());

  auto mem = resolve_batch(x, cfg).state;
  save_state(mem, dir);
  auto disk = load_state(dir);
  o.require(disk == mem, "loaded state equals saved state");
  auto a = resolve_incremental(y, mem, cfg);
  auto b = resolve_incremental(y, disk, cfg);
  o.require(a.updated == b.updated && a.retired == b.retired && mem == disk, "continuation identical");

  std::size_t damaged = 0;
  std::size_t caught = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".bin") continue;
    const auto good = read_bytes(entry.path());
    auto flipped = good;
    flipped[flipped.size() / 2] = static_cast<char>(flipped[flipped.size() / 2] ^ 0x01);
    for (const auto& bad : {good.substr(0, good.size() - 1), flipped}) {
      write_bytes(entry.path(), bad);
      ++damaged;
      caught += rejected(dir);
    }
    write_bytes(entry.path(), good);
  }
  o.require(damaged > 0 && caught == damaged, "corrupted files rejected");
  o.require(!rejected(dir), "restored state loads");
  fs::remove_all(dir);
  o.note(std::to_string(caught) + "/" + std::to_string(damaged) + " damaged files rejected");
  return o;
}

Outcome accounting() {
  Outcome o;
  auto cfg = test::residents_config(true);
  auto c = test::corpus_of_size(5000, 1010);
  auto res = resolve_batch(c.documents, cfg);
  const auto distinct = distinct_cobucketed_pairs(res.state.lsh);
  o.require(res.stats.fresh_evaluations <= distinct, "fresh evaluations within co-bucketed pairs");
  auto replay = test::replay_buckets(res.state, cfg);
  o.require(replay.fresh == 0, "warm rerun evaluates nothing fresh");

  std::vector<Document> x(c.documents.begin(), c.documents.end() - 250);
  std::vector<Document> y(c.documents.end() - 250, c.documents.end());
  auto st = resolve_batch(x, cfg).state;
  auto inc = resolve_incremental(y, st, cfg);
  o.require(inc.stats.fresh_evaluations <= inc.stats.bucket_pairs, "incremental fresh evaluations within bucket pairs");

  o.note(std::to_string(res.stats.fresh_evaluations) + " fresh of " + std::to_string(distinct) +
         " co-bucketed pairs; warm rerun " + std::to_string(replay.fresh) + " fresh, " + std::to_string(replay.hits) +
         " hits");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 canonical fixture", canonical_fixture},
      {"2 traversal facts", traversal_facts},
      {"3 LSH collision law", lsh_law},
      {"4 R-Swoosh vs merge fixpoint", rswoosh_oracle},
      {"5 connected components vs BFS", components_oracle},
      {"6 recall benefit of references", recall_benefit},
      {"7 blocking payoff", blocking_payoff},
      {"8 incremental equivalence", incremental_equivalence},
      {"9 state round trip", state_round_trip},
      {"10 evaluation accounting", accounting},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.pass;
    std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}

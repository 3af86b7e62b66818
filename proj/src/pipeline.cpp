#include "erld/pipeline.hpp"

#include <chrono>
#include <ostream>
#include <unordered_set>
#include <utility>

#include "erld/detail/checksum.hpp"
#include "erld/error.hpp"
#include "erld/rswoosh.hpp"

namespace erld {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t choose2(std::size_t k) {
  return k < 2 ? 0 : static_cast<std::uint64_t>(k) * (k - 1) / 2;
}

const IdSet& traversal_of(const ResolutionState& st, std::string_view doc) {
  static const IdSet kEmpty;
  auto it = st.traversal.find(doc);
  return it == st.traversal.end() ? kEmpty : it->second;
}

ResolutionState empty_state(const ResolverConfig& cfg) {
  ResolutionState st;
  st.schema = cfg.schema;
  st.match_spec = cfg.match_spec;
  st.traversal_config = cfg.traversal;
  st.lsh_params = cfg.lsh;
  st.schema_hash = cfg.schema.fingerprint();
  st.match_hash = cfg.match_fingerprint();
  st.cache = PairCache(cfg.pair_cache_capacity);
  return st;
}

void validate_config(const ResolverConfig& cfg) {
  cfg.traversal.validate();
  cfg.lsh.validate();
  if (cfg.pair_cache_capacity == 0) throw ConfigError("pair cache capacity must be positive");
}

// Runs R-Swoosh over one bucket and appends star edges for every partial
// entity. Returns the partial entities so the caller can collect touched nodes.
std::vector<PartialEntity> resolve_bucket(std::vector<MatchItem> items, CachedMatcher& matcher,
                                          EdgeList& edges) {
  MatchFn fn = [&matcher](const MatchItem& a, const MatchItem& b) { return matcher(a, b); };
  auto partials = rswoosh(std::move(items), fn);
  for (const auto& pe : partials) {
    auto star = edges_from_partial_entity(pe);
    edges.insert(edges.end(), std::make_move_iterator(star.begin()),
                 std::make_move_iterator(star.end()));
  }
  return partials;
}

std::string bucket_signature(const std::vector<std::string>& item_ids) {
  std::string key;
  for (const auto& id : item_ids) {
    key += id;
    key += '\x1f';
  }
  return key;
}

}  // namespace

std::shared_ptr<const MatchFunction> ResolverConfig::matcher() const {
  return make_match_function(match_spec, schema);
}

std::string ResolverConfig::match_fingerprint() const {
  return detail::hex32(detail::crc32_of(match_spec.dump()));
}

nlohmann::json RunStats::to_json() const {
  return {{"documents", documents},
          {"buckets", buckets},
          {"resolved_buckets", resolved_buckets},
          {"bucket_pairs", bucket_pairs},
          {"fresh_evaluations", fresh_evaluations},
          {"cache_hits", cache_hits},
          {"partial_entities", partial_entities},
          {"edges", edges},
          {"entities_read", entities_read},
          {"seconds", seconds}};
}

const Entity& ResolutionState::read_entity(std::string_view id) const {
  auto it = entities.find(id);
  if (it == entities.end()) {
    throw StateError(StateError::Reason::invariant, "unknown entity '" + std::string(id) + "'");
  }
  reads_.insert(it->first);
  return it->second;
}

void ResolutionState::check_invariants() const {
  auto fail = [](const std::string& what) {
    throw StateError(StateError::Reason::invariant, what);
  };
  if (doc_entity.size() != indexes.store.size()) {
    fail("document-to-entity map covers " + std::to_string(doc_entity.size()) + " of " +
         std::to_string(indexes.store.size()) + " documents");
  }
  std::size_t member_total = 0;
  for (const auto& [eid, e] : entities) {
    if (e.id != eid) fail("entity stored under '" + eid + "' has id '" + e.id + "'");
    if (e.members.empty()) fail("entity '" + eid + "' has no members");
    if (tombstones.contains(eid)) fail("entity '" + eid + "' is both live and retired");
    for (const auto& m : e.members) {
      auto it = doc_entity.find(m);
      if (it == doc_entity.end() || it->second != eid) {
        fail("member '" + m + "' of '" + eid + "' maps elsewhere");
      }
    }
    member_total += e.members.size();
  }
  if (member_total != doc_entity.size()) fail("entity members do not partition the documents");
  for (const auto& [doc, eid] : doc_entity) {
    if (!indexes.store.contains(doc)) fail("mapped document '" + doc + "' is not stored");
    if (!entities.contains(eid)) fail("document '" + doc + "' maps to unknown entity '" + eid + "'");
  }
  for (const auto& [doc, ts] : traversal) {
    if (!indexes.store.contains(doc)) fail("traversal set of unknown document '" + doc + "'");
    for (const auto& t : ts) {
      if (!indexes.store.contains(t)) fail("traversal set of '" + doc + "' names unknown '" + t + "'");
    }
  }
  for (const auto& [bucket, ids] : lsh) {
    for (const auto& id : ids) {
      if (!indexes.store.contains(id)) fail("bucket '" + bucket + "' names unknown '" + id + "'");
    }
  }
  for (const auto& [old_id, target] : tombstones) {
    if (!entities.contains(resolve_entity_id(old_id))) {
      fail("retired entity '" + old_id + "' does not lead to a live entity");
    }
  }
}

ResolverConfig ResolutionState::config() const {
  ResolverConfig cfg;
  cfg.schema = schema;
  cfg.match_spec = match_spec;
  cfg.traversal = traversal_config;
  cfg.lsh = lsh_params;
  cfg.pair_cache_capacity = cache.capacity();
  return cfg;
}

std::vector<Entity> ResolutionState::all_entities() const {
  std::vector<Entity> out;
  out.reserve(entities.size());
  for (const auto& [id, e] : entities) out.push_back(e);
  return out;
}

std::string ResolutionState::resolve_entity_id(std::string_view id) const {
  std::string cur(id);
  for (std::size_t hops = 0; hops <= tombstones.size(); ++hops) {
    auto it = tombstones.find(cur);
    if (it == tombstones.end()) return cur;
    cur = it->second;
  }
  throw StateError(StateError::Reason::invariant, "tombstone cycle at '" + std::string(id) + "'");
}

bool operator==(const ResolutionState& x, const ResolutionState& y) {
  return x.schema == y.schema && x.match_spec == y.match_spec &&
         x.traversal_config == y.traversal_config && x.lsh_params == y.lsh_params &&
         x.schema_hash == y.schema_hash && x.match_hash == y.match_hash &&
         x.indexes.store == y.indexes.store && x.indexes.inverted == y.indexes.inverted &&
         x.lsh == y.lsh && x.dictionary == y.dictionary && x.doc_entity == y.doc_entity &&
         x.entities == y.entities && x.traversal == y.traversal && x.tombstones == y.tombstones &&
         x.cache == y.cache;
}

BatchResult resolve_batch(std::vector<Document> docs, const ResolverConfig& cfg) {
  const auto start = Clock::now();
  validate_config(cfg);
  auto fn = cfg.matcher();

  BatchResult out;
  ResolutionState& st = out.state;
  st = empty_state(cfg);
  add_to_indexes(st.indexes, docs, cfg.schema);

  for (const auto& d : docs) {
    auto ts = traversal_set(d, cfg.traversal, st.indexes.store, st.indexes.inverted, cfg.schema);
    if (!ts.members.empty()) st.traversal.emplace(d.id, std::move(ts.members));
  }
  st.lsh = assign_buckets(docs, st.traversal, cfg.schema, st.dictionary, cfg.lsh);

  RunStats& stats = out.stats;
  stats.documents = docs.size();
  CachedMatcher matcher(*fn, st.cache);
  EdgeList edges;
  std::unordered_set<std::string> seen;
  for (const auto& [bucket, ids] : st.lsh) {
    ++stats.buckets;
    stats.bucket_pairs += choose2(ids.size());
    if (ids.size() < 2) continue;
    std::vector<std::string> id_list(ids.begin(), ids.end());
    if (!seen.insert(bucket_signature(id_list)).second) continue;
    ++stats.resolved_buckets;
    std::vector<MatchItem> items;
    items.reserve(ids.size());
    for (const auto& id : ids) {
      items.push_back(MatchItem::from_document(*st.indexes.store.find(id), traversal_of(st, id)));
    }
    stats.partial_entities += resolve_bucket(std::move(items), matcher, edges).size();
  }
  stats.edges = edges.size();

  IdSet nodes;
  for (const auto& [id, doc] : st.indexes.store) nodes.insert(nodes.end(), id);
  auto partition = connected_components(edges, nodes);
  out.entities = consolidate(partition, st.indexes.store);
  for (const auto& e : out.entities) {
    for (const auto& m : e.members) st.doc_entity.emplace(m, e.id);
    st.entities.emplace(e.id, e);
  }

  stats.fresh_evaluations = matcher.fresh_evaluations();
  stats.cache_hits = matcher.cache_hits();
  stats.seconds = seconds_since(start);
  return out;
}

IncrementalResult resolve_incremental(std::vector<Document> new_docs, ResolutionState& st,
                                      const ResolverConfig& cfg) {
  const auto start = Clock::now();
  validate_config(cfg);
  if (cfg.schema.fingerprint() != st.schema_hash) {
    throw StateError(StateError::Reason::stale, "schema differs from the one the state was built with");
  }
  if (cfg.match_fingerprint() != st.match_hash) {
    throw StateError(StateError::Reason::stale,
                     "match configuration differs from the one the state was built with");
  }
  if (!(cfg.lsh == st.lsh_params)) {
    throw StateError(StateError::Reason::stale, "LSH parameters differ from the persisted ones");
  }

  IncrementalResult out;
  out.stats.documents = new_docs.size();
  if (new_docs.empty()) {
    out.stats.seconds = seconds_since(start);
    return out;
  }

  IdSet new_ids;
  for (const auto& d : new_docs) {
    if (st.indexes.store.contains(d.id)) {
      throw InputError("document '" + d.id + "' is already resolved in this state");
    }
    if (!new_ids.insert(d.id).second) {
      throw InputError("duplicate document id '" + d.id + "' in new batch");
    }
  }

  auto fn = cfg.matcher();
  st.clear_entity_reads();
  add_to_indexes(st.indexes, new_docs, cfg.schema);

  // Traversal sets over the grown indexes. Old documents are replaced by the
  // entities they already belong to.
  std::map<std::string, IdSet, std::less<>> item_ts;
  for (const auto& d : new_docs) {
    auto ts = traversal_set(d, cfg.traversal, st.indexes.store, st.indexes.inverted, cfg.schema);
    IdSet substituted;
    for (const auto& id : ts.members) {
      substituted.insert(new_ids.contains(id) ? id : st.doc_entity.at(id));
    }
    item_ts.emplace(d.id, std::move(substituted));
    if (!ts.members.empty()) st.traversal.insert_or_assign(d.id, std::move(ts.members));
  }

  // Touched buckets: everything a new document hashes to, plus whatever the
  // persisted index already holds there (as entities).
  std::map<std::string, IdSet, std::less<>> touched;
  std::map<std::string, std::vector<std::string>, std::less<>> doc_buckets;
  for (const auto& d : new_docs) {
    auto bids = document_bucket_ids(d, cfg.schema, st.dictionary, cfg.lsh);
    for (const auto& b : bids) {
      auto& ids = touched[b];
      ids.insert(d.id);
      ids.insert(item_ts[d.id].begin(), item_ts[d.id].end());
    }
    doc_buckets.emplace(d.id, std::move(bids));
  }
  for (auto& [bucket, ids] : touched) {
    if (const IdSet* old = st.lsh.find(bucket)) {
      for (const auto& doc : *old) ids.insert(st.doc_entity.at(doc));
    }
  }

  std::map<std::string, MatchItem, std::less<>> entity_items;
  auto entity_item = [&](const std::string& eid) -> const MatchItem& {
    auto it = entity_items.find(eid);
    if (it != entity_items.end()) return it->second;
    const Entity& e = st.read_entity(eid);
    IdSet ts;
    for (const auto& m : e.members) {
      const auto& mts = traversal_of(st, m);
      ts.insert(mts.begin(), mts.end());
    }
    return entity_items.emplace(eid, MatchItem::from_entity(e, std::move(ts))).first->second;
  };

  RunStats& stats = out.stats;
  CachedMatcher matcher(*fn, st.cache);
  EdgeList edges;
  IdSet nodes;
  std::unordered_set<std::string> seen;
  for (const auto& [bucket, ids] : touched) {
    ++stats.buckets;
    stats.bucket_pairs += choose2(ids.size());
    std::vector<MatchItem> items;
    items.reserve(ids.size());
    for (const auto& id : ids) {
      if (new_ids.contains(id)) {
        items.push_back(MatchItem::from_document(*st.indexes.store.find(id), item_ts.at(id)));
      } else {
        out.touched_entities.insert(id);
        items.push_back(entity_item(id));
      }
    }
    for (const auto& item : items) nodes.insert(item.members.begin(), item.members.end());
    if (items.size() < 2) continue;
    std::vector<std::string> id_list(ids.begin(), ids.end());
    if (!seen.insert(bucket_signature(id_list)).second) continue;
    ++stats.resolved_buckets;
    stats.partial_entities += resolve_bucket(std::move(items), matcher, edges).size();
  }
  // Old members of every touched entity stay together.
  for (const auto& eid : out.touched_entities) {
    auto star = star_edges(st.entities.at(eid).members, *st.entities.at(eid).members.begin());
    edges.insert(edges.end(), star.begin(), star.end());
  }
  stats.edges = edges.size();

  auto partition = connected_components(edges, nodes);
  for (const auto& cls : partition) {
    std::set<std::string, std::less<>> old_ids;
    for (const auto& m : cls) {
      if (!new_ids.contains(m)) old_ids.insert(st.doc_entity.at(m));
    }
    std::string id = old_ids.empty() ? entity_id_for(cls) : *old_ids.begin();
    for (const auto& retired : old_ids) {
      if (retired == id) continue;
      st.entities.erase(retired);
      for (auto& [from, to] : st.tombstones) {
        if (to == retired) to = id;
      }
      st.tombstones.insert_or_assign(retired, id);
      out.retired.push_back(retired);
    }
    Entity e = make_entity(id, cls, st.indexes.store);
    for (const auto& m : cls) st.doc_entity.insert_or_assign(m, id);
    st.entities.insert_or_assign(id, e);
    out.updated.push_back(std::move(e));
  }

  for (const auto& d : new_docs) {
    const auto& ts = traversal_of(st, d.id);
    for (const auto& b : doc_buckets.at(d.id)) {
      st.lsh.add(b, d.id);
      st.lsh.add(b, ts);
    }
  }

  stats.entities_read = st.entity_reads().size();
  stats.fresh_evaluations = matcher.fresh_evaluations();
  stats.cache_hits = matcher.cache_hits();
  stats.seconds = seconds_since(start);
  return out;
}

std::uint64_t distinct_cobucketed_pairs(const LshIndex& index) {
  std::unordered_set<std::string> pairs;
  for (const auto& [bucket, ids] : index) {
    for (auto i = ids.begin(); i != ids.end(); ++i) {
      for (auto j = std::next(i); j != ids.end(); ++j) pairs.insert(PairCache::pair_key(*i, *j));
    }
  }
  return pairs.size();
}

nlohmann::json to_json(const TraversalConfig& cfg) {
  return {{"max_dst_ust_steps", cfg.max_dst_ust_steps},
          {"ust_fanout_threshold", cfg.ust_fanout_threshold}};
}

TraversalConfig traversal_config_from_json(const nlohmann::json& j) {
  TraversalConfig cfg;
  try {
    cfg.max_dst_ust_steps = j.value("max_dst_ust_steps", cfg.max_dst_ust_steps);
    cfg.ust_fanout_threshold = j.value("ust_fanout_threshold", cfg.ust_fanout_threshold);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("traversal config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const LshParams& params) {
  return {{"m", params.m}, {"n", params.n},         {"p", params.p},
          {"rng_seed", params.rng_seed}, {"a", params.a}, {"b", params.b}};
}

LshParams lsh_params_from_json(const nlohmann::json& j) {
  LshParams params;
  try {
    const auto m = j.value("m", std::uint32_t{3});
    const auto n = j.value("n", std::uint32_t{6});
    const auto p = j.value("p", kDefaultPrime);
    const auto seed = j.value("rng_seed", kDefaultLshSeed);
    if (j.contains("a") || j.contains("b")) {
      params.m = m;
      params.n = n;
      params.p = p;
      params.rng_seed = seed;
      params.a = j.at("a").get<std::vector<std::uint64_t>>();
      params.b = j.at("b").get<std::vector<std::uint64_t>>();
    } else {
      if (m == 0 || n == 0) throw ConfigError("LSH m and n must be positive");
      params = LshParams::generate(m, n, seed, p);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("LSH params: ") + e.what());
  }
  params.validate();
  return params;
}

nlohmann::json entity_to_json(const Entity& e) {
  nlohmann::json attrs = nlohmann::json::object();
  for (const auto& [name, values] : e.merged.attrs) {
    attrs[name] = std::vector<std::string>(values.begin(), values.end());
  }
  return {{"entity_id", e.id},
          {"members", std::vector<std::string>(e.members.begin(), e.members.end())},
          {"attrs", std::move(attrs)}};
}

void write_entities(std::ostream& out, const std::vector<Entity>& entities) {
  for (const auto& e : entities) out << entity_to_json(e).dump() << '\n';
}

}  // namespace erld

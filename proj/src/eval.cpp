#include "erld/eval.hpp"

#include <chrono>
#include <istream>
#include <map>
#include <unordered_map>

#include "erld/error.hpp"

namespace erld {

namespace {

std::uint64_t choose2(std::uint64_t k) { return k < 2 ? 0 : k * (k - 1) / 2; }

std::string list_ids(const std::vector<std::string>& ids) {
  std::string out;
  const std::size_t shown = std::min<std::size_t>(ids.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) out += (i ? ", " : "") + ids[i];
  if (ids.size() > shown) out += ", ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

}  // namespace

nlohmann::json Metrics::to_json() const {
  return {{"precision", precision},
          {"recall", recall},
          {"f1", f1},
          {"true_pairs", true_pairs},
          {"predicted_pairs", predicted_pairs},
          {"correct_pairs", correct_pairs},
          {"match_evaluations", match_evaluations},
          {"wall_time_seconds", wall_time},
          {"empty_prediction_precision", 1.0}};
}

Metrics pairwise_metrics(const Partition& predicted, const GoldStandard& gold) {
  std::vector<std::string> extra;
  std::vector<std::string> duplicated;
  std::unordered_map<std::string_view, std::size_t> seen;
  for (std::size_t c = 0; c < predicted.size(); ++c) {
    for (const auto& id : predicted[c]) {
      if (!gold.contains(id)) extra.push_back(id);
      if (!seen.emplace(id, c).second) duplicated.push_back(id);
    }
  }
  std::vector<std::string> missing;
  for (const auto& [id, label] : gold) {
    if (!seen.contains(id)) missing.push_back(id);
  }
  if (!extra.empty() || !missing.empty() || !duplicated.empty()) {
    std::string msg = "predicted partition does not cover the gold ids";
    if (!missing.empty()) msg += "; missing: " + list_ids(missing);
    if (!extra.empty()) msg += "; extra: " + list_ids(extra);
    if (!duplicated.empty()) msg += "; in several classes: " + list_ids(duplicated);
    throw InputError(msg);
  }

  Metrics m;
  std::map<std::string_view, std::uint64_t> gold_sizes;
  for (const auto& [id, label] : gold) ++gold_sizes[label];
  for (const auto& [label, n] : gold_sizes) m.true_pairs += choose2(n);

  for (const auto& cls : predicted) {
    m.predicted_pairs += choose2(cls.size());
    std::map<std::string_view, std::uint64_t> overlap;
    for (const auto& id : cls) ++overlap[gold.find(id)->second];
    for (const auto& [label, n] : overlap) m.correct_pairs += choose2(n);
  }

  m.precision = m.predicted_pairs == 0
                    ? 1.0
                    : static_cast<double>(m.correct_pairs) / static_cast<double>(m.predicted_pairs);
  m.recall = m.true_pairs == 0 ? (m.predicted_pairs == 0 ? 1.0 : 0.0)
                               : static_cast<double>(m.correct_pairs) / static_cast<double>(m.true_pairs);
  m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

Partition partition_of(const std::vector<Entity>& entities) {
  Partition p;
  p.reserve(entities.size());
  for (const auto& e : entities) p.push_back(e.members);
  return p;
}

Partition read_entity_partition(std::istream& in) {
  Partition p;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      IdSet members;
      for (const auto& m : j.at("members")) members.insert(m.get<std::string>());
      if (members.empty()) throw ParseError(lineno, "entity without members");
      p.push_back(std::move(members));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, std::string("bad entity line: ") + e.what());
    }
  }
  return p;
}

BaselineResult allpairs_baseline(const std::vector<Document>& docs, const ResolverConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  cfg.traversal.validate();
  auto fn = cfg.matcher();
  auto indexes = build_indexes(docs, cfg.schema);

  std::vector<MatchItem> items;
  items.reserve(docs.size());
  for (const auto& d : docs) {
    auto ts = traversal_set(d, cfg.traversal, indexes.store, indexes.inverted, cfg.schema);
    items.push_back(MatchItem::from_document(d, std::move(ts.members)));
  }

  BaselineResult out;
  EdgeList edges;
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      ++out.match_evaluations;
      if (fn->matches(items[i], items[j])) edges.emplace_back(items[i].key, items[j].key);
    }
  }
  IdSet nodes;
  for (const auto& d : docs) nodes.insert(d.id);
  out.entities = consolidate(connected_components(edges, nodes), indexes.store);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

nlohmann::json BenefitReport::to_json() const {
  return {{"with_traversal", with_traversal.to_json()},
          {"without_traversal", without_traversal.to_json()},
          {"recall_gain", recall_gain},
          {"precision_change", precision_change},
          {"holds", holds}};
}

BenefitReport run_benefit_experiment(const std::vector<Document>& docs, const GoldStandard& gold,
                                     const ResolverConfig& with_traversal,
                                     const ResolverConfig& without_traversal, double epsilon) {
  auto run = [&](const ResolverConfig& cfg) {
    auto r = resolve_batch(docs, cfg);
    Metrics m = pairwise_metrics(partition_of(r.entities), gold);
    m.match_evaluations = r.stats.fresh_evaluations;
    m.wall_time = r.stats.seconds;
    return m;
  };
  BenefitReport rep;
  rep.with_traversal = run(with_traversal);
  rep.without_traversal = run(without_traversal);
  rep.recall_gain = rep.with_traversal.recall - rep.without_traversal.recall;
  rep.precision_change = rep.with_traversal.precision - rep.without_traversal.precision;
  rep.holds = rep.recall_gain >= 0.0 && rep.precision_change >= -epsilon;
  return rep;
}

}  // namespace erld

#include "erld/matching.hpp"

#include <algorithm>

#include "erld/error.hpp"

namespace erld {

using nlohmann::json;

std::string member_key(const IdSet& members) {
  std::string key;
  for (const auto& m : members) {
    if (!key.empty()) key.push_back('\x1f');
    key += m;
  }
  return key;
}

MatchItem MatchItem::from_document(const Document& doc, IdSet traversal) {
  MatchItem item;
  item.merged = doc;
  item.members.insert(doc.id);
  item.traversal = std::move(traversal);
  item.key = doc.id;
  return item;
}

MatchItem MatchItem::from_entity(const Entity& entity, IdSet traversal) {
  MatchItem item;
  item.merged = entity.merged;
  item.members = entity.members;
  item.origins.insert(entity.id);
  item.traversal = std::move(traversal);
  item.key = member_key(item.members);
  return item;
}

namespace {

template <typename Set>
bool intersects(const IdSet& probe, const Set& target) {
  if (probe.size() > target.size()) {
    for (const auto& t : target) {
      if (probe.contains(t)) return true;
    }
    return false;
  }
  for (const auto& p : probe) {
    if (target.contains(p)) return true;
  }
  return false;
}

}  // namespace

bool MatchItem::refers_to(const MatchItem& other) const {
  return intersects(traversal, other.members) || intersects(traversal, other.origins);
}

MatchItem merge_items(const MatchItem& a, const MatchItem& b) {
  MatchItem out;
  out.merged = merge(a.merged, b.merged);
  out.members = a.members;
  out.members.insert(b.members.begin(), b.members.end());
  out.origins = a.origins;
  out.origins.insert(b.origins.begin(), b.origins.end());
  out.traversal = a.traversal;
  out.traversal.insert(b.traversal.begin(), b.traversal.end());
  out.key = member_key(out.members);
  return out;
}

bool same_value(std::string_view attribute, const Document& a, const Document& b) {
  const ValueSet* va = a.values(attribute);
  const ValueSet* vb = b.values(attribute);
  if (va == nullptr || vb == nullptr) return false;
  if (va->size() > vb->size()) std::swap(va, vb);
  return std::any_of(va->begin(), va->end(), [&](const std::string& v) { return vb->contains(v); });
}

double best_similarity(Metric metric, std::string_view attribute, const Document& a,
                       const Document& b) {
  const ValueSet* va = a.values(attribute);
  const ValueSet* vb = b.values(attribute);
  if (va == nullptr || vb == nullptr) return 0.0;
  double best = 0.0;
  for (const auto& x : *va) {
    for (const auto& y : *vb) {
      best = std::max(best, similarity(metric, x, y));
      if (best >= 1.0) return best;
    }
  }
  return best;
}

bool in_traversal_set(const MatchItem& a, const MatchItem& b) { return a.refers_to(b); }

bool evaluate_predicate(const Conjunct& c, const MatchItem& a, const MatchItem& b) {
  switch (c.kind) {
    case PredicateKind::equal:
      return same_value(c.attribute, a.merged, b.merged);
    case PredicateKind::similar: {
      const ValueSet* va = a.merged.values(c.attribute);
      const ValueSet* vb = b.merged.values(c.attribute);
      if (va == nullptr || vb == nullptr) return false;
      for (const auto& x : *va) {
        for (const auto& y : *vb) {
          if (similarity(c.metric, x, y) >= c.threshold) return true;
        }
      }
      return false;
    }
    case PredicateKind::traversal:
      return in_traversal_set(a, b) || in_traversal_set(b, a);
  }
  return false;
}

RuleSet::RuleSet(std::vector<MatchRule> rules) : rules_(std::move(rules)) {
  if (rules_.empty()) throw ConfigError("rule set must contain at least one rule");
  for (const auto& r : rules_) {
    if (r.conjuncts.empty()) throw ConfigError("rule '" + r.name + "' has no conjuncts");
  }
}

bool RuleSet::uses_traversal() const noexcept {
  return std::any_of(rules_.begin(), rules_.end(), [](const MatchRule& r) {
    return std::any_of(r.conjuncts.begin(), r.conjuncts.end(),
                       [](const Conjunct& c) { return c.kind == PredicateKind::traversal; });
  });
}

namespace {

Conjunct parse_conjunct(const json& j, const SchemaConfig& schema) {
  const auto predicate = j.value("predicate", std::string("same"));
  Conjunct c;
  if (predicate == "traversal") {
    c.kind = PredicateKind::traversal;
    return c;
  }
  if (!j.contains("attribute")) throw ConfigError("predicate '" + predicate + "' needs an attribute");
  c.attribute = j["attribute"].get<std::string>();
  const AttributeSpec* spec = schema.find_any(c.attribute);
  if (spec == nullptr) throw ConfigError("rule references unknown attribute '" + c.attribute + "'");

  if (predicate == "equal") {
    c.kind = PredicateKind::equal;
  } else if (predicate == "similar") {
    c.kind = PredicateKind::similar;
  } else if (predicate == "same") {
    c.kind = spec->is_exact() ? PredicateKind::equal : PredicateKind::similar;
  } else {
    throw ConfigError("unknown predicate '" + predicate + "'");
  }
  if (c.kind == PredicateKind::similar) {
    const auto metric_name = j.contains("metric") ? j["metric"].get<std::string>()
                                                  : spec->metric.value_or("jaro_winkler");
    const auto metric = parse_metric(metric_name);
    if (!metric) throw ConfigError("unknown similarity metric '" + metric_name + "'");
    c.metric = *metric;
    c.threshold = j.contains("threshold") ? j["threshold"].get<double>()
                                          : spec->threshold.value_or(kDefaultSoftThreshold);
    if (c.threshold < 0.0 || c.threshold > 1.0) throw ConfigError("threshold outside [0, 1]");
  }
  return c;
}

}  // namespace

RuleSet RuleSet::from_json(const json& input, const SchemaConfig& schema) {
  if (input.is_object() && !input.contains("rules")) throw ConfigError("rule set needs a \"rules\" array");
  const json& arr = input.is_object() ? input.at("rules") : input;
  if (!arr.is_array()) throw ConfigError("\"rules\" must be an array");
  try {
    std::vector<MatchRule> rules;
    for (const auto& r : arr) {
      MatchRule rule;
      const json* conjuncts = &r;
      if (r.is_object()) {
        rule.name = r.value("name", std::string());
        conjuncts = &r.at("conjuncts");
      }
      if (rule.name.empty()) rule.name = "rule" + std::to_string(rules.size() + 1);
      for (const auto& c : *conjuncts) rule.conjuncts.push_back(parse_conjunct(c, schema));
      rules.push_back(std::move(rule));
    }
    return RuleSet(std::move(rules));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed rules: ") + e.what());
  }
}

std::optional<std::size_t> RuleMatcher::first_satisfied(const MatchItem& a,
                                                        const MatchItem& b) const {
  const auto& rules = rules_.rules();
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const bool all = std::all_of(rules[i].conjuncts.begin(), rules[i].conjuncts.end(),
                                 [&](const Conjunct& c) { return evaluate_predicate(c, a, b); });
    if (all) return i;
  }
  return std::nullopt;
}

bool RuleMatcher::matches(const MatchItem& a, const MatchItem& b) const {
  return first_satisfied(a, b).has_value();
}

LinearScorer::LinearScorer(std::vector<Feature> features, std::vector<double> weights, double bias)
    : features_(std::move(features)), weights_(std::move(weights)), bias_(bias) {
  if (features_.size() != weights_.size()) {
    throw ConfigError("linear scorer: feature and weight counts differ");
  }
}

LinearScorer LinearScorer::from_json(const json& j, const SchemaConfig& schema) {
  try {
    std::vector<Feature> features;
    for (const auto& f : j.at("features")) {
      Feature feature;
      if (f.value("traversal", false)) {
        features.push_back(feature);
        continue;
      }
      feature.attribute = f.at("attribute").get<std::string>();
      if (schema.find_any(feature.attribute) == nullptr) {
        throw ConfigError("linear scorer references unknown attribute '" + feature.attribute + "'");
      }
      const auto name = f.value("metric", std::string("jaccard"));
      const auto metric = parse_metric(name);
      if (!metric) throw ConfigError("unknown similarity metric '" + name + "'");
      feature.metric = *metric;
      features.push_back(std::move(feature));
    }
    return LinearScorer(std::move(features), j.at("weights").get<std::vector<double>>(),
                        j.value("bias", 0.0));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed linear scorer: ") + e.what());
  }
}

std::vector<double> LinearScorer::features(const MatchItem& a, const MatchItem& b) const {
  std::vector<double> out;
  out.reserve(features_.size());
  for (const auto& f : features_) {
    if (f.attribute.empty()) {
      out.push_back(in_traversal_set(a, b) || in_traversal_set(b, a) ? 1.0 : 0.0);
    } else {
      out.push_back(best_similarity(f.metric, f.attribute, a.merged, b.merged));
    }
  }
  return out;
}

double LinearScorer::score(const MatchItem& a, const MatchItem& b) const {
  const auto f = features(a, b);
  double s = bias_;
  for (std::size_t i = 0; i < f.size(); ++i) s += weights_[i] * f[i];
  return s;
}

bool LinearScorer::matches(const MatchItem& a, const MatchItem& b) const {
  return score(a, b) >= 0.0;
}

std::shared_ptr<const MatchFunction> make_match_function(const json& spec,
                                                         const SchemaConfig& schema) {
  if (spec.is_object() && spec.contains("linear")) {
    return std::make_shared<LinearScorer>(LinearScorer::from_json(spec["linear"], schema));
  }
  if ((spec.is_object() && spec.contains("rules")) || spec.is_array()) {
    return std::make_shared<RuleMatcher>(RuleSet::from_json(spec, schema));
  }
  throw ConfigError("match configuration needs \"rules\" or \"linear\"");
}

PairCache::PairCache(const PairCache& other) : capacity_(other.capacity_) {
  assign(other.capacity_, other.entries());
}

PairCache& PairCache::operator=(const PairCache& other) {
  if (this != &other) assign(other.capacity_, other.entries());
  return *this;
}

std::string PairCache::pair_key(std::string_view a, std::string_view b) {
  if (b < a) std::swap(a, b);
  std::string key;
  key.reserve(a.size() + b.size() + 1);
  key.append(a);
  key.push_back('\x1e');
  key.append(b);
  return key;
}

std::optional<bool> PairCache::lookup(std::string_view a_key, std::string_view b_key) {
  const auto key = pair_key(a_key, b_key);
  std::lock_guard lock(mu_);
  const auto it = map_.find(key);
  if (it == map_.end()) return std::nullopt;
  order_.splice(order_.end(), order_, it->second);
  return it->second->matched;
}

void PairCache::insert_locked(std::string key, bool matched) {
  if (capacity_ == 0) return;
  if (const auto it = map_.find(key); it != map_.end()) {
    it->second->matched = matched;
    order_.splice(order_.end(), order_, it->second);
    return;
  }
  while (order_.size() >= capacity_) {
    map_.erase(order_.front().pair_key);
    order_.pop_front();
  }
  order_.push_back(Entry{std::move(key), matched});
  auto last = std::prev(order_.end());
  map_.emplace(last->pair_key, last);
}

void PairCache::record(std::string_view a_key, std::string_view b_key, bool matched) {
  auto key = pair_key(a_key, b_key);
  std::lock_guard lock(mu_);
  insert_locked(std::move(key), matched);
}

std::size_t PairCache::size() const {
  std::lock_guard lock(mu_);
  return order_.size();
}

std::size_t PairCache::matching_count() const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(
      std::count_if(order_.begin(), order_.end(), [](const Entry& e) { return e.matched; }));
}

std::vector<PairCache::Entry> PairCache::entries() const {
  std::lock_guard lock(mu_);
  return {order_.begin(), order_.end()};
}

void PairCache::assign(std::size_t capacity, std::vector<Entry> entries) {
  std::lock_guard lock(mu_);
  capacity_ = capacity;
  order_.clear();
  map_.clear();
  for (auto& e : entries) insert_locked(std::move(e.pair_key), e.matched);
}

bool CachedMatcher::operator()(const MatchItem& a, const MatchItem& b) {
  if (const auto known = cache_.lookup(a.key, b.key)) {
    ++hits_;
    return *known;
  }
  const bool matched = fn_.matches(a, b);
  ++fresh_;
  cache_.record(a.key, b.key, matched);
  return matched;
}

}  // namespace erld

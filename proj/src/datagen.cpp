#include "erld/datagen.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "erld/error.hpp"

namespace erld {

namespace {

using json = nlohmann::json;

constexpr std::array<std::string_view, 48> kFirstNames = {
    "Amita",   "Rahul",  "Priya",   "Suresh", "Anjali", "Vikram",  "Meera",   "Arjun",
    "Kavita",  "Rohan",  "Neha",    "Sanjay", "Pooja",  "Anil",    "Deepa",   "Manoj",
    "Sunita",  "Rajesh", "Lakshmi", "Karan",  "Swati",  "Nitin",   "Geeta",   "Ashok",
    "Rekha",   "Vijay",  "Shalini", "Harish", "Bhavna", "Gopal",   "Nandini", "Prakash",
    "Usha",    "Ramesh", "Divya",   "Mohan",  "Farida", "Imran",   "Zoya",    "Tarun",
    "Ishita",  "Kunal",  "Madhavi", "Naveen", "Ritu",   "Sachin",  "Vandana", "Yusuf"};

constexpr std::array<std::string_view, 16> kMiddleNames = {
    "Kumar", "Devi", "Prasad", "Lal", "Rani", "Chandra", "Nath", "Bai",
    "Mohan", "Kanta", "Raj", "Lata", "Shankar", "Bala", "Dutt", "Mani"};

constexpr std::array<std::string_view, 40> kLastNames = {
    "Kumari",   "Sharma",   "Nair",     "Iyer",     "Patel",   "Reddy",   "Gupta",  "Singh",
    "Mehta",    "Joshi",    "Rao",      "Menon",    "Pillai",  "Das",     "Bose",   "Chopra",
    "Kapoor",   "Malhotra", "Verma",    "Yadav",    "Mishra",  "Pandey",  "Shetty", "Kulkarni",
    "Deshmukh", "Banerjee", "Mukherjee", "Ghosh",   "Saxena",  "Agarwal", "Bhat",   "Naidu",
    "Chauhan",  "Thakur",   "Qureshi",  "Fernandes", "Dsouza", "Kaur",    "Gill",   "Sethi"};

constexpr std::array<std::string_view, 32> kStreets = {
    "MG",        "Station",  "Temple",   "Lake",     "Market",   "Church",  "Hill",   "Canal",
    "Park",      "Mill",     "Fort",     "Bazaar",   "Garden",   "River",   "College", "Court",
    "Palace",    "Harbour",  "Tank",     "Mosque",   "Bridge",   "Ring",    "Link",    "Circular",
    "Brigade",   "Residency", "Cantonment", "Nehru", "Gandhi",   "Tilak",   "Ambedkar", "Patel"};

constexpr std::array<std::string_view, 6> kStreetKinds = {"Road", "Street", "Lane", "Marg", "Nagar",
                                                          "Colony"};

constexpr std::array<std::string_view, 24> kLocalities = {
    "Andheri",  "Bandra",  "Karol",    "Lajpat",  "Saket",     "Dwarka",  "Indiranagar", "Jayanagar",
    "Adyar",    "Velachery", "Salt",   "Howrah",  "Kothrud",   "Aundh",   "Banjara",     "Jubilee",
    "Gomti",    "Hazratganj", "Civil", "Model",   "Malviya",   "Vaishali", "Rajajinagar", "Powai"};

constexpr std::array<std::string_view, 16> kCities = {
    "Delhi",   "Mumbai", "Chennai", "Kolkata", "Bengaluru", "Hyderabad", "Pune",   "Jaipur",
    "Lucknow", "Kochi",  "Indore",  "Bhopal",  "Patna",     "Nagpur",    "Surat",  "Mysuru"};

constexpr std::array<std::string_view, 5> kMailHosts = {"mail.com", "post.in", "inbox.net",
                                                        "webmail.org", "net.in"};

constexpr std::array<std::string_view, 5> kKeyAttributes = {"voter_id", "pan_no", "licence_no",
                                                            "account_no", "connection_no"};

/// Implicit reference templates by referenced domain.
constexpr std::array<std::string_view, 5> kMentionTemplates = {
    "Voter card {} verified", "PAN card {} submitted", "Driving License ID:{}",
    "Transfer from account {}", "Bill for connection {} paid"};

struct Person {
  std::string first;
  std::string middle;
  std::string last;
  std::string address;
  std::string dob;
  std::string phone;
  std::string email;
};

class Generator {
 public:
  explicit Generator(const GeneratorConfig& cfg) : cfg_(cfg), rng_(cfg.rng_seed) {
    for (std::size_t d = 0; d < kResidentDomains.size(); ++d) next_key_[d] = 10 + 7 * d;
  }

  GeneratedCorpus run() {
    for (std::size_t s = 0; s < cfg_.num_seed_entities; ++s) {
      Person p = new_person();
      const bool link_only = chance(cfg_.link_only_fraction);
      emit_entity(p, link_only);
      if (chance(cfg_.related_entity_prob)) emit_entity(relative_of(p), false);
    }
    return std::move(out_);
  }

 private:
  bool chance(double prob) { return std::bernoulli_distribution(prob)(rng_); }

  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

  template <typename Pool>
  std::string from(const Pool& pool) {
    return std::string(pool[pick(pool.size())]);
  }

  std::string new_address() {
    std::ostringstream a;
    a << "House " << (1 + pick(400)) << ' ' << from(kStreets) << ' ' << from(kStreetKinds) << ' '
      << from(kLocalities) << ' ' << from(kCities);
    return a.str();
  }

  std::string new_dob() {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04zu-%02zu-%02zu", 1940 + pick(66), 1 + pick(12), 1 + pick(28));
    return buf;
  }

  std::string new_phone() {
    // Sequential core keeps numbers unique; the leading digit varies.
    return std::to_string(6 + pick(4)) + std::to_string(100000000 + 7919 * ++phone_counter_ % 899999999);
  }

  Person new_person() {
    Person p;
    p.first = from(kFirstNames);
    p.middle = chance(0.6) ? from(kMiddleNames) : std::string();
    p.last = from(kLastNames);
    p.address = new_address();
    p.dob = new_dob();
    p.phone = new_phone();
    std::string local = p.first + "." + p.last + std::to_string(++email_counter_);
    std::transform(local.begin(), local.end(), local.begin(), [](unsigned char c) {
      return static_cast<char>(std::tolower(c));
    });
    p.email = local + "@" + from(kMailHosts);
    return p;
  }

  Person relative_of(const Person& p) {
    Person r = new_person();
    r.last = p.last;
    r.address = p.address;
    return r;
  }

  std::string skip_chars(const std::string& value) {
    std::istringstream in(value);
    std::vector<std::string> words;
    for (std::string w; in >> w;) words.push_back(w);
    std::vector<std::size_t> long_words;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (words[i].size() >= 4) long_words.push_back(i);
    }
    if (long_words.empty()) return value;
    auto& w = words[long_words[pick(long_words.size())]];
    const std::size_t skips = 1 + pick(2);
    for (std::size_t k = 0; k < skips && w.size() > 3; ++k) w.erase(1 + pick(w.size() - 1), 1);
    std::string joined;
    for (const auto& x : words) {
      if (!joined.empty()) joined += ' ';
      joined += x;
    }
    return joined;
  }

  std::string render_name(const Person& p, bool perturb) {
    std::string first = p.first;
    std::string last = p.last;
    std::string middle = p.middle;
    if (perturb && chance(cfg_.name_swap_prob)) std::swap(first, last);
    if (perturb && !middle.empty() && chance(cfg_.middle_name_drop_prob)) middle.clear();
    std::string name = first + (middle.empty() ? "" : " " + middle) + " " + last;
    if (perturb && chance(cfg_.typo_rate)) name = skip_chars(name);
    return name;
  }

  void emit_entity(const Person& p, bool link_only) {
    const std::string label = "e" + std::to_string(++out_.entities);
    if (link_only) ++out_.link_only_entities;

    std::vector<std::size_t> domains;
    for (std::size_t d = 0; d < kResidentDomains.size(); ++d) {
      if (chance(cfg_.doc_creation_prob[d])) domains.push_back(d);
    }
    if (domains.empty()) domains.push_back(pick(kResidentDomains.size()));
    // Link-only entities need at least two documents to be worth anything.
    if (link_only && domains.size() == 1) domains.push_back((domains[0] + 1 + pick(4)) % 5);
    std::sort(domains.begin(), domains.end());

    std::vector<Document> docs;
    for (std::size_t d : domains) {
      Document doc;
      const std::string key = std::to_string(next_key_[d]);
      next_key_[d] += 1 + pick(9);
      doc.id = std::string(kResidentDomains[d]) + key;
      doc.types.insert(std::string(kResidentDomains[d]));
      doc.attrs[std::string(kKeyAttributes[d])].insert(key);
      doc.attrs["name"].insert(render_name(p, !link_only));
      doc.attrs["address"].insert(!link_only && chance(cfg_.typo_rate) ? skip_chars(p.address)
                                                                        : p.address);
      docs.push_back(std::move(doc));
    }

    // Hard values. Ordinary entities spread each across documents at random;
    // link-only ones place each in at most one document.
    const std::array<std::pair<std::string_view, const std::string*>, 3> hard = {
        {{"dob", &p.dob}, {"phone", &p.phone}, {"email", &p.email}}};
    for (const auto& [name, value] : hard) {
      if (link_only) {
        if (chance(0.7)) docs[pick(docs.size())].attrs[std::string(name)].insert(*value);
        continue;
      }
      for (auto& doc : docs) {
        if (!chance(cfg_.attribute_drop_prob)) doc.attrs[std::string(name)].insert(*value);
      }
    }
    for (std::size_t i = 0; i < docs.size(); ++i) {
      if (kResidentDomains[domains[i]] == "PHN") docs[i].attrs["phone"].insert(p.phone);
    }

    // References: a random spanning tree, then extra pairs.
    const double tree_prob = link_only ? 1.0 : cfg_.reference_density;
    for (std::size_t i = 1; i < docs.size(); ++i) {
      if (chance(tree_prob)) add_reference(docs, domains, i, pick(i));
    }
    if (!link_only) {
      for (std::size_t i = 0; i < docs.size(); ++i) {
        for (std::size_t j = i + 1; j < docs.size(); ++j) {
          if (chance(cfg_.reference_density / 4)) add_reference(docs, domains, i, j);
        }
      }
    }

    for (auto& doc : docs) {
      out_.gold.emplace(doc.id, label);
      out_.documents.push_back(std::move(doc));
    }
  }

  void add_reference(std::vector<Document>& docs, const std::vector<std::size_t>& domains,
                     std::size_t i, std::size_t j) {
    if (chance(0.5)) std::swap(i, j);
    const std::string& target = docs[j].id;
    if (chance(0.5)) {
      docs[i].attrs["proof_id"].insert(target);
    } else {
      std::string text(kMentionTemplates[domains[j]]);
      text.replace(text.find("{}"), 2, target);
      docs[i].attrs["details"].insert(text);
    }
    out_.references.emplace_back(docs[i].id, target);
  }

  const GeneratorConfig& cfg_;
  std::mt19937_64 rng_;
  std::array<std::size_t, 5> next_key_{};
  std::uint64_t phone_counter_ = 0;
  std::uint64_t email_counter_ = 0;
  GeneratedCorpus out_;
};

void check_prob(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
}

}  // namespace

void GeneratorConfig::validate() const {
  if (num_seed_entities < 1) throw ConfigError("num_seed_entities must be at least 1");
  for (double p : doc_creation_prob) check_prob(p, "doc_creation_prob");
  check_prob(typo_rate, "typo_rate");
  check_prob(name_swap_prob, "name_swap_prob");
  check_prob(middle_name_drop_prob, "middle_name_drop_prob");
  check_prob(attribute_drop_prob, "attribute_drop_prob");
  check_prob(related_entity_prob, "related_entity_prob");
  check_prob(reference_density, "reference_density");
  check_prob(link_only_fraction, "link_only_fraction");
}

GeneratorConfig GeneratorConfig::from_json(const json& j) {
  GeneratorConfig cfg;
  try {
    cfg.num_seed_entities = j.value("num_seed_entities", cfg.num_seed_entities);
    if (j.contains("doc_creation_prob")) {
      const auto& d = j["doc_creation_prob"];
      if (d.is_number()) {
        cfg.doc_creation_prob.fill(d.get<double>());
      } else {
        for (std::size_t i = 0; i < kResidentDomains.size(); ++i) {
          const std::string dom(kResidentDomains[i]);
          if (d.contains(dom)) cfg.doc_creation_prob[i] = d[dom].get<double>();
        }
      }
    }
    cfg.typo_rate = j.value("typo_rate", cfg.typo_rate);
    cfg.name_swap_prob = j.value("name_swap_prob", cfg.name_swap_prob);
    cfg.middle_name_drop_prob = j.value("middle_name_drop_prob", cfg.middle_name_drop_prob);
    cfg.attribute_drop_prob = j.value("attribute_drop_prob", cfg.attribute_drop_prob);
    cfg.related_entity_prob = j.value("related_entity_prob", cfg.related_entity_prob);
    cfg.reference_density = j.value("reference_density", cfg.reference_density);
    cfg.link_only_fraction = j.value("link_only_fraction", cfg.link_only_fraction);
    cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed generator config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

json GeneratorConfig::to_json() const {
  json probs = json::object();
  for (std::size_t i = 0; i < kResidentDomains.size(); ++i) {
    probs[std::string(kResidentDomains[i])] = doc_creation_prob[i];
  }
  return {{"num_seed_entities", num_seed_entities},
          {"doc_creation_prob", probs},
          {"typo_rate", typo_rate},
          {"name_swap_prob", name_swap_prob},
          {"middle_name_drop_prob", middle_name_drop_prob},
          {"attribute_drop_prob", attribute_drop_prob},
          {"related_entity_prob", related_entity_prob},
          {"reference_density", reference_density},
          {"link_only_fraction", link_only_fraction},
          {"rng_seed", rng_seed}};
}

GeneratedCorpus generate(const GeneratorConfig& cfg) {
  cfg.validate();
  return Generator(cfg).run();
}

SchemaConfig residents_schema() {
  std::vector<std::string> types(kResidentDomains.begin(), kResidentDomains.end());
  std::vector<AttributeSpec> attrs;
  std::vector<PrimaryKeyRule> keys;
  for (std::size_t d = 0; d < kResidentDomains.size(); ++d) {
    AttributeSpec key;
    key.name = std::string(kKeyAttributes[d]);
    key.match_role = MatchRole::unique;
    attrs.push_back(key);
    keys.push_back({types[d], key.name, types[d]});
  }
  auto add = [&](std::string name, std::optional<MatchRole> role, RefRole ref,
                 std::optional<std::string> metric = {}, std::optional<double> threshold = {}) {
    AttributeSpec s;
    s.name = std::move(name);
    s.match_role = role;
    s.ref_role = ref;
    s.metric = std::move(metric);
    s.threshold = threshold;
    attrs.push_back(std::move(s));
  };
  add("name", MatchRole::soft, RefRole::none, "jaro_winkler", 0.9);
  add("address", MatchRole::soft, RefRole::none, "jaccard", 0.6);
  add("dob", MatchRole::hard, RefRole::none);
  add("phone", MatchRole::hard, RefRole::none);
  add("email", MatchRole::hard, RefRole::none);
  add("proof_id", std::nullopt, RefRole::explicit_ref);
  add("details", std::nullopt, RefRole::implicit_ref);
  return SchemaConfig(std::move(types), std::move(attrs), std::move(keys));
}

json residents_rules(bool with_traversal) {
  auto same = [](const char* a) { return json{{"predicate", "same"}, {"attribute", a}}; };
  json rules = json::array();
  rules.push_back({{"name", "name_address_dob"},
                   {"conjuncts", {same("name"), same("address"), same("dob")}}});
  rules.push_back({{"name", "name_phone"}, {"conjuncts", {same("name"), same("phone")}}});
  rules.push_back({{"name", "name_email"}, {"conjuncts", {same("name"), same("email")}}});
  if (with_traversal) {
    rules.push_back({{"name", "name_address_traversal"},
                     {"conjuncts", {same("name"), same("address"), {{"predicate", "traversal"}}}}});
  }
  return {{"rules", rules}};
}

void write_gold(std::ostream& out, const GoldStandard& gold) {
  for (const auto& [doc, label] : gold) out << doc << '\t' << label << '\n';
}

GoldStandard read_gold(std::istream& in) {
  GoldStandard gold;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(lineno, "gold line needs doc_id<TAB>label");
    auto doc = trim(std::string_view(line).substr(0, tab));
    auto label = trim(std::string_view(line).substr(tab + 1));
    if (doc.empty() || label.empty()) throw ParseError(lineno, "empty doc id or label");
    if (!gold.emplace(doc, label).second) throw ParseError(lineno, "document '" + doc + "' labelled twice");
  }
  return gold;
}

}  // namespace erld

// erld command-line front end.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "erld/datagen.hpp"
#include "erld/error.hpp"
#include "erld/eval.hpp"
#include "erld/pipeline.hpp"
#include "json.hpp"

namespace {

using json = nlohmann::json;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw erld::InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw erld::ConfigError("'" + path + "': " + e.what());
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw erld::InputError("cannot write '" + path + "'");
  return out;
}

erld::GoldStandard load_gold(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw erld::InputError("cannot open '" + path + "'");
  return erld::read_gold(in);
}

/// Schema from --schema, or the residents schema when absent.
erld::SchemaConfig load_schema(const std::string& path) {
  return path.empty() ? erld::residents_schema() : erld::SchemaConfig::from_json(load_json(path));
}

/// Match spec from --rules, falling back to a "rules" member of the schema file.
json load_match_spec(const std::string& rules_path, const std::string& schema_path) {
  if (!rules_path.empty()) return load_json(rules_path);
  if (!schema_path.empty()) {
    auto s = load_json(schema_path);
    if (s.contains("rules")) return json{{"rules", s["rules"]}};
    if (s.contains("linear")) return json{{"linear", s["linear"]}};
  }
  throw erld::ConfigError("no match rules given (--rules)");
}

struct TuningFlags {
  std::optional<std::uint32_t> lsh_m;
  std::optional<std::uint32_t> lsh_n;
  std::optional<std::uint64_t> lsh_seed;
  std::optional<int> max_steps;
  std::optional<int> ust_threshold;

  void attach(CLI::App* app) {
    app->add_option("--lsh-m", lsh_m, "minhashes per band");
    app->add_option("--lsh-n", lsh_n, "number of bands");
    app->add_option("--lsh-seed", lsh_seed, "seed for the minhash coefficients");
    app->add_option("--max-steps", max_steps, "DST-UST rounds");
    app->add_option("--ust-threshold", ust_threshold, "upstream fanout threshold");
  }

  void apply(erld::ResolverConfig& cfg) const {
    if (lsh_m || lsh_n || lsh_seed) {
      cfg.lsh = erld::LshParams::generate(lsh_m.value_or(3), lsh_n.value_or(6),
                                          lsh_seed.value_or(erld::kDefaultLshSeed));
    }
    if (max_steps) cfg.traversal.max_dst_ust_steps = *max_steps;
    if (ust_threshold) cfg.traversal.ust_fanout_threshold = *ust_threshold;
    cfg.traversal.validate();
    cfg.lsh.validate();
  }
};

erld::ResolverConfig make_config(const std::string& schema_path, const std::string& rules_path) {
  erld::ResolverConfig cfg;
  cfg.schema = load_schema(schema_path);
  cfg.match_spec = load_match_spec(rules_path, schema_path);
  (void)cfg.matcher();  // surfaces rule errors before any work
  return cfg;
}

void write_entity_file(const std::string& path, const std::vector<erld::Entity>& entities) {
  auto out = open_out(path);
  erld::write_entities(out, entities);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entity resolution over linked documents"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "write a synthetic residents corpus with gold labels");
  std::string gen_config, gen_out, gen_gold, gen_schema_out;
  std::optional<std::size_t> gen_seeds;
  std::optional<std::uint64_t> gen_seed;
  gen->add_option("--config", gen_config, "generator config (JSON)");
  gen->add_option("--out", gen_out, "corpus output (JSON lines)")->required();
  gen->add_option("--gold", gen_gold, "gold labels output (TSV)")->required();
  gen->add_option("--schema-out", gen_schema_out, "also write the matching schema");
  gen->add_option("--seeds", gen_seeds, "override num_seed_entities");
  gen->add_option("--rng-seed", gen_seed, "override rng_seed");

  auto* res = app.add_subcommand("resolve", "batch resolution");
  std::string res_schema, res_rules, res_in, res_state, res_out;
  TuningFlags res_flags;
  res->add_option("--schema", res_schema, "schema config (default: residents schema)");
  res->add_option("--rules", res_rules, "match rules");
  res->add_option("--in", res_in, "corpus (JSON lines)")->required();
  res->add_option("--state", res_state, "directory to persist resolution state");
  res->add_option("--out", res_out, "entities output (JSON lines)")->required();
  res_flags.attach(res);

  auto* inc = app.add_subcommand("resolve-inc", "resolve new documents against saved state");
  std::string inc_state, inc_in, inc_out;
  inc->add_option("--state", inc_state, "state directory")->required();
  inc->add_option("--in", inc_in, "new documents (JSON lines)")->required();
  inc->add_option("--out", inc_out, "all current entities (JSON lines)")->required();

  auto* ev = app.add_subcommand("evaluate", "pairwise precision, recall and F1");
  std::string ev_pred, ev_gold, ev_report;
  ev->add_option("--pred", ev_pred, "entities (JSON lines)")->required();
  ev->add_option("--gold", ev_gold, "gold labels (TSV)")->required();
  ev->add_option("--report", ev_report, "write the metrics here as well");

  auto* ben = app.add_subcommand("benefit", "compare two rule sets, typically with and without traversal");
  std::string ben_corpus, ben_gold, ben_a, ben_b, ben_schema, ben_report;
  TuningFlags ben_flags;
  ben->add_option("--corpus", ben_corpus, "corpus (JSON lines)")->required();
  ben->add_option("--gold", ben_gold, "gold labels (TSV)")->required();
  ben->add_option("--rules-a", ben_a, "rules with traversal")->required();
  ben->add_option("--rules-b", ben_b, "rules without traversal")->required();
  ben->add_option("--schema", ben_schema, "schema config (default: residents schema)");
  ben->add_option("--report", ben_report, "write the report here as well");
  ben_flags.attach(ben);

  auto* base = app.add_subcommand("baseline-allpairs", "all-pairs matching plus connected components");
  std::string base_in, base_rules, base_schema, base_out, base_gold;
  TuningFlags base_flags;
  base->add_option("--in", base_in, "corpus (JSON lines)")->required();
  base->add_option("--rules", base_rules, "match rules");
  base->add_option("--schema", base_schema, "schema config (default: residents schema)");
  base->add_option("--out", base_out, "entities output (JSON lines)");
  base->add_option("--gold", base_gold, "evaluate against these gold labels");
  base_flags.attach(base);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", "usage"}, {"message", e.what()}}.dump() << '\n';
    return 2;
  }

  try {
    if (*gen) {
      erld::GeneratorConfig cfg;
      if (!gen_config.empty()) cfg = erld::GeneratorConfig::from_json(load_json(gen_config));
      if (gen_seeds) cfg.num_seed_entities = *gen_seeds;
      if (gen_seed) cfg.rng_seed = *gen_seed;
      auto corpus = erld::generate(cfg);
      {
        auto out = open_out(gen_out);
        erld::write_corpus(out, corpus.documents);
      }
      {
        auto out = open_out(gen_gold);
        erld::write_gold(out, corpus.gold);
      }
      if (!gen_schema_out.empty()) open_out(gen_schema_out) << erld::residents_schema().to_json().dump(2) << '\n';
      std::cout << json{{"documents", corpus.documents.size()},
                        {"entities", corpus.entities},
                        {"link_only_entities", corpus.link_only_entities},
                        {"references", corpus.references.size()}}
                       .dump()
                << '\n';
    } else if (*res) {
      auto cfg = make_config(res_schema, res_rules);
      res_flags.apply(cfg);
      auto docs = erld::read_corpus_file(res_in, cfg.schema);
      std::optional<erld::StateLock> lock;
      if (!res_state.empty()) lock.emplace(res_state);
      auto result = erld::resolve_batch(std::move(docs), cfg);
      write_entity_file(res_out, result.entities);
      if (!res_state.empty()) erld::save_state(result.state, res_state);
      auto summary = result.stats.to_json();
      summary["entities"] = result.entities.size();
      std::cout << summary.dump() << '\n';
    } else if (*inc) {
      erld::StateLock lock(inc_state);
      auto state = erld::load_state(inc_state);
      auto cfg = state.config();
      auto docs = erld::read_corpus_file(inc_in, cfg.schema);
      auto result = erld::resolve_incremental(std::move(docs), state, cfg);
      erld::save_state(state, inc_state);
      write_entity_file(inc_out, state.all_entities());
      auto summary = result.stats.to_json();
      summary["updated_entities"] = result.updated.size();
      summary["retired_entities"] = result.retired;
      summary["entities"] = state.entities.size();
      std::cout << summary.dump() << '\n';
    } else if (*ev) {
      std::ifstream pred(ev_pred);
      if (!pred) throw erld::InputError("cannot open '" + ev_pred + "'");
      auto metrics = erld::pairwise_metrics(erld::read_entity_partition(pred), load_gold(ev_gold));
      const auto j = metrics.to_json();
      if (!ev_report.empty()) open_out(ev_report) << j.dump(2) << '\n';
      std::cout << j.dump() << '\n';
    } else if (*ben) {
      auto with = make_config(ben_schema, ben_a);
      auto without = make_config(ben_schema, ben_b);
      ben_flags.apply(with);
      ben_flags.apply(without);
      auto docs = erld::read_corpus_file(ben_corpus, with.schema);
      auto report = erld::run_benefit_experiment(docs, load_gold(ben_gold), with, without);
      const auto j = report.to_json();
      if (!ben_report.empty()) open_out(ben_report) << j.dump(2) << '\n';
      std::cout << j.dump() << '\n';
    } else if (*base) {
      auto cfg = make_config(base_schema, base_rules);
      base_flags.apply(cfg);
      auto docs = erld::read_corpus_file(base_in, cfg.schema);
      auto result = erld::allpairs_baseline(docs, cfg);
      if (!base_out.empty()) write_entity_file(base_out, result.entities);
      json summary{{"entities", result.entities.size()},
                   {"match_evaluations", result.match_evaluations},
                   {"seconds", result.seconds}};
      if (!base_gold.empty()) {
        summary["metrics"] =
            erld::pairwise_metrics(erld::partition_of(result.entities), load_gold(base_gold)).to_json();
      }
      std::cout << summary.dump() << '\n';
    }
  } catch (const erld::Error& e) {
    std::cerr << json{{"error", e.kind()}, {"message", e.what()}}.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}

// Command-line entry point: corpus extraction, relevance audit, training,
// evaluation, importance, assessment and annotation.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cefr/catalog.hpp"
#include "cefr/corpus.hpp"
#include "cefr/error.hpp"
#include "cefr/error_annotation.hpp"
#include "cefr/extract.hpp"
#include "cefr/matrix.hpp"
#include "cefr/ml/pipeline.hpp"
#include "cefr/relevance.hpp"
#include "cefr/resources.hpp"
#include "cefr/service.hpp"
#include "cefr/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

struct Options {
  std::string config;
  std::string manifest;
  std::string docs;
  std::string resources;
  std::string catalog;
  std::string edits;
  std::string matrix;
  std::string relevance;
  std::string grid;
  std::string model;
  std::string out;
  std::string split = "test1";
  std::string metric = "accuracy";
  std::string conllu;
  std::string text;
  std::string service_config;
  std::vector<std::string> correctors;
  std::optional<std::uint64_t> seed;
  double alpha = 0.05;
  double denominator = 148.0;
  bool literal_threshold = true;
  bool all_splits = false;
  bool deployed = false;
  bool include_error_features = false;
  std::size_t repeats = 10;
  std::size_t top = 5;
  std::size_t folds = 10;
  double scale = 1.0;
  unsigned threads = 0;
};

json read_json(const fs::path& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw cefr::DataError("cannot open " + what + " " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw cefr::DataError(what + " " + path.string() + " is not valid JSON: " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  cefr::write_file_atomic(path, text);
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path require_out(const Options& o) {
  if (o.out.empty()) throw cefr::ConfigError("--out is required");
  return o.out;
}

std::uint64_t require_seed(const Options& o) {
  if (!o.seed) throw cefr::ConfigError("--seed is required for this command");
  return *o.seed;
}

cefr::FeatureCatalog load_catalog(const Options& o) {
  return o.catalog.empty() ? cefr::FeatureCatalog::standard() : cefr::FeatureCatalog::load(o.catalog);
}

cefr::FeatureMatrix load_matrix(const Options& o) {
  if (o.matrix.empty()) throw cefr::ConfigError("--matrix is required");
  return cefr::FeatureMatrix::load(o.matrix);
}

cefr::AuditConfig audit_config(const Options& o) {
  cefr::AuditConfig c;
  c.alpha0 = o.alpha;
  c.bonferroni_denominator = o.denominator;
  c.literal_threshold = o.literal_threshold;
  if (o.all_splits) c.split = std::nullopt;
  c.threads = o.threads;
  return c;
}

std::vector<std::string> relevant_ids(const Options& o, const cefr::FeatureMatrix& m) {
  if (!o.relevance.empty()) return read_json(o.relevance, "relevance report").at("relevant").get<std::vector<std::string>>();
  return cefr::audit_relevance(m, audit_config(o)).relevant_ids();
}

cefr::FeatureMatrix split_rows(const cefr::FeatureMatrix& m, const std::string& split) {
  cefr::FeatureMatrix out = m.filter_split(cefr::parse_split(split));
  if (out.rows.empty()) throw cefr::DataError("the matrix has no " + split + " rows");
  return out;
}

int cmd_synth(const Options& o) {
  const fs::path out = require_out(o);
  cefr::synth::CorpusOptions co;
  co.seed = o.seed.value_or(42);
  if (o.scale != 1.0) co.design = cefr::synth::scaled_design(o.scale);
  const auto corpus = cefr::synth::make_corpus(co);
  cefr::synth::write_corpus(out, corpus, cefr::synth::make_resources());
  std::cout << "wrote " << corpus.corpus.documents.size() << " documents to " << out.string() << "\n";
  return 0;
}

int cmd_catalog(const Options& o) {
  const auto catalog = load_catalog(o);
  if (o.out.empty()) {
    std::cout << catalog.to_json().dump(2) << "\n";
  } else {
    write_json(o.out, catalog.to_json());
  }
  std::cerr << catalog.size() << " features, hash " << catalog.hash() << "\n";
  return 0;
}

int cmd_extract(const Options& o) {
  if (o.manifest.empty()) throw cefr::ConfigError("--manifest is required");
  if (o.resources.empty()) throw cefr::ConfigError("--resources is required");
  const fs::path out = require_out(o);
  const fs::path root = o.docs.empty() ? fs::path(o.manifest).parent_path() : fs::path(o.docs);
  const auto corpus = cefr::load_corpus(o.manifest, root);
  const auto catalog = load_catalog(o);
  const auto res = cefr::load_resources(cefr::ResourcePaths::in_directory(o.resources));
  std::optional<cefr::EditAnnotationSet> edits;
  if (!o.edits.empty()) edits = cefr::load_edits(o.edits);
  const auto m = cefr::extract_features(corpus, catalog, res, edits ? &*edits : nullptr);
  m.save(out);
  std::cout << "extracted " << m.rows.size() << " x " << m.cols() << " matrix to " << out.string() << "\n";
  return 0;
}

int cmd_audit(const Options& o) {
  const fs::path out = require_out(o);
  const auto m = load_matrix(o);
  const auto report = cefr::audit_relevance(m, audit_config(o));
  write_json(out / "relevance.json", report.to_json());
  write_text(out / "relevance.txt", report.render_table());
  std::cout << report.relevant_ids().size() << " of " << report.verdicts.size() << " features relevant at p <= "
            << report.threshold << "\n";
  return 0;
}

int cmd_train(const Options& o) {
  const fs::path out = require_out(o);
  const std::uint64_t seed = require_seed(o);
  const auto m = load_matrix(o);
  const auto train = split_rows(m, "train");
  const auto relevant = relevant_ids(o, m);

  if (o.deployed) {
    std::vector<std::string> warnings;
    const auto catalog = load_catalog(o);
    if (catalog.hash() != m.catalog_hash) throw cefr::DataError("the matrix was extracted under a different catalog");
    const auto models = cefr::train_service_models(train, catalog, relevant, seed, o.include_error_features, &warnings);
    json config = {{"models", json::object()}, {"include_error_features", o.include_error_features}};
    for (const auto& [slot, model] : models) {
      cefr::ml::save_model(model, out / (slot + ".json"));
      config["models"][slot] = slot + ".json";
      std::cout << slot << ": " << model.spec.name() << " (" << model.features.size() << " features)\n";
    }
    if (!o.resources.empty()) config["resources"] = fs::absolute(o.resources).string();
    if (!o.catalog.empty()) config["catalog"] = fs::absolute(o.catalog).string();
    write_json(out / "service.json", config);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    return 0;
  }

  json grid_json;
  if (o.grid.empty()) {
    grid_json = {{"pools", {"relevant_only", "all"}},
                 {"classifiers", {"lr", "lda", "svm"}},
                 {"univariate_k", {5, 10, 20}}};
  } else {
    grid_json = read_json(o.grid, "grid");
  }
  const auto grid = cefr::ml::expand_grid(grid_json, seed);
  cefr::ml::RankingOptions ro;
  ro.top = o.top;
  ro.folds = o.folds;
  ro.threads = o.threads;
  const auto ranking = cefr::ml::rank_pipelines(train, grid, &relevant, ro);
  json ranked = json::array();
  for (const auto& r : ranking) {
    const auto pool = cefr::ml::pool_ids(train, r.spec.pool, &relevant);
    const auto model = cefr::ml::train(train, r.spec, pool);
    const fs::path file = out / "models" / (r.spec.name() + ".json");
    if (!fs::exists(file.parent_path())) fs::create_directories(file.parent_path());
    cefr::ml::save_model(model, file);
    json entry = r.to_json();
    entry["model_file"] = fs::relative(file, out).string();
    entry["selected_features"] = model.features;
    ranked.push_back(entry);
  }
  write_json(out / "ranking.json", {{"grid_size", grid.size()}, {"relevant_features", relevant}, {"ranking", ranked}});
  write_text(out / "ranking.txt", cefr::ml::render_ranking(ranking));
  std::cout << cefr::ml::render_ranking(ranking);
  return 0;
}

cefr::ml::TrainedModel load_model_for(const Options& o, const cefr::FeatureMatrix& m) {
  if (o.model.empty()) throw cefr::ConfigError("--model is required");
  return cefr::ml::load_model(o.model, m.catalog_hash);
}

int cmd_evaluate(const Options& o) {
  const fs::path out = require_out(o);
  const auto m = load_matrix(o);
  const auto model = load_model_for(o, m);
  const auto report = cefr::ml::evaluate(model, split_rows(m, o.split));
  write_json(out / "eval.json", {{"model", model.spec.name()}, {"split", o.split}, {"report", report.to_json()}});
  const std::string table = report.render_table(model.spec.name() + " on " + o.split);
  write_text(out / "eval.txt", table);
  std::cout << table;
  return 0;
}

int cmd_importance(const Options& o) {
  const fs::path out = require_out(o);
  const std::uint64_t seed = require_seed(o);
  const auto m = load_matrix(o);
  const auto model = load_model_for(o, m);
  const auto report =
      cefr::ml::permutation_importance(model, split_rows(m, o.split), cefr::ml::parse_metric(o.metric), o.repeats, seed);
  write_json(out / "importance.json", {{"model", model.spec.name()}, {"split", o.split}, {"report", report.to_json()}});
  write_text(out / "importance.txt", report.render_table());
  std::cout << report.render_table();
  return 0;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cefr::DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int cmd_assess(const Options& o) {
  if (o.service_config.empty()) throw cefr::ConfigError("--service-config is required");
  if (o.conllu.empty() == o.text.empty()) throw cefr::ConfigError("give exactly one of --conllu or --text");
  const auto service = cefr::AssessService::from_config(cefr::ServiceConfig::load(o.service_config));
  const json body = o.conllu.empty() ? json{{"text", slurp(o.text)}} : json{{"conllu", slurp(o.conllu)}};
  const cefr::HttpReply reply = service->assess(body.dump());
  if (!o.out.empty()) write_json(o.out, reply.body);
  std::cout << reply.body.dump(2) << "\n";
  if (reply.status == 200) return 0;
  return reply.status == 400 ? kExitUsage : kExitData;
}

int cmd_serve(const Options& o) {
  if (o.service_config.empty()) throw cefr::ConfigError("--service-config is required");
  const auto config = cefr::ServiceConfig::load(o.service_config);
  const auto service = cefr::AssessService::from_config(config);
  for (const auto& w : service->health().at("warnings")) std::cerr << "warning: " << w.get<std::string>() << "\n";
  std::cerr << "listening on " << config.host << ":" << config.port << "\n";
  cefr::serve(*service, config.host, config.port, config.cors_origin);
  return 0;
}

int cmd_annotate(const Options& o) {
  if (o.manifest.empty()) throw cefr::ConfigError("--manifest is required");
  if (o.correctors.empty()) throw cefr::ConfigError("--corrector is required (TOOL=URL)");
  const fs::path out = require_out(o);
  const fs::path root = o.docs.empty() ? fs::path(o.manifest).parent_path() : fs::path(o.docs);
  const auto corpus = cefr::load_corpus(o.manifest, root);
  std::vector<std::unique_ptr<cefr::CorrectorClient>> owned;
  std::vector<const cefr::CorrectorClient*> clients;
  for (const auto& spec : o.correctors) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw cefr::ConfigError("corrector must look like speller=http://host:port/path");
    cefr::CorrectorClientContract c;
    c.tool = cefr::parse_tool(spec.substr(0, eq));
    c.endpoint = spec.substr(eq + 1);
    owned.push_back(std::make_unique<cefr::HttpCorrector>(c));
    clients.push_back(owned.back().get());
  }
  const auto edits = cefr::annotate_corpus(corpus, clients, std::max(1u, o.threads));
  cefr::save_edits(out, edits);
  std::cout << "annotated " << edits.size() << " documents\n";
  return 0;
}

// Turns the JSON config into extra arguments for options the command line
// did not set, so explicit flags always win.
std::vector<std::string> config_arguments(const json& cfg, CLI::App* sub, const std::set<std::string>& given) {
  std::vector<std::string> extra;
  for (const auto& [key, value] : cfg.items()) {
    const std::string flag = "--" + key;
    if (given.contains(flag)) continue;
    CLI::Option* opt = sub->get_option_no_throw(flag);
    if (opt == nullptr) continue;
    if (value.is_boolean()) {
      if (opt->get_expected_min() == 0) {
        if (value.get<bool>()) extra.push_back(flag);
      } else {
        extra.push_back(flag);
        extra.push_back(value.get<bool>() ? "true" : "false");
      }
    } else if (value.is_array()) {
      for (const auto& v : value) {
        extra.push_back(flag);
        extra.push_back(v.is_string() ? v.get<std::string>() : v.dump());
      }
    } else {
      extra.push_back(flag);
      extra.push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
  }
  return extra;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CEFR level assessment toolkit for Estonian learner texts"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "JSON file whose keys mirror the long flags; allowed anywhere");

  auto add_seed = [&](CLI::App* s) { s->add_option("--seed", o.seed, "random seed"); };
  auto add_out = [&](CLI::App* s, const std::string& what) { s->add_option("--out", o.out, what); };

  auto* synth = app.add_subcommand("synth", "write a seeded synthetic corpus with resources and edits");
  add_out(synth, "output directory");
  add_seed(synth);
  synth->add_option("--scale", o.scale, "multiplier on the per-cell document counts");

  auto* catalog = app.add_subcommand("catalog", "print or write the feature catalog");
  catalog->add_option("--catalog", o.catalog, "catalog JSON (default: built-in)");
  add_out(catalog, "output file");

  auto* extract = app.add_subcommand("extract", "corpus -> feature matrix");
  extract->add_option("--manifest", o.manifest, "corpus manifest JSON");
  extract->add_option("--docs", o.docs, "document directory (default: manifest directory)");
  extract->add_option("--resources", o.resources, "lexical resource directory");
  extract->add_option("--catalog", o.catalog, "catalog JSON (default: built-in)");
  extract->add_option("--edits", o.edits, "edits JSON (needed for error features)");
  add_out(extract, "matrix JSON file");

  auto add_audit = [&](CLI::App* s) {
    s->add_option("--alpha", o.alpha, "family-wise alpha");
    s->add_option("--bonferroni-denominator", o.denominator, "number of tests the alpha is divided by");
    s->add_option("--literal-threshold", o.literal_threshold, "round the threshold to one significant digit");
    s->add_flag("--all-splits", o.all_splits, "audit every row instead of the training split");
    s->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  };

  auto* audit = app.add_subcommand("audit", "feature matrix -> relevance report");
  audit->add_option("--matrix", o.matrix, "feature matrix JSON");
  add_audit(audit);
  add_out(audit, "output directory");

  auto* train = app.add_subcommand("train", "rank pipelines and save the best models");
  train->add_option("--matrix", o.matrix, "feature matrix JSON");
  train->add_option("--relevance", o.relevance, "relevance report (default: audit the matrix)");
  train->add_option("--grid", o.grid, "pipeline grid JSON");
  train->add_option("--top", o.top, "number of pipelines kept");
  train->add_option("--folds", o.folds, "cross-validation folds");
  train->add_flag("--deployed", o.deployed, "train the four service models instead of ranking a grid");
  train->add_flag("--include-error-features", o.include_error_features, "with --deployed, also serve error features");
  train->add_option("--catalog", o.catalog, "catalog JSON (default: built-in)");
  train->add_option("--resources", o.resources, "resource directory recorded in the service config");
  add_audit(train);
  add_seed(train);
  add_out(train, "output directory");

  auto* evaluate = app.add_subcommand("evaluate", "model + matrix -> evaluation report");
  evaluate->add_option("--model", o.model, "model JSON");
  evaluate->add_option("--matrix", o.matrix, "feature matrix JSON");
  evaluate->add_option("--split", o.split, "split to evaluate on");
  add_out(evaluate, "output directory");

  auto* importance = app.add_subcommand("importance", "permutation importance of a model's features");
  importance->add_option("--model", o.model, "model JSON");
  importance->add_option("--matrix", o.matrix, "feature matrix JSON");
  importance->add_option("--split", o.split, "split to shuffle on");
  importance->add_option("--metric", o.metric, "accuracy or balanced_accuracy");
  importance->add_option("--repeats", o.repeats, "shuffles per feature");
  add_seed(importance);
  add_out(importance, "output directory");

  auto* assess = app.add_subcommand("assess", "assess one document with the service models");
  assess->add_option("--service-config", o.service_config, "service config JSON");
  assess->add_option("--conllu", o.conllu, "CoNLL-U document");
  assess->add_option("--text", o.text, "raw text (needs a tagger endpoint)");
  add_out(assess, "result JSON file");

  auto* serve = app.add_subcommand("serve", "run the HTTP assessment service");
  serve->add_option("--service-config", o.service_config, "service config JSON");

  auto* annotate = app.add_subcommand("annotate", "collect correction edits from HTTP correctors");
  annotate->add_option("--manifest", o.manifest, "corpus manifest JSON");
  annotate->add_option("--docs", o.docs, "document directory (default: manifest directory)");
  annotate->add_option("--corrector", o.correctors, "TOOL=URL, repeatable");
  annotate->add_option("--threads", o.threads, "documents in flight");
  add_out(annotate, "edits JSON file");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    // Locate --config and the subcommand before the real parse.
    std::string config_path;
    std::string sub_name;
    std::set<std::string> given;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
      const std::string& a = args[i];
      if (a == "--config" && i + 1 < args.size()) {
        config_path = args[++i];
        continue;
      }
      if (a.rfind("--config=", 0) == 0) {
        config_path = a.substr(9);
        continue;
      }
      rest.push_back(a);
      if (a.rfind("--", 0) == 0) {
        given.insert(a.substr(0, a.find('=')));
      } else if (sub_name.empty() && app.get_subcommand_no_throw(a) != nullptr) {
        sub_name = a;
      }
    }
    args = rest;
    if (!config_path.empty() && !sub_name.empty()) {
      const json cfg = read_json(config_path, "config");
      if (!cfg.is_object()) throw cefr::ConfigError("config must be a JSON object");
      const auto extra = config_arguments(cfg, app.get_subcommand(sub_name), given);
      args.insert(args.end(), extra.begin(), extra.end());
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  } catch (const cefr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*synth) return cmd_synth(o);
    if (*catalog) return cmd_catalog(o);
    if (*extract) return cmd_extract(o);
    if (*audit) return cmd_audit(o);
    if (*train) return cmd_train(o);
    if (*evaluate) return cmd_evaluate(o);
    if (*importance) return cmd_importance(o);
    if (*assess) return cmd_assess(o);
    if (*serve) return cmd_serve(o);
    if (*annotate) return cmd_annotate(o);
  } catch (const cefr::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const bool usage = e.kind() == cefr::Error::Kind::kConfig || e.kind() == cefr::Error::Kind::kUsage;
    return usage ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

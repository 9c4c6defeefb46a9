#include "cefr/service.hpp"

#include <fstream>
#include <set>

#include <httplib.h>

#include "cefr/error.hpp"
#include "cefr/extract.hpp"

namespace cefr {
namespace {

HttpReply error_reply(int status, const std::string& message, const std::string& upstream = "") {
  nlohmann::json body = {{"error", message}, {"status", status}};
  if (!upstream.empty()) body["upstream"] = upstream;
  return {status, body};
}

std::string level_name(int index) { return std::string(to_string(kLevels.at(static_cast<std::size_t>(index)))); }

// Holds one upstream slot for the lifetime of the guard.
class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& s_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

std::optional<Category> slot_category(const std::string& slot) {
  if (slot == "lexical") return Category::kLexical;
  if (slot == "morphological") return Category::kMorphological;
  if (slot == "surface") return Category::kSurface;
  if (slot == "error") return Category::kError;
  return std::nullopt;
}

HttpTagger::HttpTagger(std::string endpoint, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), timeout_(timeout) {
  split_url(endpoint_);
}

std::string HttpTagger::tag(const std::string& text) const {
  const HttpUrl url = split_url(endpoint_);
  httplib::Client client(url.scheme_host_port);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  auto res = client.Post(url.path, text, "text/plain; charset=utf-8");
  if (!res) throw UpstreamError("tagger", "request to " + endpoint_ + " failed: " + httplib::to_string(res.error()), true);
  if (res->status != 200) {
    throw UpstreamError("tagger", endpoint_ + " answered HTTP " + std::to_string(res->status), res->status >= 500);
  }
  return res->body;
}

ServiceConfig ServiceConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  try {
    ServiceConfig c;
    for (const auto& [slot, path] : j.at("models").items()) {
      if (slot != "mixed" && !slot_category(slot)) throw ConfigError("unknown model slot '" + slot + "'");
      c.models[slot] = resolve(base_dir, path.get<std::string>());
    }
    if (!c.models.contains("mixed")) throw ConfigError("service config needs a mixed model");
    if (j.contains("catalog")) c.catalog = resolve(base_dir, j.at("catalog").get<std::string>());
    if (j.contains("resources")) c.resources = resolve(base_dir, j.at("resources").get<std::string>());
    if (j.contains("tagger") && !j.at("tagger").is_null()) {
      const auto& t = j.at("tagger");
      c.tagger = UpstreamConfig{t.at("endpoint").get<std::string>(),
                                std::chrono::milliseconds(t.value("timeout_ms", 10000))};
    }
    for (const auto& k : j.value("correctors", nlohmann::json::array())) {
      CorrectorClientContract cc;
      cc.endpoint = k.at("endpoint").get<std::string>();
      cc.tool = parse_tool(k.at("tool").get<std::string>());
      cc.timeout = std::chrono::milliseconds(k.value("timeout_ms", 10000));
      c.correctors.push_back(cc);
    }
    c.include_error_features = j.value("include_error_features", false);
    c.host = j.value("host", c.host);
    c.port = j.value("port", c.port);
    c.cors_origin = j.value("cors_origin", c.cors_origin);
    c.max_upstream_concurrency = j.value("max_upstream_concurrency", c.max_upstream_concurrency);
    if (c.max_upstream_concurrency < 1) throw ConfigError("max_upstream_concurrency must be at least 1");
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed service config: ") + e.what());
  }
}

ServiceConfig ServiceConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open service config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("service config " + path.string() + " is not valid JSON: " + e.what());
  }
  return from_json(j, path.parent_path());
}

AssessService::AssessService(FeatureCatalog catalog, LexicalResources resources,
                             std::map<std::string, ml::TrainedModel> models, std::vector<std::string> load_warnings,
                             std::unique_ptr<Tagger> tagger, std::vector<std::unique_ptr<CorrectorClient>> correctors,
                             bool include_error_features, int max_upstream_concurrency)
    : catalog_(std::move(catalog)),
      resources_(std::move(resources)),
      models_(std::move(models)),
      load_warnings_(std::move(load_warnings)),
      tagger_(std::move(tagger)),
      correctors_(std::move(correctors)),
      include_error_features_(include_error_features),
      upstream_slots_(std::max(1, max_upstream_concurrency)) {
  if (!include_error_features_) models_.erase("error");
  for (const auto& [slot, model] : models_) {
    for (const auto& f : model.features) {
      if (!catalog_.contains(f)) throw DataError("model '" + slot + "' uses feature '" + f + "' missing from the catalog");
    }
  }
}

std::unique_ptr<AssessService> AssessService::from_config(const ServiceConfig& config) {
  FeatureCatalog catalog = config.catalog ? FeatureCatalog::load(*config.catalog) : FeatureCatalog::standard();
  LexicalResources res;
  if (config.resources) res = load_resources(ResourcePaths::in_directory(*config.resources));
  std::map<std::string, ml::TrainedModel> models;
  std::vector<std::string> warnings;
  const std::string hash = catalog.hash();
  for (const auto& [slot, path] : config.models) {
    if (slot == "error" && !config.include_error_features) continue;
    try {
      models.emplace(slot, ml::load_model(path, hash));
    } catch (const Error& e) {
      warnings.push_back("model '" + slot + "' not loaded: " + e.what());
    }
  }
  std::unique_ptr<Tagger> tagger;
  if (config.tagger) tagger = std::make_unique<HttpTagger>(config.tagger->endpoint, config.tagger->timeout);
  std::vector<std::unique_ptr<CorrectorClient>> correctors;
  for (const auto& c : config.correctors) correctors.push_back(std::make_unique<HttpCorrector>(c));
  return std::make_unique<AssessService>(std::move(catalog), std::move(res), std::move(models), std::move(warnings),
                                         std::move(tagger), std::move(correctors), config.include_error_features,
                                         config.max_upstream_concurrency);
}

nlohmann::json AssessService::health() const {
  nlohmann::json loaded = nlohmann::json::array();
  for (const auto& [slot, m] : models_) loaded.push_back(slot);
  std::vector<std::string> warnings = load_warnings_;
  for (const auto& slot : {"lexical", "morphological", "surface"}) {
    if (!models_.contains(slot)) warnings.push_back(std::string("no ") + slot + " model loaded");
  }
  if (!ready()) warnings.push_back("mixed model not loaded; /assess answers 503");
  return {{"ok", ready()}, {"loaded_models", loaded}, {"warnings", warnings}};
}

nlohmann::json AssessService::models() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [slot, m] : models_) {
    out.push_back({{"slot", slot},
                   {"id", m.spec.name()},
                   {"spec", m.spec.to_json()},
                   {"catalog_hash", m.catalog_hash},
                   {"selected_features", m.features},
                   {"trained_at", m.trained_at ? nlohmann::json(*m.trained_at) : nlohmann::json(nullptr)}});
  }
  return {{"catalog_hash", catalog_.hash()}, {"models", out}};
}

HttpReply AssessService::assess(const std::string& body) const {
  if (!ready()) return error_reply(503, "models not loaded");
  nlohmann::json req;
  try {
    req = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception&) {
    return error_reply(400, "request body is not valid JSON");
  }
  if (!req.is_object()) return error_reply(400, "request body must be a JSON object");
  const bool has_conllu = req.contains("conllu");
  const bool has_text = req.contains("text");
  if (has_conllu == has_text) return error_reply(400, "provide exactly one of 'conllu' or 'text'");
  const auto& field = has_conllu ? req.at("conllu") : req.at("text");
  if (!field.is_string()) return error_reply(400, std::string("'") + (has_conllu ? "conllu" : "text") + "' must be a string");

  std::string conllu;
  if (has_text) {
    if (!tagger_) return error_reply(400, "raw text needs a configured tagger; send 'conllu' instead");
    try {
      SlotGuard guard(upstream_slots_);
      conllu = tagger_->tag(field.get<std::string>());
    } catch (const UpstreamError& e) {
      return error_reply(502, e.what(), e.upstream());
    }
  } else {
    conllu = field.get<std::string>();
  }

  Document doc;
  doc.doc_id = "submission";
  try {
    doc.sentences = parse_conllu_string(conllu);
  } catch (const ParseError& e) {
    if (has_text) return error_reply(502, std::string("tagger returned invalid CoNLL-U: ") + e.what(), "tagger");
    return error_reply(400, std::string("invalid CoNLL-U: ") + e.what());
  }
  if (doc.sentences.empty() || doc.word_count() == 0) return error_reply(422, "document has no words");
  try {
    return assess_document(std::move(doc));
  } catch (const UpstreamError& e) {
    return error_reply(502, e.what(), e.upstream());
  } catch (const Error& e) {
    return error_reply(422, e.what());
  }
}

HttpReply AssessService::assess_document(Document doc) const {
  std::vector<std::string> warnings;
  const std::size_t words = doc.word_count();
  if (words < kShortTextWords) {
    warnings.push_back("text has " + std::to_string(words) + " words; assessments of texts under " +
                       std::to_string(kShortTextWords) + " words are unreliable");
  }

  // Error features need edits; without correctors they are imputed.
  const bool want_errors = catalog_.has_category(Category::kError);
  const bool can_correct = include_error_features_ && !correctors_.empty();
  std::vector<Edit> edits;
  if (want_errors && can_correct) {
    for (const auto& c : correctors_) {
      SlotGuard guard(upstream_slots_);
      std::vector<Edit> e = fetch_edits(doc, *c);
      edits.insert(edits.end(), e.begin(), e.end());
    }
    validate_edits(doc, edits);
  }
  FeatureMap values;
  if (!want_errors || can_correct) {
    values = extract_document(doc, catalog_, resources_, &edits);
  } else {
    std::vector<FeatureDef> defs;
    for (const auto& d : catalog_.defs()) {
      if (d.category != Category::kError) defs.push_back(d);
    }
    values = extract_document(doc, FeatureCatalog(defs), resources_, nullptr);
    for (const auto& id : catalog_.ids(Category::kError)) values[id] = FeatureValue::undefined();
  }

  FeatureMatrix m;
  m.feature_ids = catalog_.ids();
  m.catalog_hash = catalog_.hash();
  FeatureRow row;
  row.doc_id = doc.doc_id;
  for (const auto& id : m.feature_ids) {
    const FeatureValue& v = values.at(id);
    row.values.push_back(v.value);
    row.degenerate.push_back(v.degenerate ? 1 : 0);
  }
  m.rows.push_back(std::move(row));

  nlohmann::json result;
  nlohmann::json sub = nlohmann::json::object();
  nlohmann::json ids = nlohmann::json::object();
  std::set<std::string> used;
  for (const auto& [slot, model] : models_) {
    const std::string level = level_name(model.predict_row(m, 0));
    if (slot == "mixed") result["overall_level"] = level;
    else sub[slot] = level;
    ids[slot == "mixed" ? "overall" : slot] = model.spec.name();
    used.insert(model.features.begin(), model.features.end());
  }
  result["sub_levels"] = sub;
  result["model_ids"] = ids;

  nlohmann::json report = nlohmann::json::array();
  std::vector<std::string> imputed;
  for (const auto& def : catalog_.defs()) {
    if (!used.contains(def.id)) continue;
    // Reference means come from the overall model when it uses the feature.
    const ml::TrainedModel* owner = nullptr;
    std::size_t pos = 0;
    for (const auto& slot : {std::string("mixed"), std::string(to_string(def.category))}) {
      const auto it = models_.find(slot);
      if (it == models_.end()) continue;
      const auto f = std::find(it->second.features.begin(), it->second.features.end(), def.id);
      if (f != it->second.features.end()) {
        owner = &it->second;
        pos = static_cast<std::size_t>(f - it->second.features.begin());
        break;
      }
    }
    if (owner == nullptr) {
      for (const auto& [slot, model] : models_) {
        const auto f = std::find(model.features.begin(), model.features.end(), def.id);
        if (f != model.features.end()) {
          owner = &model;
          pos = static_cast<std::size_t>(f - model.features.begin());
          break;
        }
      }
    }
    const FeatureValue& v = values.at(def.id);
    nlohmann::json means = nlohmann::json::object();
    for (std::size_t l = 0; l < kLevelCount; ++l) means[level_name(static_cast<int>(l))] = owner->level_means[pos][l];
    report.push_back({{"feature", def.id},
                      {"category", to_string(def.category)},
                      {"description", def.description},
                      {"value", v.degenerate ? nlohmann::json(nullptr) : nlohmann::json(v.value)},
                      {"degenerate", v.degenerate},
                      {"training_means", means}});
    if (v.degenerate) imputed.push_back(def.id);
  }
  if (!imputed.empty()) {
    std::string list;
    for (const auto& id : imputed) list += (list.empty() ? "" : ", ") + id;
    warnings.push_back("undefined for this text, replaced by training means: " + list);
  }
  result["feature_report"] = report;
  result["word_count"] = words;
  result["sentence_count"] = doc.sentences.size();
  result["warnings"] = warnings;
  return {200, result};
}

void AssessService::mount(httplib::Server& server, const std::string& cors_origin) const {
  auto send = [cors_origin](httplib::Response& res, const HttpReply& reply) {
    res.status = reply.status;
    res.set_content(reply.body.dump(), "application/json; charset=utf-8");
  };
  server.set_default_headers({{"Access-Control-Allow-Origin", cors_origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.Post("/assess", [this, send](const httplib::Request& req, httplib::Response& res) { send(res, assess(req.body)); });
  server.Get("/health", [this, send](const httplib::Request&, httplib::Response& res) { send(res, {200, health()}); });
  server.Get("/models", [this, send](const httplib::Request&, httplib::Response& res) { send(res, {200, models()}); });
  server.set_exception_handler([send](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
    send(res, error_reply(500, "internal error"));
  });
}

void serve(const AssessService& service, const std::string& host, int port, const std::string& cors_origin) {
  httplib::Server server;
  service.mount(server, cors_origin);
  if (!server.listen(host, port)) throw ConfigError("cannot listen on " + host + ":" + std::to_string(port));
}

std::vector<DeployedSpec> deployed_specs(std::uint64_t seed, bool include_error_features) {
  std::vector<DeployedSpec> out = {{"lexical", ml::PipelineSpec::parse("rel-lr_cv-kbest-5", seed)},
                                   {"morphological", ml::PipelineSpec::parse("rel-lda-kbest-25", seed)},
                                   {"surface", ml::PipelineSpec::parse("rel-lr-sfs-3", seed)},
                                   {"mixed", ml::PipelineSpec::parse("rel-svm-kbest-23", seed)}};
  if (include_error_features) out.push_back({"error", ml::PipelineSpec::parse("rel-lr-kbest-5", seed)});
  return out;
}

std::map<std::string, ml::TrainedModel> train_service_models(const FeatureMatrix& train, const FeatureCatalog& catalog,
                                                             const std::vector<std::string>& relevant_ids,
                                                             std::uint64_t seed, bool include_error_features,
                                                             std::vector<std::string>* warnings) {
  const std::set<std::string> relevant(relevant_ids.begin(), relevant_ids.end());
  std::map<std::string, ml::TrainedModel> out;
  for (DeployedSpec d : deployed_specs(seed, include_error_features)) {
    const std::optional<Category> cat = slot_category(d.slot);
    std::vector<std::string> pool;
    for (const auto& id : train.feature_ids) {
      if (!catalog.contains(id)) continue;
      const Category c = catalog.at(id).category;
      const bool in_slot = cat ? c == *cat : (include_error_features || c != Category::kError);
      if (in_slot && relevant.contains(id)) pool.push_back(id);
    }
    if (pool.empty() && cat) {
      for (const auto& id : train.feature_ids) {
        if (catalog.contains(id) && catalog.at(id).category == *cat) pool.push_back(id);
      }
      d.spec.pool = ml::FeaturePool::kAll;
      if (warnings) warnings->push_back(d.slot + ": no relevant features, using every " + d.slot + " feature");
    }
    if (pool.empty()) throw DataError(d.slot + ": no features available for training");
    if (d.spec.k > pool.size()) {
      if (warnings) {
        warnings->push_back(d.slot + ": k reduced from " + std::to_string(d.spec.k) + " to the pool size " +
                            std::to_string(pool.size()));
      }
      d.spec.k = pool.size();
    }
    out.emplace(d.slot, ml::train(train, d.spec, pool));
  }
  return out;
}

}  // namespace cefr

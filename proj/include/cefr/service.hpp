#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include <json.hpp>

#include "cefr/catalog.hpp"
#include "cefr/error_annotation.hpp"
#include "cefr/ml/pipeline.hpp"
#include "cefr/resources.hpp"

namespace httplib {
class Server;
}

namespace cefr {

/// Turns raw text into CoNLL-U.
class Tagger {
 public:
  virtual ~Tagger() = default;
  /// Throws UpstreamError on transport failures.
  virtual std::string tag(const std::string& text) const = 0;
};

/// POSTs the text as text/plain and expects CoNLL-U in the response body.
class HttpTagger : public Tagger {
 public:
  HttpTagger(std::string endpoint, std::chrono::milliseconds timeout);
  std::string tag(const std::string& text) const override;

 private:
  std::string endpoint_;
  std::chrono::milliseconds timeout_;
};

struct UpstreamConfig {
  std::string endpoint;
  std::chrono::milliseconds timeout{10000};
};

struct ServiceConfig {
  /// Model file per slot: "mixed" (mandatory), "lexical", "morphological",
  /// "surface" and optionally "error".
  std::map<std::string, std::filesystem::path> models;
  std::optional<std::filesystem::path> catalog;  // standard catalog when absent
  std::optional<std::filesystem::path> resources;
  std::optional<UpstreamConfig> tagger;
  std::vector<CorrectorClientContract> correctors;
  /// Serve the error sub-rating and compute error features from correctors.
  bool include_error_features = false;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string cors_origin = "*";
  int max_upstream_concurrency = 4;

  /// Relative paths resolve against base_dir. Throws ConfigError.
  static ServiceConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static ServiceConfig load(const std::filesystem::path& path);
};

struct HttpReply {
  int status = 200;
  nlohmann::json body;
};

inline constexpr std::size_t kShortTextWords = 30;

/// Read-only model store plus the request logic of the assessment API.
/// Handlers are const and share no mutable state besides the upstream
/// concurrency limit.
class AssessService {
 public:
  AssessService(FeatureCatalog catalog, LexicalResources resources, std::map<std::string, ml::TrainedModel> models,
                std::vector<std::string> load_warnings = {}, std::unique_ptr<Tagger> tagger = nullptr,
                std::vector<std::unique_ptr<CorrectorClient>> correctors = {}, bool include_error_features = false,
                int max_upstream_concurrency = 4);

  /// Loads catalog, resources and models; a model that fails to load is
  /// skipped with a warning so that the service still answers /health.
  static std::unique_ptr<AssessService> from_config(const ServiceConfig& config);

  bool ready() const { return models_.contains("mixed"); }

  HttpReply assess(const std::string& body) const;
  nlohmann::json health() const;
  nlohmann::json models() const;

  /// Registers the routes and CORS handling on an httplib server.
  void mount(httplib::Server& server, const std::string& cors_origin = "*") const;

  const FeatureCatalog& catalog() const { return catalog_; }

 private:
  HttpReply assess_document(Document doc) const;

  FeatureCatalog catalog_;
  LexicalResources resources_;
  std::map<std::string, ml::TrainedModel> models_;
  std::vector<std::string> load_warnings_;
  std::unique_ptr<Tagger> tagger_;
  std::vector<std::unique_ptr<CorrectorClient>> correctors_;
  bool include_error_features_;
  mutable std::counting_semaphore<> upstream_slots_;
};

/// Blocks serving the API until the process is stopped.
void serve(const AssessService& service, const std::string& host, int port, const std::string& cors_origin);

/// Category served by a model slot, if any.
std::optional<Category> slot_category(const std::string& slot);

struct DeployedSpec {
  std::string slot;
  ml::PipelineSpec spec;
};

/// lexical rel-lr_cv-kbest-5, morphological rel-lda-kbest-25, surface
/// rel-lr-sfs-3 and mixed rel-svm-kbest-23, plus error rel-lr-kbest-5 when
/// error features are served.
std::vector<DeployedSpec> deployed_specs(std::uint64_t seed, bool include_error_features = false);

/// Trains every deployed slot on the training rows. Each category model draws
/// from the relevant features of its category (all features of the category
/// when none is relevant); the mixed model from all relevant features,
/// without error features unless they are served. k is clamped to the pool
/// size with a warning.
std::map<std::string, ml::TrainedModel> train_service_models(const FeatureMatrix& train, const FeatureCatalog& catalog,
                                                             const std::vector<std::string>& relevant_ids,
                                                             std::uint64_t seed, bool include_error_features,
                                                             std::vector<std::string>* warnings);

}  // namespace cefr

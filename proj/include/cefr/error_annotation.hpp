#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "cefr/catalog.hpp"
#include "cefr/corpus.hpp"
#include "cefr/features.hpp"

namespace cefr {

enum class Tool { kSpeller, kGrammar };

std::string_view to_string(Tool tool);
Tool parse_tool(std::string_view s);

/// A correction proposed for a token span [start, end) of one sentence.
struct Edit {
  Tool tool = Tool::kSpeller;
  std::size_t sentence_index = 0;
  std::size_t start = 0;
  std::size_t end = 0;
  std::vector<std::string> replacement;

  bool operator==(const Edit&) const = default;
};

/// Edits keyed by doc_id.
using EditAnnotationSet = std::map<std::string, std::vector<Edit>>;

/// Checks span bounds, speller span length and same-tool overlap. Throws
/// DataError naming the document and sentence.
void validate_edits(const Document& doc, const std::vector<Edit>& edits);

std::vector<FeatureDef> error_feature_defs();

/// The nine correction-based features; word tokens are the denominator.
FeatureMap compute_error_features(const Document& doc, const std::vector<Edit>& edits);

EditAnnotationSet edits_from_json(const nlohmann::json& j);
nlohmann::json edits_to_json(const EditAnnotationSet& edits);
EditAnnotationSet load_edits(const std::filesystem::path& path);
/// Writes to a temporary file and renames it into place.
void save_edits(const std::filesystem::path& path, const EditAnnotationSet& edits);

/// A span suggested by a correction service for a single sentence.
struct CorrectionSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::vector<std::string> replacement;
};

struct CorrectorClientContract {
  std::string endpoint;
  std::chrono::milliseconds timeout{10000};
  Tool tool = Tool::kGrammar;
};

/// Sentence-by-sentence correction service.
class CorrectorClient {
 public:
  virtual ~CorrectorClient() = default;
  virtual Tool tool() const = 0;
  /// Throws UpstreamError on transport failures.
  virtual std::vector<CorrectionSpan> correct(const std::string& sentence) const = 0;
};

/// Offline client answering from a fixed sentence-text -> spans table.
class StubCorrector : public CorrectorClient {
 public:
  StubCorrector(Tool tool, std::map<std::string, std::vector<CorrectionSpan>> table)
      : tool_(tool), table_(std::move(table)) {}

  Tool tool() const override { return tool_; }
  std::vector<CorrectionSpan> correct(const std::string& sentence) const override;

 private:
  Tool tool_;
  std::map<std::string, std::vector<CorrectionSpan>> table_;
};

/// JSON-over-HTTP client: POST {"sentence": s} -> {"edits": [{start, end, replacement}]}.
class HttpCorrector : public CorrectorClient {
 public:
  explicit HttpCorrector(CorrectorClientContract contract);

  Tool tool() const override { return contract_.tool; }
  std::vector<CorrectionSpan> correct(const std::string& sentence) const override;

 private:
  CorrectorClientContract contract_;
};

/// Parses a corrector response body into spans; throws DataError on schema violations.
std::vector<CorrectionSpan> parse_corrector_response(const std::string& body);

/// Sends every sentence of the document to the client and converts the
/// answers into validated edits.
std::vector<Edit> fetch_edits(const Document& doc, const CorrectorClient& client);

/// Annotates all documents with every client, running at most max_in_flight
/// documents concurrently. Output is ordered by doc_id.
EditAnnotationSet annotate_corpus(const Corpus& corpus, const std::vector<const CorrectorClient*>& clients,
                                  std::size_t max_in_flight = 4);

/// Splits "http://host:port/path" into its parts; throws ConfigError otherwise.
struct HttpUrl {
  std::string scheme_host_port;
  std::string path;
};
HttpUrl split_url(const std::string& url);

}  // namespace cefr

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cefr/corpus.hpp"

namespace cefr {

struct FeatureRow {
  std::string doc_id;
  DocMeta meta;
  std::vector<double> values;
  std::vector<std::uint8_t> degenerate;  // 1 where the value is the degenerate sentinel

  bool is_degenerate(std::size_t j) const { return !degenerate.empty() && degenerate[j] != 0; }
};

/// Documents x features, columns in catalog order, with labels copied from
/// the document metadata.
struct FeatureMatrix {
  std::vector<std::string> feature_ids;
  std::vector<FeatureRow> rows;
  std::string catalog_hash;

  std::size_t rows_count() const { return rows.size(); }
  std::size_t cols() const { return feature_ids.size(); }

  std::optional<std::size_t> column(std::string_view id) const;
  /// Throws DataError for unknown ids.
  std::size_t require_column(std::string_view id) const;

  std::vector<double> column_values(std::size_t j) const;
  std::vector<Level> levels() const;

  FeatureMatrix filter_split(Split split) const;
  /// Columns in the given order.
  FeatureMatrix select_columns(const std::vector<std::string>& ids) const;

  nlohmann::json to_json() const;
  static FeatureMatrix from_json(const nlohmann::json& j);
  static FeatureMatrix load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

/// Writes text to path via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace cefr

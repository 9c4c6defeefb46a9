#include "cefr/matrix.hpp"

#include <fstream>

#include "cefr/error.hpp"

namespace cefr {

std::optional<std::size_t> FeatureMatrix::column(std::string_view id) const {
  for (std::size_t j = 0; j < feature_ids.size(); ++j) {
    if (feature_ids[j] == id) return j;
  }
  return std::nullopt;
}

std::size_t FeatureMatrix::require_column(std::string_view id) const {
  const auto j = column(id);
  if (!j) throw DataError("feature '" + std::string(id) + "' is not a column of the matrix");
  return *j;
}

std::vector<double> FeatureMatrix::column_values(std::size_t j) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const FeatureRow& r : rows) out.push_back(r.values[j]);
  return out;
}

std::vector<Level> FeatureMatrix::levels() const {
  std::vector<Level> out;
  out.reserve(rows.size());
  for (const FeatureRow& r : rows) out.push_back(r.meta.level);
  return out;
}

FeatureMatrix FeatureMatrix::filter_split(Split split) const {
  FeatureMatrix out;
  out.feature_ids = feature_ids;
  out.catalog_hash = catalog_hash;
  for (const FeatureRow& r : rows) {
    if (r.meta.split == split) out.rows.push_back(r);
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_columns(const std::vector<std::string>& ids) const {
  std::vector<std::size_t> idx;
  idx.reserve(ids.size());
  for (const std::string& id : ids) idx.push_back(require_column(id));
  FeatureMatrix out;
  out.feature_ids = ids;
  out.catalog_hash = catalog_hash;
  out.rows.reserve(rows.size());
  for (const FeatureRow& r : rows) {
    FeatureRow nr{r.doc_id, r.meta, {}, {}};
    nr.values.reserve(idx.size());
    for (std::size_t j : idx) {
      nr.values.push_back(r.values[j]);
      nr.degenerate.push_back(r.is_degenerate(j) ? 1 : 0);
    }
    out.rows.push_back(std::move(nr));
  }
  return out;
}

nlohmann::json FeatureMatrix::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const FeatureRow& r : rows) {
    nlohmann::json degenerate = nlohmann::json::array();
    for (std::size_t j = 0; j < r.degenerate.size(); ++j) {
      if (r.degenerate[j]) degenerate.push_back(feature_ids[j]);
    }
    rows_json.push_back({{"doc_id", r.doc_id},
                         {"level", to_string(r.meta.level)},
                         {"text_type", to_string(r.meta.text_type)},
                         {"split", to_string(r.meta.split)},
                         {"values", r.values},
                         {"degenerate", std::move(degenerate)}});
  }
  return {{"catalog_hash", catalog_hash}, {"features", feature_ids}, {"rows", std::move(rows_json)}};
}

FeatureMatrix FeatureMatrix::from_json(const nlohmann::json& j) {
  FeatureMatrix m;
  try {
    m.catalog_hash = j.value("catalog_hash", "");
    m.feature_ids = j.at("features").get<std::vector<std::string>>();
    for (const auto& r : j.at("rows")) {
      FeatureRow row;
      row.doc_id = r.at("doc_id").get<std::string>();
      row.meta.level = parse_level(r.at("level").get<std::string>());
      row.meta.text_type = parse_text_type(r.at("text_type").get<std::string>());
      row.meta.split = r.contains("split") ? parse_split(r.at("split").get<std::string>()) : Split::kUnlabeled;
      row.values = r.at("values").get<std::vector<double>>();
      if (row.values.size() != m.feature_ids.size()) {
        throw DataError("row '" + row.doc_id + "' has " + std::to_string(row.values.size()) + " values, expected " +
                        std::to_string(m.feature_ids.size()));
      }
      row.degenerate.assign(m.feature_ids.size(), 0);
      if (r.contains("degenerate")) {
        for (const auto& id : r.at("degenerate")) row.degenerate[m.require_column(id.get<std::string>())] = 1;
      }
      m.rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed feature matrix: ") + e.what());
  }
  return m;
}

FeatureMatrix FeatureMatrix::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open feature matrix " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("feature matrix " + path.string() + " is not valid JSON: " + e.what());
  }
}

void FeatureMatrix::save(const std::filesystem::path& path) const { write_file_atomic(path, to_json().dump() + "\n"); }

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace cefr

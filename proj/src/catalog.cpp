#include "cefr/catalog.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>

#include "cefr/error.hpp"
#include "cefr/error_annotation.hpp"
#include "cefr/features.hpp"

namespace cefr {
namespace {

constexpr std::array<std::pair<std::string_view, Category>, 4> kCategoryNames = {
    {{"lexical", Category::kLexical},
     {"morphological", Category::kMorphological},
     {"surface", Category::kSurface},
     {"error", Category::kError}}};
constexpr std::array<std::pair<std::string_view, Direction>, 3> kDirectionNames = {
    {{"increasing", Direction::kIncreasing}, {"decreasing", Direction::kDecreasing}, {"nonmonotonic", Direction::kNonmonotonic}}};

// Direction of change observed for the relevant morphological predictors.
const std::vector<std::pair<std::string, Direction>>& core_morphological() {
  using enum Direction;
  static const std::vector<std::pair<std::string, Direction>> core = {
      {"pos_adv_pct", kIncreasing},           {"conj_pct", kNonmonotonic},
      {"pos_propn_pct", kDecreasing},         {"postposition_share", kIncreasing},
      {"nominal_case_count", kIncreasing},    {"nominal_case_nom_pct", kDecreasing},
      {"nominal_case_tra_pct", kIncreasing},  {"nominal_plur_pct", kIncreasing},
      {"noun_case_count", kIncreasing},       {"noun_case_nom_pct", kDecreasing},
      {"noun_case_all_pct", kIncreasing},     {"noun_case_tra_pct", kIncreasing},
      {"noun_plur_pct", kIncreasing},         {"adj_case_count", kIncreasing},
      {"adj_case_gen_pct", kIncreasing},      {"adj_case_par_pct", kIncreasing},
      {"adj_case_ine_pct", kIncreasing},      {"adj_case_ela_pct", kIncreasing},
      {"adj_case_tra_pct", kIncreasing},      {"adj_sing_pct", kDecreasing},
      {"adj_plur_pct", kIncreasing},          {"pron_case_count", kIncreasing},
      {"pron_case_ine_pct", kIncreasing},     {"pron_case_ela_pct", kIncreasing},
      {"pron_case_com_pct", kIncreasing},     {"pron_type_personal_pct", kDecreasing},
      {"pron_type_demonstrative_pct", kIncreasing}, {"pron_type_interrogative_relative_pct", kIncreasing},
      {"verb_finite_pct", kDecreasing},       {"verb_number_sing_pct", kDecreasing},
      {"verb_negative_pct", kNonmonotonic},   {"verb_form_conv_pct", kIncreasing},
  };
  return core;
}

}  // namespace

std::string_view to_string(Category c) {
  for (const auto& [name, v] : kCategoryNames) {
    if (v == c) return name;
  }
  return "?";
}

std::string_view to_string(Direction d) {
  for (const auto& [name, v] : kDirectionNames) {
    if (v == d) return name;
  }
  return "?";
}

Category parse_category(std::string_view s) {
  for (const auto& [name, v] : kCategoryNames) {
    if (name == s) return v;
  }
  throw DataError("unknown feature category '" + std::string(s) + "'");
}

Direction parse_direction(std::string_view s) {
  for (const auto& [name, v] : kDirectionNames) {
    if (name == s) return v;
  }
  throw DataError("unknown direction hint '" + std::string(s) + "'");
}

const std::vector<std::string>& core_morphological_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> out;
    for (const auto& [id, dir] : core_morphological()) out.push_back(id);
    return out;
  }();
  return ids;
}

FeatureCatalog::FeatureCatalog(std::vector<FeatureDef> defs) : defs_(std::move(defs)) {
  for (std::size_t i = 0; i < defs_.size(); ++i) {
    if (defs_[i].id.empty()) throw DataError("feature id must not be empty");
    if (!index_.emplace(defs_[i].id, i).second) throw DataError("duplicate feature id '" + defs_[i].id + "'");
  }
}

FeatureCatalog FeatureCatalog::standard() {
  std::vector<FeatureDef> defs = lexical_feature_defs();
  std::vector<FeatureDef> morph = morphological_feature_defs();
  for (FeatureDef& d : morph) {
    for (const auto& [id, dir] : core_morphological()) {
      if (d.id == id) d.direction_hint = dir;
    }
  }
  defs.insert(defs.end(), morph.begin(), morph.end());
  for (auto* extra : {&surface_feature_defs, &error_feature_defs}) {
    std::vector<FeatureDef> more = extra();
    defs.insert(defs.end(), more.begin(), more.end());
  }
  return FeatureCatalog(std::move(defs));
}

FeatureCatalog FeatureCatalog::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw DataError("catalog must be a JSON array of feature definitions");
  std::vector<FeatureDef> defs;
  for (const auto& e : j) {
    try {
      FeatureDef d;
      d.id = e.at("id").get<std::string>();
      d.category = parse_category(e.at("category").get<std::string>());
      d.description = e.value("description", "");
      if (e.contains("direction_hint") && !e.at("direction_hint").is_null()) {
        d.direction_hint = parse_direction(e.at("direction_hint").get<std::string>());
      }
      defs.push_back(std::move(d));
    } catch (const nlohmann::json::exception& ex) {
      throw DataError(std::string("malformed catalog entry: ") + ex.what());
    }
  }
  return FeatureCatalog(std::move(defs));
}

FeatureCatalog FeatureCatalog::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open catalog " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("catalog " + path.string() + " is not valid JSON: " + e.what());
  }
}

nlohmann::json FeatureCatalog::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const FeatureDef& d : defs_) {
    nlohmann::json e = {{"id", d.id}, {"category", to_string(d.category)}, {"description", d.description}};
    if (d.direction_hint) e["direction_hint"] = to_string(*d.direction_hint);
    j.push_back(std::move(e));
  }
  return j;
}

void FeatureCatalog::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write catalog " + path.string());
  out << to_json().dump(1) << '\n';
}

bool FeatureCatalog::contains(std::string_view id) const { return index_.contains(std::string(id)); }

std::optional<std::size_t> FeatureCatalog::index_of(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const FeatureDef& FeatureCatalog::at(std::string_view id) const {
  const auto idx = index_of(id);
  if (!idx) throw DataError("feature '" + std::string(id) + "' is not in the catalog");
  return defs_[*idx];
}

bool FeatureCatalog::has_category(Category c) const {
  return std::any_of(defs_.begin(), defs_.end(), [c](const FeatureDef& d) { return d.category == c; });
}

std::vector<std::string> FeatureCatalog::ids() const {
  std::vector<std::string> out;
  for (const FeatureDef& d : defs_) out.push_back(d.id);
  return out;
}

std::vector<std::string> FeatureCatalog::ids(Category c) const {
  std::vector<std::string> out;
  for (const FeatureDef& d : defs_) {
    if (d.category == c) out.push_back(d.id);
  }
  return out;
}

FeatureCatalog FeatureCatalog::subset(Category c) const {
  std::vector<FeatureDef> defs;
  for (const FeatureDef& d : defs_) {
    if (d.category == c) defs.push_back(d);
  }
  return FeatureCatalog(std::move(defs));
}

std::string FeatureCatalog::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::string_view s) {
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    h ^= 0xFF;
    h *= 0x100000001b3ULL;
  };
  for (const FeatureDef& d : defs_) {
    mix(d.id);
    mix(to_string(d.category));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace cefr

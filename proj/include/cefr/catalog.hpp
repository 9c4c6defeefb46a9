#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace cefr {

enum class Category { kLexical, kMorphological, kSurface, kError };
enum class Direction { kIncreasing, kDecreasing, kNonmonotonic };

std::string_view to_string(Category c);
std::string_view to_string(Direction d);
Category parse_category(std::string_view s);
Direction parse_direction(std::string_view s);

struct FeatureDef {
  std::string id;
  Category category = Category::kLexical;
  std::string description;
  std::optional<Direction> direction_hint;
};

class FeatureCatalog {
 public:
  FeatureCatalog() = default;
  /// Throws DataError on duplicate ids.
  explicit FeatureCatalog(std::vector<FeatureDef> defs);

  /// Full lexical + morphological + surface + error catalog shipped with the toolkit.
  static FeatureCatalog standard();
  static FeatureCatalog from_json(const nlohmann::json& j);
  static FeatureCatalog load(const std::filesystem::path& path);

  nlohmann::json to_json() const;
  void save(const std::filesystem::path& path) const;

  const std::vector<FeatureDef>& defs() const { return defs_; }
  std::size_t size() const { return defs_.size(); }
  bool contains(std::string_view id) const;
  std::optional<std::size_t> index_of(std::string_view id) const;
  const FeatureDef& at(std::string_view id) const;
  bool has_category(Category c) const;
  std::vector<std::string> ids() const;
  std::vector<std::string> ids(Category c) const;
  FeatureCatalog subset(Category c) const;

  /// Stable 64-bit FNV-1a hash (hex) over ids and categories in catalog order.
  std::string hash() const;

 private:
  std::vector<FeatureDef> defs_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Stable ids of the relevant morphological predictors that the shipped
/// catalog must always contain.
const std::vector<std::string>& core_morphological_ids();

}  // namespace cefr

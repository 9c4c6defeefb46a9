#include "cefr/extract.hpp"

#include "cefr/error.hpp"

namespace cefr {

FeatureMap extract_document(const Document& doc, const FeatureCatalog& catalog, const LexicalResources& res,
                            const std::vector<Edit>* edits) {
  FeatureMap all;
  auto merge = [&all](FeatureMap part) { all.merge(part); };
  if (catalog.has_category(Category::kLexical)) {
    merge(compute_diversity(doc));
    merge(compute_sophistication_density(doc, res));
  }
  if (catalog.has_category(Category::kMorphological)) merge(compute_morphological(doc, catalog));
  if (catalog.has_category(Category::kSurface)) merge(compute_surface(doc));
  if (catalog.has_category(Category::kError)) {
    if (edits == nullptr) throw DataError("document '" + doc.doc_id + "' has no edit annotations");
    merge(compute_error_features(doc, *edits));
  }

  FeatureMap out;
  for (const FeatureDef& d : catalog.defs()) {
    const auto it = all.find(d.id);
    if (it == all.end()) {
      throw DataError("catalog feature '" + d.id + "' (" + std::string(to_string(d.category)) +
                      ") is not produced by any extractor");
    }
    out.emplace(d.id, it->second);
  }
  return out;
}

FeatureMatrix extract_features(const Corpus& corpus, const FeatureCatalog& catalog, const LexicalResources& res,
                               const EditAnnotationSet* edits) {
  const bool needs_edits = catalog.has_category(Category::kError);
  if (needs_edits) {
    std::string missing;
    std::size_t count = 0;
    for (const Document& d : corpus.documents) {
      if (edits == nullptr || !edits->contains(d.doc_id)) {
        if (count < 20) missing += (missing.empty() ? "" : ", ") + d.doc_id;
        ++count;
      }
    }
    if (count > 0) {
      throw DataError("error features requested but " + std::to_string(count) +
                      " document(s) lack edit annotations: " + missing + (count > 20 ? ", ..." : ""));
    }
  }

  FeatureMatrix m;
  m.feature_ids = catalog.ids();
  m.catalog_hash = catalog.hash();
  m.rows.reserve(corpus.documents.size());
  for (const Document& d : corpus.documents) {
    const std::vector<Edit>* doc_edits = needs_edits ? &edits->at(d.doc_id) : nullptr;
    const FeatureMap values = extract_document(d, catalog, res, doc_edits);
    FeatureRow row{d.doc_id, d.meta, {}, {}};
    row.values.reserve(m.feature_ids.size());
    row.degenerate.reserve(m.feature_ids.size());
    for (const std::string& id : m.feature_ids) {
      const FeatureValue& v = values.at(id);
      row.values.push_back(v.value);
      row.degenerate.push_back(v.degenerate ? 1 : 0);
    }
    m.rows.push_back(std::move(row));
  }
  return m;
}

}  // namespace cefr

#pragma once

#include "cefr/catalog.hpp"
#include "cefr/corpus.hpp"
#include "cefr/error_annotation.hpp"
#include "cefr/features.hpp"
#include "cefr/matrix.hpp"
#include "cefr/resources.hpp"

namespace cefr {

/// All catalog features of one document. edits may be null when the catalog
/// has no error features.
FeatureMap extract_document(const Document& doc, const FeatureCatalog& catalog, const LexicalResources& res,
                            const std::vector<Edit>* edits);

/// One row per document in corpus order, one column per catalog entry.
/// Throws DataError listing the documents without edits when error features
/// are requested.
FeatureMatrix extract_features(const Corpus& corpus, const FeatureCatalog& catalog, const LexicalResources& res,
                               const EditAnnotationSet* edits);

}  // namespace cefr

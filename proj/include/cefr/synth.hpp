#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cefr/catalog.hpp"
#include "cefr/corpus.hpp"
#include "cefr/error_annotation.hpp"
#include "cefr/matrix.hpp"
#include "cefr/resources.hpp"

namespace cefr::synth {

struct DesignCell {
  Level level;
  TextType text_type;
  Split split;
  std::size_t count;
};

/// Level x text type x split counts of the exam-writing dataset: 600
/// training texts (150 per level) and a 120-text holdout.
std::vector<DesignCell> exam_design();

/// exam_design() with every count multiplied by scale (at least 2 per cell).
std::vector<DesignCell> scaled_design(double scale);

enum class Planted { kMonotone, kGenreOnly, kExceptionA, kExceptionB, kConfounded, kNoise };
std::string_view to_string(Planted p);

struct PlantedFeature {
  std::string id;
  Planted kind;
};

struct MatrixOptions {
  std::uint64_t seed = 42;
  std::size_t monotone = 24;
  std::size_t noise = 8;
  /// Share of rows flagged degenerate in the first noise column.
  double degenerate_rate = 0.05;
};

struct SyntheticMatrix {
  FeatureCatalog catalog;
  FeatureMatrix matrix;
  std::vector<PlantedFeature> planted;

  std::vector<std::string> ids_of(Planted kind) const;
};

/// Feature matrix over exam_design() rows with planted level-tracking,
/// genre-only, exception-path, confounded and noise columns.
SyntheticMatrix make_matrix(const MatrixOptions& options = {});

/// Frequency list (>= kMinFrequencyEntries lemmas), Estonian function words
/// and an abstractness lexicon covering the generated noun vocabulary.
LexicalResources make_resources();

struct CorpusOptions {
  std::uint64_t seed = 42;
  std::vector<DesignCell> design = exam_design();
};

struct SyntheticCorpus {
  Corpus corpus;
  std::vector<ManifestRow> manifest;
  /// Speller and grammar edits consistent with each document.
  EditAnnotationSet edits;
};

/// Tagged learner-like documents whose length, vocabulary rarity and
/// morphology grow with level and whose pronoun/tense use follows text type.
SyntheticCorpus make_corpus(const CorpusOptions& options = {});

/// Writes documents (one .conllu per doc), manifest.json, edits.json and a
/// resources/ directory under dir.
void write_corpus(const std::filesystem::path& dir, const SyntheticCorpus& corpus, const LexicalResources& res);

}  // namespace cefr::synth

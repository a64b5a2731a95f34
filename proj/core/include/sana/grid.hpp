#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sana/classifiers.hpp"
#include "sana/corpus.hpp"
#include "sana/evaluation.hpp"
#include "sana/features.hpp"
#include "sana/text.hpp"

namespace sana::grid {

struct LabeledDocument {
  std::string id;
  std::string text;
  Label label = Label::Positive;
};

/// Comments of a labelled corpus. Throws InvalidArgument if a comment has no
/// label or is Neutral.
std::vector<LabeledDocument> labeled_documents(const corpus::Corpus& corpus);

/// One cell of the light_stem x scheme x n-gram x classifier factorial.
struct GridCellConfig {
  bool light_stem = false;
  features::Scheme scheme = features::Scheme::TO;
  int ngram_order = 1;
  classify::Kind classifier = classify::Kind::SVM;
  std::uint64_t seed = 0;

  /// e.g. "stem=yes/scheme=TF-IDF/ngram=2/classifier=NB"
  std::string key() const;

  friend bool operator==(const GridCellConfig&, const GridCellConfig&) = default;
};

struct GridConfig {
  text::NormalizeOptions normalize;
  std::vector<std::string> stopwords = text::default_stopwords();
  features::NgramMode ngram_mode = features::NgramMode::Cumulative;
  eval::FitScope fit_scope = eval::FitScope::TrainOnly;
  classify::SvmParams svm;
  classify::NbParams nb;
  classify::KnnParams knn;
  int folds = 10;
  bool stratified = true;
  eval::Averaging averaging = eval::Averaging::Micro;
  std::uint64_t seed = 42;
  /// Classifier column groups to evaluate; all three by default.
  std::vector<classify::Kind> classifiers = {classify::Kind::SVM, classify::Kind::NB,
                                             classify::Kind::KNN};
  /// Worker threads for independent cells. Does not affect results.
  unsigned threads = 1;

  /// Canonical JSON of every result-affecting setting.
  std::string to_json() const;
  /// Hex SHA-256 of to_json().
  std::string fingerprint() const;
};

/// Cells in canonical order: light_stem (no, yes), scheme (TO, TF, TF-IDF,
/// BTO), classifier (SVM, NB, KNN), n-gram order (1, 2, 3).
std::vector<GridCellConfig> plan_cells(const GridConfig& config);

struct GridCell {
  GridCellConfig config;
  eval::CvResult result;
};

struct GridResult {
  std::string corpus_name;
  std::string timestamp;  // UTC, ISO 8601
  std::string fingerprint;
  GridConfig config;
  std::vector<GridCell> cells;

  /// Every planned cell present, in canonical order.
  bool complete() const;
  const GridCell* find(bool light_stem, features::Scheme scheme, int ngram_order,
                       classify::Kind classifier) const;
  double accuracy(const GridCell& cell) const { return cell.result.accuracy(config.averaging); }
};

/// Builds the learner for a cell; the default is eval::PipelineLearner.
using LearnerFactory =
    std::function<std::unique_ptr<eval::Learner>(const GridCellConfig&, const GridConfig&)>;

eval::LearnerConfig learner_config(const GridCellConfig& cell, const GridConfig& config);

/// Evaluates every planned cell against one shared fold plan. A failing cell
/// is reported as GridCellFailed naming the cell.
GridResult run_grid(std::span<const LabeledDocument> documents, const GridConfig& config,
                    std::string corpus_name, const LearnerFactory& factory = {});

enum class TableFormat { Markdown, Csv };

/// Rows light_stem x scheme, column groups classifier x n-gram, accuracies
/// as percentages with two decimals. Throws IncompleteGrid.
std::string render_table(const GridResult& result, TableFormat format);

/// One row per cell with confusion counts and all metrics.
std::string render_cells_csv(const GridResult& result);

/// Full result including config, fingerprint, fold plan seed and timestamp.
std::string result_json(const GridResult& result);

/// 0.7113 -> "71.13"
std::string format_percent(double fraction);

}  // namespace sana::grid

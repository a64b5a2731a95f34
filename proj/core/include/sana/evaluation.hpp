#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sana/classifiers.hpp"
#include "sana/features.hpp"
#include "sana/label.hpp"

namespace sana::eval {

/// Assignment of documents to k cross-validation folds.
class FoldPlan {
 public:
  FoldPlan(std::vector<int> assignment, int k, bool stratified, std::uint64_t seed);

  std::size_t n_docs() const { return assignment_.size(); }
  int k() const { return k_; }
  bool stratified() const { return stratified_; }
  std::uint64_t seed() const { return seed_; }

  int fold_of(std::size_t doc) const { return assignment_[doc]; }
  const std::vector<int>& assignment() const { return assignment_; }

  std::vector<std::size_t> test_indices(int fold) const;
  std::vector<std::size_t> train_indices(int fold) const;
  std::vector<std::size_t> fold_sizes() const;

 private:
  std::vector<int> assignment_;
  int k_;
  bool stratified_;
  std::uint64_t seed_;
};

/// Seeded shuffle followed by round-robin dealing. When stratified, each class
/// is shuffled and dealt in turn, continuing from the fold where the previous
/// class stopped, so both overall and per-class fold sizes differ by at most 1.
/// Throws TooFewDocs when labels.size() < k, InvalidArgument when k < 2.
FoldPlan make_folds(std::span<const Label> labels, int k, bool stratified, std::uint64_t seed);

/// Rows are predictions, columns the truth.
struct BinaryConfusion {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  void add(Label truth, Label predicted);
  /// Same counts with Negative treated as the positive class.
  BinaryConfusion swapped() const { return {tn, fn, fp, tp}; }
  BinaryConfusion& operator+=(const BinaryConfusion& o);

  friend bool operator==(const BinaryConfusion&, const BinaryConfusion&) = default;
};

struct EvalReport {
  BinaryConfusion confusion;
  double precision_pos = 0.0;
  double recall_pos = 0.0;
  double precision_neg = 0.0;
  double recall_neg = 0.0;
  double accuracy = 0.0;

  /// Set for metrics whose denominator was zero (value reported as 0).
  struct {
    bool precision_pos = false;
    bool recall_pos = false;
    bool precision_neg = false;
    bool recall_neg = false;
  } degenerate;

  bool any_degenerate() const {
    return degenerate.precision_pos || degenerate.recall_pos || degenerate.precision_neg ||
           degenerate.recall_neg;
  }
};

/// Precision, recall for both classes and accuracy. Throws EmptyMatrix.
EvalReport metrics(const BinaryConfusion& confusion);

/// Token streams with binary gold labels.
struct Dataset {
  std::vector<std::vector<std::string>> tokens;
  std::vector<Label> labels;

  std::size_t size() const { return labels.size(); }
};

/// One train/predict cycle on a fold. Implementations must be stateless
/// across calls (cross_validate may reuse them for every fold).
class Learner {
 public:
  virtual ~Learner() = default;

  /// Predicted labels for `test`, in the same order.
  virtual std::vector<Label> run_fold(const Dataset& data, std::span<const std::size_t> train,
                                      std::span<const std::size_t> test,
                                      std::vector<std::string>& warnings) const = 0;
};

/// Whether the feature space sees the held-out fold.
enum class FitScope { TrainOnly, Global };

std::string_view to_string(FitScope scope);
std::optional<FitScope> parse_fit_scope(std::string_view name);

struct LearnerConfig {
  features::Scheme scheme = features::Scheme::TO;
  int ngram_order = 1;
  features::NgramMode ngram_mode = features::NgramMode::Cumulative;
  FitScope fit_scope = FitScope::TrainOnly;
  classify::Kind classifier = classify::Kind::SVM;
  classify::SvmParams svm;
  classify::NbParams nb;
  classify::KnnParams knn;
};

/// fit -> vectorize -> train -> predict.
class PipelineLearner final : public Learner {
 public:
  explicit PipelineLearner(LearnerConfig config) : config_(std::move(config)) {}

  std::vector<Label> run_fold(const Dataset& data, std::span<const std::size_t> train,
                              std::span<const std::size_t> test,
                              std::vector<std::string>& warnings) const override;

  const LearnerConfig& config() const { return config_; }

 private:
  LearnerConfig config_;
};

enum class Averaging { Micro, Macro };

std::string_view to_string(Averaging averaging);
std::optional<Averaging> parse_averaging(std::string_view name);

struct CvResult {
  EvalReport report;                      // from the pooled confusion matrix
  std::vector<BinaryConfusion> per_fold;  // fold-id order
  double macro_accuracy = 0.0;            // mean of per-fold accuracies
  std::vector<Label> predictions;         // one per document
  std::vector<std::string> warnings;

  double accuracy(Averaging averaging) const {
    return averaging == Averaging::Micro ? report.accuracy : macro_accuracy;
  }
};

/// Runs every fold of `plan` and pools the confusion counts. Throws
/// SingleClassFold if some training split lacks a class.
CvResult cross_validate(const Dataset& data, const Learner& learner, const FoldPlan& plan);

}  // namespace sana::eval

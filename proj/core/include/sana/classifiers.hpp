#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sana/features.hpp"
#include "sana/label.hpp"

namespace sana::classify {

using features::SparseVector;

enum class Kind { SVM, NB, KNN };

inline constexpr Kind kAllKinds[] = {Kind::SVM, Kind::NB, Kind::KNN};

std::string_view to_string(Kind kind);
std::optional<Kind> parse_kind(std::string_view name);

enum class KnnMetric { Cosine, Euclidean };

std::string_view to_string(KnnMetric metric);
std::optional<KnnMetric> parse_knn_metric(std::string_view name);

struct SvmParams {
  double C = 1.0;
  double tol = 1e-4;  // maximal KKT violation at termination
  int max_iter = 10000;
};

struct NbParams {
  double alpha = 1.0;
};

struct KnnParams {
  int k = 9;
  KnnMetric metric = KnnMetric::Cosine;
};

/// Decision function w.x + b.
struct SvmModel {
  std::vector<double> weights;
  double bias = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Multinomial naive Bayes; index 0 is Positive, 1 is Negative.
struct NbModel {
  std::array<double, 2> log_prior{};
  std::array<std::vector<double>, 2> log_likelihood;
};

struct KnnModel {
  std::vector<SparseVector> vectors;
  std::vector<Label> labels;
  std::vector<double> squared_norms;
  int k = 9;
  KnnMetric metric = KnnMetric::Cosine;
};

struct TrainedModel {
  std::variant<SvmModel, NbModel, KnnModel> params;
  std::vector<std::string> warnings;

  Kind kind() const;
};

/// Positive <=> score >= 0.
struct Prediction {
  Label label = Label::Positive;
  double score = 0.0;
};

/// Per-checkpoint objectives recorded by train_svm (one entry per pass of
/// n_train inner steps, plus the final state).
struct SvmTrace {
  std::vector<double> dual_objective;     // (1/2) a'Qa - e'a, minimized
  std::vector<double> primal_objective;   // of the incumbent (returned) solution
};

/// Labels must be Positive or Negative. Real-valued weights count as
/// fractional term occurrences. Throws SingleClassTraining.
TrainedModel train_nb(std::span<const SparseVector> vectors, std::span<const Label> labels,
                      std::size_t dimension, const NbParams& params = {});

/// Linear soft-margin SVM, min (1/2)|w|^2 + C * sum hinge, bias unregularized.
/// Solved in the dual with SMO (maximal-violating-pair, second-order working
/// set selection). Deterministic. If max_iter is reached the model is still
/// returned with converged = false and a NonConvergence warning.
TrainedModel train_svm(std::span<const SparseVector> vectors, std::span<const Label> labels,
                       std::size_t dimension, const SvmParams& params = {},
                       SvmTrace* trace = nullptr);

/// Stores the training set. k larger than the training set is clamped with
/// a warning. Throws EmptyTrainingSet or InvalidArgument (k < 1).
TrainedModel train_knn(std::span<const SparseVector> vectors, std::span<const Label> labels,
                       const KnnParams& params = {});

/// SVM: sign(w.x + b). NB: larger log-posterior, score is the log-posterior
/// difference. KNN: majority of the k most similar training vectors, ties
/// broken by summed similarity and then towards Positive; score encodes
/// that chain as count_margin + similarity_margin / (k + 1).
Prediction predict(const TrainedModel& model, const SparseVector& vector);

/// Similarity used by KNN: cosine, or 1 / (1 + euclidean distance).
double knn_similarity(const KnnModel& model, std::size_t train_index, const SparseVector& x,
                      double x_squared_norm);

double svm_primal_objective(const SvmModel& model, std::span<const SparseVector> vectors,
                            std::span<const Label> labels, double C);

/// Versioned JSON; load_model(dump_model(m)) reproduces m exactly.
std::string dump_model(const TrainedModel& model);
TrainedModel load_model(std::string_view json);

}  // namespace sana::classify

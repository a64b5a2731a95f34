#include "sana/evaluation.hpp"

#include <algorithm>

#include "sana/error.hpp"
#include "sana/random.hpp"

namespace sana::eval {

FoldPlan::FoldPlan(std::vector<int> assignment, int k, bool stratified, std::uint64_t seed)
    : assignment_(std::move(assignment)), k_(k), stratified_(stratified), seed_(seed) {}

std::vector<std::size_t> FoldPlan::test_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t d = 0; d < assignment_.size(); ++d) {
    if (assignment_[d] == fold) out.push_back(d);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t d = 0; d < assignment_.size(); ++d) {
    if (assignment_[d] != fold) out.push_back(d);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k_), 0);
  for (int f : assignment_) ++sizes[static_cast<std::size_t>(f)];
  return sizes;
}

FoldPlan make_folds(std::span<const Label> labels, int k, bool stratified, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "fold count must be >= 2");
  if (labels.size() < static_cast<std::size_t>(k)) {
    throw Error(ErrorCode::TooFewDocs, std::to_string(labels.size()) + " documents cannot fill " +
                                           std::to_string(k) + " folds");
  }
  SeededRng rng(seed);
  std::vector<int> assignment(labels.size(), -1);
  std::size_t next = 0;
  auto deal = [&](std::vector<std::size_t> docs) {
    rng.shuffle(std::span<std::size_t>(docs));
    for (auto d : docs) {
      assignment[d] = static_cast<int>(next % static_cast<std::size_t>(k));
      ++next;
    }
  };
  if (stratified) {
    for (Label l : kAllLabels) {
      std::vector<std::size_t> docs;
      for (std::size_t d = 0; d < labels.size(); ++d) {
        if (labels[d] == l) docs.push_back(d);
      }
      deal(std::move(docs));
    }
  } else {
    std::vector<std::size_t> docs(labels.size());
    for (std::size_t d = 0; d < docs.size(); ++d) docs[d] = d;
    deal(std::move(docs));
  }
  return FoldPlan(std::move(assignment), k, stratified, seed);
}

void BinaryConfusion::add(Label truth, Label predicted) {
  const bool t = truth == Label::Positive;
  const bool p = predicted == Label::Positive;
  if (p && t) ++tp;
  else if (p && !t) ++fp;
  else if (!p && t) ++fn;
  else ++tn;
}

BinaryConfusion& BinaryConfusion::operator+=(const BinaryConfusion& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den, bool& degenerate) {
  if (den == 0) {
    degenerate = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

EvalReport metrics(const BinaryConfusion& c) {
  if (c.total() == 0) throw Error(ErrorCode::EmptyMatrix, "confusion matrix is empty");
  EvalReport r;
  r.confusion = c;
  r.precision_pos = ratio(c.tp, c.tp + c.fp, r.degenerate.precision_pos);
  r.recall_pos = ratio(c.tp, c.tp + c.fn, r.degenerate.recall_pos);
  r.precision_neg = ratio(c.tn, c.tn + c.fn, r.degenerate.precision_neg);
  r.recall_neg = ratio(c.tn, c.tn + c.fp, r.degenerate.recall_neg);
  r.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  return r;
}

std::string_view to_string(FitScope scope) {
  return scope == FitScope::TrainOnly ? "train_only" : "global";
}

std::optional<FitScope> parse_fit_scope(std::string_view name) {
  if (name == "train_only" || name == "train-only") return FitScope::TrainOnly;
  if (name == "global") return FitScope::Global;
  return std::nullopt;
}

std::string_view to_string(Averaging averaging) {
  return averaging == Averaging::Micro ? "micro" : "macro";
}

std::optional<Averaging> parse_averaging(std::string_view name) {
  if (name == "micro") return Averaging::Micro;
  if (name == "macro") return Averaging::Macro;
  return std::nullopt;
}

std::vector<Label> PipelineLearner::run_fold(const Dataset& data,
                                             std::span<const std::size_t> train,
                                             std::span<const std::size_t> test,
                                             std::vector<std::string>& warnings) const {
  std::vector<std::vector<std::string>> fit_docs;
  if (config_.fit_scope == FitScope::Global) {
    fit_docs = data.tokens;
  } else {
    fit_docs.reserve(train.size());
    for (auto d : train) fit_docs.push_back(data.tokens[d]);
  }
  const auto space = features::fit(fit_docs, config_.ngram_order, config_.ngram_mode);

  std::vector<features::SparseVector> x;
  std::vector<Label> y;
  x.reserve(train.size());
  y.reserve(train.size());
  for (auto d : train) {
    x.push_back(features::vectorize(data.tokens[d], space, config_.scheme).entries);
    y.push_back(data.labels[d]);
  }

  classify::TrainedModel model;
  switch (config_.classifier) {
    case classify::Kind::SVM: model = classify::train_svm(x, y, space.size(), config_.svm); break;
    case classify::Kind::NB: model = classify::train_nb(x, y, space.size(), config_.nb); break;
    case classify::Kind::KNN: model = classify::train_knn(x, y, config_.knn); break;
  }
  warnings.insert(warnings.end(), model.warnings.begin(), model.warnings.end());

  std::vector<Label> out;
  out.reserve(test.size());
  for (auto d : test) {
    const auto v = features::vectorize(data.tokens[d], space, config_.scheme);
    out.push_back(classify::predict(model, v.entries).label);
  }
  return out;
}

CvResult cross_validate(const Dataset& data, const Learner& learner, const FoldPlan& plan) {
  if (plan.n_docs() != data.size() || data.tokens.size() != data.size()) {
    throw Error(ErrorCode::InvalidArgument, "fold plan does not match the dataset size");
  }
  CvResult result;
  result.predictions.assign(data.size(), Label::Neutral);
  BinaryConfusion pooled;
  double accuracy_sum = 0.0;
  for (int f = 0; f < plan.k(); ++f) {
    const auto train = plan.train_indices(f);
    const auto test = plan.test_indices(f);
    bool pos = false;
    bool neg = false;
    for (auto d : train) {
      (data.labels[d] == Label::Positive ? pos : neg) = true;
    }
    if (!pos || !neg) {
      throw Error(ErrorCode::SingleClassFold,
                  "training split of fold " + std::to_string(f) + " contains a single class");
    }
    const auto predicted = learner.run_fold(data, train, test, result.warnings);
    if (predicted.size() != test.size()) {
      throw Error(ErrorCode::InvalidArgument, "learner returned the wrong number of predictions");
    }
    BinaryConfusion fold;
    for (std::size_t i = 0; i < test.size(); ++i) {
      fold.add(data.labels[test[i]], predicted[i]);
      result.predictions[test[i]] = predicted[i];
    }
    if (fold.total() > 0) {
      accuracy_sum += static_cast<double>(fold.tp + fold.tn) / static_cast<double>(fold.total());
    }
    pooled += fold;
    result.per_fold.push_back(fold);
  }
  result.report = metrics(pooled);
  result.macro_accuracy = accuracy_sum / static_cast<double>(plan.k());
  return result;
}

}  // namespace sana::eval

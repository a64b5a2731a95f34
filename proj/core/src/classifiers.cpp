#include "sana/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numeric>

#include "sana/error.hpp"

namespace sana::classify {
namespace {

using nlohmann::json;

constexpr int kModelFormatVersion = 1;

void check_training_input(std::span<const SparseVector> vectors, std::span<const Label> labels) {
  if (vectors.size() != labels.size()) {
    throw Error(ErrorCode::InvalidArgument, "vector and label counts differ");
  }
  if (vectors.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training vectors");
  for (Label l : labels) {
    if (l == Label::Neutral) throw Error(ErrorCode::InvalidArgument, "training labels must be binary");
  }
}

std::size_t class_slot(Label l) { return l == Label::Positive ? 0 : 1; }

Prediction predict_svm(const SvmModel& m, const SparseVector& x) {
  double s = m.bias;
  for (const auto& e : x) {
    if (e.index < m.weights.size()) s += m.weights[e.index] * e.value;
  }
  return {s >= 0.0 ? Label::Positive : Label::Negative, s};
}

Prediction predict_nb(const NbModel& m, const SparseVector& x) {
  double s = m.log_prior[0] - m.log_prior[1];
  const std::size_t dim = m.log_likelihood[0].size();
  for (const auto& e : x) {
    if (e.index < dim) s += e.value * (m.log_likelihood[0][e.index] - m.log_likelihood[1][e.index]);
  }
  return {s >= 0.0 ? Label::Positive : Label::Negative, s};
}

Prediction predict_knn(const KnnModel& m, const SparseVector& x) {
  const double xx = features::squared_norm(x);
  const std::size_t n = m.vectors.size();
  std::vector<double> sim(n);
  for (std::size_t t = 0; t < n; ++t) sim[t] = knn_similarity(m, t, x, xx);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto k = static_cast<std::size_t>(m.k);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (sim[a] != sim[b]) return sim[a] > sim[b];
                      return a < b;
                    });
  int votes = 0;
  double sim_margin = 0.0;
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t t = order[r];
    if (m.labels[t] == Label::Positive) {
      ++votes;
      sim_margin += sim[t];
    } else {
      --votes;
      sim_margin -= sim[t];
    }
  }
  // |sim_margin| <= k, so the similarity term only decides count ties.
  const double score = static_cast<double>(votes) + sim_margin / static_cast<double>(k + 1);
  return {score >= 0.0 ? Label::Positive : Label::Negative, score};
}

json sparse_to_json(const SparseVector& v) {
  json arr = json::array();
  for (const auto& e : v) arr.push_back(json::array({e.index, e.value}));
  return arr;
}

SparseVector sparse_from_json(const json& arr) {
  SparseVector v;
  for (const auto& e : arr) v.push_back(features::SparseEntry{e.at(0).get<std::uint32_t>(), e.at(1).get<double>()});
  return v;
}

}  // namespace

std::string_view to_string(Kind kind) {
  switch (kind) {
    case Kind::SVM: return "SVM";
    case Kind::NB: return "NB";
    case Kind::KNN: return "KNN";
  }
  return "?";
}

std::optional<Kind> parse_kind(std::string_view name) {
  if (name == "SVM" || name == "svm") return Kind::SVM;
  if (name == "NB" || name == "nb") return Kind::NB;
  if (name == "KNN" || name == "knn") return Kind::KNN;
  return std::nullopt;
}

std::string_view to_string(KnnMetric metric) {
  return metric == KnnMetric::Cosine ? "cosine" : "euclidean";
}

std::optional<KnnMetric> parse_knn_metric(std::string_view name) {
  if (name == "cosine") return KnnMetric::Cosine;
  if (name == "euclidean") return KnnMetric::Euclidean;
  return std::nullopt;
}

Kind TrainedModel::kind() const {
  switch (params.index()) {
    case 0: return Kind::SVM;
    case 1: return Kind::NB;
    default: return Kind::KNN;
  }
}

TrainedModel train_nb(std::span<const SparseVector> vectors, std::span<const Label> labels,
                      std::size_t dimension, const NbParams& params) {
  check_training_input(vectors, labels);
  if (!(params.alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "NB alpha must be > 0");

  std::array<std::size_t, 2> docs{};
  std::array<std::vector<double>, 2> mass{std::vector<double>(dimension, 0.0),
                                          std::vector<double>(dimension, 0.0)};
  for (std::size_t t = 0; t < vectors.size(); ++t) {
    const std::size_t c = class_slot(labels[t]);
    ++docs[c];
    for (const auto& e : vectors[t]) {
      if (e.index >= dimension) {
        throw Error(ErrorCode::InvalidArgument, "feature index outside model dimension");
      }
      mass[c][e.index] += e.value;
    }
  }
  if (docs[0] == 0 || docs[1] == 0) {
    throw Error(ErrorCode::SingleClassTraining, "NB training set contains a single class");
  }

  NbModel m;
  const double n = static_cast<double>(vectors.size());
  for (std::size_t c = 0; c < 2; ++c) {
    m.log_prior[c] = std::log(static_cast<double>(docs[c]) / n);
    const double total = std::accumulate(mass[c].begin(), mass[c].end(), 0.0) +
                         params.alpha * static_cast<double>(dimension);
    m.log_likelihood[c].resize(dimension);
    for (std::size_t f = 0; f < dimension; ++f) {
      m.log_likelihood[c][f] = std::log((mass[c][f] + params.alpha) / total);
    }
  }
  return TrainedModel{std::move(m), {}};
}

TrainedModel train_knn(std::span<const SparseVector> vectors, std::span<const Label> labels,
                       const KnnParams& params) {
  check_training_input(vectors, labels);
  if (params.k < 1) throw Error(ErrorCode::InvalidArgument, "KNN k must be >= 1");
  KnnModel m;
  m.vectors.assign(vectors.begin(), vectors.end());
  m.labels.assign(labels.begin(), labels.end());
  m.squared_norms.reserve(vectors.size());
  for (const auto& v : vectors) m.squared_norms.push_back(features::squared_norm(v));
  m.metric = params.metric;
  m.k = params.k;
  TrainedModel out{std::move(m), {}};
  auto& stored = std::get<KnnModel>(out.params);
  if (static_cast<std::size_t>(stored.k) > vectors.size()) {
    out.warnings.push_back("KNN k=" + std::to_string(stored.k) + " clamped to training size " +
                           std::to_string(vectors.size()));
    stored.k = static_cast<int>(vectors.size());
  }
  return out;
}

double knn_similarity(const KnnModel& model, std::size_t t, const SparseVector& x, double xx) {
  const double d = features::dot(model.vectors[t], x);
  const double tt = model.squared_norms[t];
  if (model.metric == KnnMetric::Cosine) {
    if (tt == 0.0 || xx == 0.0) return 0.0;
    return d / (std::sqrt(tt) * std::sqrt(xx));
  }
  const double dist2 = std::max(0.0, tt + xx - 2.0 * d);
  return 1.0 / (1.0 + std::sqrt(dist2));
}

Prediction predict(const TrainedModel& model, const SparseVector& vector) {
  return std::visit(
      [&](const auto& m) -> Prediction {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SvmModel>) {
          return predict_svm(m, vector);
        } else if constexpr (std::is_same_v<T, NbModel>) {
          return predict_nb(m, vector);
        } else {
          return predict_knn(m, vector);
        }
      },
      model.params);
}

std::string dump_model(const TrainedModel& model) {
  json j;
  j["format"] = "sana-model";
  j["version"] = kModelFormatVersion;
  j["kind"] = std::string(to_string(model.kind()));
  j["warnings"] = model.warnings;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SvmModel>) {
          j["weights"] = m.weights;
          j["bias"] = m.bias;
          j["converged"] = m.converged;
          j["iterations"] = m.iterations;
        } else if constexpr (std::is_same_v<T, NbModel>) {
          j["log_prior"] = m.log_prior;
          j["log_likelihood_positive"] = m.log_likelihood[0];
          j["log_likelihood_negative"] = m.log_likelihood[1];
        } else {
          j["k"] = m.k;
          j["metric"] = std::string(to_string(m.metric));
          json vs = json::array();
          for (const auto& v : m.vectors) vs.push_back(sparse_to_json(v));
          j["vectors"] = std::move(vs);
          json ls = json::array();
          for (Label l : m.labels) ls.push_back(std::string(to_string(l)));
          j["labels"] = std::move(ls);
        }
      },
      model.params);
  return j.dump();
}

TrainedModel load_model(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "sana-model") throw Error(ErrorCode::FormatError, "not a sana model");
    if (j.at("version").get<int>() != kModelFormatVersion) {
      throw Error(ErrorCode::FormatError, "unsupported model version");
    }
    const auto kind = parse_kind(j.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorCode::FormatError, "unknown model kind");
    TrainedModel out;
    out.warnings = j.value("warnings", std::vector<std::string>{});
    switch (*kind) {
      case Kind::SVM: {
        SvmModel m;
        m.weights = j.at("weights").get<std::vector<double>>();
        m.bias = j.at("bias").get<double>();
        m.converged = j.at("converged").get<bool>();
        m.iterations = j.at("iterations").get<int>();
        out.params = std::move(m);
        break;
      }
      case Kind::NB: {
        NbModel m;
        m.log_prior = j.at("log_prior").get<std::array<double, 2>>();
        m.log_likelihood[0] = j.at("log_likelihood_positive").get<std::vector<double>>();
        m.log_likelihood[1] = j.at("log_likelihood_negative").get<std::vector<double>>();
        out.params = std::move(m);
        break;
      }
      case Kind::KNN: {
        KnnModel m;
        m.k = j.at("k").get<int>();
        const auto metric = parse_knn_metric(j.at("metric").get<std::string>());
        if (!metric) throw Error(ErrorCode::FormatError, "unknown KNN metric");
        m.metric = *metric;
        for (const auto& v : j.at("vectors")) {
          m.vectors.push_back(sparse_from_json(v));
          m.squared_norms.push_back(features::squared_norm(m.vectors.back()));
        }
        for (const auto& l : j.at("labels")) {
          const auto label = parse_label(l.get<std::string>());
          if (!label) throw Error(ErrorCode::FormatError, "bad KNN label");
          m.labels.push_back(*label);
        }
        out.params = std::move(m);
        break;
      }
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("malformed model JSON: ") + e.what());
  }
}

}  // namespace sana::classify

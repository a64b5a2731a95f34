#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "sana/classifiers.hpp"
#include "sana/error.hpp"

using namespace sana;
using namespace sana::classify;
using features::SparseVector;
using testing::sparse;

namespace {

constexpr double kSvmObjectiveTol = 1e-4;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected sana::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("NB matches hand Bayes arithmetic on the four-document toy corpus") {
  // Vocabulary {good: 0, bad: 1}; two "good good" positives, two "bad" negatives.
  const std::vector<SparseVector> x = {{{0, 2.0}}, {{0, 2.0}}, {{1, 1.0}}, {{1, 1.0}}};
  const std::vector<Label> y = {Label::Positive, Label::Positive, Label::Negative, Label::Negative};
  const auto model = train_nb(x, y, 2, {1.0});
  const auto p = predict(model, {{0, 1.0}});
  // P(good|+) = (4+1)/(4+2) = 5/6, P(good|-) = (0+1)/(2+2) = 1/4, equal priors.
  const double score = std::log(5.0 / 6.0) - std::log(1.0 / 4.0);
  CHECK(p.label == Label::Positive);
  CHECK(std::abs(p.score - score) <= 1e-12);
  CHECK(std::abs(p.score - std::log(10.0 / 3.0)) <= 1e-12);
  const double posterior = 1.0 / (1.0 + std::exp(-p.score));
  CHECK(std::abs(posterior - 10.0 / 13.0) <= 1e-12);
  const auto& nb = std::get<NbModel>(model.params);
  CHECK(std::abs(nb.log_likelihood[0][0] - std::log(5.0 / 6.0)) <= 1e-12);
  CHECK(std::abs(nb.log_likelihood[1][1] - std::log(3.0 / 4.0)) <= 1e-12);
  CHECK(std::abs(nb.log_prior[0] - std::log(0.5)) <= 1e-12);
}

TEST_CASE("NB: single class, mirror symmetry, empty vector") {
  CHECK(code_of([] { train_nb(std::vector<SparseVector>{{{0, 1.0}}}, std::vector<Label>{Label::Positive}, 1); }) ==
        ErrorCode::SingleClassTraining);
  CHECK(code_of([] { train_nb(std::vector<SparseVector>{}, std::vector<Label>{}, 1); }) ==
        ErrorCode::EmptyTrainingSet);
  CHECK(code_of([] {
          train_nb(std::vector<SparseVector>{{{0, 1.0}}, {{1, 1.0}}},
                   std::vector<Label>{Label::Positive, Label::Negative}, 2, {0.0});
        }) == ErrorCode::InvalidArgument);
  // Class-swapped mirror documents: feature 0 <-> feature 1.
  const std::vector<SparseVector> x = {{{0, 3.0}, {1, 1.0}}, {{0, 1.0}, {1, 3.0}}, {{0, 2.0}, {2, 1.0}},
                                       {{1, 2.0}, {3, 1.0}}};
  const std::vector<Label> y = {Label::Positive, Label::Negative, Label::Positive, Label::Negative};
  const auto m = train_nb(x, y, 4);
  CHECK(std::abs(predict(m, {{0, 1.0}, {1, 1.0}}).score) <= 1e-12);
  CHECK(std::abs(predict(m, {{2, 2.0}, {3, 2.0}}).score) <= 1e-12);
  CHECK(std::abs(predict(m, {}).score) <= 1e-12);
}

TEST_CASE("property: scaling an NB test vector keeps its label when priors are equal") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<SparseVector> x;
    std::vector<Label> y;
    for (int i = 0; i < 10; ++i) {
      std::vector<double> d(6);
      for (auto& v : d) v = static_cast<double>(rng() % 3);
      d[static_cast<std::size_t>(i % 2)] += 1.0;
      x.push_back(sparse(d));
      y.push_back(i % 2 ? Label::Negative : Label::Positive);
    }
    const auto m = train_nb(x, y, 6);
    std::vector<double> t(6);
    for (auto& v : t) v = static_cast<double>(rng() % 4);
    const auto base = predict(m, sparse(t)).label;
    for (double c : {0.1, 0.5, 2.0, 17.0}) {
      auto scaled = t;
      for (auto& v : scaled) v *= c;
      CHECK(predict(m, sparse(scaled)).label == base);
    }
  }
}

TEST_CASE("KNN matches the exhaustive neighbour oracle on 100 random instances") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 29;
    const std::size_t f = 1 + rng() % 20;
    std::vector<std::vector<double>> dense(n, std::vector<double>(f));
    std::vector<SparseVector> x;
    std::vector<Label> y;
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& v : dense[i]) v = rng() % 3 == 0 ? static_cast<double>(rng() % 4) : 0.0;
      x.push_back(sparse(dense[i]));
      y.push_back(rng() % 2 ? Label::Positive : Label::Negative);
    }
    const int k = 1 + static_cast<int>(rng() % 12);
    const auto model = train_knn(x, y, {k, KnnMetric::Cosine});
    for (int q = 0; q < 5; ++q) {
      std::vector<double> t(f);
      for (auto& v : t) v = rng() % 2 == 0 ? static_cast<double>(rng() % 4) : 0.0;
      CHECK(predict(model, sparse(t)).label == testing::knn_reference(dense, y, t, k));
    }
  }
}

TEST_CASE("KNN: k = 1 on a training vector, clamping, empty vector, scaling") {
  const std::vector<SparseVector> x = {{{0, 1.0}}, {{1, 1.0}}, {{1, 2.0}, {2, 1.0}}};
  const std::vector<Label> y = {Label::Positive, Label::Negative, Label::Negative};
  const auto one = train_knn(x, y, {1});
  CHECK(predict(one, x[0]).label == Label::Positive);
  CHECK(predict(one, x[2]).label == Label::Negative);

  const auto big = train_knn(x, y, {9});
  REQUIRE(big.warnings.size() == 1);
  CHECK(std::get<KnnModel>(big.params).k == 3);
  CHECK(predict(big, {{0, 5.0}}).label == Label::Negative);  // majority of all three

  // Empty vector: all similarities 0, one positive vs two negatives.
  CHECK(predict(big, {}).label == Label::Negative);
  const auto two = train_knn(std::vector<SparseVector>{x[0], x[1]}, std::vector<Label>{y[0], y[1]}, {2});
  CHECK(predict(two, {}).label == Label::Positive);  // full tie falls to Positive

  CHECK(code_of([&] { train_knn(x, y, {0}); }) == ErrorCode::InvalidArgument);
  CHECK(KnnParams{}.k == 9);
}

TEST_CASE("property: cosine KNN labels are invariant to positive scaling of the test vector") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<SparseVector> x;
    std::vector<Label> y;
    for (int i = 0; i < 15; ++i) {
      std::vector<double> d(8);
      for (auto& v : d) v = static_cast<double>(rng() % 3);
      x.push_back(sparse(d));
      y.push_back(rng() % 2 ? Label::Positive : Label::Negative);
    }
    const auto m = train_knn(x, y, {5});
    std::vector<double> t(8);
    for (auto& v : t) v = static_cast<double>(rng() % 3);
    const auto base = predict(m, sparse(t)).label;
    for (double c : {0.5, 4.0}) {
      auto s = t;
      for (auto& v : s) v *= c;
      CHECK(predict(m, sparse(s)).label == base);
    }
  }
}

TEST_CASE("KNN euclidean similarity is 1 / (1 + distance)") {
  const auto m = train_knn(std::vector<SparseVector>{{{0, 3.0}}, {{1, 1.0}}},
                           std::vector<Label>{Label::Positive, Label::Negative}, {1, KnnMetric::Euclidean});
  const auto& km = std::get<KnnModel>(m.params);
  const SparseVector q = {{1, 4.0}};
  CHECK(knn_similarity(km, 0, q, 16.0) == doctest::Approx(1.0 / 6.0));
  CHECK(knn_similarity(km, 1, q, 16.0) == doctest::Approx(1.0 / 4.0));
  CHECK(predict(m, q).label == Label::Negative);
}

TEST_CASE("SVM decision rule arithmetic") {
  TrainedModel m{SvmModel{{1.0, -1.0}, 0.0, true, 0}, {}};
  const auto p = predict(m, {{0, 1.0}});
  CHECK(p.label == Label::Positive);
  CHECK(p.score == 1.0);
  CHECK(predict(m, {{1, 1.0}}).label == Label::Negative);
  CHECK(predict(m, {}).label == Label::Positive);  // sign(0) counts as Positive
}

TEST_CASE("SVM separates the 2D toy set with unit margins") {
  const std::vector<SparseVector> x = {{{0, 2.0}}, {{1, 2.0}}};
  const std::vector<Label> y = {Label::Positive, Label::Negative};
  const SvmParams params{100.0, 1e-6, 10000};
  const auto m = train_svm(x, y, 2, params);
  const auto& svm = std::get<SvmModel>(m.params);
  CHECK(svm.converged);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto p = predict(m, x[i]);
    CHECK(p.label == y[i]);
    CHECK(p.score * (y[i] == Label::Positive ? 1 : -1) >= 1.0 - params.tol);
  }
}

TEST_CASE("SVM: separable 2D fixtures are fit perfectly") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<SparseVector> x;
    std::vector<Label> y;
    for (int i = 0; i < 20; ++i) {
      const bool pos = i % 2 == 0;
      const double a = u(rng), b = u(rng) * 0.2;  // x0 - x1 >= 0.1 for every point
      x.push_back(pos ? SparseVector{{0, a + 0.5}, {1, b}} : SparseVector{{0, b}, {1, a + 0.5}});
      y.push_back(pos ? Label::Positive : Label::Negative);
    }
    const auto m = train_svm(x, y, 2, {1000.0, 1e-6, 100000});
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(predict(m, x[i]).label == y[i]);
  }
}

TEST_CASE("SVM primal objective agrees with an independent dual solver on small instances") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng() % 7;
    const std::size_t f = 1 + rng() % 5;
    std::vector<std::vector<double>> dense(n, std::vector<double>(f));
    std::vector<SparseVector> x;
    std::vector<Label> y;
    std::vector<int> ys;
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& v : dense[i]) v = static_cast<double>(rng() % 4);
      x.push_back(sparse(dense[i]));
      const bool pos = i == 0 || (i != 1 && rng() % 2);
      y.push_back(pos ? Label::Positive : Label::Negative);
      ys.push_back(pos ? 1 : -1);
    }
    const double C = trial % 2 ? 1.0 : 0.3;
    const auto model = train_svm(x, y, f, {C, 1e-8, 100000});
    const double primal = svm_primal_objective(std::get<SvmModel>(model.params), x, y, C);
    const auto ref = testing::reference_svm(dense, ys, C);
    CHECK(ref.primal - ref.dual <= 1e-6);  // the reference itself converged
    CHECK(primal >= ref.dual - 1e-9);      // weak duality
    CHECK(std::abs(primal - ref.primal) <= kSvmObjectiveTol);
  }
}

TEST_CASE("SVM: trace is monotone, training is deterministic, duplication keeps weights") {
  std::mt19937_64 rng(6);
  std::vector<SparseVector> x;
  std::vector<Label> y;
  for (int i = 0; i < 60; ++i) {
    std::vector<double> d(10);
    for (auto& v : d) v = rng() % 3 == 0 ? static_cast<double>(rng() % 5) : 0.0;
    x.push_back(sparse(d));
    y.push_back(rng() % 2 ? Label::Positive : Label::Negative);
  }
  SvmTrace trace;
  const auto a = train_svm(x, y, 10, {}, &trace);
  REQUIRE(trace.primal_objective.size() >= 1);
  for (std::size_t i = 1; i < trace.primal_objective.size(); ++i) {
    CHECK(trace.primal_objective[i] <= trace.primal_objective[i - 1] + 1e-9);
  }
  for (std::size_t i = 1; i < trace.dual_objective.size(); ++i) {
    CHECK(trace.dual_objective[i] <= trace.dual_objective[i - 1] + 1e-9);
  }
  const auto b = train_svm(x, y, 10);
  CHECK(std::get<SvmModel>(a.params).weights == std::get<SvmModel>(b.params).weights);
  CHECK(std::get<SvmModel>(a.params).bias == std::get<SvmModel>(b.params).bias);

  auto x2 = x;
  auto y2 = y;
  x2.insert(x2.end(), x.begin(), x.end());
  y2.insert(y2.end(), y.begin(), y.end());
  const auto c = train_svm(x2, y2, 10);
  const auto d = train_svm(x2, y2, 10);
  CHECK(std::get<SvmModel>(c.params).weights == std::get<SvmModel>(d.params).weights);
}

TEST_CASE("SVM: iteration cap yields a usable model with a warning") {
  std::mt19937_64 rng(2);
  std::vector<SparseVector> x;
  std::vector<Label> y;
  for (int i = 0; i < 40; ++i) {
    x.push_back({{0, static_cast<double>(rng() % 7)}, {1, static_cast<double>(1 + rng() % 7)}});
    y.push_back(rng() % 2 ? Label::Positive : Label::Negative);
  }
  const auto m = train_svm(x, y, 2, {10.0, 1e-12, 2});
  CHECK_FALSE(std::get<SvmModel>(m.params).converged);
  REQUIRE_FALSE(m.warnings.empty());
  CHECK(m.warnings[0].find("NonConvergence") != std::string::npos);
  predict(m, x[0]);
}

TEST_CASE("SVM input validation") {
  const std::vector<SparseVector> x = {{{0, 1.0}}, {{0, 2.0}}};
  CHECK(code_of([&] { train_svm(x, std::vector<Label>{Label::Positive, Label::Positive}, 1); }) ==
        ErrorCode::SingleClassTraining);
  CHECK(code_of([&] { train_svm(x, std::vector<Label>{Label::Positive, Label::Neutral}, 1); }) ==
        ErrorCode::InvalidArgument);
  CHECK(code_of([&] { train_svm(x, std::vector<Label>{Label::Positive, Label::Negative}, 1, {0.0}); }) ==
        ErrorCode::InvalidArgument);
  CHECK(code_of([&] { train_svm(x, std::vector<Label>{Label::Positive, Label::Negative}, 0); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("model dump/load round-trips every kind exactly") {
  const std::vector<SparseVector> x = {{{0, 1.5}, {2, 0.25}}, {{1, 2.0}}, {{0, 0.1}, {1, 0.7}}};
  const std::vector<Label> y = {Label::Positive, Label::Negative, Label::Negative};
  const SparseVector q = {{0, 0.3}, {1, 0.9}, {2, 1.0}};
  for (const auto& m : {train_svm(x, y, 3), train_nb(x, y, 3), train_knn(x, y, {2})}) {
    const auto back = load_model(dump_model(m));
    CHECK(back.kind() == m.kind());
    CHECK(dump_model(back) == dump_model(m));
    CHECK(predict(back, q).score == predict(m, q).score);
  }
  CHECK(code_of([] { load_model("{"); }) == ErrorCode::FormatError);
  CHECK(code_of([] { load_model("{\"format\":\"other\"}"); }) == ErrorCode::FormatError);
  CHECK(code_of([] { load_model("{\"format\":\"sana-model\",\"version\":99,\"kind\":\"NB\"}"); }) ==
        ErrorCode::FormatError);
}

TEST_CASE("classifier kinds parse from either case") {
  CHECK(parse_kind("knn") == Kind::KNN);
  CHECK(parse_kind("SVM") == Kind::SVM);
  CHECK_FALSE(parse_kind("rf").has_value());
  CHECK(parse_knn_metric("euclidean") == KnnMetric::Euclidean);
}

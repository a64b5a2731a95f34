#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "sana/annotation.hpp"
#include "sana/classifiers.hpp"
#include "sana/features.hpp"
#include "sana/grid.hpp"
#include "sana/text.hpp"

using namespace sana;

namespace {

std::vector<std::vector<std::string>> tokenized(const std::vector<grid::LabeledDocument>& docs) {
  const text::Pipeline pipeline{text::PipelineConfig{}};
  std::vector<std::vector<std::string>> out;
  for (const auto& d : docs) out.push_back(pipeline.stems(d.text));
  return out;
}

void BM_Kappa(benchmark::State& state) {
  const auto m = testing::round2_matrix();
  for (auto _ : state) benchmark::DoNotOptimize(annotation::kappa(m));
}
BENCHMARK(BM_Kappa);

void BM_AgreementMatrix(benchmark::State& state) {
  const annotation::AnnotationStore store(testing::corpus_from_matrix(testing::round2_matrix(), 2));
  for (auto _ : state) benchmark::DoNotOptimize(annotation::agreement_matrix(store, "O1", "O2", 2));
}
BENCHMARK(BM_AgreementMatrix);

void BM_Preprocess(benchmark::State& state) {
  const auto docs = testing::synthetic_documents(1, 100);
  const text::Pipeline pipeline{text::PipelineConfig{.light_stem = true}};
  for (auto _ : state) {
    for (const auto& d : docs) benchmark::DoNotOptimize(pipeline.stems(d.text));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(docs.size()));
}
BENCHMARK(BM_Preprocess);

void BM_Vectorize(benchmark::State& state) {
  const auto tokens = tokenized(testing::synthetic_documents(2, 200, 40, 300));
  const auto space = features::fit(tokens, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    for (const auto& t : tokens) benchmark::DoNotOptimize(features::vectorize(t, space, features::Scheme::TFIDF));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(tokens.size()));
}
BENCHMARK(BM_Vectorize)->Arg(1)->Arg(3);

struct TrainingSet {
  std::vector<features::SparseVector> x;
  std::vector<Label> y;
  std::size_t dim = 0;
};

TrainingSet training_set(std::size_t per_class) {
  const auto docs = testing::synthetic_documents(3, per_class, 20, 200);
  const auto tokens = tokenized(docs);
  const auto space = features::fit(tokens, 2);
  TrainingSet t;
  t.dim = space.size();
  for (std::size_t i = 0; i < docs.size(); ++i) {
    t.x.push_back(features::vectorize(tokens[i], space, features::Scheme::TF).entries);
    t.y.push_back(docs[i].label);
  }
  return t;
}

void BM_TrainSvm(benchmark::State& state) {
  const auto t = training_set(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(classify::train_svm(t.x, t.y, t.dim));
}
BENCHMARK(BM_TrainSvm)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_TrainNb(benchmark::State& state) {
  const auto t = training_set(200);
  for (auto _ : state) benchmark::DoNotOptimize(classify::train_nb(t.x, t.y, t.dim));
}
BENCHMARK(BM_TrainNb)->Unit(benchmark::kMicrosecond);

void BM_PredictKnn(benchmark::State& state) {
  const auto t = training_set(200);
  const auto model = classify::train_knn(t.x, t.y);
  for (auto _ : state) benchmark::DoNotOptimize(classify::predict(model, t.x[7]));
}
BENCHMARK(BM_PredictKnn)->Unit(benchmark::kMicrosecond);

void BM_SmallGrid(benchmark::State& state) {
  const auto docs = testing::synthetic_documents(4, 45);
  grid::GridConfig cfg;
  cfg.threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(grid::run_grid(docs, cfg, "bench"));
}
BENCHMARK(BM_SmallGrid)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->Iterations(2);

}  // namespace
BENCHMARK_MAIN();

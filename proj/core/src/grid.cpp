#include "sana/grid.hpp"

#include <openssl/evp.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <exception>
#include <json.hpp>
#include <optional>
#include <thread>

#include "sana/error.hpp"

namespace sana::grid {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kNgramNames[] = {"Unigram", "Bigram", "Tri-gram"};

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::InvalidArgument, "SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xF];
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

ordered_json config_json(const GridConfig& c) {
  ordered_json classifiers = ordered_json::array();
  for (auto k : c.classifiers) classifiers.push_back(std::string(classify::to_string(k)));
  return ordered_json{
      {"format_version", 1},
      {"normalize",
       {{"normalize_alef", c.normalize.normalize_alef},
        {"strip_diacritics", c.normalize.strip_diacritics},
        {"strip_tatweel", c.normalize.strip_tatweel}}},
      {"stopwords", c.stopwords},
      {"ngram_mode", std::string(features::to_string(c.ngram_mode))},
      {"fit_scope", std::string(eval::to_string(c.fit_scope))},
      {"svm", {{"C", c.svm.C}, {"tol", c.svm.tol}, {"max_iter", c.svm.max_iter}}},
      {"nb", {{"alpha", c.nb.alpha}}},
      {"knn", {{"k", c.knn.k}, {"metric", std::string(classify::to_string(c.knn.metric))}}},
      {"folds", c.folds},
      {"stratified", c.stratified},
      {"averaging", std::string(eval::to_string(c.averaging))},
      {"seed", c.seed},
      {"classifiers", classifiers},
  };
}

bool selected(const GridConfig& c, classify::Kind k) {
  for (auto s : c.classifiers) {
    if (s == k) return true;
  }
  return false;
}

std::vector<classify::Kind> selected_kinds(const GridConfig& c) {
  std::vector<classify::Kind> out;
  for (auto k : classify::kAllKinds) {
    if (selected(c, k)) out.push_back(k);
  }
  return out;
}

}  // namespace

std::vector<LabeledDocument> labeled_documents(const corpus::Corpus& corpus) {
  std::vector<LabeledDocument> docs;
  docs.reserve(corpus.size());
  for (const auto& c : corpus.comments()) {
    if (!c.label || *c.label == Label::Neutral) {
      throw Error(ErrorCode::InvalidArgument,
                  "comment '" + c.comment_id + "' has no binary label; grid corpora must be "
                  "labelled Positive/Negative");
    }
    docs.push_back(LabeledDocument{c.comment_id, c.text, *c.label});
  }
  return docs;
}

std::string GridCellConfig::key() const {
  return std::string("stem=") + (light_stem ? "yes" : "no") +
         "/scheme=" + std::string(features::to_string(scheme)) +
         "/ngram=" + std::to_string(ngram_order) +
         "/classifier=" + std::string(classify::to_string(classifier));
}

std::string GridConfig::to_json() const { return config_json(*this).dump(); }

std::string GridConfig::fingerprint() const { return sha256_hex(to_json()); }

std::vector<GridCellConfig> plan_cells(const GridConfig& config) {
  std::vector<GridCellConfig> cells;
  for (bool stem : {false, true}) {
    for (auto scheme : features::kAllSchemes) {
      for (auto kind : selected_kinds(config)) {
        for (int order = 1; order <= 3; ++order) {
          cells.push_back(GridCellConfig{stem, scheme, order, kind, config.seed});
        }
      }
    }
  }
  return cells;
}

bool GridResult::complete() const {
  const auto planned = plan_cells(config);
  if (planned.empty() || planned.size() != cells.size()) return false;
  for (std::size_t i = 0; i < planned.size(); ++i) {
    if (!(planned[i] == cells[i].config)) return false;
  }
  return true;
}

const GridCell* GridResult::find(bool light_stem, features::Scheme scheme, int ngram_order,
                                 classify::Kind classifier) const {
  for (const auto& c : cells) {
    if (c.config.light_stem == light_stem && c.config.scheme == scheme &&
        c.config.ngram_order == ngram_order && c.config.classifier == classifier) {
      return &c;
    }
  }
  return nullptr;
}

eval::LearnerConfig learner_config(const GridCellConfig& cell, const GridConfig& config) {
  eval::LearnerConfig lc;
  lc.scheme = cell.scheme;
  lc.ngram_order = cell.ngram_order;
  lc.ngram_mode = config.ngram_mode;
  lc.fit_scope = config.fit_scope;
  lc.classifier = cell.classifier;
  lc.svm = config.svm;
  lc.nb = config.nb;
  lc.knn = config.knn;
  return lc;
}

GridResult run_grid(std::span<const LabeledDocument> documents, const GridConfig& config,
                    std::string corpus_name, const LearnerFactory& factory) {
  std::vector<Label> labels;
  labels.reserve(documents.size());
  for (const auto& d : documents) {
    if (d.label == Label::Neutral) {
      throw Error(ErrorCode::InvalidArgument, "grid corpus must be binary; '" + d.id + "' is Neutral");
    }
    labels.push_back(d.label);
  }
  const auto plan = eval::make_folds(labels, config.folds, config.stratified, config.seed);

  std::array<eval::Dataset, 2> datasets;
  for (int stem = 0; stem < 2; ++stem) {
    text::PipelineConfig pc;
    pc.light_stem = stem == 1;
    pc.normalize = config.normalize;
    pc.stopwords = config.stopwords;
    const text::Pipeline pipeline(std::move(pc));
    auto& ds = datasets[static_cast<std::size_t>(stem)];
    ds.labels = labels;
    ds.tokens.reserve(documents.size());
    for (const auto& d : documents) ds.tokens.push_back(pipeline.stems(d.text));
  }

  GridResult result;
  result.corpus_name = std::move(corpus_name);
  result.timestamp = utc_timestamp();
  result.fingerprint = config.fingerprint();
  result.config = config;

  const auto planned = plan_cells(config);
  std::vector<std::optional<eval::CvResult>> slots(planned.size());
  std::vector<std::exception_ptr> errors(planned.size());

  auto run_cell = [&](std::size_t i) {
    try {
      const auto& cell = planned[i];
      std::unique_ptr<eval::Learner> learner =
          factory ? factory(cell, config)
                  : std::make_unique<eval::PipelineLearner>(learner_config(cell, config));
      slots[i] = eval::cross_validate(datasets[cell.light_stem ? 1 : 0], *learner, plan);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(config.threads,
                                                           static_cast<unsigned>(planned.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < planned.size(); ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < planned.size(); i = next++) run_cell(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < planned.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      throw Error(ErrorCode::GridCellFailed, planned[i].key() + ": " + std::string(to_string(e.code())) +
                                                 ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::GridCellFailed, planned[i].key() + ": " + e.what());
    }
  }
  result.cells.reserve(planned.size());
  for (std::size_t i = 0; i < planned.size(); ++i) {
    result.cells.push_back(GridCell{planned[i], std::move(*slots[i])});
  }
  return result;
}

std::string format_percent(double fraction) { return fixed(fraction * 100.0, 2); }

std::string render_table(const GridResult& result, TableFormat format) {
  if (!result.complete()) {
    throw Error(ErrorCode::IncompleteGrid, "grid result has " + std::to_string(result.cells.size()) +
                                               " of " + std::to_string(plan_cells(result.config).size()) +
                                               " planned cells");
  }
  const auto kinds = selected_kinds(result.config);
  std::string out;
  if (format == TableFormat::Markdown) {
    out += "Accuracy (%) of " + result.corpus_name + ", " + std::to_string(result.config.folds) +
           "-fold cross-validation\n\n";
    out += "| Light Stem | Weighting |";
    std::string rule = "|---|---|";
    for (auto k : kinds) {
      for (const char* n : kNgramNames) {
        out += " " + std::string(classify::to_string(k)) + " " + n + " |";
        rule += "---:|";
      }
    }
    out += "\n" + rule + "\n";
  } else {
    out += "light_stem,scheme";
    for (auto k : kinds) {
      for (const char* n : kNgramNames) out += "," + std::string(classify::to_string(k)) + "_" + n;
    }
    out += "\n";
  }
  for (bool stem : {false, true}) {
    for (auto scheme : features::kAllSchemes) {
      const std::string stem_name = stem ? "Yes" : "No";
      const std::string scheme_name(features::to_string(scheme));
      out += format == TableFormat::Markdown ? "| " + stem_name + " | " + scheme_name + " |"
                                             : stem_name + "," + scheme_name;
      for (auto k : kinds) {
        for (int order = 1; order <= 3; ++order) {
          const auto* cell = result.find(stem, scheme, order, k);
          const std::string v = format_percent(result.accuracy(*cell));
          out += format == TableFormat::Markdown ? " " + v + " |" : "," + v;
        }
      }
      out += "\n";
    }
  }
  if (format == TableFormat::Markdown) {
    out += "\nconfig fingerprint: `" + result.fingerprint + "`\n";
  }
  return out;
}

std::string render_cells_csv(const GridResult& result) {
  std::string out =
      "light_stem,scheme,ngram,classifier,tp,fp,fn,tn,precision_pos,recall_pos,precision_neg,"
      "recall_neg,accuracy_pct\n";
  for (const auto& cell : result.cells) {
    const auto& c = cell.config;
    const auto& r = cell.result.report;
    out += std::string(c.light_stem ? "yes" : "no") + "," + std::string(features::to_string(c.scheme)) +
           "," + std::to_string(c.ngram_order) + "," + std::string(classify::to_string(c.classifier)) +
           "," + std::to_string(r.confusion.tp) + "," + std::to_string(r.confusion.fp) + "," +
           std::to_string(r.confusion.fn) + "," + std::to_string(r.confusion.tn) + "," +
           fixed(r.precision_pos, 6) + "," + fixed(r.recall_pos, 6) + "," + fixed(r.precision_neg, 6) +
           "," + fixed(r.recall_neg, 6) + "," + format_percent(result.accuracy(cell)) + "\n";
  }
  return out;
}

std::string result_json(const GridResult& result) {
  ordered_json cells = ordered_json::array();
  for (const auto& cell : result.cells) {
    const auto& c = cell.config;
    const auto& r = cell.result.report;
    cells.push_back(ordered_json{
        {"light_stem", c.light_stem},
        {"scheme", std::string(features::to_string(c.scheme))},
        {"ngram", c.ngram_order},
        {"classifier", std::string(classify::to_string(c.classifier))},
        {"fold_plan", {{"seed", c.seed}, {"k", result.config.folds}, {"stratified", result.config.stratified}}},
        {"confusion", {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"fn", r.confusion.fn}, {"tn", r.confusion.tn}}},
        {"precision_pos", r.precision_pos},
        {"recall_pos", r.recall_pos},
        {"precision_neg", r.precision_neg},
        {"recall_neg", r.recall_neg},
        {"accuracy", r.accuracy},
        {"macro_accuracy", cell.result.macro_accuracy},
        {"warnings", cell.result.warnings},
    });
  }
  ordered_json j{
      {"corpus", result.corpus_name},
      {"timestamp", result.timestamp},
      {"fingerprint", result.fingerprint},
      {"config", config_json(result.config)},
      {"cells", std::move(cells)},
  };
  return j.dump(2);
}

}  // namespace sana::grid

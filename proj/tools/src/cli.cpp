#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <pthread.h>

#include "sana/corpus.hpp"
#include "sana/error.hpp"
#include "sana/grid.hpp"
#include "sana/service.hpp"

namespace sana::cli {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

corpus::CorpusFormat detect_format(const fs::path& path, const std::string& requested) {
  if (requested == "manifest") return corpus::CorpusFormat::Manifest;
  if (requested == "oca") return corpus::CorpusFormat::OcaFolders;
  if (requested != "auto") throw Error(ErrorCode::InvalidArgument, "unknown format '" + requested + "'");
  return fs::is_directory(path) ? corpus::CorpusFormat::OcaFolders : corpus::CorpusFormat::Manifest;
}

std::array<std::string, 2> pick_pair(const annotation::AnnotationStore& store, int round,
                                     const std::string& a, const std::string& b) {
  if (!a.empty() && !b.empty()) return {a, b};
  if (!a.empty() || !b.empty()) {
    throw Error(ErrorCode::InvalidArgument, "give both --a and --b, or neither");
  }
  const auto present = store.annotators(round);
  if (present.size() != 2) {
    throw Error(ErrorCode::InvalidArgument,
                "round " + std::to_string(round) + " has " + std::to_string(present.size()) +
                    " annotators; choose two with --a and --b");
  }
  return {present[0], present[1]};
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  f << content;
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// ---- ingest ----------------------------------------------------------------

struct IngestArgs {
  std::vector<std::string> inputs;
  std::string out;
  std::string format = "auto";
  std::string name;
};

int cmd_ingest(const IngestArgs& args, std::ostream& out) {
  corpus::Corpus merged(args.name.empty() ? fs::path(args.out).stem().string() : args.name);
  corpus::IngestSummary total;
  for (const auto& input : args.inputs) {
    corpus::IngestSummary within;
    const auto part = corpus::load_corpus(input, detect_format(input, args.format), &within);
    const auto across = corpus::merge_into(merged, part);
    total.rejected += within.rejected + across.rejected;
  }
  total.added = merged.size();
  corpus::save_corpus(merged, args.out);
  out << "added " << total.added << ", rejected " << total.rejected << " duplicate(s); wrote "
      << args.out << "\n";
  return kOk;
}

// ---- kappa -----------------------------------------------------------------

struct KappaArgs {
  std::string manifest;
  std::string a;
  std::string b;
  int round = 1;
  bool json = false;
};

int cmd_kappa(const KappaArgs& args, std::ostream& out) {
  const auto corpus = corpus::load_corpus(args.manifest, corpus::CorpusFormat::Manifest);
  const annotation::AnnotationStore store(corpus);
  const auto pair = pick_pair(store, args.round, args.a, args.b);
  const auto m = annotation::agreement_matrix(store, pair[0], pair[1], args.round);
  const auto k = annotation::kappa(m);

  // Compare with the previous round when the same pair annotated it.
  std::optional<annotation::KappaResult> previous;
  if (args.round > 1 && !annotation::joint_labels(store, pair[0], pair[1], args.round - 1).empty()) {
    try {
      previous = annotation::kappa(annotation::agreement_matrix(store, pair[0], pair[1], args.round - 1));
    } catch (const Error&) {
      previous.reset();
    }
  }
  if (args.json) {
    auto j = ordered_json::parse(annotation::kappa_report_json(k, m));
    j["round"] = args.round;
    j["n_joint"] = m.total();
    if (previous) {
      j["previous_k"] = previous->k;
      j["accepted"] = annotation::round_accepted(k.k, previous->k);
    }
    out << j.dump() << "\n";
    return kOk;
  }
  out << "round " << args.round << ": " << pair[0] << " (rows) vs " << pair[1] << " (columns), "
      << m.total() << " jointly annotated\n";
  char line[128];
  std::snprintf(line, sizeof line, "%-10s %9s %9s %9s\n", "", "Positive", "Negative", "Neutral");
  out << line;
  for (Label l : kAllLabels) {
    std::snprintf(line, sizeof line, "%-10s %9llu %9llu %9llu\n", std::string(to_string(l)).c_str(),
                  static_cast<unsigned long long>(m.at(l, Label::Positive)),
                  static_cast<unsigned long long>(m.at(l, Label::Negative)),
                  static_cast<unsigned long long>(m.at(l, Label::Neutral)));
    out << line;
  }
  out << "pr_a = " << fmt4(k.pr_a) << "\npr_e = " << fmt4(k.pr_e) << "\nk    = " << fmt4(k.k)
      << "\nband = " << annotation::to_string(k.band) << "\n";
  if (previous) {
    out << (annotation::round_accepted(k.k, previous->k) ? "accepted" : "not accepted")
        << ": round " << args.round - 1 << " had k = " << fmt4(previous->k) << "\n";
  }
  return kOk;
}

// ---- gold ------------------------------------------------------------------

struct GoldArgs {
  std::string manifest;
  std::string resolutions;
  std::string out;
  std::string gold_out;
  std::string a;
  std::string b;
  int round = 1;
  std::uint64_t seed = 0;
};

std::string class_counts(std::size_t pos, std::size_t neg, std::size_t neu) {
  return std::to_string(pos) + " Positive, " + std::to_string(neg) + " Negative, " +
         std::to_string(neu) + " Neutral";
}

int cmd_gold(const GoldArgs& args, std::ostream& out) {
  const auto source = corpus::load_corpus(args.manifest, corpus::CorpusFormat::Manifest);
  const annotation::AnnotationStore store(source);
  const auto pair = pick_pair(store, args.round, args.a, args.b);
  const auto resolutions =
      args.resolutions.empty() ? annotation::Resolutions{} : load_resolutions(args.resolutions);
  const auto gold = annotation::adjudicate(store, pair[0], pair[1], args.round, resolutions);
  out << "gold: " << gold.size() << " documents ("
      << class_counts(gold.count(Label::Positive), gold.count(Label::Negative), gold.count(Label::Neutral))
      << ")\n";
  const auto balanced = annotation::balance(gold, args.seed);
  out << "balanced: " << balanced.documents.size() << " documents ("
      << balanced.count(Label::Positive) << "/" << balanced.count(Label::Negative) << "), seed "
      << balanced.seed << "\n";

  corpus::Corpus result(source.name());
  for (const auto& [id, label] : balanced.documents) {
    auto c = *source.find(id);
    c.label = label;
    result.add_article(source.article(c.article_id));
    result.ingest(std::move(c));
  }
  corpus::save_corpus(result, args.out);
  out << "wrote " << args.out << "\n";
  if (!args.gold_out.empty()) {
    write_file(args.gold_out, annotation::gold_to_jsonl(gold));
    out << "wrote " << args.gold_out << "\n";
  }
  return kOk;
}

// ---- grid ------------------------------------------------------------------

struct GridArgs {
  std::string corpus;
  std::string format = "auto";
  std::string out_dir;
  std::string stopwords;
  bool no_stopwords = false;
  bool no_alef_fold = false;
  bool keep_diacritics = false;
  bool keep_tatweel = false;
  std::string fit_scope = "train_only";
  std::string ngram_mode = "cumulative";
  std::vector<std::string> classifiers;
  int k = 9;
  std::string knn_metric = "cosine";
  double nb_alpha = 1.0;
  double svm_c = 1.0;
  double svm_tol = 1e-4;
  int svm_max_iter = 10000;
  int folds = 10;
  bool no_stratify = false;
  std::string averaging = "micro";
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

template <class T>
T require(std::optional<T> v, const std::string& flag, const std::string& value) {
  if (!v) throw Error(ErrorCode::InvalidArgument, "invalid value '" + value + "' for " + flag);
  return *v;
}

grid::GridConfig grid_config(const GridArgs& a) {
  grid::GridConfig c;
  c.normalize.normalize_alef = !a.no_alef_fold;
  c.normalize.strip_diacritics = !a.keep_diacritics;
  c.normalize.strip_tatweel = !a.keep_tatweel;
  if (a.no_stopwords) {
    c.stopwords.clear();
  } else if (!a.stopwords.empty()) {
    c.stopwords = text::load_stopwords(a.stopwords);
  }
  c.fit_scope = require(eval::parse_fit_scope(a.fit_scope), "--fit-scope", a.fit_scope);
  c.ngram_mode = require(features::parse_ngram_mode(a.ngram_mode), "--ngram-mode", a.ngram_mode);
  if (!a.classifiers.empty()) {
    c.classifiers.clear();
    for (auto k : classify::kAllKinds) {
      for (const auto& name : a.classifiers) {
        if (require(classify::parse_kind(name), "--classifier", name) == k) {
          c.classifiers.push_back(k);
          break;
        }
      }
    }
  }
  c.knn.k = a.k;
  c.knn.metric = require(classify::parse_knn_metric(a.knn_metric), "--knn-metric", a.knn_metric);
  c.nb.alpha = a.nb_alpha;
  c.svm.C = a.svm_c;
  c.svm.tol = a.svm_tol;
  c.svm.max_iter = a.svm_max_iter;
  c.folds = a.folds;
  c.stratified = !a.no_stratify;
  c.averaging = require(eval::parse_averaging(a.averaging), "--averaging", a.averaging);
  c.seed = a.seed;
  c.threads = a.threads;
  return c;
}

int cmd_grid(const GridArgs& args, std::ostream& out, std::ostream& err) {
  const auto config = grid_config(args);
  const auto corpus = corpus::load_corpus(args.corpus, detect_format(args.corpus, args.format));
  const auto docs = grid::labeled_documents(corpus);
  const std::string name =
      corpus.name().empty() ? fs::path(args.corpus).filename().string() : corpus.name();
  const auto result = grid::run_grid(docs, config, name);

  const fs::path dir(args.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  const auto markdown = grid::render_table(result, grid::TableFormat::Markdown);
  write_file(dir / "table.md", markdown);
  write_file(dir / "table.csv", grid::render_table(result, grid::TableFormat::Csv));
  write_file(dir / "cells.csv", grid::render_cells_csv(result));
  write_file(dir / "result.json", grid::result_json(result));

  std::size_t warnings = 0;
  for (const auto& cell : result.cells) warnings += cell.result.warnings.size();
  if (warnings > 0) err << "warning: " << warnings << " classifier warning(s); see result.json\n";
  out << markdown << "\nwrote table.md, table.csv, cells.csv, result.json to " << dir.string() << "\n";
  return kOk;
}

// ---- serve -----------------------------------------------------------------

struct ServeArgs {
  std::string manifest;
  std::string address = "127.0.0.1:8080";
  int round = 1;
  std::string mode;
  std::vector<std::string> annotators;
  int page_size = 50;
};

int cmd_serve(const ServeArgs& args, std::ostream& out) {
  const auto colon = args.address.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::InvalidArgument, "--address must be host:port");
  const std::string host = args.address.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(args.address.substr(colon + 1));
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidArgument, "bad port in --address '" + args.address + "'");
  }

  service::SessionOptions opts;
  opts.round = args.round;
  opts.mode = args.round == 1 ? annotation::GuidelineMode::WithArticleContext
                              : annotation::GuidelineMode::CommentOnly;
  if (!args.mode.empty()) {
    opts.mode = require(annotation::parse_guideline_mode(args.mode), "--mode", args.mode);
  }
  if (!args.annotators.empty()) {
    if (args.annotators.size() != 2) {
      throw Error(ErrorCode::InvalidArgument, "--annotators takes exactly two ids");
    }
    opts.roster = {args.annotators[0], args.annotators[1]};
  }
  opts.default_page_size = args.page_size;
  opts.manifest_path = args.manifest;

  service::AnnotationSession session(
      corpus::load_corpus(args.manifest, corpus::CorpusFormat::Manifest), opts);

  // Block the signals before any server thread exists so only sigwait sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  service::Server server(session);
  const int bound = server.bind(host, port);
  server.start();
  out << "serving " << args.manifest << " on http://" << host << ":" << bound << " (round "
      << opts.round << ", " << annotation::to_string(opts.mode) << ", roster "
      << session.options().roster[0] << "," << session.options().roster[1] << ")" << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  server.stop();
  pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);
  out << "stopped" << std::endl;
  return kOk;
}

}  // namespace

std::uint64_t default_seed() {
  if (const char* env = std::getenv("SANA_SEED"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (end != nullptr && *end == '\0' && env[0] != '-') return v;
  }
  return 42;
}

annotation::Resolutions load_resolutions(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  annotation::Resolutions out;
  std::string line;
  for (int n = 1; std::getline(f, line); ++n) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(n) + ": ";
    try {
      const auto j = nlohmann::json::parse(line);
      const auto label = parse_label(j.at("label").get<std::string>());
      if (!label) throw Error(ErrorCode::FormatError, where + "invalid label");
      out[j.at("comment_id").get<std::string>()] = *label;
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::FormatError, where + e.what());
    }
  }
  return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Arabic sentiment corpus workbench: annotation agreement, gold building and "
               "classifier grids"};
  app.name("sana");
  app.require_subcommand(1);
  const std::uint64_t seed = default_seed();

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Merge manifests or OCA folders into one deduplicated manifest");
  ingest_cmd->add_option("inputs", ingest.inputs, "Manifest files or OCA folder roots")->required();
  ingest_cmd->add_option("-o,--out", ingest.out, "Output manifest")->required();
  ingest_cmd->add_option("--format", ingest.format, "auto | manifest | oca")->capture_default_str();
  ingest_cmd->add_option("--name", ingest.name, "Corpus name (default: output file stem)");

  KappaArgs kappa;
  auto* kappa_cmd = app.add_subcommand("kappa", "Agreement matrix and Cohen's kappa for one round");
  kappa_cmd->add_option("manifest", kappa.manifest)->required();
  kappa_cmd->add_option("--a", kappa.a, "First annotator (rows)");
  kappa_cmd->add_option("--b", kappa.b, "Second annotator (columns)");
  kappa_cmd->add_option("--round", kappa.round)->capture_default_str()->check(CLI::PositiveNumber);
  kappa_cmd->add_flag("--json", kappa.json, "Print {pr_a, pr_e, k, band, matrix}");

  GoldArgs gold;
  gold.seed = seed;
  auto* gold_cmd = app.add_subcommand("gold", "Adjudicate one round and write a balanced gold manifest");
  gold_cmd->add_option("manifest", gold.manifest)->required();
  gold_cmd->add_option("-o,--out", gold.out, "Balanced gold manifest")->required();
  gold_cmd->add_option("--resolutions", gold.resolutions, "JSON Lines of {comment_id, label}");
  gold_cmd->add_option("--gold-out", gold.gold_out, "Also write the unbalanced gold as JSON Lines");
  gold_cmd->add_option("--a", gold.a);
  gold_cmd->add_option("--b", gold.b);
  gold_cmd->add_option("--round", gold.round)->capture_default_str()->check(CLI::PositiveNumber);
  gold_cmd->add_option("--seed", gold.seed, "Downsampling seed (default 42 or $SANA_SEED)")
      ->capture_default_str();

  GridArgs grid_args;
  grid_args.seed = seed;
  auto* grid_cmd = app.add_subcommand("grid", "Cross-validated accuracy over the full experiment grid");
  grid_cmd->add_option("corpus", grid_args.corpus, "Labelled manifest or OCA folder root")->required();
  grid_cmd->add_option("-o,--out-dir", grid_args.out_dir, "Directory for table.md, table.csv, cells.csv, result.json")
      ->required();
  grid_cmd->add_option("--format", grid_args.format, "auto | manifest | oca")->capture_default_str();
  grid_cmd->add_option("--stopwords", grid_args.stopwords, "Stop-word file, one per line");
  grid_cmd->add_flag("--no-stopwords", grid_args.no_stopwords);
  grid_cmd->add_flag("--no-alef-fold", grid_args.no_alef_fold);
  grid_cmd->add_flag("--keep-diacritics", grid_args.keep_diacritics);
  grid_cmd->add_flag("--keep-tatweel", grid_args.keep_tatweel);
  grid_cmd->add_option("--fit-scope", grid_args.fit_scope, "train_only | global")->capture_default_str();
  grid_cmd->add_option("--ngram-mode", grid_args.ngram_mode, "cumulative | exact")->capture_default_str();
  grid_cmd->add_option("--classifier", grid_args.classifiers, "svm | nb | knn (repeatable; default all)");
  grid_cmd->add_option("--k", grid_args.k, "KNN neighbours")->capture_default_str()->check(CLI::PositiveNumber);
  grid_cmd->add_option("--knn-metric", grid_args.knn_metric, "cosine | euclidean")->capture_default_str();
  grid_cmd->add_option("--nb-alpha", grid_args.nb_alpha)->capture_default_str()->check(CLI::PositiveNumber);
  grid_cmd->add_option("--svm-c", grid_args.svm_c)->capture_default_str()->check(CLI::PositiveNumber);
  grid_cmd->add_option("--svm-tol", grid_args.svm_tol)->capture_default_str()->check(CLI::PositiveNumber);
  grid_cmd->add_option("--svm-max-iter", grid_args.svm_max_iter)->capture_default_str()->check(CLI::PositiveNumber);
  grid_cmd->add_option("--folds", grid_args.folds)->capture_default_str()->check(CLI::Range(2, 1000));
  grid_cmd->add_flag("--no-stratify", grid_args.no_stratify);
  grid_cmd->add_option("--averaging", grid_args.averaging, "micro | macro")->capture_default_str();
  grid_cmd->add_option("--seed", grid_args.seed, "Fold seed (default 42 or $SANA_SEED)")->capture_default_str();
  grid_cmd->add_option("--threads", grid_args.threads)->capture_default_str()->check(CLI::Range(1u, 256u));

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "HTTP annotation service over a manifest");
  serve_cmd->add_option("manifest", serve.manifest)->required();
  serve_cmd->add_option("--address", serve.address, "host:port (port 0 picks a free one)")
      ->capture_default_str();
  serve_cmd->add_option("--round", serve.round)->capture_default_str()->check(CLI::PositiveNumber);
  serve_cmd->add_option("--mode", serve.mode,
                        "with-article | comment-only (default: with-article for round 1)");
  serve_cmd->add_option("--annotators", serve.annotators, "The two annotator ids")->delimiter(',');
  serve_cmd->add_option("--page-size", serve.page_size)->capture_default_str()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (*ingest_cmd) return cmd_ingest(ingest, out);
    if (*kappa_cmd) return cmd_kappa(kappa, out);
    if (*gold_cmd) return cmd_gold(gold, out);
    if (*grid_cmd) return cmd_grid(grid_args, out, err);
    if (*serve_cmd) return cmd_serve(serve, out);
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    switch (kind_of(e.code())) {
      case ErrorKind::Usage: return kUsage;
      case ErrorKind::Data: return kData;
      case ErrorKind::Internal: return kInternal;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}

}  // namespace sana::cli

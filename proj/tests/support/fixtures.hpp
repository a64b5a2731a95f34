#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sana/annotation.hpp"
#include "sana/classifiers.hpp"
#include "sana/corpus.hpp"
#include "sana/grid.hpp"

namespace sana::testing {

/// Round-1 and round-2 agreement counts reported for the comment corpus
/// (rows: first annotator, columns: second; Positive, Negative, Neutral).
annotation::AgreementMatrix round1_matrix();
annotation::AgreementMatrix round2_matrix();

/// A corpus whose round-`round` annotations by `a` and `b` reproduce `m`,
/// cell by cell in row-major order. Comment ids are "c0001", "c0002", ...
corpus::Corpus corpus_from_matrix(const annotation::AgreementMatrix& m, int round = 1,
                                  const std::string& a = "O1", const std::string& b = "O2");

/// Both annotators agree on every comment.
corpus::Corpus corpus_from_gold_counts(std::size_t pos, std::size_t neg, std::size_t neu,
                                       int round = 1, const std::string& a = "O1",
                                       const std::string& b = "O2");

/// Resolves the first `to_pos` disagreements (corpus order) to Positive and
/// the next `to_neg` to Negative; the rest stay unresolved.
annotation::Resolutions resolve_disagreements(const annotation::AnnotationStore& store,
                                              const std::string& a, const std::string& b, int round,
                                              std::size_t to_pos, std::size_t to_neg);

/// Two classes with disjoint vocabularies: `per_class` documents each of
/// `doc_len` words drawn (seeded) from `vocab` class-specific Arabic words.
std::vector<grid::LabeledDocument> synthetic_documents(std::uint64_t seed, std::size_t per_class = 100,
                                                       std::size_t doc_len = 20, std::size_t vocab = 50);

corpus::Corpus synthetic_corpus(std::uint64_t seed, std::size_t per_class = 100);

/// Four-letter Arabic word, distinct per index, untouched by normalization
/// and light stemming.
std::string synthetic_word(std::size_t index);

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& content);

/// Soft-margin SVM solved independently of the library: accelerated
/// projected gradient on the dual, bias chosen by exact line search on the
/// primal. Returns the primal objective and the dual lower bound.
struct SvmReference {
  std::vector<double> weights;
  double bias = 0.0;
  double primal = 0.0;
  double dual = 0.0;
};

SvmReference reference_svm(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                           double C, int iterations = 200000);

/// Dense to sparse, dropping zeros.
features::SparseVector sparse(const std::vector<double>& dense);

/// Cosine KNN by exhaustive search over dense vectors: majority vote, then
/// summed similarity, then Positive.
Label knn_reference(const std::vector<std::vector<double>>& train, const std::vector<Label>& labels,
                    const std::vector<double>& x, int k);

}  // namespace sana::testing

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sana::features {

/// Term weighting: raw occurrence count (TO), length-normalized frequency
/// (TF), TF scaled by ln(n_docs / df) (TFIDF) and binary presence (BTO).
enum class Scheme { TO, TF, TFIDF, BTO };

inline constexpr Scheme kAllSchemes[] = {Scheme::TO, Scheme::TF, Scheme::TFIDF, Scheme::BTO};

std::string_view to_string(Scheme scheme);
std::optional<Scheme> parse_scheme(std::string_view name);

/// Cumulative order n emits every k-gram for k = 1..n; Exact emits n-grams only.
enum class NgramMode { Cumulative, Exact };

std::string_view to_string(NgramMode mode);
std::optional<NgramMode> parse_ngram_mode(std::string_view name);

struct SparseEntry {
  std::uint32_t index;
  double value;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// Sorted by index, strictly increasing, no zero values.
using SparseVector = std::vector<SparseEntry>;

double dot(const SparseVector& a, const SparseVector& b);
double squared_norm(const SparseVector& v);

struct DocVector {
  SparseVector entries;
  Scheme scheme = Scheme::TO;
};

/// Contiguous word n-grams joined by a single space, ordered by gram length
/// and then by position. Throws InvalidArgument unless order is 1, 2 or 3.
std::vector<std::string> ngrams(std::span<const std::string> tokens, int order,
                                NgramMode mode = NgramMode::Cumulative);

/// N-gram vocabulary with document frequencies. Feature indices follow first
/// appearance in the fitting documents.
class FeatureSpace {
 public:
  int ngram_order() const { return order_; }
  NgramMode mode() const { return mode_; }
  std::size_t size() const { return ngrams_.size(); }
  std::size_t n_docs() const { return n_docs_; }

  std::optional<std::uint32_t> index_of(const std::string& ngram) const;
  const std::string& ngram(std::uint32_t index) const { return ngrams_[index]; }
  std::uint32_t doc_freq(std::uint32_t index) const { return doc_freq_[index]; }

  /// index<TAB>ngram<TAB>doc_freq, one feature per line in index order.
  void dump(std::ostream& out) const;

  friend FeatureSpace fit(std::span<const std::vector<std::string>> documents, int order,
                          NgramMode mode);

 private:
  int order_ = 1;
  NgramMode mode_ = NgramMode::Cumulative;
  std::size_t n_docs_ = 0;
  std::vector<std::string> ngrams_;
  std::vector<std::uint32_t> doc_freq_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

/// Throws EmptyCorpus when `documents` is empty.
FeatureSpace fit(std::span<const std::vector<std::string>> documents, int order,
                 NgramMode mode = NgramMode::Cumulative);

/// Weights `doc` in `space`. N-grams outside the vocabulary are dropped but
/// still count towards the document length used by TF and TFIDF.
DocVector vectorize(std::span<const std::string> doc, const FeatureSpace& space, Scheme scheme);

}  // namespace sana::features

#include "sana/features.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "sana/error.hpp"

namespace sana::features {

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::TO: return "TO";
    case Scheme::TF: return "TF";
    case Scheme::TFIDF: return "TF-IDF";
    case Scheme::BTO: return "BTO";
  }
  return "?";
}

std::optional<Scheme> parse_scheme(std::string_view name) {
  if (name == "TO" || name == "to") return Scheme::TO;
  if (name == "TF" || name == "tf") return Scheme::TF;
  if (name == "TF-IDF" || name == "TFIDF" || name == "tfidf" || name == "tf-idf") return Scheme::TFIDF;
  if (name == "BTO" || name == "bto") return Scheme::BTO;
  return std::nullopt;
}

std::string_view to_string(NgramMode mode) {
  return mode == NgramMode::Cumulative ? "cumulative" : "exact";
}

std::optional<NgramMode> parse_ngram_mode(std::string_view name) {
  if (name == "cumulative") return NgramMode::Cumulative;
  if (name == "exact") return NgramMode::Exact;
  return std::nullopt;
}

double dot(const SparseVector& a, const SparseVector& b) {
  double sum = 0.0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (i->index < j->index) {
      ++i;
    } else if (j->index < i->index) {
      ++j;
    } else {
      sum += i->value * j->value;
      ++i;
      ++j;
    }
  }
  return sum;
}

double squared_norm(const SparseVector& v) {
  double sum = 0.0;
  for (const auto& e : v) sum += e.value * e.value;
  return sum;
}

std::vector<std::string> ngrams(std::span<const std::string> tokens, int order, NgramMode mode) {
  if (order < 1 || order > 3) {
    throw Error(ErrorCode::InvalidArgument, "n-gram order must be 1, 2 or 3");
  }
  std::vector<std::string> out;
  const int first = mode == NgramMode::Cumulative ? 1 : order;
  for (int n = first; n <= order; ++n) {
    const auto len = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + len <= tokens.size(); ++i) {
      std::string gram = tokens[i];
      for (std::size_t k = 1; k < len; ++k) {
        gram += ' ';
        gram += tokens[i + k];
      }
      out.push_back(std::move(gram));
    }
  }
  return out;
}

std::optional<std::uint32_t> FeatureSpace::index_of(const std::string& ngram) const {
  const auto it = index_.find(ngram);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void FeatureSpace::dump(std::ostream& out) const {
  for (std::size_t i = 0; i < ngrams_.size(); ++i) {
    out << i << '\t' << ngrams_[i] << '\t' << doc_freq_[i] << '\n';
  }
}

FeatureSpace fit(std::span<const std::vector<std::string>> documents, int order, NgramMode mode) {
  if (documents.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot fit a feature space on zero documents");
  FeatureSpace space;
  space.order_ = order;
  space.mode_ = mode;
  space.n_docs_ = documents.size();
  // Last document index that counted each feature, so repeats within a
  // document do not inflate its document frequency.
  std::vector<std::size_t> last_seen;
  for (std::size_t d = 0; d < documents.size(); ++d) {
    for (auto& gram : ngrams(documents[d], order, mode)) {
      const auto [it, inserted] =
          space.index_.try_emplace(gram, static_cast<std::uint32_t>(space.ngrams_.size()));
      if (inserted) {
        space.ngrams_.push_back(std::move(gram));
        space.doc_freq_.push_back(1);
        last_seen.push_back(d);
      } else if (last_seen[it->second] != d) {
        ++space.doc_freq_[it->second];
        last_seen[it->second] = d;
      }
    }
  }
  return space;
}

DocVector vectorize(std::span<const std::string> doc, const FeatureSpace& space, Scheme scheme) {
  DocVector out;
  out.scheme = scheme;
  const auto grams = ngrams(doc, space.ngram_order(), space.mode());
  if (grams.empty()) return out;

  std::vector<std::uint32_t> hits;
  hits.reserve(grams.size());
  for (const auto& g : grams) {
    if (auto idx = space.index_of(g)) hits.push_back(*idx);
  }
  std::sort(hits.begin(), hits.end());

  const double length = static_cast<double>(grams.size());
  const double n_docs = static_cast<double>(space.n_docs());
  for (std::size_t i = 0; i < hits.size();) {
    std::size_t j = i;
    while (j < hits.size() && hits[j] == hits[i]) ++j;
    const double count = static_cast<double>(j - i);
    double weight = 0.0;
    switch (scheme) {
      case Scheme::TO: weight = count; break;
      case Scheme::BTO: weight = 1.0; break;
      case Scheme::TF: weight = count / length; break;
      case Scheme::TFIDF:
        weight = (count / length) * std::log(n_docs / static_cast<double>(space.doc_freq(hits[i])));
        break;
    }
    if (weight != 0.0) out.entries.push_back(SparseEntry{hits[i], weight});
    i = j;
  }
  return out;
}

}  // namespace sana::features

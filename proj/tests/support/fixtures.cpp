#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace sana::testing {

annotation::AgreementMatrix round1_matrix() {
  return annotation::AgreementMatrix::from_rows({{{34, 2, 6}, {10, 65, 21}, {10, 6, 24}}});
}

annotation::AgreementMatrix round2_matrix() {
  return annotation::AgreementMatrix::from_rows({{{161, 8, 11}, {34, 94, 50}, {14, 26, 115}}});
}

namespace {

std::string comment_id(std::size_t n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "c%04zu", n);
  return buf;
}

corpus::Comment make_comment(std::size_t n, int round, const std::string& a, Label la,
                             const std::string& b, Label lb) {
  corpus::Comment c;
  c.comment_id = comment_id(n);
  c.article_id = "art" + std::to_string(n % 7);
  c.source = "fixture";
  c.text = "تعليق " + synthetic_word(n) + " " + std::to_string(n);
  c.annotations = {{a, la, round}, {b, lb, round}};
  return c;
}

}  // namespace

corpus::Corpus corpus_from_matrix(const annotation::AgreementMatrix& m, int round,
                                  const std::string& a, const std::string& b) {
  corpus::Corpus out("matrix-fixture");
  for (std::size_t art = 0; art < 7; ++art) {
    out.add_article({"art" + std::to_string(art), "https://example.org/a/" + std::to_string(art),
                     corpus::Topic::Political, "مقال " + std::to_string(art)});
  }
  std::size_t n = 1;
  for (Label la : kAllLabels) {
    for (Label lb : kAllLabels) {
      for (std::uint64_t i = 0; i < m.at(la, lb); ++i) out.ingest(make_comment(n++, round, a, la, b, lb));
    }
  }
  return out;
}

corpus::Corpus corpus_from_gold_counts(std::size_t pos, std::size_t neg, std::size_t neu, int round,
                                       const std::string& a, const std::string& b) {
  annotation::AgreementMatrix m;
  m.at(Label::Positive, Label::Positive) = pos;
  m.at(Label::Negative, Label::Negative) = neg;
  m.at(Label::Neutral, Label::Neutral) = neu;
  return corpus_from_matrix(m, round, a, b);
}

annotation::Resolutions resolve_disagreements(const annotation::AnnotationStore& store,
                                              const std::string& a, const std::string& b, int round,
                                              std::size_t to_pos, std::size_t to_neg) {
  annotation::Resolutions out;
  std::size_t seen = 0;
  for (const auto& j : annotation::joint_labels(store, a, b, round)) {
    if (j.a == j.b) continue;
    if (seen < to_pos) {
      out[j.comment_id] = Label::Positive;
    } else if (seen < to_pos + to_neg) {
      out[j.comment_id] = Label::Negative;
    }
    ++seen;
  }
  return out;
}

std::string synthetic_word(std::size_t index) {
  // Letters that are neither light-stemming affixes nor normalization targets.
  static const char* const kLetters[] = {"د", "ر", "س", "ق", "م", "ع", "ج", "ح",
                                         "خ", "ز", "ش", "ص", "ض", "ط", "ظ", "غ"};
  std::string w;
  for (int d = 0; d < 4; ++d) {
    w += kLetters[index % 16];
    index /= 16;
  }
  return w;
}

std::vector<grid::LabeledDocument> synthetic_documents(std::uint64_t seed, std::size_t per_class,
                                                       std::size_t doc_len, std::size_t vocab) {
  std::mt19937_64 rng(seed);
  std::vector<grid::LabeledDocument> docs;
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const bool positive = i % 2 == 0;
    const std::size_t base = positive ? 0 : vocab;
    std::string text;
    for (std::size_t w = 0; w < doc_len; ++w) {
      if (w > 0) text += ' ';
      text += synthetic_word(base + static_cast<std::size_t>(rng() % vocab));
    }
    docs.push_back({"s" + std::to_string(i), text, positive ? Label::Positive : Label::Negative});
  }
  return docs;
}

corpus::Corpus synthetic_corpus(std::uint64_t seed, std::size_t per_class) {
  corpus::Corpus out("synthetic");
  for (const auto& d : synthetic_documents(seed, per_class)) {
    corpus::Comment c;
    c.comment_id = d.id;
    c.text = d.text;
    c.source = "synthetic";
    c.label = d.label;
    out.ingest(std::move(c));
  }
  return out;
}

TempDir::TempDir() {
  static std::mt19937_64 rng(std::random_device{}());
  path_ = std::filesystem::temp_directory_path() / ("sana-test-" + std::to_string(rng()));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << content;
}

namespace {

// Projection onto {0 <= a <= C, y.a = 0}: a = clip(v - t*y), t by bisection.
std::vector<double> project(const std::vector<double>& v, const std::vector<int>& y, double C) {
  auto at = [&](double t) {
    std::vector<double> a(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) a[i] = std::clamp(v[i] - t * y[i], 0.0, C);
    return a;
  };
  auto balance = [&](double t) {
    const auto a = at(t);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += y[i] * a[i];
    return s;
  };
  double lo = -1.0;
  double hi = 1.0;
  while (balance(lo) < 0.0) lo *= 2.0;
  while (balance(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (balance(mid) > 0.0 ? lo : hi) = mid;
  }
  return at(0.5 * (lo + hi));
}

}  // namespace

SvmReference reference_svm(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                           double C, int iterations) {
  const std::size_t n = x.size();
  const std::size_t d = x.empty() ? 0 : x[0].size();
  std::vector<std::vector<double>> Q(n, std::vector<double>(n));
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double k = 0.0;
      for (std::size_t f = 0; f < d; ++f) k += x[i][f] * x[j][f];
      Q[i][j] = y[i] * y[j] * k;
    }
    trace += Q[i][i];
  }
  const double step = 1.0 / (trace + 1e-9);

  // Weights from the dual point, bias by exhaustive search over the hinge
  // breakpoints (the primal is piecewise linear in b).
  auto evaluate = [&](const std::vector<double>& a) {
    SvmReference r;
    r.weights.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t f = 0; f < d; ++f) r.weights[f] += a[i] * y[i] * x[i][f];
    }
    double ww = 0.0;
    for (double w : r.weights) ww += w * w;
    double sum_a = 0.0;
    for (double v : a) sum_a += v;
    r.dual = sum_a - 0.5 * ww;

    std::vector<double> s(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t f = 0; f < d; ++f) s[i] += r.weights[f] * x[i][f];
    }
    auto hinge = [&](double b) {
      double h = 0.0;
      for (std::size_t i = 0; i < n; ++i) h += std::max(0.0, 1.0 - y[i] * (s[i] + b));
      return h;
    };
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double b = y[i] - s[i];
      const double h = hinge(b);
      if (h < best) {
        best = h;
        r.bias = b;
      }
    }
    r.primal = 0.5 * ww + C * best;
    return r;
  };

  constexpr double kGap = 1e-9;
  std::vector<double> a(n, 0.0);
  std::vector<double> z = a;
  double t = 1.0;
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = -1.0;
      for (std::size_t j = 0; j < n; ++j) s += Q[i][j] * z[j];
      g[i] = z[i] - step * s;
    }
    const auto next = project(g, y, C);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t i = 0; i < n; ++i) z[i] = next[i] + ((t - 1.0) / t_next) * (next[i] - a[i]);
    a = next;
    t = t_next;
    if (it % 500 == 499) {
      const auto r = evaluate(a);
      if (r.primal - r.dual <= kGap) return r;
    }
  }
  return evaluate(a);
}

features::SparseVector sparse(const std::vector<double>& dense) {
  features::SparseVector v;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) v.push_back({static_cast<std::uint32_t>(i), dense[i]});
  }
  return v;
}

Label knn_reference(const std::vector<std::vector<double>>& train, const std::vector<Label>& labels,
                    const std::vector<double>& x, int k) {
  const std::size_t n = train.size();
  double xx = 0.0;
  for (double v : x) xx += v * v;
  std::vector<std::pair<double, std::size_t>> sims;
  for (std::size_t t = 0; t < n; ++t) {
    double d = 0.0, tt = 0.0;
    for (std::size_t f = 0; f < x.size(); ++f) {
      d += train[t][f] * x[f];
      tt += train[t][f] * train[t][f];
    }
    const double s = (tt == 0.0 || xx == 0.0) ? 0.0 : d / (std::sqrt(tt) * std::sqrt(xx));
    sims.push_back({s, t});
  }
  std::sort(sims.begin(), sims.end(), [](auto a, auto b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), n);
  int pos = 0, neg = 0;
  double spos = 0.0, sneg = 0.0;
  for (std::size_t r = 0; r < kk; ++r) {
    if (labels[sims[r].second] == Label::Positive) {
      ++pos;
      spos += sims[r].first;
    } else {
      ++neg;
      sneg += sims[r].first;
    }
  }
  if (pos != neg) return pos > neg ? Label::Positive : Label::Negative;
  if (spos != sneg) return spos > sneg ? Label::Positive : Label::Negative;
  return Label::Positive;
}

}  // namespace sana::testing

#include "sana/annotation.hpp"

#include <algorithm>
#include <json.hpp>
#include <set>

#include "sana/error.hpp"
#include "sana/random.hpp"

namespace sana::annotation {

std::string_view to_string(GuidelineMode mode) {
  return mode == GuidelineMode::WithArticleContext ? "WithArticleContext" : "CommentOnly";
}

std::optional<GuidelineMode> parse_guideline_mode(std::string_view name) {
  if (name == "WithArticleContext" || name == "with-article") return GuidelineMode::WithArticleContext;
  if (name == "CommentOnly" || name == "comment-only") return GuidelineMode::CommentOnly;
  return std::nullopt;
}

AnnotationScheme AnnotationScheme::standard(GuidelineMode mode) {
  AnnotationScheme scheme;
  scheme.rules = "Comment_classe ::= Positive | Negative | Neutral";
  scheme.interpretations = {
      "Subjective with positive sentiment",
      "Subjective with negative sentiment",
      "Out of topic or without sentiment (objective)",
  };
  scheme.guideline_mode = mode;
  return scheme;
}

// --- AnnotationStore -------------------------------------------------------

AnnotationStore::AnnotationStore(const corpus::Corpus& corpus) {
  order_.reserve(corpus.size());
  for (const auto& c : corpus.comments()) {
    position_.emplace(c.comment_id, order_.size());
    order_.push_back(c.comment_id);
  }
  for (const auto& c : corpus.comments()) {
    for (const auto& a : c.annotations) {
      record(Annotation{c.comment_id, a.annotator_id, a.label, a.round});
    }
  }
}

std::size_t AnnotationStore::position_of(std::string_view comment_id) const {
  const auto it = position_.find(std::string(comment_id));
  if (it == position_.end()) {
    throw Error(ErrorCode::UnknownComment, "unknown comment '" + std::string(comment_id) + "'");
  }
  return it->second;
}

void AnnotationStore::record(const Annotation& annotation) {
  const std::size_t pos = position_of(annotation.comment_id);
  if (annotation.round < 1) throw Error(ErrorCode::InvalidArgument, "round must be >= 1");
  if (annotation.annotator_id.empty()) {
    throw Error(ErrorCode::InvalidArgument, "annotator id must not be empty");
  }
  labels_[Key{pos, annotation.annotator_id, annotation.round}] = annotation.label;
}

std::optional<Label> AnnotationStore::label_of(std::string_view comment_id,
                                               std::string_view annotator_id, int round) const {
  const auto it = position_.find(std::string(comment_id));
  if (it == position_.end()) return std::nullopt;
  const auto found = labels_.find(Key{it->second, std::string(annotator_id), round});
  if (found == labels_.end()) return std::nullopt;
  return found->second;
}

bool AnnotationStore::knows_comment(std::string_view comment_id) const {
  return position_.contains(std::string(comment_id));
}

std::vector<Annotation> AnnotationStore::annotations() const {
  std::vector<Annotation> out;
  out.reserve(labels_.size());
  for (const auto& [key, label] : labels_) {
    const auto& [pos, annotator, round] = key;
    out.push_back(Annotation{order_[pos], annotator, label, round});
  }
  return out;
}

std::vector<std::string> AnnotationStore::annotators(int round) const {
  std::set<std::string> ids;
  for (const auto& [key, label] : labels_) {
    if (std::get<2>(key) == round) ids.insert(std::get<1>(key));
  }
  return {ids.begin(), ids.end()};
}

std::size_t AnnotationStore::count_by(std::string_view annotator_id, int round) const {
  return static_cast<std::size_t>(std::count_if(labels_.begin(), labels_.end(), [&](const auto& kv) {
    return std::get<1>(kv.first) == annotator_id && std::get<2>(kv.first) == round;
  }));
}

void AnnotationStore::export_to(corpus::Corpus& corpus) const {
  std::vector<std::vector<corpus::RecordedAnnotation>> per_comment(order_.size());
  for (const auto& [key, label] : labels_) {
    const auto& [pos, annotator, round] = key;
    per_comment[pos].push_back(corpus::RecordedAnnotation{annotator, label, round});
  }
  for (std::size_t i = 0; i < order_.size(); ++i) {
    if (corpus.find(order_[i])) corpus.set_annotations(order_[i], std::move(per_comment[i]));
  }
}

// --- agreement -------------------------------------------------------------

std::uint64_t AgreementMatrix::total() const {
  std::uint64_t t = 0;
  for (const auto& row : counts) {
    for (auto v : row) t += v;
  }
  return t;
}

std::uint64_t AgreementMatrix::trace() const { return counts[0][0] + counts[1][1] + counts[2][2]; }

std::uint64_t AgreementMatrix::row_sum(std::size_t i) const {
  return counts[i][0] + counts[i][1] + counts[i][2];
}

std::uint64_t AgreementMatrix::col_sum(std::size_t j) const {
  return counts[0][j] + counts[1][j] + counts[2][j];
}

AgreementMatrix AgreementMatrix::transposed() const {
  AgreementMatrix t;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) t.counts[j][i] = counts[i][j];
  }
  return t;
}

std::string_view to_string(KappaBand band) {
  switch (band) {
    case KappaBand::Poor: return "Poor";
    case KappaBand::Slight: return "Slight";
    case KappaBand::Fair: return "Fair";
    case KappaBand::Moderate: return "Moderate";
    case KappaBand::Substantial: return "Substantial";
    case KappaBand::Perfect: return "Perfect";
  }
  return "?";
}

KappaBand band_for(double k) {
  // Upper bounds are inclusive; the slack absorbs representation error of
  // values that are exactly on a printed boundary.
  constexpr double slack = 1e-12;
  if (k < 0.0) return KappaBand::Poor;
  if (k <= 0.20 + slack) return KappaBand::Slight;
  if (k <= 0.40 + slack) return KappaBand::Fair;
  if (k <= 0.60 + slack) return KappaBand::Moderate;
  if (k <= 0.80 + slack) return KappaBand::Substantial;
  return KappaBand::Perfect;
}

std::vector<JointLabel> joint_labels(const AnnotationStore& store, std::string_view annotator_a,
                                     std::string_view annotator_b, int round) {
  std::vector<JointLabel> out;
  for (const auto& id : store.comment_order()) {
    const auto a = store.label_of(id, annotator_a, round);
    if (!a) continue;
    const auto b = store.label_of(id, annotator_b, round);
    if (!b) continue;
    out.push_back(JointLabel{id, *a, *b});
  }
  return out;
}

AgreementMatrix agreement_matrix(const AnnotationStore& store, std::string_view annotator_a,
                                 std::string_view annotator_b, int round) {
  AgreementMatrix m;
  for (const auto& j : joint_labels(store, annotator_a, annotator_b, round)) ++m.at(j.a, j.b);
  if (m.total() == 0) {
    throw Error(ErrorCode::NoOverlap, "annotators '" + std::string(annotator_a) + "' and '" +
                                          std::string(annotator_b) +
                                          "' share no comment in round " + std::to_string(round));
  }
  return m;
}

KappaResult kappa(const AgreementMatrix& matrix) {
  const std::uint64_t total = matrix.total();
  if (total == 0) throw Error(ErrorCode::EmptyMatrix, "agreement matrix is empty");
  std::uint64_t chance = 0;
  for (std::size_t i = 0; i < 3; ++i) chance += matrix.row_sum(i) * matrix.col_sum(i);
  const std::uint64_t total_sq = total * total;

  KappaResult r;
  r.pr_a = static_cast<double>(matrix.trace()) / static_cast<double>(total);
  r.pr_e = static_cast<double>(chance) / static_cast<double>(total_sq);
  if (chance == total_sq) {
    if (matrix.trace() != total) {
      throw Error(ErrorCode::DegenerateChance, "chance agreement is 1; kappa undefined");
    }
    r.k = 1.0;
    r.band = KappaBand::Perfect;
    return r;
  }
  r.k = (r.pr_a - r.pr_e) / (1.0 - r.pr_e);
  r.band = band_for(r.k);
  return r;
}

// --- adjudication ----------------------------------------------------------

std::size_t GoldStandard::count(Label label) const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [&](const auto& e) { return e.second == label; }));
}

std::optional<Label> GoldStandard::find(std::string_view comment_id) const {
  for (const auto& [id, label] : entries) {
    if (id == comment_id) return label;
  }
  return std::nullopt;
}

std::size_t BalancedCorpus::count(Label label) const {
  return static_cast<std::size_t>(std::count_if(documents.begin(), documents.end(),
                                                [&](const auto& d) { return d.second == label; }));
}

GoldStandard adjudicate(const AnnotationStore& store, std::string_view annotator_a,
                        std::string_view annotator_b, int round, const Resolutions& resolutions) {
  const auto joint = joint_labels(store, annotator_a, annotator_b, round);
  std::unordered_map<std::string_view, const JointLabel*> by_id;
  for (const auto& j : joint) by_id.emplace(j.comment_id, &j);
  for (const auto& [id, label] : resolutions) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) {
      if (!store.knows_comment(id)) {
        throw Error(ErrorCode::UnknownComment, "resolution for unknown comment '" + id + "'");
      }
      throw Error(ErrorCode::NotJointlyAnnotated,
                  "comment '" + id + "' was not labelled by both annotators in round " +
                      std::to_string(round));
    }
    if (it->second->a == it->second->b) {
      throw Error(ErrorCode::ResolutionForAgreedComment,
                  "annotators already agree on comment '" + id + "'");
    }
  }

  GoldStandard gold;
  gold.round = round;
  gold.entries.reserve(joint.size());
  for (const auto& j : joint) {
    Label label = j.a;
    if (j.a != j.b) {
      const auto r = resolutions.find(j.comment_id);
      label = r == resolutions.end() ? Label::Neutral : r->second;
    }
    gold.entries.emplace_back(j.comment_id, label);
  }
  return gold;
}

BalancedCorpus balance(const GoldStandard& gold, std::uint64_t seed) {
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
  for (std::size_t i = 0; i < gold.entries.size(); ++i) {
    if (gold.entries[i].second == Label::Positive) positives.push_back(i);
    if (gold.entries[i].second == Label::Negative) negatives.push_back(i);
  }
  if (positives.empty() || negatives.empty()) {
    throw Error(ErrorCode::EmptyBinaryCorpus,
                "gold standard needs both Positive and Negative entries (have " +
                    std::to_string(positives.size()) + "/" + std::to_string(negatives.size()) + ")");
  }
  auto& majority = positives.size() > negatives.size() ? positives : negatives;
  const std::size_t keep = std::min(positives.size(), negatives.size());

  // Partial Fisher-Yates: the first `keep` slots become a uniform sample.
  SeededRng rng(seed);
  for (std::size_t i = 0; i < keep; ++i) {
    std::swap(majority[i], majority[i + rng.below(majority.size() - i)]);
  }
  majority.resize(keep);

  std::vector<bool> selected(gold.entries.size(), false);
  for (auto i : positives) selected[i] = true;
  for (auto i : negatives) selected[i] = true;

  BalancedCorpus out;
  out.seed = seed;
  out.documents.reserve(2 * keep);
  for (std::size_t i = 0; i < gold.entries.size(); ++i) {
    if (selected[i]) out.documents.push_back(gold.entries[i]);
  }
  return out;
}

std::string gold_to_jsonl(const GoldStandard& gold) {
  std::string out;
  for (const auto& [id, label] : gold.entries) {
    nlohmann::ordered_json line{{"comment_id", id}, {"label", std::string(to_string(label))},
                                {"round", gold.round}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::string kappa_report_json(const KappaResult& result, const AgreementMatrix& matrix) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : matrix.counts) rows.push_back(row);
  nlohmann::ordered_json report{
      {"pr_a", result.pr_a},
      {"pr_e", result.pr_e},
      {"k", result.k},
      {"band", std::string(to_string(result.band))},
      {"matrix", rows},
  };
  return report.dump();
}

}  // namespace sana::annotation

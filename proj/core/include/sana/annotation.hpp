#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sana/corpus.hpp"
#include "sana/label.hpp"

namespace sana::annotation {

/// Round 1 showed annotators the commented article; later rounds judge the
/// comment text alone.
enum class GuidelineMode { WithArticleContext, CommentOnly };

std::string_view to_string(GuidelineMode mode);
std::optional<GuidelineMode> parse_guideline_mode(std::string_view name);

/// Tags, production rule and per-tag guideline text handed to annotators.
struct AnnotationScheme {
  std::array<Label, 3> tags = kAllLabels;
  std::string rules;
  std::array<std::string, 3> interpretations;  // indexed by index_of(Label)
  GuidelineMode guideline_mode = GuidelineMode::WithArticleContext;

  const std::string& interpretation(Label l) const { return interpretations[index_of(l)]; }

  static AnnotationScheme standard(GuidelineMode mode);
};

struct Annotation {
  std::string comment_id;
  std::string annotator_id;
  Label label = Label::Neutral;
  int round = 1;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

/// Label log keyed by (comment, annotator, round); last write wins. Not
/// synchronized: callers that share a store across threads serialize writes
/// and read from copies.
class AnnotationStore {
 public:
  AnnotationStore() = default;

  /// Registers the corpus's comment ids (in corpus order) and imports the
  /// annotations embedded in its records.
  explicit AnnotationStore(const corpus::Corpus& corpus);

  /// Throws UnknownComment, or InvalidArgument for round < 1 or an empty
  /// annotator id.
  void record(const Annotation& annotation);

  std::optional<Label> label_of(std::string_view comment_id, std::string_view annotator_id,
                                int round) const;

  bool knows_comment(std::string_view comment_id) const;

  /// Comment ids in corpus order.
  const std::vector<std::string>& comment_order() const { return order_; }

  /// All annotations, ordered by comment position, then annotator, then round.
  std::vector<Annotation> annotations() const;

  /// Sorted, de-duplicated ids of annotators active in `round`.
  std::vector<std::string> annotators(int round) const;

  std::size_t count_by(std::string_view annotator_id, int round) const;

  /// Writes the store back into the corpus records (replacing what was there).
  void export_to(corpus::Corpus& corpus) const;

 private:
  using Key = std::tuple<std::size_t, std::string, int>;  // comment position, annotator, round

  std::size_t position_of(std::string_view comment_id) const;

  std::vector<std::string> order_;
  std::unordered_map<std::string, std::size_t> position_;
  std::map<Key, Label> labels_;
};

/// 3x3 contingency table; rows are annotator A, columns annotator B, both in
/// [Positive, Negative, Neutral] order.
struct AgreementMatrix {
  std::array<std::array<std::uint64_t, 3>, 3> counts{};

  std::uint64_t& at(Label a, Label b) { return counts[index_of(a)][index_of(b)]; }
  std::uint64_t at(Label a, Label b) const { return counts[index_of(a)][index_of(b)]; }

  std::uint64_t total() const;
  std::uint64_t trace() const;
  std::uint64_t row_sum(std::size_t i) const;
  std::uint64_t col_sum(std::size_t j) const;
  AgreementMatrix transposed() const;

  static AgreementMatrix from_rows(const std::array<std::array<std::uint64_t, 3>, 3>& rows) {
    return AgreementMatrix{rows};
  }

  friend bool operator==(const AgreementMatrix&, const AgreementMatrix&) = default;
};

enum class KappaBand { Poor, Slight, Fair, Moderate, Substantial, Perfect };

std::string_view to_string(KappaBand band);

/// Interpretation bands: k < 0 Poor, then upper-inclusive bounds 0.20, 0.40,
/// 0.60, 0.80 for Slight..Substantial, above 0.80 Perfect.
KappaBand band_for(double k);

struct KappaResult {
  double pr_a = 0.0;
  double pr_e = 0.0;
  double k = 0.0;
  KappaBand band = KappaBand::Poor;
};

/// Comments labelled by both annotators in `round`, in corpus order.
struct JointLabel {
  std::string comment_id;
  Label a;
  Label b;
};

std::vector<JointLabel> joint_labels(const AnnotationStore& store, std::string_view annotator_a,
                                     std::string_view annotator_b, int round);

/// Throws NoOverlap when the two annotators share no comment in `round`.
AgreementMatrix agreement_matrix(const AnnotationStore& store, std::string_view annotator_a,
                                 std::string_view annotator_b, int round);

/// Cohen's kappa. Throws EmptyMatrix for a zero total and DegenerateChance
/// when chance agreement is 1 without perfect observed agreement.
KappaResult kappa(const AgreementMatrix& matrix);

/// A new annotation round is kept only if its kappa strictly improves on the
/// previous round; otherwise the scheme goes back for revision.
inline bool round_accepted(double k, double previous_k) { return k > previous_k; }

/// Adjudicated labels in corpus order.
struct GoldStandard {
  std::vector<std::pair<std::string, Label>> entries;
  int round = 1;

  std::size_t count(Label label) const;
  std::size_t size() const { return entries.size(); }
  std::optional<Label> find(std::string_view comment_id) const;
};

using Resolutions = std::map<std::string, Label, std::less<>>;

/// Agreed comments keep their label; disagreements take the resolution if
/// one is given, otherwise Neutral. Throws ResolutionForAgreedComment or
/// NotJointlyAnnotated for resolutions that do not target a disagreement.
GoldStandard adjudicate(const AnnotationStore& store, std::string_view annotator_a,
                        std::string_view annotator_b, int round, const Resolutions& resolutions);

/// Equal-size Positive/Negative subset of a gold standard.
struct BalancedCorpus {
  std::vector<std::pair<std::string, Label>> documents;  // gold order preserved
  std::uint64_t seed = 0;

  std::size_t count(Label label) const;
};

/// Drops Neutral and downsamples the larger binary class (seeded, without
/// replacement). Throws EmptyBinaryCorpus if a binary class is absent.
BalancedCorpus balance(const GoldStandard& gold, std::uint64_t seed);

/// One JSON object per line: {comment_id, label, round}.
std::string gold_to_jsonl(const GoldStandard& gold);

/// {pr_a, pr_e, k, band, matrix}.
std::string kappa_report_json(const KappaResult& result, const AgreementMatrix& matrix);

}  // namespace sana::annotation

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sana/label.hpp"

namespace sana::corpus {

enum class Topic { News, Political, Religion, Sports, Society, Other };

std::string_view to_string(Topic topic);
/// Unrecognized names map to Topic::Other.
Topic parse_topic(std::string_view name);

/// Article id that comments without article context (e.g. OCA reviews) link to.
inline constexpr std::string_view kUnknownArticleId = "unknown";

struct Article {
  std::string article_id;
  std::string url;
  Topic topic = Topic::Other;
  std::string title;
};

/// An annotation as carried inside a manifest record.
struct RecordedAnnotation {
  std::string annotator_id;
  Label label = Label::Neutral;
  int round = 1;

  friend bool operator==(const RecordedAnnotation&, const RecordedAnnotation&) = default;
};

struct Comment {
  std::string comment_id;
  std::string article_id;
  std::string source;
  std::string text;
  std::string dedup_key;  // derived on ingest
  std::optional<Label> label;
  std::vector<RecordedAnnotation> annotations;
};

/// NFC, white-space collapsed, trimmed text.
std::string dedup_key(std::string_view text);

enum class IngestOutcome { Added, DuplicateRejected };

struct IngestSummary {
  std::size_t added = 0;
  std::size_t rejected = 0;
};

/// Insertion-ordered comment collection with corpus-wide duplicate rejection.
class Corpus {
 public:
  explicit Corpus(std::string name = {});

  /// Throws EmptyText for blank text, EncodingError for ill-formed UTF-8 and
  /// DuplicateCommentId when the id is taken by a comment with different text.
  IngestOutcome ingest(Comment raw);

  /// Registers or updates article metadata. Empty fields never overwrite
  /// non-empty ones.
  void add_article(Article article);

  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }

  const std::vector<Comment>& comments() const { return comments_; }
  const std::vector<Article>& articles() const { return articles_; }
  std::size_t size() const { return comments_.size(); }
  bool empty() const { return comments_.empty(); }

  const Comment* find(std::string_view comment_id) const;
  bool contains_text(std::string_view text) const;

  /// Falls back to the sentinel article for unknown ids.
  const Article& article(std::string_view article_id) const;

  void set_label(std::string_view comment_id, std::optional<Label> label);
  void set_annotations(std::string_view comment_id, std::vector<RecordedAnnotation> annotations);

 private:
  Comment& mutable_comment(std::string_view comment_id);

  std::string name_;
  std::vector<Comment> comments_;
  std::vector<Article> articles_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::unordered_map<std::string, std::size_t> by_key_;
  std::unordered_map<std::string, std::size_t> article_by_id_;
};

/// Ingests every comment of `from` into `into` (articles included).
IngestSummary merge_into(Corpus& into, const Corpus& from);

enum class CorpusFormat { Manifest, OcaFolders };

/// Loads a JSON-Lines manifest or an OCA-style Positive/ Negative/ folder tree.
/// Duplicates are dropped as on ingest; `summary`, if given, receives counts.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                   IngestSummary* summary = nullptr);

/// Writes the canonical manifest. The file is replaced atomically.
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

std::string manifest_line(const Comment& comment, const Article& article);

}  // namespace sana::corpus

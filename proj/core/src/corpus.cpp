#include "sana/corpus.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <system_error>

#include "sana/error.hpp"
#include "sana/text.hpp"

namespace sana::corpus {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::array<std::pair<Topic, std::string_view>, 6> kTopicNames = {{
    {Topic::News, "news"},
    {Topic::Political, "political"},
    {Topic::Religion, "religion"},
    {Topic::Sports, "sports"},
    {Topic::Society, "society"},
    {Topic::Other, "other"},
}};

const Article& sentinel_article() {
  static const Article unknown{std::string(kUnknownArticleId), "", Topic::Other, ""};
  return unknown;
}

bool has_metadata(const Article& a) {
  return !a.url.empty() || !a.title.empty() || a.topic != Topic::Other;
}

[[noreturn]] void format_error(const std::filesystem::path& path, std::size_t line,
                               const std::string& what) {
  throw Error(ErrorCode::FormatError, path.string() + ":" + std::to_string(line) + ": " + what);
}

std::string required_string(const nlohmann::json& record, const char* key,
                             const std::filesystem::path& path, std::size_t line) {
  const auto it = record.find(key);
  if (it == record.end() || !it->is_string()) {
    format_error(path, line, std::string("missing or non-string field '") + key + "'");
  }
  return it->get<std::string>();
}

std::string optional_string(const nlohmann::json& record, const char* key,
                            const std::filesystem::path& path, std::size_t line) {
  const auto it = record.find(key);
  if (it == record.end() || it->is_null()) return {};
  if (!it->is_string()) format_error(path, line, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

Label label_field(const nlohmann::json& value, const std::filesystem::path& path, std::size_t line) {
  if (!value.is_string()) format_error(path, line, "label must be a string");
  const auto label = parse_label(value.get<std::string>());
  if (!label) format_error(path, line, "unknown label '" + value.get<std::string>() + "'");
  return *label;
}

Comment parse_record(const nlohmann::json& record, Article& article,
                     const std::filesystem::path& path, std::size_t line) {
  if (!record.is_object()) format_error(path, line, "record is not a JSON object");
  Comment c;
  c.comment_id = required_string(record, "comment_id", path, line);
  if (c.comment_id.empty()) format_error(path, line, "empty comment_id");
  c.text = required_string(record, "text", path, line);
  c.article_id = optional_string(record, "article_id", path, line);
  c.source = optional_string(record, "source", path, line);
  if (const auto it = record.find("label"); it != record.end() && !it->is_null()) {
    c.label = label_field(*it, path, line);
  }
  if (const auto it = record.find("annotations"); it != record.end() && !it->is_null()) {
    if (!it->is_array()) format_error(path, line, "annotations must be an array");
    for (const auto& a : *it) {
      if (!a.is_object()) format_error(path, line, "annotation is not an object");
      RecordedAnnotation ra;
      ra.annotator_id = required_string(a, "annotator_id", path, line);
      const auto label = a.find("label");
      if (label == a.end()) format_error(path, line, "annotation without label");
      ra.label = label_field(*label, path, line);
      const auto round = a.find("round");
      if (round == a.end() || !round->is_number_integer() || round->get<int>() < 1) {
        format_error(path, line, "annotation round must be a positive integer");
      }
      ra.round = round->get<int>();
      c.annotations.push_back(std::move(ra));
    }
  }
  article.article_id = c.article_id.empty() ? std::string(kUnknownArticleId) : c.article_id;
  if (const auto it = record.find("article"); it != record.end() && !it->is_null()) {
    if (!it->is_object()) format_error(path, line, "article must be an object");
    article.url = optional_string(*it, "url", path, line);
    article.title = optional_string(*it, "title", path, line);
    article.topic = parse_topic(optional_string(*it, "topic", path, line));
  }
  return c;
}

Corpus load_manifest(const std::filesystem::path& path, IngestSummary& summary) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open manifest " + path.string());
  Corpus corpus(path.stem().string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (!text::is_valid_utf8(line)) {
      throw Error(ErrorCode::EncodingError,
                  path.string() + ":" + std::to_string(line_no) + ": ill-formed UTF-8");
    }
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      format_error(path, line_no, e.what());
    }
    Article article;
    Comment comment = parse_record(record, article, path, line_no);
    if (has_metadata(article)) corpus.add_article(article);
    try {
      if (corpus.ingest(std::move(comment)) == IngestOutcome::Added) {
        ++summary.added;
      } else {
        ++summary.rejected;
      }
    } catch (const Error& e) {
      format_error(path, line_no, e.what());
    }
  }
  if (in.bad()) throw Error(ErrorCode::IoError, "read failure on " + path.string());
  return corpus;
}

std::vector<std::filesystem::path> text_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.starts_with("\xEF\xBB\xBF")) bytes.erase(0, 3);
  return bytes;
}

Corpus load_oca(const std::filesystem::path& root, IngestSummary& summary) {
  if (!std::filesystem::is_directory(root)) {
    throw Error(ErrorCode::FormatError, root.string() + " is not a directory");
  }
  Corpus corpus(root.filename().string());
  for (const auto& [folder, label] :
       {std::pair{"Positive", Label::Positive}, std::pair{"Negative", Label::Negative}}) {
    const auto dir = root / folder;
    if (!std::filesystem::is_directory(dir)) {
      throw Error(ErrorCode::FormatError,
                  root.string() + ": missing class folder '" + folder + "/'");
    }
    for (const auto& file : text_files(dir)) {
      std::string bytes = read_file(file);
      if (!text::is_valid_utf8(bytes)) {
        throw Error(ErrorCode::EncodingError, file.string() + ": ill-formed UTF-8");
      }
      Comment c;
      c.comment_id = file.stem().string();
      // Class folders may reuse file names.
      if (corpus.find(c.comment_id)) c.comment_id = std::string(folder) + "/" + c.comment_id;
      c.article_id = std::string(kUnknownArticleId);
      c.source = "OCA";
      c.text = std::move(bytes);
      c.label = label;
      try {
        if (corpus.ingest(std::move(c)) == IngestOutcome::Added) {
          ++summary.added;
        } else {
          ++summary.rejected;
        }
      } catch (const Error& e) {
        throw Error(ErrorCode::FormatError, file.string() + ": " + e.what());
      }
    }
  }
  return corpus;
}

}  // namespace

std::string_view to_string(Topic topic) {
  for (const auto& [t, name] : kTopicNames) {
    if (t == topic) return name;
  }
  return "other";
}

Topic parse_topic(std::string_view name) {
  for (const auto& [t, n] : kTopicNames) {
    if (n == name) return t;
  }
  return Topic::Other;
}

std::string dedup_key(std::string_view text) { return text::collapse_whitespace(text::nfc(text)); }

Corpus::Corpus(std::string name) : name_(std::move(name)) {}

IngestOutcome Corpus::ingest(Comment raw) {
  std::string key = dedup_key(raw.text);
  if (key.empty()) throw Error(ErrorCode::EmptyText, "comment '" + raw.comment_id + "' has no text");
  if (by_key_.contains(key)) return IngestOutcome::DuplicateRejected;
  if (raw.comment_id.empty()) {
    std::size_t n = comments_.size() + 1;
    do {
      raw.comment_id = "c" + std::to_string(n++);
    } while (by_id_.contains(raw.comment_id));
  } else if (by_id_.contains(raw.comment_id)) {
    throw Error(ErrorCode::DuplicateCommentId,
                "comment id '" + raw.comment_id + "' already used by a different text");
  }
  if (raw.article_id.empty()) raw.article_id = std::string(kUnknownArticleId);
  if (raw.article_id != kUnknownArticleId && !article_by_id_.contains(raw.article_id)) {
    add_article(Article{raw.article_id, "", Topic::Other, ""});
  }
  raw.dedup_key = std::move(key);
  by_key_.emplace(raw.dedup_key, comments_.size());
  by_id_.emplace(raw.comment_id, comments_.size());
  comments_.push_back(std::move(raw));
  return IngestOutcome::Added;
}

void Corpus::add_article(Article article) {
  if (article.article_id.empty() || article.article_id == kUnknownArticleId) return;
  const auto it = article_by_id_.find(article.article_id);
  if (it == article_by_id_.end()) {
    article_by_id_.emplace(article.article_id, articles_.size());
    articles_.push_back(std::move(article));
    return;
  }
  Article& existing = articles_[it->second];
  if (!article.url.empty()) existing.url = std::move(article.url);
  if (!article.title.empty()) existing.title = std::move(article.title);
  if (article.topic != Topic::Other) existing.topic = article.topic;
}

const Comment* Corpus::find(std::string_view comment_id) const {
  const auto it = by_id_.find(std::string(comment_id));
  return it == by_id_.end() ? nullptr : &comments_[it->second];
}

bool Corpus::contains_text(std::string_view text) const {
  return by_key_.contains(dedup_key(text));
}

const Article& Corpus::article(std::string_view article_id) const {
  const auto it = article_by_id_.find(std::string(article_id));
  return it == article_by_id_.end() ? sentinel_article() : articles_[it->second];
}

Comment& Corpus::mutable_comment(std::string_view comment_id) {
  const auto it = by_id_.find(std::string(comment_id));
  if (it == by_id_.end()) {
    throw Error(ErrorCode::UnknownComment, "unknown comment '" + std::string(comment_id) + "'");
  }
  return comments_[it->second];
}

void Corpus::set_label(std::string_view comment_id, std::optional<Label> label) {
  mutable_comment(comment_id).label = label;
}

void Corpus::set_annotations(std::string_view comment_id,
                             std::vector<RecordedAnnotation> annotations) {
  mutable_comment(comment_id).annotations = std::move(annotations);
}

IngestSummary merge_into(Corpus& into, const Corpus& from) {
  IngestSummary summary;
  for (const auto& a : from.articles()) into.add_article(a);
  for (const auto& c : from.comments()) {
    if (into.ingest(c) == IngestOutcome::Added) {
      ++summary.added;
    } else {
      ++summary.rejected;
    }
  }
  return summary;
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                   IngestSummary* summary) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::IoError, path.string() + " does not exist");
  }
  IngestSummary local;
  Corpus corpus = format == CorpusFormat::Manifest ? load_manifest(path, local)
                                                   : load_oca(path, local);
  if (summary) *summary = local;
  return corpus;
}

std::string manifest_line(const Comment& comment, const Article& article) {
  ordered_json record;
  record["comment_id"] = comment.comment_id;
  record["article_id"] = comment.article_id;
  record["source"] = comment.source;
  record["text"] = comment.text;
  if (comment.label) record["label"] = std::string(to_string(*comment.label));
  if (!comment.annotations.empty()) {
    ordered_json list = ordered_json::array();
    for (const auto& a : comment.annotations) {
      list.push_back(ordered_json{{"annotator_id", a.annotator_id},
                                  {"label", std::string(to_string(a.label))},
                                  {"round", a.round}});
    }
    record["annotations"] = std::move(list);
  }
  if (has_metadata(article)) {
    record["article"] = ordered_json{
        {"url", article.url}, {"topic", std::string(to_string(article.topic))}, {"title", article.title}};
  }
  return record.dump();
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    for (const auto& c : corpus.comments()) {
      out << manifest_line(c, corpus.article(c.article_id)) << '\n';
    }
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write failure on " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot replace " + path.string() + ": " + ec.message());
}

}  // namespace sana::corpus

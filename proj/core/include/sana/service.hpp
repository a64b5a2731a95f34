#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>

#include "sana/annotation.hpp"
#include "sana/corpus.hpp"

namespace sana::service {

struct SessionOptions {
  int round = 1;
  annotation::GuidelineMode mode = annotation::GuidelineMode::WithArticleContext;
  /// Exactly two annotator ids. Left empty, the two annotators already
  /// present in `round` are used.
  std::array<std::string, 2> roster;
  int default_page_size = 50;
  /// Manifest rewritten after every accepted write; empty disables saving.
  std::filesystem::path manifest_path;
};

struct Response {
  int status = 200;
  std::string body;  // JSON
};

using Query = std::map<std::string, std::string>;

/// Annotation state behind the HTTP API. Reads run concurrently; writes are
/// serialized and persisted before they are acknowledged.
class AnnotationSession {
 public:
  /// Throws InvalidArgument if no two-annotator roster can be established.
  AnnotationSession(corpus::Corpus corpus, SessionOptions options);

  Response handle(const std::string& method, const std::string& path, const Query& query,
                  const std::string& body);

  const SessionOptions& options() const { return options_; }

  /// Copy of the store under a read lock.
  annotation::AnnotationStore snapshot() const;

 private:
  Response get_comments(const Query& q) const;
  Response get_iaa(const Query& q) const;
  Response get_disagreements(const Query& q) const;
  Response get_scheme() const;
  Response get_session() const;
  Response post_annotation(const std::string& body);
  Response post_resolution(const std::string& body);
  Response post_gold(const std::string& body) const;

  int round_param(const Query& q) const;
  bool on_roster(const std::string& annotator) const;
  void persist();

  corpus::Corpus corpus_;
  annotation::AnnotationStore store_;
  std::map<int, annotation::Resolutions> resolutions_;  // by round
  SessionOptions options_;
  mutable std::shared_mutex mutex_;
};

/// HTTP front end for one session.
class Server {
 public:
  explicit Server(AnnotationSession& session);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Port 0 picks a free port. Returns the bound port; throws BindError.
  int bind(const std::string& host, int port);
  /// Serves on a background thread until stop().
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sana::service

#include "sana/service.hpp"

#include <httplib.h>

#include <json.hpp>
#include <mutex>
#include <thread>

#include "sana/error.hpp"

namespace sana::service {
namespace {

using ordered_json = nlohmann::ordered_json;

Response reply(int status, const ordered_json& body) { return Response{status, body.dump()}; }

Response error_reply(int status, std::string_view code, const std::string& message) {
  return reply(status, ordered_json{{"code", code}, {"message", message}});
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownComment:
    case ErrorCode::UnknownAnnotator:
      return 404;
    case ErrorCode::InvalidLabel:
    case ErrorCode::ResolutionForAgreedComment:
    case ErrorCode::NotJointlyAnnotated:
      return 422;
    case ErrorCode::NoOverlap:
    case ErrorCode::DegenerateChance:
    case ErrorCode::EmptyBinaryCorpus:
    case ErrorCode::EmptyMatrix:
      return 409;
    case ErrorCode::InvalidArgument:
    case ErrorCode::FormatError:
      return 400;
    default:
      return 500;
  }
}

int parse_int(const Query& q, const std::string& key, int fallback) {
  const auto it = q.find(key);
  if (it == q.end() || it->second.empty()) return fallback;
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(it->second, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != it->second.size()) {
    throw Error(ErrorCode::InvalidArgument, "query parameter '" + key + "' must be an integer");
  }
  return v;
}

ordered_json parse_body(const std::string& body) {
  try {
    auto j = ordered_json::parse(body.empty() ? "{}" : body);
    if (!j.is_object()) throw Error(ErrorCode::FormatError, "request body must be a JSON object");
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("malformed JSON body: ") + e.what());
  }
}

std::string required_string(const ordered_json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw Error(ErrorCode::FormatError, std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

Label required_label(const ordered_json& j) {
  const auto it = j.find("label");
  if (it == j.end() || !it->is_string()) {
    throw Error(ErrorCode::InvalidLabel, "field 'label' must be one of Positive, Negative, Neutral");
  }
  const auto label = parse_label(it->get<std::string>());
  if (!label) throw Error(ErrorCode::InvalidLabel, "invalid label '" + it->get<std::string>() + "'");
  return *label;
}

ordered_json matrix_json(const annotation::AgreementMatrix& m) {
  ordered_json rows = ordered_json::array();
  for (const auto& row : m.counts) rows.push_back(row);
  return rows;
}

ordered_json label_counts(std::size_t pos, std::size_t neg, std::size_t neu) {
  return ordered_json{{"Positive", pos}, {"Negative", neg}, {"Neutral", neu}};
}

}  // namespace

AnnotationSession::AnnotationSession(corpus::Corpus corpus, SessionOptions options)
    : corpus_(std::move(corpus)), store_(corpus_), options_(std::move(options)) {
  if (options_.round < 1) throw Error(ErrorCode::InvalidArgument, "round must be >= 1");
  if (options_.default_page_size < 1) {
    throw Error(ErrorCode::InvalidArgument, "page size must be >= 1");
  }
  if (options_.roster[0].empty() && options_.roster[1].empty()) {
    const auto present = store_.annotators(options_.round);
    if (present.size() != 2) {
      throw Error(ErrorCode::InvalidArgument,
                  "round " + std::to_string(options_.round) + " has " + std::to_string(present.size()) +
                      " annotators; declare the two-annotator roster explicitly");
    }
    options_.roster = {present[0], present[1]};
  }
  if (options_.roster[0].empty() || options_.roster[1].empty() ||
      options_.roster[0] == options_.roster[1]) {
    throw Error(ErrorCode::InvalidArgument, "roster must name two distinct annotators");
  }
}

annotation::AnnotationStore AnnotationSession::snapshot() const {
  std::shared_lock lock(mutex_);
  return store_;
}

Response AnnotationSession::handle(const std::string& method, const std::string& path,
                                   const Query& query, const std::string& body) {
  try {
    if (method == "GET") {
      std::shared_lock lock(mutex_);
      if (path == "/comments") return get_comments(query);
      if (path == "/iaa") return get_iaa(query);
      if (path == "/disagreements") return get_disagreements(query);
      if (path == "/scheme") return get_scheme();
      if (path == "/session") return get_session();
    } else if (method == "POST") {
      if (path == "/annotations") {
        std::unique_lock lock(mutex_);
        return post_annotation(body);
      }
      if (path == "/resolutions") {
        std::unique_lock lock(mutex_);
        return post_resolution(body);
      }
      if (path == "/gold") {
        std::shared_lock lock(mutex_);
        return post_gold(body);
      }
    }
    return error_reply(404, "NotFound", "no route for " + method + " " + path);
  } catch (const Error& e) {
    return error_reply(status_for(e.code()), to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    return error_reply(500, "Internal", e.what());
  }
}

int AnnotationSession::round_param(const Query& q) const {
  const int round = parse_int(q, "round", options_.round);
  if (round < 1) throw Error(ErrorCode::InvalidArgument, "round must be >= 1");
  return round;
}

bool AnnotationSession::on_roster(const std::string& annotator) const {
  return annotator == options_.roster[0] || annotator == options_.roster[1];
}

void AnnotationSession::persist() {
  if (options_.manifest_path.empty()) return;
  store_.export_to(corpus_);
  corpus::save_corpus(corpus_, options_.manifest_path);
}

Response AnnotationSession::get_comments(const Query& q) const {
  const auto it = q.find("annotator");
  const std::string annotator = it == q.end() ? std::string() : it->second;
  if (!on_roster(annotator)) {
    throw Error(ErrorCode::UnknownAnnotator, "annotator '" + annotator + "' is not on the roster");
  }
  const int round = round_param(q);
  const int page_size = parse_int(q, "page_size", options_.default_page_size);
  const int page = parse_int(q, "page", 1);
  if (page_size < 1) throw Error(ErrorCode::InvalidArgument, "page_size must be >= 1");
  if (page < 1) throw Error(ErrorCode::InvalidArgument, "page must be >= 1");

  std::vector<const std::string*> pending;
  for (const auto& id : store_.comment_order()) {
    if (!store_.label_of(id, annotator, round)) pending.push_back(&id);
  }
  const bool with_article = options_.mode == annotation::GuidelineMode::WithArticleContext;
  ordered_json comments = ordered_json::array();
  const std::size_t begin = static_cast<std::size_t>(page - 1) * static_cast<std::size_t>(page_size);
  for (std::size_t i = begin; i < pending.size() && i < begin + static_cast<std::size_t>(page_size); ++i) {
    const auto* c = corpus_.find(*pending[i]);
    ordered_json item{{"comment_id", c->comment_id}, {"text", c->text}};
    if (with_article) {
      const auto& a = corpus_.article(c->article_id);
      item["article"] = ordered_json{{"article_id", c->article_id},
                                     {"url", a.url},
                                     {"topic", corpus::to_string(a.topic)},
                                     {"title", a.title}};
    }
    comments.push_back(std::move(item));
  }
  return reply(200, ordered_json{{"annotator", annotator},
                                 {"round", round},
                                 {"page", page},
                                 {"page_size", page_size},
                                 {"total_pending", pending.size()},
                                 {"comments", std::move(comments)}});
}

Response AnnotationSession::get_iaa(const Query& q) const {
  const int round = round_param(q);
  const auto m = annotation::agreement_matrix(store_, options_.roster[0], options_.roster[1], round);
  const auto k = annotation::kappa(m);
  return reply(200, ordered_json{{"matrix", matrix_json(m)},
                                 {"pr_a", k.pr_a},
                                 {"pr_e", k.pr_e},
                                 {"k", k.k},
                                 {"band", annotation::to_string(k.band)},
                                 {"n_joint", m.total()}});
}

Response AnnotationSession::get_disagreements(const Query& q) const {
  const int round = round_param(q);
  const auto rit = resolutions_.find(round);
  ordered_json items = ordered_json::array();
  for (const auto& j : annotation::joint_labels(store_, options_.roster[0], options_.roster[1], round)) {
    if (j.a == j.b) continue;
    ordered_json item{{"comment_id", j.comment_id},
                      {"text", corpus_.find(j.comment_id)->text},
                      {"labels",
                       {{options_.roster[0], to_string(j.a)}, {options_.roster[1], to_string(j.b)}}}};
    if (rit != resolutions_.end()) {
      if (auto r = rit->second.find(j.comment_id); r != rit->second.end()) {
        item["resolution"] = to_string(r->second);
      }
    }
    items.push_back(std::move(item));
  }
  return reply(200, ordered_json{{"round", round}, {"disagreements", std::move(items)}});
}

Response AnnotationSession::get_scheme() const {
  const auto scheme = annotation::AnnotationScheme::standard(options_.mode);
  ordered_json tags = ordered_json::array();
  ordered_json interpretations = ordered_json::object();
  for (Label l : scheme.tags) {
    tags.push_back(to_string(l));
    interpretations[std::string(to_string(l))] = scheme.interpretation(l);
  }
  return reply(200, ordered_json{{"tags", std::move(tags)},
                                 {"rules", scheme.rules},
                                 {"interpretations", std::move(interpretations)},
                                 {"guideline_mode", annotation::to_string(scheme.guideline_mode)}});
}

Response AnnotationSession::get_session() const {
  ordered_json progress = ordered_json::object();
  for (const auto& a : options_.roster) progress[a] = store_.count_by(a, options_.round);
  return reply(200, ordered_json{{"round", options_.round},
                                 {"guideline_mode", annotation::to_string(options_.mode)},
                                 {"roster", options_.roster},
                                 {"n_comments", store_.comment_order().size()},
                                 {"progress", std::move(progress)}});
}

Response AnnotationSession::post_annotation(const std::string& body) {
  const auto j = parse_body(body);
  annotation::Annotation a;
  a.comment_id = required_string(j, "comment_id");
  a.annotator_id = required_string(j, "annotator_id");
  a.label = required_label(j);
  a.round = options_.round;
  if (const auto it = j.find("round"); it != j.end()) {
    if (!it->is_number_integer()) throw Error(ErrorCode::FormatError, "field 'round' must be an integer");
    a.round = it->get<int>();
  }
  if (!store_.knows_comment(a.comment_id)) {
    throw Error(ErrorCode::UnknownComment, "unknown comment '" + a.comment_id + "'");
  }
  if (!on_roster(a.annotator_id)) {
    throw Error(ErrorCode::UnknownAnnotator, "annotator '" + a.annotator_id + "' is not on the roster");
  }
  store_.record(a);
  persist();
  return reply(201, ordered_json{{"comment_id", a.comment_id},
                                 {"annotator_id", a.annotator_id},
                                 {"label", to_string(a.label)},
                                 {"round", a.round}});
}

Response AnnotationSession::post_resolution(const std::string& body) {
  const auto j = parse_body(body);
  const std::string id = required_string(j, "comment_id");
  const Label label = required_label(j);
  int round = options_.round;
  if (const auto it = j.find("round"); it != j.end()) {
    if (!it->is_number_integer()) throw Error(ErrorCode::FormatError, "field 'round' must be an integer");
    round = it->get<int>();
  }
  if (!store_.knows_comment(id)) throw Error(ErrorCode::UnknownComment, "unknown comment '" + id + "'");
  const auto a = store_.label_of(id, options_.roster[0], round);
  const auto b = store_.label_of(id, options_.roster[1], round);
  if (!a || !b) {
    throw Error(ErrorCode::NotJointlyAnnotated, "comment '" + id + "' is not labelled by both annotators");
  }
  if (*a == *b) {
    throw Error(ErrorCode::ResolutionForAgreedComment, "annotators already agree on '" + id + "'");
  }
  resolutions_[round][id] = label;
  return reply(201, ordered_json{{"comment_id", id}, {"label", to_string(label)}, {"round", round}});
}

Response AnnotationSession::post_gold(const std::string& body) const {
  const auto j = parse_body(body);
  std::uint64_t seed = 42;
  int round = options_.round;
  if (const auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_unsigned()) throw Error(ErrorCode::FormatError, "field 'seed' must be a non-negative integer");
    seed = it->get<std::uint64_t>();
  }
  if (const auto it = j.find("round"); it != j.end()) {
    if (!it->is_number_integer()) throw Error(ErrorCode::FormatError, "field 'round' must be an integer");
    round = it->get<int>();
  }
  static const annotation::Resolutions kNone;
  const auto rit = resolutions_.find(round);
  const auto gold = annotation::adjudicate(store_, options_.roster[0], options_.roster[1], round,
                                           rit == resolutions_.end() ? kNone : rit->second);
  const auto balanced = annotation::balance(gold, seed);

  ordered_json docs = ordered_json::array();
  for (const auto& [id, label] : balanced.documents) {
    docs.push_back(ordered_json{{"comment_id", id}, {"label", to_string(label)}});
  }
  return reply(200, ordered_json{
                        {"round", round},
                        {"gold", {{"size", gold.size()},
                                  {"counts", label_counts(gold.count(Label::Positive), gold.count(Label::Negative),
                                                          gold.count(Label::Neutral))}}},
                        {"balanced", {{"size", balanced.documents.size()},
                                      {"seed", balanced.seed},
                                      {"counts", label_counts(balanced.count(Label::Positive),
                                                              balanced.count(Label::Negative), 0)},
                                      {"documents", std::move(docs)}}},
                    });
}

struct Server::Impl {
  AnnotationSession& session;
  httplib::Server http;
  std::thread worker;
  bool bound = false;

  explicit Impl(AnnotationSession& s) : session(s) {
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
      Query q;
      for (const auto& [k, v] : req.params) q.emplace(k, v);
      const auto r = session.handle(req.method, req.path, q, req.body);
      res.status = r.status;
      res.set_content(r.body, "application/json");
    };
    http.Get(".*", forward);
    http.Post(".*", forward);
  }
};

Server::Server(AnnotationSession& session) : impl_(std::make_unique<Impl>(session)) {}

Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
  // httplib's default also sets SO_REUSEPORT, which lets a second server share the port.
  impl_->http.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });
  int bound_port = port;
  if (port == 0) {
    bound_port = impl_->http.bind_to_any_port(host);
  } else if (!impl_->http.bind_to_port(host, port)) {
    bound_port = -1;
  }
  if (bound_port <= 0) {
    throw Error(ErrorCode::BindError, "cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->bound = true;
  return bound_port;
}

void Server::start() {
  if (!impl_->bound) throw Error(ErrorCode::InvalidArgument, "server is not bound");
  impl_->worker = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
}

void Server::stop() {
  if (!impl_) return;
  impl_->http.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace sana::service

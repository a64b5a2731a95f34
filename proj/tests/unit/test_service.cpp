#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <random>
#include <thread>

#include "fixtures.hpp"
#include "sana/error.hpp"
#include "sana/service.hpp"

using namespace sana;
using namespace sana::service;
using nlohmann::json;

namespace {

json body_of(const Response& r) { return json::parse(r.body); }

Response get(AnnotationSession& s, const std::string& path, const Query& q = {}) {
  return s.handle("GET", path, q, "");
}

Response post(AnnotationSession& s, const std::string& path, const json& body) {
  return s.handle("POST", path, {}, body.dump());
}

json label_body(const std::string& comment, const std::string& annotator, const std::string& label,
                int round = 1) {
  return json{{"comment_id", comment}, {"annotator_id", annotator}, {"label", label}, {"round", round}};
}

corpus::Corpus bare_corpus(std::size_t n) {
  corpus::Corpus c("bare");
  for (std::size_t i = 0; i < n; ++i) {
    corpus::Comment cm;
    cm.comment_id = "k" + std::to_string(i);
    cm.text = "تعليق " + testing::synthetic_word(i);
    c.ingest(cm);
  }
  return c;
}

SessionOptions roster_options() {
  SessionOptions o;
  o.roster = {"O1", "O2"};
  return o;
}

}  // namespace

TEST_CASE("round-1 fixture: agreement endpoint reports moderate kappa") {
  AnnotationSession s(testing::corpus_from_matrix(testing::round1_matrix()), {});
  const auto r = get(s, "/iaa");
  REQUIRE(r.status == 200);
  const auto j = body_of(r);
  CHECK(std::abs(j.at("k").get<double>() - 0.5195) <= 0.001);
  CHECK(j.at("band") == "Moderate");
  CHECK(j.at("n_joint") == 178);
  CHECK(j.at("pr_e").get<double>() == doctest::Approx(11316.0 / 31684.0).epsilon(1e-12));
  CHECK(j.at("matrix")[1][2] == 21);

  const auto session = body_of(get(s, "/session"));
  CHECK(session.at("roster") == json::array({"O1", "O2"}));
  CHECK(session.at("n_comments") == 178);
  CHECK(session.at("progress").at("O1") == 178);
}

TEST_CASE("comment listing honours guideline mode and paging") {
  auto corpus = testing::corpus_from_matrix(testing::round1_matrix());
  SessionOptions with = roster_options();
  SessionOptions without = roster_options();
  without.mode = annotation::GuidelineMode::CommentOnly;
  AnnotationSession a(corpus, with);
  AnnotationSession b(corpus, without);

  // Everyone labelled everything in round 1; round 2 is fully pending.
  const Query q{{"annotator", "O1"}, {"round", "2"}, {"page_size", "10"}, {"page", "2"}};
  const auto ja = body_of(get(a, "/comments", q));
  REQUIRE(ja.at("comments").size() == 10);
  CHECK(ja.at("total_pending") == 178);
  CHECK(ja.at("comments")[0].at("comment_id") == "c0011");
  CHECK(ja.at("comments")[0].at("article").at("topic") == "political");
  CHECK(ja.at("comments")[0].at("article").at("url").get<std::string>().rfind("https://example.org/a/", 0) == 0);

  const auto jb = body_of(get(b, "/comments", q));
  REQUIRE(jb.at("comments").size() == 10);
  CHECK_FALSE(jb.at("comments")[0].contains("article"));
  CHECK(body_of(get(b, "/scheme")).at("guideline_mode") == std::string(to_string(annotation::GuidelineMode::CommentOnly)));

  CHECK(body_of(get(a, "/comments", {{"annotator", "O1"}})).at("total_pending") == 0);
  const auto last = body_of(get(a, "/comments", {{"annotator", "O2"}, {"round", "2"}, {"page", "4"}}));
  CHECK(last.at("comments").size() == 28);

  CHECK(get(a, "/comments", {{"annotator", "O1"}, {"page_size", "0"}}).status == 400);
  CHECK(get(a, "/comments", {{"annotator", "O1"}, {"page", "x"}}).status == 400);
  const auto unknown = get(a, "/comments", {{"annotator", "O9"}});
  CHECK(unknown.status == 404);
  CHECK(body_of(unknown).at("code") == "UnknownAnnotator");
  CHECK(get(a, "/nothing").status == 404);
}

TEST_CASE("scheme endpoint lists the three tags") {
  AnnotationSession s(bare_corpus(2), roster_options());
  const auto j = body_of(get(s, "/scheme"));
  CHECK(j.at("tags") == json::array({"Positive", "Negative", "Neutral"}));
  CHECK(j.at("interpretations").size() == 3);
}

TEST_CASE("posting annotations validates and persists") {
  testing::TempDir dir;
  SessionOptions o = roster_options();
  o.manifest_path = dir / "m.jsonl";
  AnnotationSession s(bare_corpus(3), o);

  const auto ok = post(s, "/annotations", label_body("k0", "O1", "Positive"));
  CHECK(ok.status == 201);
  CHECK(body_of(ok).at("label") == "Positive");
  const auto bad_label = post(s, "/annotations", label_body("k0", "O1", "Happy"));
  CHECK(bad_label.status == 422);
  CHECK(body_of(bad_label).at("code") == "InvalidLabel");
  CHECK(post(s, "/annotations", label_body("nope", "O1", "Positive")).status == 404);
  CHECK(post(s, "/annotations", label_body("k0", "O7", "Positive")).status == 404);
  CHECK(s.handle("POST", "/annotations", {}, "{not json").status == 400);
  CHECK(post(s, "/annotations", json{{"comment_id", "k0"}}).status >= 400);

  const auto reloaded = corpus::load_corpus(o.manifest_path, corpus::CorpusFormat::Manifest);
  REQUIRE(reloaded.find("k0") != nullptr);
  REQUIRE(reloaded.find("k0")->annotations.size() == 1);
  CHECK(reloaded.find("k0")->annotations[0].annotator_id == "O1");
  CHECK(reloaded.find("k0")->annotations[0].label == Label::Positive);
  CHECK(reloaded.size() == 3);

  // Last write wins.
  CHECK(post(s, "/annotations", label_body("k0", "O1", "Negative")).status == 201);
  CHECK(s.snapshot().label_of("k0", "O1", 1) == Label::Negative);
}

TEST_CASE("agreement needs overlap; a single agreeing comment is perfect") {
  AnnotationSession s(bare_corpus(3), roster_options());
  post(s, "/annotations", label_body("k0", "O1", "Positive"));
  post(s, "/annotations", label_body("k1", "O2", "Positive"));
  const auto none = get(s, "/iaa");
  CHECK(none.status == 409);
  CHECK(body_of(none).at("code") == "NoOverlap");

  post(s, "/annotations", label_body("k0", "O2", "Positive"));
  const auto j = body_of(get(s, "/iaa"));
  CHECK(j.at("n_joint") == 1);
  CHECK(j.at("k").get<double>() == 1.0);
  CHECK(j.at("band") == "Perfect");
}

TEST_CASE("resolutions and gold construction") {
  AnnotationSession s(testing::corpus_from_matrix(testing::round1_matrix()), {});
  const auto dis = body_of(get(s, "/disagreements")).at("disagreements");
  REQUIRE(dis.size() == 178 - (34 + 65 + 24));
  CHECK(dis[0].at("labels").contains("O1"));

  // c0001 sits in the Positive/Positive cell.
  const auto agreed = post(s, "/resolutions", json{{"comment_id", "c0001"}, {"label", "Negative"}});
  CHECK(agreed.status == 422);
  CHECK(body_of(agreed).at("code") == "ResolutionForAgreedComment");
  CHECK(post(s, "/resolutions", json{{"comment_id", "zzz"}, {"label", "Negative"}}).status == 404);

  for (std::size_t i = 0; i < 34; ++i) {
    const auto id = dis[i].at("comment_id").get<std::string>();
    CHECK(post(s, "/resolutions", json{{"comment_id", id}, {"label", i < 11 ? "Positive" : "Negative"}}).status ==
          201);
  }
  const auto listed = body_of(get(s, "/disagreements")).at("disagreements");
  CHECK(listed[0].at("resolution") == "Positive");
  CHECK_FALSE(listed[40].contains("resolution"));

  const auto g = post(s, "/gold", json{{"seed", 42}});
  REQUIRE(g.status == 200);
  const auto j = body_of(g);
  CHECK(j.at("gold").at("size") == 178);
  CHECK(j.at("gold").at("counts") == json{{"Positive", 45}, {"Negative", 88}, {"Neutral", 45}});
  CHECK(j.at("balanced").at("size") == 90);
  CHECK(j.at("balanced").at("counts").at("Positive") == 45);
  CHECK(j.at("balanced").at("counts").at("Negative") == 45);
  CHECK(j.at("balanced").at("seed") == 42);

  // Same as the library path.
  const auto store = s.snapshot();
  const auto res = testing::resolve_disagreements(store, "O1", "O2", 1, 11, 23);
  const auto balanced = annotation::balance(annotation::adjudicate(store, "O1", "O2", 1, res), 42);
  REQUIRE(balanced.documents.size() == j.at("balanced").at("documents").size());
  for (std::size_t i = 0; i < balanced.documents.size(); ++i) {
    CHECK(j.at("balanced").at("documents")[i].at("comment_id") == balanced.documents[i].first);
  }
}

TEST_CASE("gold without both classes is a conflict") {
  AnnotationSession s(testing::corpus_from_gold_counts(5, 0, 3), {});
  const auto r = post(s, "/gold", json::object());
  CHECK(r.status == 409);
  CHECK(body_of(r).at("code") == "EmptyBinaryCorpus");
}

TEST_CASE("roster must be two distinct annotators") {
  SessionOptions same;
  same.roster = {"O1", "O1"};
  CHECK_THROWS_AS(AnnotationSession(bare_corpus(1), same), Error);
  CHECK_THROWS_AS(AnnotationSession(bare_corpus(1), SessionOptions{}), Error);
}

TEST_CASE("API numbers equal library numbers on random annotation sets") {
  std::mt19937_64 rng(7);
  const char* labels[] = {"Positive", "Negative", "Neutral"};
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 20 + rng() % 60;
    AnnotationSession s(bare_corpus(n), roster_options());
    for (std::size_t i = 0; i < n; ++i) {
      const auto id = "k" + std::to_string(i);
      // Biased toward agreement so chance agreement never degenerates.
      const auto la = rng() % 3;
      const auto lb = rng() % 2 == 0 ? la : rng() % 3;
      post(s, "/annotations", label_body(id, "O1", labels[la]));
      post(s, "/annotations", label_body(id, "O2", labels[lb]));
    }
    const auto r = get(s, "/iaa");
    const auto store = s.snapshot();
    const auto m = annotation::agreement_matrix(store, "O1", "O2", 1);
    if (r.status != 200) {
      CHECK_THROWS(annotation::kappa(m));
      continue;
    }
    const auto k = annotation::kappa(m);
    const auto j = body_of(r);
    CHECK(j.at("k").get<double>() == k.k);
    CHECK(j.at("pr_a").get<double>() == k.pr_a);
    CHECK(j.at("pr_e").get<double>() == k.pr_e);
    CHECK(j.at("band") == std::string(to_string(k.band)));
  }
}

TEST_CASE("HTTP server: concurrent writes all land") {
  testing::TempDir dir;
  SessionOptions o = roster_options();
  o.manifest_path = dir / "live.jsonl";
  const std::size_t n = 40;
  AnnotationSession session(bare_corpus(n), o);
  Server server(session);
  const int port = server.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  server.start();

  std::vector<std::thread> writers;
  for (int w = 0; w < 4; ++w) {
    writers.emplace_back([w, port, n] {
      httplib::Client cli("127.0.0.1", port);
      for (std::size_t i = static_cast<std::size_t>(w); i < n; i += 4) {
        for (const char* who : {"O1", "O2"}) {
          auto res = cli.Post("/annotations", label_body("k" + std::to_string(i), who, "Negative").dump(),
                              "application/json");
          CHECK((res && res->status == 201));
        }
        auto r = cli.Get("/session");
        CHECK((r && r->status == 200));
      }
    });
  }
  for (auto& t : writers) t.join();

  httplib::Client cli("127.0.0.1", port);
  auto res = cli.Get("/session");
  REQUIRE(res);
  const auto j = json::parse(res->body);
  CHECK(j.at("progress").at("O1") == n);
  CHECK(j.at("progress").at("O2") == n);
  auto miss = cli.Get("/comments?annotator=O9");
  REQUIRE(miss);
  CHECK(miss->status == 404);
  auto bad = cli.Post("/annotations", label_body("k0", "O1", "meh").dump(), "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 422);
  CHECK(json::parse(bad->body).at("code") == "InvalidLabel");
  server.stop();

  const auto saved = corpus::load_corpus(o.manifest_path, corpus::CorpusFormat::Manifest);
  std::size_t recorded = 0;
  for (const auto& c : saved.comments()) recorded += c.annotations.size();
  CHECK(recorded == 2 * n);
}

TEST_CASE("binding an occupied port fails") {
  AnnotationSession s(bare_corpus(1), roster_options());
  Server first(s);
  const int port = first.bind("127.0.0.1", 0);
  Server second(s);
  try {
    second.bind("127.0.0.1", port);
    FAIL("expected BindError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BindError);
  }
}

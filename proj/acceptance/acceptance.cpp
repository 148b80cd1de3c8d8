// Acceptance runner: one PASS/FAIL line per primary criterion. Exit status is
// non-zero when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "support/cluster_metrics.hpp"
#include "support/edit_oracle.hpp"
#include "support/generators.hpp"
#include "support/live_server.hpp"
#include "treequery/fixtures.hpp"
#include "treequery/matcher.hpp"
#include "treequery/oracle.hpp"
#include "treequery/parser.hpp"
#include "treequery/recommender.hpp"
#include "treequery/serialize.hpp"
#include "treequery/service.hpp"
#include "treequery/similarity.hpp"

using namespace treequery;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned limits.
constexpr int kOraclePairs = 1000;
constexpr double kOracleSeconds = 60.0;
constexpr int kRecommenderCases = 200;
constexpr int kRandomAsts = 200;
constexpr int kFuzzInputs = 100000;
constexpr double kFuzzSeconds = 120.0;
constexpr int kTriangleTriples = 500;
constexpr int kOracleDistancePairs = 200;
constexpr double kClusterRatio = 0.8;
constexpr int kProjectionGroups = 500;
constexpr double kProjectionSeconds = 30.0;
constexpr std::size_t kMinCoverageExpressions = 12;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const std::string kData = TQ_TEST_DATA_DIR;

Outcome oracle_equivalence() {
  tqtest::Rng rng(20240601);
  auto start = Clock::now();
  int mismatches = 0;
  std::size_t results = 0;
  for (int i = 0; i < kOraclePairs; ++i) {
    auto tree = tqtest::random_tree(rng, "t" + std::to_string(i), {40, 6});
    auto target = tqtest::random_target(rng, 3);
    auto fast = match_tree(target, tree);
    if (fast != oracle_match(target, tree)) ++mismatches;
    results += fast.size();
  }
  double secs = seconds_since(start);
  return {mismatches == 0 && secs < kOracleSeconds,
          fmt("%d pairs (trees <= 40 nodes, depth <= 3), %d mismatches, %zu results, %.2f s "
              "(limit %.0f s)",
              kOraclePairs, mismatches, results, secs, kOracleSeconds)};
}

Outcome short_branch() {
  // A over one B-C-C-C-C path and one B-C-C path; the expression wants more
  // than two B paths whose C run exceeds three.
  MultiTree t("short-branch");
  NodeIndex a = t.add_node("A", {{"label", "A"}}, kNoNode);
  NodeIndex p = t.add_node("B1", {{"label", "B"}}, a);
  for (int i = 0; i < 4; ++i) p = t.add_node("C1" + std::to_string(i), {{"label", "C"}}, p);
  p = t.add_node("B2", {{"label", "B"}}, a);
  for (int i = 0; i < 2; ++i) p = t.add_node("C2" + std::to_string(i), {{"label", "C"}}, p);
  t.compute_inherent();
  auto target = parse(R"((label="A")[<(label="B")/(label="C"){4,}>{3,}])");
  auto fast = match_tree(target, t);
  auto slow = oracle_match(target, t);
  auto failure = diagnose(target, t);
  bool ok = fast.empty() && slow.empty() && failure &&
            failure->kind == FailurePoint::Kind::ArmCount && failure->observed == 1;
  return {ok, fmt("matches %zu (oracle %zu); conforming paths under A: %lld", fast.size(),
                  slow.size(), failure ? static_cast<long long>(failure->observed) : -1LL)};
}

struct FrozenCount {
  const char* name;
  std::size_t trees;
  std::size_t results;
};

// Recorded at fixture-generation time (tests/data/expressions.json).
constexpr FrozenCount kPaperSuite[] = {
    {"shneiderman-path", 5, 9},  {"shneiderman-hub", 2, 2},     {"influential-2019", 6, 6},
    {"graph-topic", 83, 254},    {"deep-learning-citers", 3, 3}, {"active-graph", 15, 15},
};

bool oracle_confirms(const QueryTarget& target, const Corpus& corpus, const MatchReport& report) {
  std::size_t next = 0;
  for (const auto& tree : corpus.trees) {
    auto expected = oracle_match(target, tree);
    if (expected.empty()) continue;
    if (next >= report.trees.size() || report.trees[next].tree_id != tree.tree_id()) return false;
    if (report.trees[next].results != expected) return false;
    ++next;
  }
  return next == report.trees.size();
}

std::size_t result_count(const MatchReport& r) {
  std::size_t n = 0;
  for (const auto& t : r.trees) n += t.results.size();
  return n;
}

Outcome case_study_suite() {
  auto corpus = load_corpus(slurp(kData + "/citation_corpus.json"));
  auto exprs = fixture_expressions();
  int ok = 0;
  std::string summary;
  for (const auto& frozen : kPaperSuite) {
    auto it = std::find_if(exprs.begin(), exprs.end(),
                           [&](const NamedExpression& e) { return e.name == frozen.name; });
    if (it == exprs.end()) continue;
    auto target = parse(it->expr);
    if (!validate(target, corpus.schema).empty()) continue;
    auto report = match_corpus(target, corpus);
    bool good = report.matched_tree_ids.size() == frozen.trees &&
                result_count(report) == frozen.results && oracle_confirms(target, corpus, report);
    ok += good;
    summary += fmt(" %s=%zu/%zu", frozen.name, report.matched_tree_ids.size(), result_count(report));
  }
  const int total = static_cast<int>(std::size(kPaperSuite));
  return {ok == total, fmt("%d/%d expressions exact and oracle-confirmed;", ok, total) + summary};
}

Outcome coverage() {
  auto corpus = load_corpus(slurp(kData + "/citation_corpus.json"));
  auto shipped = nlohmann::json::parse(slurp(kData + "/expressions.json"));
  std::set<std::string> categories;
  std::size_t confirmed = 0;
  for (const auto& e : shipped) {
    auto target = parse(e["expr"].get<std::string>());
    auto report = match_corpus(target, corpus);
    bool good = validate(target, corpus.schema).empty() &&
                report.matched_tree_ids.size() == e["matched_trees"].get<std::size_t>() &&
                result_count(report) == e["results"].get<std::size_t>() &&
                oracle_confirms(target, corpus, report);
    if (!good) continue;
    ++confirmed;
    categories.insert(e["category"].get<std::string>());
  }
  bool all_categories = true;
  for (const char* target : {"node", "path", "subtree", "tree"}) {
    for (const char* aspect : {"feature", "position"}) {
      all_categories &= categories.count(std::string(target) + "/" + aspect) > 0;
    }
  }
  return {confirmed == shipped.size() && confirmed >= kMinCoverageExpressions && all_categories,
          fmt("%zu/%zu expressions oracle-confirmed, %zu/8 categories covered (need >= %zu)",
              confirmed, shipped.size(), categories.size(), kMinCoverageExpressions)};
}

Outcome recommender_laws() {
  tqtest::Rng rng(4242);
  int superset = 0, duplicates = 0, unstable = 0, total_recs = 0;
  for (int i = 0; i < kRecommenderCases; ++i) {
    Corpus corpus;
    for (int j = 0; j < 8; ++j) {
      corpus.trees.push_back(tqtest::random_tree(rng, "t" + std::to_string(j), {20, 4}));
    }
    infer_schema(corpus);
    auto seed = tqtest::random_target(rng, 2);
    auto seed_ids = match_corpus(seed, corpus).matched_tree_ids;
    std::set<std::string> seed_set(seed_ids.begin(), seed_ids.end());
    auto recs = recommend(seed, corpus, 1000);
    total_recs += static_cast<int>(recs.size());
    for (std::size_t a = 0; a < recs.size(); ++a) {
      auto ids = match_corpus(recs[a].expression, corpus).matched_tree_ids;
      std::set<std::string> got(ids.begin(), ids.end());
      if (!std::includes(got.begin(), got.end(), seed_set.begin(), seed_set.end())) ++superset;
      for (std::size_t b = a + 1; b < recs.size(); ++b) {
        if (ast_equal(recs[a].expression, recs[b].expression)) ++duplicates;
      }
    }
    if (recommendations_json(recommend(seed, corpus, 1000)) != recommendations_json(recs)) ++unstable;
  }
  return {superset == 0 && duplicates == 0 && unstable == 0,
          fmt("%d cases, %d recommendations; superset violations %d, duplicates %d, "
              "unstable rankings %d",
              kRecommenderCases, total_recs, superset, duplicates, unstable)};
}

Outcome parser_round_trip() {
  int failures = 0;
  for (const auto& fx : fixture_expressions()) {
    auto once = format(parse(fx.expr));
    if (format(parse(once)) != once || !ast_equal(parse(once), parse(fx.expr))) ++failures;
  }
  tqtest::Rng rng(777);
  for (int i = 0; i < kRandomAsts; ++i) {
    auto t = tqtest::random_target(rng, 3);
    auto back = parse(format(t));
    if (!ast_equal(t, back) || format(back) != format(t)) ++failures;
  }
  // A third each: raw bytes, query-alphabet strings, and mutated valid expressions.
  const std::string alphabet = "().[]<>{}/|!^$&#-,=\"0123456789aceinrstx \t";
  auto start = Clock::now();
  int accepted = 0, rejected = 0, crashes = 0;
  for (int i = 0; i < kFuzzInputs; ++i) {
    std::string s;
    if (i % 3 == 2) {
      s = format(tqtest::random_target(rng, 3));
      for (int m = 1 + rng() % 3; m > 0 && !s.empty(); --m) {
        std::size_t at = rng() % s.size();
        switch (rng() % 3) {
          case 0: s.erase(at, 1); break;
          case 1: s.insert(at, 1, alphabet[rng() % alphabet.size()]); break;
          default: s[at] = static_cast<char>(rng() & 0xff); break;
        }
      }
    } else {
      s.assign(rng() % 48, '\0');
      for (auto& ch : s) {
        ch = (i % 3) ? static_cast<char>(rng() & 0xff) : alphabet[rng() % alphabet.size()];
      }
    }
    try {
      auto t = parse(s);
      ++accepted;
      if (!ast_equal(parse(format(t)), t)) ++failures;
    } catch (const Error&) {
      ++rejected;
    } catch (...) {
      ++crashes;
    }
  }
  double secs = seconds_since(start);
  return {failures == 0 && crashes == 0 && secs < kFuzzSeconds,
          fmt("%zu fixtures + %d random ASTs, %d round-trip failures; fuzz %d inputs "
              "(%d parsed, %d rejected, %d unexpected exceptions) in %.2f s (limit %.0f s)",
              fixture_expressions().size(), kRandomAsts, failures, kFuzzInputs, accepted,
              rejected, crashes, secs, kFuzzSeconds)};
}

Outcome edit_distance() {
  tqtest::Rng rng(5150);
  int identity = 0, asymmetric = 0, triangle = 0, oracle_diff = 0;
  for (int i = 0; i < kTriangleTriples; ++i) {
    auto a = tqtest::random_tree(rng, "a", {30, 5});
    auto b = tqtest::random_tree(rng, "b", {30, 5});
    auto c = tqtest::random_tree(rng, "c", {30, 5});
    int ab = tree_edit_distance(a, b);
    identity += tree_edit_distance(a, a) != 0;
    asymmetric += ab != tree_edit_distance(b, a);
    triangle += tree_edit_distance(a, c) > ab + tree_edit_distance(b, c);
  }
  for (int i = 0; i < kOracleDistancePairs; ++i) {
    auto a = tqtest::random_tree(rng, "a", {static_cast<int>(1 + rng() % 8), 4});
    auto b = tqtest::random_tree(rng, "b", {static_cast<int>(1 + rng() % 8), 4});
    oracle_diff += tree_edit_distance(a, b) != tqtest::edit_script_distance(a, b);
  }
  auto deep = tqtest::tree_from_shape("((()()()()))", "deep");
  auto flat = tqtest::tree_from_shape("(()()()())", "flat");
  int pair = tree_edit_distance(deep, flat);
  int pair_oracle = tqtest::edit_script_distance(deep, flat);
  return {identity + asymmetric + triangle + oracle_diff == 0 && pair == pair_oracle,
          fmt("%d triples: identity %d, symmetry %d, triangle %d violations; %d pairs <= 8 nodes "
              "vs edit-script search: %d differ; inserted-node pair %d (search %d)",
              kTriangleTriples, identity, asymmetric, triangle, kOracleDistancePairs,
              oracle_diff, pair, pair_oracle)};
}

bool bit_identical(const std::vector<ProjectionPoint>& a, const std::vector<ProjectionPoint>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::memcmp(&a[i].x, &b[i].x, sizeof(double)) != 0) return false;
    if (std::memcmp(&a[i].y, &b[i].y, sizeof(double)) != 0) return false;
  }
  return true;
}

Outcome projection() {
  auto clustered = load_corpus(slurp(kData + "/clustered_corpus.json"));
  auto tsne = project(clustered, ProjectionMethod::TSNE, 42);
  auto pca = project(clustered, ProjectionMethod::PCA, 42);
  bool deterministic = bit_identical(tsne, project(clustered, ProjectionMethod::TSNE, 42)) &&
                       bit_identical(pca, project(clustered, ProjectionMethod::PCA, 42));
  double tsne_ratio = tqtest::intra_inter_ratio(tsne);
  double pca_ratio = tqtest::intra_inter_ratio(pca);

  tqtest::Rng rng(500);
  Corpus large;
  std::set<std::string> keys;
  for (int i = 0; keys.size() < static_cast<std::size_t>(kProjectionGroups); ++i) {
    auto t = tqtest::random_tree(rng, "g" + std::to_string(i), {40, 6});
    if (keys.insert(topology_key(t)).second) large.trees.push_back(std::move(t));
  }
  infer_schema(large);
  auto start = Clock::now();
  auto big = project(large, ProjectionMethod::TSNE, 7);
  double secs = seconds_since(start);
  bool ok = deterministic && tsne_ratio < kClusterRatio && pca_ratio < kClusterRatio &&
            big.size() == static_cast<std::size_t>(kProjectionGroups) && secs < kProjectionSeconds;
  return {ok, fmt("bit-identical reruns: %s; intra/inter ratio t-SNE %.3f, PCA %.3f (limit %.1f) "
                  "over %zu groups; %zu groups projected in %.2f s (limit %.0f s)",
                  deterministic ? "yes" : "no", tsne_ratio, pca_ratio, kClusterRatio, tsne.size(),
                  big.size(), secs, kProjectionSeconds)};
}

Outcome service_equivalence() {
  const std::string document = slurp(kData + "/citation_corpus.json");
  auto corpus = load_corpus(document);
  Service service;
  tqtest::LiveServer server(service);
  auto client = server.client();
  int requests = 0, mismatches = 0;
  auto check = [&](const httplib::Result& r, const std::string& expected) {
    ++requests;
    if (!r || r->status != 200 || r->body != expected) ++mismatches;
  };

  auto up = client.Post("/corpus", document, "application/json");
  std::string id = snapshot_id(corpus);
  check(up, "{\"snapshot_id\":\"" + id + "\",\"stats\":" + stats_json(corpus_stats(corpus)) + "}");
  check(client.Get("/stats?snapshot_id=" + id), stats_json(corpus_stats(corpus)));
  for (const auto& fx : fixture_expressions()) {
    auto target = parse(fx.expr);
    auto report = match_corpus(target, corpus);
    check(client.Post("/query", nlohmann::json{{"snapshot_id", id}, {"expr", fx.expr}}.dump(),
                      "application/json"),
          report_json(report, corpus, format(target)));
    check(client.Post("/query",
                      nlohmann::json{{"snapshot_id", id}, {"ast", nlohmann::json::parse(ast_encode(target))}}.dump(),
                      "application/json"),
          report_json(report, corpus));
    check(client.Post("/recommend",
                      nlohmann::json{{"snapshot_id", id}, {"expr", fx.expr}, {"k", 10}}.dump(),
                      "application/json"),
          recommendations_json(recommend(target, corpus, 10)));
  }
  for (const char* method : {"tsne", "pca"}) {
    check(client.Get("/projection?snapshot_id=" + id + "&method=" + method + "&seed=11"),
          projection_json(project(corpus, *projection_method(method), 11)));
  }
  return {mismatches == 0,
          fmt("%d HTTP requests, %d differ from in-process calls (no web client built)", requests,
              mismatches)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"oracle-equivalence", oracle_equivalence},
      {"branch-arm-count", short_branch},
      {"case-study-expressions", case_study_suite},
      {"category-coverage", coverage},
      {"recommender-laws", recommender_laws},
      {"parser-round-trip", parser_round_trip},
      {"edit-distance", edit_distance},
      {"projection", projection},
      {"service-equivalence", service_equivalence},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s  %-24s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed,
              std::size(criteria));
  return failed == 0 ? 0 : 1;
}

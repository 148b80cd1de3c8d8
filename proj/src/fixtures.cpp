#include "treequery/fixtures.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <random>

#include "treequery/matcher.hpp"
#include "treequery/parser.hpp"

namespace treequery {

namespace {

using Attrs = std::map<std::string, AttributeValue>;

struct Draft {
  Attrs attrs;
  std::vector<Draft> kids;

  int size() const {
    int n = 1;
    for (const auto& k : kids) n += k.size();
    return n;
  }
};

// Plain modulo draws keep the fixture identical across standard libraries.
class Dice {
 public:
  explicit Dice(std::uint64_t seed) : rng_(seed) {}
  int below(int n) { return static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }
  int between(int lo, int hi) { return lo + below(hi - lo + 1); }
  bool percent(int p) { return below(100) < p; }

 private:
  std::mt19937_64 rng_;
};

const std::vector<std::string> kAuthors = {
    "Ben Shneiderman", "Jeffrey Heer",  "Tamara Munzner", "Jarke van Wijk", "Min Chen",
    "Kwan-Liu Ma",     "Huamin Qu",     "Silvia Miksch",  "Daniel Keim",    "Jean-Daniel Fekete",
    "Catherine Plaisant", "Hanspeter Pfister"};

const std::vector<std::string> kKeywords = {
    "graph", "deep learning", "tree", "visual analytics", "immersive", "text", "time series",
    "network", "evaluation", "uncertainty"};

StringList pick_distinct(Dice& dice, const std::vector<std::string>& pool, int count,
                         const std::vector<std::string>& exclude = {}) {
  StringList out;
  while (static_cast<int>(out.size()) < count) {
    const auto& s = pool[dice.below(static_cast<int>(pool.size()))];
    if (std::find(out.begin(), out.end(), s) != out.end()) continue;
    if (std::find(exclude.begin(), exclude.end(), s) != exclude.end()) continue;
    out.push_back(s);
  }
  return out;
}

Attrs paper(Dice& dice, int year, bool allow_shneiderman) {
  Attrs a;
  a["title"] = AttributeValue("Paper " + std::to_string(dice.between(1000, 9999)));
  std::vector<std::string> exclude;
  if (!allow_shneiderman) exclude.push_back("Ben Shneiderman");
  a["authors"] = AttributeValue(pick_distinct(dice, kAuthors, dice.between(1, 3), exclude));
  a["year"] = AttributeValue(static_cast<double>(year));
  int citation = dice.percent(15) ? dice.between(200, 900) : dice.between(0, 150);
  a["citation"] = AttributeValue(static_cast<double>(citation));
  a["keywords"] = AttributeValue(
      pick_distinct(dice, kKeywords, dice.between(1, 3), {"deep learning", "graph"}));
  return a;
}

void add_keyword(Attrs& a, const std::string& keyword) {
  auto list = a["keywords"].list();
  if (std::find(list.begin(), list.end(), keyword) == list.end()) list.push_back(keyword);
  a["keywords"] = AttributeValue(list);
}

void add_author(Attrs& a, const std::string& author) {
  auto list = a["authors"].list();
  if (std::find(list.begin(), list.end(), author) == list.end()) list.insert(list.begin(), author);
  a["authors"] = AttributeValue(list);
}

int year_of(const Attrs& a) { return static_cast<int>(a.at("year").number()); }

/// Grows random citing papers below `node` until the tree reaches `target` nodes.
void grow(Dice& dice, Draft& root, int target, bool allow_shneiderman) {
  int size = root.size();
  while (size < target) {
    // Pointers into `kids` move on reallocation, so collect them per round.
    std::vector<Draft*> open;
    std::vector<Draft*> stack{&root};
    while (!stack.empty()) {
      Draft* d = stack.back();
      stack.pop_back();
      if (d->kids.size() < 6) open.push_back(d);
      for (auto& k : d->kids) stack.push_back(&k);
    }
    Draft* parent = open[dice.below(static_cast<int>(open.size()))];
    int year = std::min(2020, year_of(parent->attrs) + dice.between(0, 2));
    Draft child{paper(dice, year, allow_shneiderman && dice.percent(6)), {}};
    if (dice.percent(12)) add_keyword(child.attrs, "graph");
    if (dice.percent(10)) add_keyword(child.attrs, "deep learning");
    parent->kids.push_back(std::move(child));
    ++size;
  }
}

void flatten(const Draft& d, MultiTree& tree, NodeIndex parent, const std::string& prefix,
             int& counter) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "-n%02d", counter++);
  NodeIndex self = tree.add_node(prefix + buf, d.attrs, parent);
  for (const auto& k : d.kids) flatten(k, tree, self, prefix, counter);
}

MultiTree finish(const Draft& root, const std::string& tree_id) {
  MultiTree tree(tree_id);
  int counter = 0;
  flatten(root, tree, kNoNode, tree_id, counter);
  tree.compute_inherent();
  return tree;
}

std::string paper_id(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "paper-%03d", i);
  return buf;
}

}  // namespace

Corpus citation_corpus() {
  Dice dice(20240521);
  Corpus corpus;
  for (int i = 0; i < 100; ++i) {
    const std::string id = paper_id(i + 1);
    const bool hub = id == kShneidermanHubTree;
    Draft root{paper(dice, dice.between(2014, 2020), !hub && dice.percent(8)), {}};
    int target = dice.between(1, 40);

    if (i < 15) {
      // Graph paper cited by 1..5 deep-learning papers.
      add_keyword(root.attrs, "graph");
      int citers = i % 5 + 1;
      for (int c = 0; c < citers; ++c) {
        Draft dl{paper(dice, std::min(2020, year_of(root.attrs) + 1), false), {}};
        add_keyword(dl.attrs, "deep learning");
        root.kids.push_back(std::move(dl));
      }
    } else if (i < 20) {
      // Shneiderman citation chain of length 3..5 starting at the root.
      add_author(root.attrs, "Ben Shneiderman");
      Draft* cursor = &root;
      int length = i % 3 + 3;
      for (int c = 1; c < length; ++c) {
        Draft next{paper(dice, std::min(2020, year_of(cursor->attrs) + 1), false), {}};
        add_author(next.attrs, "Ben Shneiderman");
        cursor->kids.push_back(std::move(next));
        cursor = &cursor->kids.back();
      }
    } else if (hub) {
      // One Shneiderman paper inspiring exactly three highly cited papers.
      Draft mid{paper(dice, 2016, false), {}};
      add_author(mid.attrs, "Ben Shneiderman");
      for (int c = 0; c < 3; ++c) {
        Draft cited{paper(dice, 2017, false), {}};
        cited.attrs["citation"] = AttributeValue(static_cast<double>(250 + 50 * c));
        mid.kids.push_back(std::move(cited));
      }
      root.attrs["year"] = AttributeValue(2015.0);
      root.kids.push_back(std::move(mid));
      target = std::max(target, 12);
    } else if (i >= 30 && i < 36) {
      // 2019 roots with ten or more highly cited descendants.
      root.attrs["year"] = AttributeValue(2019.0);
      int highly = 9 + i % 4;
      for (int c = 0; c < highly; ++c) {
        Draft cited{paper(dice, 2020, false), {}};
        cited.attrs["citation"] = AttributeValue(static_cast<double>(200 + 10 * c));
        root.kids.push_back(std::move(cited));
        if (root.kids.size() == 6) {
          // Keep fan-out moderate: hang the rest one level lower.
          break;
        }
      }
      for (int c = static_cast<int>(root.kids.size()); c < highly; ++c) {
        Draft cited{paper(dice, 2020, false), {}};
        cited.attrs["citation"] = AttributeValue(static_cast<double>(300 + 10 * c));
        root.kids[c % root.kids.size()].kids.push_back(std::move(cited));
      }
      target = std::max(target, 20);
    }
    grow(dice, root, std::min(40, std::max(target, root.size())), !hub);
    corpus.trees.push_back(finish(root, id));
  }
  infer_schema(corpus);
  return corpus;
}

std::vector<NamedExpression> fixture_expressions() {
  return {
      {"shneiderman-path", "path/feature", R"((authors="Ben Shneiderman"){3,})"},
      {"shneiderman-hub", "subtree/feature",
       R"((authors="Ben Shneiderman")[<(citation>=200)>{3,}])"},
      {"influential-2019", "tree/feature",
       R"((year=2019)[<.{0,}>{0,}] - exists <(citation>=200)>{10,})"},
      {"graph-topic", "node/feature", R"((keywords="graph"))"},
      {"deep-learning-citers", "subtree/feature",
       R"((keywords="graph")[<(keywords="deep learning")>{5,}])"},
      {"active-graph", "subtree/feature",
       R"((keywords="graph")[<(keywords="deep learning")>{1,}] - exists <(year>=2019)>{5,})"},
      {"highly-cited", "node/feature", R"((citation>=200))"},
      {"recent-in-list", "node/feature", R"((year>=2019,keywords in ["immersive","text"]))"},
      {"third-level", "node/position", R"((depth=3))"},
      {"roots", "node/position", R"(^)"},
      {"leaf-below-hub", "path/position", R"((citation>=200)/.{0,}/$)"},
      {"root-to-leaf-3", "path/position", R"(^/.{1}/$)"},
      {"same-degree-as-parent", "path/feature", R"(.{1}/(degree=&-1,degree>=1))"},
      {"wide-internal", "subtree/position", R"((depth=2)[<$>{3,}])"},
      {"two-level-fanout", "subtree/position", R"(.[<.[<.>{2,}]>{2,}])"},
      {"deep-trees", "tree/position", R"(^[<.{4,}>{1,}])"},
      {"chains-everywhere", "tree/position", R"(^ - forall <.>{3,})"},
      {"recent-citers-2019", "tree/feature",
       R"((depth=1,year=2019) - exists <(citation>=200){2,}>{1,})"},
  };
}

Corpus clustered_corpus(int per_template, std::uint64_t seed) {
  Dice dice(seed);
  Corpus corpus;
  auto leaf = [] { return Draft{{}, {}}; };
  auto wide = [&] {
    Draft root = leaf();
    for (int c = 0; c < 9; ++c) root.kids.push_back(leaf());
    return root;
  };
  auto deep = [&] {
    Draft root = leaf();
    Draft* cursor = &root;
    for (int d = 0; d < 9; ++d) {
      cursor->kids.push_back(leaf());
      cursor = &cursor->kids.back();
    }
    return root;
  };
  auto balanced = [&] {
    std::function<Draft(int)> build = [&](int depth) {
      Draft d = leaf();
      if (depth > 1) {
        d.kids.push_back(build(depth - 1));
        d.kids.push_back(build(depth - 1));
      }
      return d;
    };
    return build(4);
  };
  struct Template {
    const char* name;
    std::function<Draft()> make;
  };
  std::vector<Template> templates = {{"wide", wide}, {"deep", deep}, {"balanced", balanced}};
  for (const auto& t : templates) {
    for (int i = 0; i < per_template; ++i) {
      Draft root = t.make();
      int edits = dice.between(1, 4);
      for (int e = 0; e < edits; ++e) {
        // Walk to a random node, then add or remove a leaf there.
        Draft* cursor = &root;
        while (!cursor->kids.empty() && dice.percent(65)) {
          cursor = &cursor->kids[dice.below(static_cast<int>(cursor->kids.size()))];
        }
        bool removable = false;
        for (const auto& k : cursor->kids) removable = removable || k.kids.empty();
        if (removable && dice.percent(40)) {
          for (auto it = cursor->kids.begin(); it != cursor->kids.end(); ++it) {
            if (it->kids.empty()) {
              cursor->kids.erase(it);
              break;
            }
          }
        } else {
          cursor->kids.push_back(leaf());
        }
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%s-%03d", t.name, i);
      corpus.trees.push_back(finish(root, buf));
    }
  }
  infer_schema(corpus);
  return corpus;
}

void write_fixtures(const std::string& directory) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + directory + "': " + ec.message());
  auto write = [&](const std::string& name, const std::string& text) {
    fs::path path = fs::path(directory) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
    out << text << '\n';
  };
  const Corpus citations = citation_corpus();
  write("citation_corpus.json", serialize_corpus(citations));
  write("clustered_corpus.json", serialize_corpus(clustered_corpus()));
  // Counts on the citation corpus, recorded when the fixtures are written.
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& e : fixture_expressions()) {
    auto report = match_corpus(parse(e.expr), citations);
    std::size_t results = 0;
    for (const auto& t : report.trees) results += t.results.size();
    list.push_back({{"name", e.name},
                    {"category", e.category},
                    {"expr", e.expr},
                    {"matched_trees", report.matched_tree_ids.size()},
                    {"results", results}});
  }
  write("expressions.json", list.dump(2));
}

}  // namespace treequery

#include "edit_oracle.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <unordered_map>
#include <vector>

namespace tqtest {

using namespace treequery;

std::string shape_string(const MultiTree& tree) {
  if (tree.empty()) return {};
  std::function<std::string(NodeIndex)> enc = [&](NodeIndex v) {
    std::string s = "(";
    for (NodeIndex c : tree.node(v).children) s += enc(c);
    return s + ")";
  };
  return enc(0);
}

MultiTree tree_from_shape(const std::string& shape, const std::string& tree_id) {
  MultiTree t(tree_id);
  std::vector<NodeIndex> stack;
  int next = 0;
  for (char ch : shape) {
    if (ch == '(') {
      NodeIndex parent = stack.empty() ? kNoNode : stack.back();
      stack.push_back(t.add_node(tree_id + "_" + std::to_string(next++), {}, parent));
    } else {
      stack.pop_back();
    }
  }
  t.compute_inherent();
  return t;
}

namespace {

std::vector<std::string> neighbours(const std::string& s, std::size_t max_nodes) {
  std::vector<std::string> out;
  const std::size_t n = s.size();
  // Deletions: drop a matching pair, splicing the children into place.
  for (std::size_t i = 0; i < n; ++i) {
    if (s[i] != '(') continue;
    int depth = 0;
    for (std::size_t j = i; j < n; ++j) {
      depth += s[j] == '(' ? 1 : -1;
      if (depth == 0) {
        out.push_back(s.substr(0, i) + s.substr(i + 1, j - i - 1) + s.substr(j + 1));
        break;
      }
    }
  }
  if (n / 2 + 1 > max_nodes) return out;
  // Insertions: wrap a run of consecutive siblings (possibly empty).
  for (std::size_t i = 0; i <= n; ++i) {
    int depth = 0;
    for (std::size_t j = i; j <= n; ++j) {
      if (depth == 0) {
        out.push_back(s.substr(0, i) + "(" + s.substr(i, j - i) + ")" + s.substr(j));
      }
      if (j == n) break;
      depth += s[j] == '(' ? 1 : -1;
      if (depth < 0) break;
    }
  }
  return out;
}

}  // namespace

int edit_script_distance(const MultiTree& a, const MultiTree& b) {
  const std::string from = shape_string(a);
  const std::string to = shape_string(b);
  const std::size_t bound = std::max(a.size(), b.size());
  std::unordered_map<std::string, int> dist{{from, 0}};
  std::deque<std::string> queue{from};
  while (!queue.empty()) {
    std::string cur = queue.front();
    queue.pop_front();
    int d = dist[cur];
    if (cur == to) return d;
    for (auto& next : neighbours(cur, bound)) {
      if (dist.emplace(next, d + 1).second) queue.push_back(std::move(next));
    }
  }
  return -1;
}

bool isomorphic(const MultiTree& a, const MultiTree& b) {
  if (a.size() != b.size()) return false;
  if (a.empty()) return true;
  std::function<bool(NodeIndex, NodeIndex)> same = [&](NodeIndex u, NodeIndex v) {
    const auto& cu = a.node(u).children;
    const auto& cv = b.node(v).children;
    if (cu.size() != cv.size()) return false;
    if (a.node(u).inherent.size != b.node(v).inherent.size) return false;
    std::vector<std::size_t> perm(cv.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    do {
      bool ok = true;
      for (std::size_t i = 0; i < cu.size() && ok; ++i) ok = same(cu[i], cv[perm[i]]);
      if (ok) return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
  };
  return same(0, 0);
}

}  // namespace tqtest

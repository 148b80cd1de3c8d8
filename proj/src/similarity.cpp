#include "treequery/similarity.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace treequery {

std::string topology_key(const MultiTree& tree) {
  if (tree.empty()) return {};
  std::vector<std::string> keys(tree.size());
  for (NodeIndex i = static_cast<NodeIndex>(tree.size()); i-- > 0;) {
    std::vector<std::string*> parts;
    for (NodeIndex c : tree.node(i).children) parts.push_back(&keys[c]);
    std::sort(parts.begin(), parts.end(),
              [](const std::string* a, const std::string* b) { return *a < *b; });
    std::string key = "(";
    for (auto* p : parts) key += *p;
    key += ")";
    keys[i] = std::move(key);
  }
  return keys[0];
}

namespace {

struct PostOrder {
  std::vector<int> leftmost;  // 1-based postorder index of the leftmost leaf, per node
  std::vector<int> keyroots;  // ascending
};

PostOrder postorder(const MultiTree& tree) {
  PostOrder out;
  const int n = static_cast<int>(tree.size());
  out.leftmost.assign(n + 1, 0);
  std::vector<int> number(tree.size(), 0);
  int next = 0;
  // Children of a pre-order node occupy [i+1, i+size); visit them before i.
  std::vector<std::pair<NodeIndex, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto& [node, child] = stack.back();
    const auto& children = tree.node(node).children;
    if (child < children.size()) {
      NodeIndex c = children[child++];
      stack.push_back({c, 0});
      continue;
    }
    number[node] = ++next;
    out.leftmost[next] = children.empty() ? next : out.leftmost[number[children.front()]];
    stack.pop_back();
  }
  std::map<int, int> highest;  // leftmost leaf -> highest node sharing it
  for (int i = 1; i <= n; ++i) highest[out.leftmost[i]] = i;
  for (const auto& [leaf, node] : highest) out.keyroots.push_back(node);
  std::sort(out.keyroots.begin(), out.keyroots.end());
  return out;
}

}  // namespace

int tree_edit_distance(const MultiTree& a, const MultiTree& b, std::size_t size_bound) {
  for (const MultiTree* t : {&a, &b}) {
    if (t->size() > size_bound) {
      throw Error(ErrorCode::SizeBoundExceeded,
                  "tree '" + t->tree_id() + "' has " + std::to_string(t->size()) +
                      " nodes; edit distance bound is " + std::to_string(size_bound));
    }
  }
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  if (n == 0 || m == 0) return n + m;
  PostOrder pa = postorder(a);
  PostOrder pb = postorder(b);
  const auto& l1 = pa.leftmost;
  const auto& l2 = pb.leftmost;

  std::vector<std::vector<int>> td(n + 1, std::vector<int>(m + 1, 0));
  std::vector<std::vector<int>> fd(n + 1, std::vector<int>(m + 1, 0));
  for (int i : pa.keyroots) {
    for (int j : pb.keyroots) {
      const int li = l1[i];
      const int lj = l2[j];
      fd[li - 1][lj - 1] = 0;
      for (int x = li; x <= i; ++x) fd[x][lj - 1] = fd[x - 1][lj - 1] + 1;
      for (int y = lj; y <= j; ++y) fd[li - 1][y] = fd[li - 1][y - 1] + 1;
      for (int x = li; x <= i; ++x) {
        for (int y = lj; y <= j; ++y) {
          int drop = std::min(fd[x - 1][y], fd[x][y - 1]) + 1;
          if (l1[x] == li && l2[y] == lj) {
            fd[x][y] = std::min(drop, fd[x - 1][y - 1]);
            td[x][y] = fd[x][y];
          } else {
            fd[x][y] = std::min(drop, fd[l1[x] - 1][l2[y] - 1] + td[x][y]);
          }
        }
      }
    }
  }
  return td[n][m];
}

std::vector<double> features(const MultiTree& tree) {
  std::vector<double> f(kFeatureLength, 0.0);
  if (tree.empty()) return f;
  const auto& root = tree.node(tree.root()).inherent;
  int leaves = 0;
  int internal = 0;
  for (const auto& node : tree.nodes()) {
    const auto& in = node.inherent;
    (in.degree == 0 ? leaves : internal) += 1;
    if (in.depth <= kFeatureLevels) f[5 + in.depth - 1] += 1;
    f[5 + kFeatureLevels + std::min(in.degree, kFeatureDegrees)] += 1;
  }
  f[0] = static_cast<double>(tree.size());
  f[1] = root.height;
  f[2] = root.width;
  f[3] = leaves;
  f[4] = internal == 0 ? 0.0 : static_cast<double>(tree.size() - 1) / internal;
  return f;
}

std::vector<TopologyGroup> topology_groups(const Corpus& corpus) {
  std::vector<TopologyGroup> groups;
  std::map<std::string, std::size_t> index;
  for (std::size_t t = 0; t < corpus.trees.size(); ++t) {
    std::string key = topology_key(corpus.trees[t]);
    auto [it, fresh] = index.emplace(key, groups.size());
    if (fresh) groups.push_back(TopologyGroup{key, {}, t});
    groups[it->second].member_tree_ids.push_back(corpus.trees[t].tree_id());
  }
  return groups;
}

namespace {

/// Row-stochastic affinities whose entropy matches log(perplexity).
std::vector<double> affinities(const std::vector<double>& d2, std::size_t n, double perplexity) {
  std::vector<double> p(n * n, 0.0);
  const double target = std::log(perplexity);
  for (std::size_t i = 0; i < n; ++i) {
    double beta = 1.0;
    double lo = -HUGE_VAL;
    double hi = HUGE_VAL;
    for (int attempt = 0; attempt < 200; ++attempt) {
      double sum = 0.0;
      double weighted = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        double v = std::exp(-d2[i * n + j] * beta);
        p[i * n + j] = v;
        sum += v;
        weighted += d2[i * n + j] * v;
      }
      if (sum <= 0.0) sum = 1e-300;
      double entropy = std::log(sum) + beta * weighted / sum;
      for (std::size_t j = 0; j < n; ++j) p[i * n + j] /= sum;
      double diff = entropy - target;
      if (std::abs(diff) < 1e-5) break;
      if (diff > 0) {
        lo = beta;
        beta = hi == HUGE_VAL ? beta * 2 : (beta + hi) / 2;
      } else {
        hi = beta;
        beta = lo == -HUGE_VAL ? beta / 2 : (beta + lo) / 2;
      }
    }
  }
  return p;
}

}  // namespace

std::vector<std::pair<double, double>> tsne_embed(const std::vector<std::vector<double>>& rows,
                                                  std::uint64_t seed,
                                                  const TsneOptions& options) {
  const std::size_t n = rows.size();
  std::vector<std::pair<double, double>> out(n, {0.0, 0.0});
  if (n < 2) return out;

  std::vector<double> d2(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < rows[i].size(); ++k) {
        double d = rows[i][k] - rows[j][k];
        s += d * d;
      }
      d2[i * n + j] = d2[j * n + i] = s;
    }
  }
  double perplexity = std::max(1.0, std::min(options.max_perplexity, n / 4.0));
  std::vector<double> cond = affinities(d2, n, perplexity);
  std::vector<double> p(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) p[i * n + j] = std::max((cond[i * n + j] + cond[j * n + i]) / (2.0 * n), 1e-12);
    }
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1e-4);
  std::vector<double> y(2 * n);
  for (auto& v : y) v = normal(rng);
  std::vector<double> update(2 * n, 0.0);
  std::vector<double> gains(2 * n, 1.0);
  std::vector<double> grad(2 * n);
  std::vector<double> num(n * n);

  for (int iter = 0; iter < options.iterations; ++iter) {
    const double exaggeration = iter < options.exaggeration_iterations ? options.exaggeration : 1.0;
    const double momentum = iter < options.momentum_switch ? 0.5 : 0.8;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num[i * n + i] = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        double dx = y[2 * i] - y[2 * j];
        double dy = y[2 * i + 1] - y[2 * j + 1];
        double v = 1.0 / (1.0 + dx * dx + dy * dy);
        num[i * n + j] = num[j * n + i] = v;
        total += 2.0 * v;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      double gx = 0.0;
      double gy = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        double q = std::max(num[i * n + j] / total, 1e-12);
        double mult = (exaggeration * p[i * n + j] - q) * num[i * n + j];
        gx += mult * (y[2 * i] - y[2 * j]);
        gy += mult * (y[2 * i + 1] - y[2 * j + 1]);
      }
      grad[2 * i] = 4.0 * gx;
      grad[2 * i + 1] = 4.0 * gy;
    }
    for (std::size_t k = 0; k < 2 * n; ++k) {
      bool same_sign = (grad[k] > 0) == (update[k] > 0);
      gains[k] = same_sign ? std::max(gains[k] * 0.8, 0.01) : gains[k] + 0.2;
      update[k] = momentum * update[k] - options.learning_rate * gains[k] * grad[k];
      y[k] += update[k];
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += y[2 * i];
      my += y[2 * i + 1];
    }
    mx /= n;
    my /= n;
    for (std::size_t i = 0; i < n; ++i) {
      y[2 * i] -= mx;
      y[2 * i + 1] -= my;
    }
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = {y[2 * i], y[2 * i + 1]};
  return out;
}

std::vector<std::pair<double, double>> pca_embed(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  std::vector<std::pair<double, double>> out(n, {0.0, 0.0});
  if (n < 2 || rows.front().empty()) return out;
  const std::size_t d = rows.front().size();
  Eigen::MatrixXd x(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) x(i, k) = rows[i][k];
  }
  x.rowwise() -= x.colwise().mean();
  Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  Eigen::MatrixXd axes(d, 2);
  for (int c = 0; c < 2; ++c) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
    if (d > static_cast<std::size_t>(c)) v = solver.eigenvectors().col(d - 1 - c);
    Eigen::Index pivot = 0;
    v.cwiseAbs().maxCoeff(&pivot);
    if (v(pivot) < 0) v = -v;
    axes.col(c) = v;
  }
  Eigen::MatrixXd proj = x * axes;
  for (std::size_t i = 0; i < n; ++i) out[i] = {proj(i, 0), proj(i, 1)};
  return out;
}

std::vector<ProjectionPoint> project(const Corpus& corpus, ProjectionMethod method,
                                     std::uint64_t seed, const TsneOptions& tsne) {
  auto groups = topology_groups(corpus);
  std::vector<ProjectionPoint> points;
  for (auto& g : groups) points.push_back(ProjectionPoint{g.key, 0.0, 0.0, g.member_tree_ids});
  if (points.size() == 2) {
    points[0].x = -1.0;
    points[1].x = 1.0;
  }
  if (points.size() < 3) return points;

  std::vector<std::vector<double>> rows;
  for (const auto& g : groups) rows.push_back(features(corpus.trees[g.representative]));
  for (std::size_t k = 0; k < kFeatureLength; ++k) {
    double lo = rows[0][k];
    double hi = rows[0][k];
    for (const auto& r : rows) {
      lo = std::min(lo, r[k]);
      hi = std::max(hi, r[k]);
    }
    for (auto& r : rows) r[k] = hi > lo ? (r[k] - lo) / (hi - lo) : 0.0;
  }
  auto coords = method == ProjectionMethod::TSNE ? tsne_embed(rows, seed, tsne) : pca_embed(rows);
  for (std::size_t i = 0; i < points.size(); ++i) {
    points[i].x = coords[i].first;
    points[i].y = coords[i].second;
  }
  return points;
}

}  // namespace treequery

#include "heatgait/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "heatgait/errors.hpp"
#include "json.hpp"

namespace heatgait {

SkeletonGraph make_graph(int num_vertices,
                         std::vector<std::pair<int, int>> edges) {
  if (num_vertices < 0) {
    throw std::invalid_argument("make_graph: negative vertex count");
  }
  SkeletonGraph g;
  g.num_vertices = num_vertices;
  g.adjacency.assign(num_vertices, std::vector<int>(num_vertices, 0));
  for (const auto& [i, j] : edges) {
    if (i < 0 || j < 0 || i >= num_vertices || j >= num_vertices || i == j) {
      std::ostringstream msg;
      msg << "make_graph: invalid edge (" << i << ", " << j << ") for M="
          << num_vertices;
      throw std::invalid_argument(msg.str());
    }
    g.adjacency[i][j] = 1;
    g.adjacency[j][i] = 1;
  }
  g.edges = std::move(edges);
  return g;
}

SkeletonGraph path_graph(int num_vertices) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < num_vertices; ++i) edges.emplace_back(i, i + 1);
  return make_graph(num_vertices, std::move(edges));
}

SkeletonGraph coco17_skeleton() {
  using namespace coco;
  return make_graph(kNumJoints,
                    {{kLeftAnkle, kLeftKnee},
                     {kLeftKnee, kLeftHip},
                     {kRightAnkle, kRightKnee},
                     {kRightKnee, kRightHip},
                     {kLeftHip, kRightHip},
                     {kLeftShoulder, kLeftHip},
                     {kRightShoulder, kRightHip},
                     {kLeftShoulder, kRightShoulder},
                     {kLeftShoulder, kLeftElbow},
                     {kRightShoulder, kRightElbow},
                     {kLeftElbow, kLeftWrist},
                     {kRightElbow, kRightWrist},
                     {kLeftEye, kRightEye},
                     {kNose, kLeftEye},
                     {kNose, kRightEye},
                     {kLeftEye, kLeftEar},
                     {kRightEye, kRightEar},
                     {kLeftEar, kLeftShoulder},
                     {kRightEar, kRightShoulder}});
}

HopDistanceMatrix hop_distances(const SkeletonGraph& graph) {
  const int n = graph.num_vertices;
  HopDistanceMatrix out;
  out.dist.assign(n, std::vector<std::optional<int>>(n));
  for (int src = 0; src < n; ++src) {
    out.dist[src][src] = 0;
    std::queue<int> frontier;
    frontier.push(src);
    while (!frontier.empty()) {
      const int u = frontier.front();
      frontier.pop();
      for (int v = 0; v < n; ++v) {
        if (graph.adjacency[u][v] && !out.dist[src][v].has_value()) {
          out.dist[src][v] = *out.dist[src][u] + 1;
          frontier.push(v);
        }
      }
    }
  }
  return out;
}

BinaryMatrix k_adjacency(const SkeletonGraph& graph, int k) {
  if (k < 0) throw std::invalid_argument("k_adjacency: k must be >= 0");
  const int n = graph.num_vertices;
  const HopDistanceMatrix hops = hop_distances(graph);
  BinaryMatrix out(n, std::vector<int>(n, 0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || (hops.dist[i][j].has_value() && *hops.dist[i][j] == k)) {
        out[i][j] = 1;
      }
    }
  }
  return out;
}

HopAdjacencySet hop_adjacency_set(const SkeletonGraph& graph, int max_scale) {
  if (max_scale < 0) {
    throw std::invalid_argument("hop_adjacency_set: max_scale must be >= 0");
  }
  HopAdjacencySet set;
  set.max_scale = max_scale;
  set.matrices.reserve(max_scale + 1);
  for (int k = 0; k <= max_scale; ++k) {
    set.matrices.push_back(k_adjacency(graph, k));
  }
  return set;
}

DenseMatrix sym_normalize(const DenseMatrix& m) {
  const int n = static_cast<int>(m.size());
  std::vector<double> inv_sqrt_deg(n);
  for (int i = 0; i < n; ++i) {
    double deg = 0.0;
    for (int j = 0; j < n; ++j) deg += m[i][j];
    if (deg <= 0.0) {
      throw ZeroDegreeError("sym_normalize: row " + std::to_string(i) +
                            " has zero degree");
    }
    inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
  }
  DenseMatrix out(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out[i][j] = inv_sqrt_deg[i] * m[i][j] * inv_sqrt_deg[j];
    }
  }
  return out;
}

DenseMatrix sym_normalize(const BinaryMatrix& m) {
  DenseMatrix dense(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    dense[i].assign(m[i].begin(), m[i].end());
  }
  return sym_normalize(dense);
}

DenseMatrix dense_identity(int n) {
  DenseMatrix out(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) out[i][i] = 1.0;
  return out;
}

DenseMatrix dense_matmul(const DenseMatrix& a, const DenseMatrix& b) {
  const int n = static_cast<int>(a.size());
  const int m = n == 0 ? 0 : static_cast<int>(b[0].size());
  const int inner = static_cast<int>(b.size());
  DenseMatrix out(n, std::vector<double>(m, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < inner; ++k) {
      const double aik = a[i][k];
      if (aik == 0.0) continue;
      for (int j = 0; j < m; ++j) out[i][j] += aik * b[k][j];
    }
  }
  return out;
}

DenseMatrix polynomial_adjacency(const SkeletonGraph& graph, int k) {
  if (k < 0) {
    throw std::invalid_argument("polynomial_adjacency: k must be >= 0");
  }
  const int n = graph.num_vertices;
  DenseMatrix base(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) base[i][j] = graph.adjacency[i][j];
    base[i][i] = 1.0;  // self-loops
  }
  base = sym_normalize(base);

  DenseMatrix result = dense_identity(n);
  while (k > 0) {
    if (k & 1) result = dense_matmul(result, base);
    base = dense_matmul(base, base);
    k >>= 1;
  }
  return result;
}

int graph_diameter(const SkeletonGraph& graph) {
  const HopDistanceMatrix hops = hop_distances(graph);
  int diameter = 0;
  for (int i = 0; i < graph.num_vertices; ++i) {
    for (int j = 0; j < graph.num_vertices; ++j) {
      if (!hops.reachable(i, j)) {
        throw DisconnectedGraphError("graph_diameter: disconnected graph");
      }
      diameter = std::max(diameter, *hops.dist[i][j]);
    }
  }
  return diameter;
}

namespace {

double mean_at_distance(const DenseMatrix& op,
                        const HopDistanceMatrix& hops, int center, int d) {
  double sum = 0.0;
  int count = 0;
  for (int j = 0; j < static_cast<int>(op.size()); ++j) {
    if (j == center) continue;
    if (hops.dist[center][j].has_value() && *hops.dist[center][j] == d) {
      sum += op[center][j];
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / count;
}

}  // namespace

BiasReport bias_report(const SkeletonGraph& graph, int max_scale) {
  if (max_scale < 2) {
    throw std::invalid_argument("bias_report: max_scale must be >= 2");
  }
  const int n = graph.num_vertices;
  const HopDistanceMatrix hops = hop_distances(graph);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!hops.reachable(i, j)) {
        throw DisconnectedGraphError("bias_report: disconnected graph");
      }
    }
  }

  BiasReport report;
  for (int k = 2; k <= max_scale; ++k) {
    const DenseMatrix poly = polynomial_adjacency(graph, k);
    const DenseMatrix hop = sym_normalize(k_adjacency(graph, k));
    for (int center = 0; center < n; ++center) {
      BiasReport::Row row;
      row.center = center;
      row.scale = k;
      row.poly_mean_d1 = mean_at_distance(poly, hops, center, 1);
      row.poly_mean_dk = mean_at_distance(poly, hops, center, k);
      row.hop_mean_d1 = mean_at_distance(hop, hops, center, 1);
      row.hop_mean_dk = mean_at_distance(hop, hops, center, k);
      report.rows.push_back(row);
    }
  }
  std::sort(report.rows.begin(), report.rows.end(),
            [](const BiasReport::Row& a, const BiasReport::Row& b) {
              return a.center != b.center ? a.center < b.center
                                          : a.scale < b.scale;
            });
  return report;
}

std::string BiasReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const Row& row : rows) {
    arr.push_back({{"center", row.center},
                   {"scale", row.scale},
                   {"poly_mean_d1", row.poly_mean_d1},
                   {"poly_mean_dk", row.poly_mean_dk},
                   {"hop_mean_d1", row.hop_mean_d1},
                   {"hop_mean_dk", row.hop_mean_dk}});
  }
  return arr.dump(2);
}

std::string BiasReport::to_table() const {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%6s %5s %14s %14s %14s %14s\n", "center",
                "k", "poly_mean_d1", "poly_mean_dk", "hop_mean_d1",
                "hop_mean_dk");
  out << line;
  for (const Row& row : rows) {
    std::snprintf(line, sizeof(line), "%6d %5d %14.6f %14.6f %14.6f %14.6f\n",
                  row.center, row.scale, row.poly_mean_d1, row.poly_mean_dk,
                  row.hop_mean_d1, row.hop_mean_dk);
    out << line;
  }
  return out.str();
}

}  // namespace heatgait

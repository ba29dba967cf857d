#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace heatgait {

using BinaryMatrix = std::vector<std::vector<int>>;
using DenseMatrix = std::vector<std::vector<double>>;

// Undirected body graph: vertices are joints, edges are bones.
// adjacency is symmetric, binary, zero on the diagonal.
struct SkeletonGraph {
  int num_vertices = 0;
  std::vector<std::pair<int, int>> edges;
  BinaryMatrix adjacency;
};

// Validates edges (0 <= i,j < M, i != j) and builds the adjacency matrix.
SkeletonGraph make_graph(int num_vertices,
                         std::vector<std::pair<int, int>> edges);

// Convenience builders used throughout the tests and diagnostics.
SkeletonGraph path_graph(int num_vertices);
SkeletonGraph coco17_skeleton();

namespace coco {

inline constexpr int kNumJoints = 17;

enum JointId : int {
  kNose = 0,
  kLeftEye = 1,
  kRightEye = 2,
  kLeftEar = 3,
  kRightEar = 4,
  kLeftShoulder = 5,
  kRightShoulder = 6,
  kLeftElbow = 7,
  kRightElbow = 8,
  kLeftWrist = 9,
  kRightWrist = 10,
  kLeftHip = 11,
  kRightHip = 12,
  kLeftKnee = 13,
  kRightKnee = 14,
  kLeftAnkle = 15,
  kRightAnkle = 16,
};

// (left, right) joint index pairs, used when mirroring relabels sides.
inline constexpr std::array<std::pair<int, int>, 8> kLeftRightPairs = {{
    {kLeftEye, kRightEye},
    {kLeftEar, kRightEar},
    {kLeftShoulder, kRightShoulder},
    {kLeftElbow, kRightElbow},
    {kLeftWrist, kRightWrist},
    {kLeftHip, kRightHip},
    {kLeftKnee, kRightKnee},
    {kLeftAnkle, kRightAnkle},
}};

}  // namespace coco

// All-pairs hop distances. nullopt marks unreachable pairs; no magic
// large integers anywhere.
struct HopDistanceMatrix {
  std::vector<std::vector<std::optional<int>>> dist;

  int size() const { return static_cast<int>(dist.size()); }
  bool reachable(int i, int j) const { return dist[i][j].has_value(); }
};

// BFS from every vertex.
HopDistanceMatrix hop_distances(const SkeletonGraph& graph);

// Binary matrix with entry 1 iff hop distance is exactly k or i == j.
// Unreachable pairs match no finite k.
BinaryMatrix k_adjacency(const SkeletonGraph& graph, int k);

// The ordered stack [A_(0) .. A_(K)]; A_(0) is the identity.
struct HopAdjacencySet {
  std::vector<BinaryMatrix> matrices;
  int max_scale = 0;
};

HopAdjacencySet hop_adjacency_set(const SkeletonGraph& graph, int max_scale);

// D^(-1/2) M D^(-1/2) with D the diagonal row-sum matrix of M itself.
// Throws ZeroDegreeError when a row sums to zero.
DenseMatrix sym_normalize(const DenseMatrix& m);
DenseMatrix sym_normalize(const BinaryMatrix& m);

// k-th power of the normalized self-loop adjacency, by repeated squaring.
DenseMatrix polynomial_adjacency(const SkeletonGraph& graph, int k);

// Largest finite hop distance; requires a connected graph.
int graph_diameter(const SkeletonGraph& graph);

// Dense matrix helpers shared with the tests.
DenseMatrix dense_identity(int n);
DenseMatrix dense_matmul(const DenseMatrix& a, const DenseMatrix& b);

// Quantifies the weighting bias of polynomial aggregation against the
// hop-extracted alternative. One row per (center vertex, scale k in 2..K):
// the mean operator entry from the center to its 1-hop neighbors vs. to its
// k-hop neighbors, for both operators. Means over empty neighbor sets are
// reported as 0.
struct BiasReport {
  struct Row {
    int center = 0;
    int scale = 0;
    double poly_mean_d1 = 0.0;
    double poly_mean_dk = 0.0;
    double hop_mean_d1 = 0.0;
    double hop_mean_dk = 0.0;
  };
  std::vector<Row> rows;

  std::string to_json() const;
  std::string to_table() const;
};

// Throws DisconnectedGraphError when any pair is unreachable.
BiasReport bias_report(const SkeletonGraph& graph, int max_scale);

}  // namespace heatgait

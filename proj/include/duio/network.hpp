#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "duio/linalg.hpp"

namespace duio {

// Undirected weighted communication graph, nodes 0..M-1.
class SensorGraph {
public:
    explicit SensorGraph(Matrix adjacency);

    int M() const { return static_cast<int>(adjacency_.rows()); }
    const Matrix& adjacency() const { return adjacency_; }
    double weight(int i, int j) const { return adjacency_(i, j); }

private:
    Matrix adjacency_;
};

struct WeightedEdge {
    int a = 0;
    int b = 0;
    double weight = 1.0;
};

SensorGraph graph_from_edges(int M, const std::vector<WeightedEdge>& edges);
SensorGraph ring_graph(int M);
SensorGraph complete_graph(int M);
SensorGraph star_graph(int M);  // hub is node 0
SensorGraph path_graph(int M);
SensorGraph named_graph(const std::string& generator, int M);

// Random connected graph: a random spanning tree plus each remaining edge with
// probability `extra_edge_probability`, weights uniform in [w_min, w_max].
SensorGraph random_connected_graph(int M, double extra_edge_probability, std::uint64_t seed,
                                   double w_min = 0.5, double w_max = 2.0);

struct LaplacianBundle {
    Matrix laplacian;
    Matrix degree;
    Matrix reduced;  // laplacian with row/column `removed` deleted
    int removed = 0;
    double lambda_min_reduced = 0.0;  // +inf when M == 1
    Vector spectrum;                  // ascending eigenvalues of the laplacian
};

inline constexpr double kConnectivityTolerance = 1e-9;

// Throws ConnectivityError when the graph is disconnected.
LaplacianBundle build_laplacian(const SensorGraph& graph, int removed = 0);

// Same bundle without the connectivity precondition; used to examine
// counterexamples.
LaplacianBundle build_laplacian_unchecked(const SensorGraph& graph, int removed = 0);

struct ReducedHurwitzCertificate {
    bool holds = false;
    double lambda_min = 0.0;
};

// -reduced Laplacian Hurwitz, i.e. the reduced Laplacian is positive definite.
ReducedHurwitzCertificate check_reduced_hurwitz(const LaplacianBundle& bundle);

}  // namespace duio

#include "duio/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "duio/errors.hpp"
#include "duio/signals.hpp"

namespace duio {

SensorGraph::SensorGraph(Matrix adjacency) : adjacency_(std::move(adjacency)) {
    if (adjacency_.rows() != adjacency_.cols() || adjacency_.rows() < 1) {
        throw GraphError("adjacency must be a non-empty square matrix");
    }
    if (!adjacency_.allFinite()) {
        throw GraphError("adjacency has non-finite entries");
    }
    const double scale = std::max(1.0, adjacency_.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < adjacency_.rows(); ++i) {
        if (adjacency_(i, i) != 0.0) {
            throw GraphError("adjacency must have a zero diagonal");
        }
        for (Eigen::Index j = 0; j < adjacency_.cols(); ++j) {
            if (adjacency_(i, j) < 0.0) {
                throw GraphError("adjacency weights must be nonnegative");
            }
            if (std::abs(adjacency_(i, j) - adjacency_(j, i)) > 1e-12 * scale) {
                throw GraphError("adjacency must be symmetric (undirected graph)");
            }
        }
    }
}

SensorGraph graph_from_edges(int M, const std::vector<WeightedEdge>& edges) {
    if (M < 1) {
        throw GraphError("graph needs at least one node");
    }
    Matrix a = Matrix::Zero(M, M);
    for (const auto& e : edges) {
        if (e.a < 0 || e.a >= M || e.b < 0 || e.b >= M) {
            throw GraphError("edge endpoint out of range");
        }
        if (e.a == e.b) {
            throw GraphError("self loops are not allowed");
        }
        a(e.a, e.b) = e.weight;
        a(e.b, e.a) = e.weight;
    }
    return SensorGraph(std::move(a));
}

SensorGraph ring_graph(int M) {
    std::vector<WeightedEdge> edges;
    if (M == 2) {
        edges.push_back({0, 1, 1.0});
    } else if (M > 2) {
        for (int i = 0; i < M; ++i) {
            edges.push_back({i, (i + 1) % M, 1.0});
        }
    }
    return graph_from_edges(M, edges);
}

SensorGraph complete_graph(int M) {
    std::vector<WeightedEdge> edges;
    for (int i = 0; i < M; ++i) {
        for (int j = i + 1; j < M; ++j) {
            edges.push_back({i, j, 1.0});
        }
    }
    return graph_from_edges(M, edges);
}

SensorGraph star_graph(int M) {
    std::vector<WeightedEdge> edges;
    for (int i = 1; i < M; ++i) {
        edges.push_back({0, i, 1.0});
    }
    return graph_from_edges(M, edges);
}

SensorGraph path_graph(int M) {
    std::vector<WeightedEdge> edges;
    for (int i = 0; i + 1 < M; ++i) {
        edges.push_back({i, i + 1, 1.0});
    }
    return graph_from_edges(M, edges);
}

SensorGraph named_graph(const std::string& generator, int M) {
    if (generator == "ring") {
        return ring_graph(M);
    }
    if (generator == "complete") {
        return complete_graph(M);
    }
    if (generator == "star") {
        return star_graph(M);
    }
    if (generator == "path") {
        return path_graph(M);
    }
    throw GraphError("unknown graph generator '" + generator + "'");
}

SensorGraph random_connected_graph(int M, double extra_edge_probability, std::uint64_t seed, double w_min,
                                   double w_max) {
    std::uint64_t counter = 0;
    auto next = [&]() { return uniform_from_bits(mix_seed(seed ^ mix_seed(++counter))); };
    auto weight = [&]() { return w_min + (w_max - w_min) * next(); };

    std::vector<int> order(static_cast<std::size_t>(M));
    std::iota(order.begin(), order.end(), 0);
    for (int k = M - 1; k > 0; --k) {
        const int j = std::min(k, static_cast<int>(next() * (k + 1)));
        std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(j)]);
    }
    Matrix a = Matrix::Zero(M, M);
    for (int k = 1; k < M; ++k) {
        const int parent = order[static_cast<std::size_t>(std::min(k - 1, static_cast<int>(next() * k)))];
        const int child = order[static_cast<std::size_t>(k)];
        a(parent, child) = a(child, parent) = weight();
    }
    for (int i = 0; i < M; ++i) {
        for (int j = i + 1; j < M; ++j) {
            if (a(i, j) == 0.0 && next() < extra_edge_probability) {
                a(i, j) = a(j, i) = weight();
            }
        }
    }
    return SensorGraph(std::move(a));
}

LaplacianBundle build_laplacian_unchecked(const SensorGraph& graph, int removed) {
    const int M = graph.M();
    if (removed < 0 || removed >= M) {
        throw IndexError("removed node out of range");
    }
    LaplacianBundle b;
    b.removed = removed;
    b.degree = graph.adjacency().rowwise().sum().asDiagonal();
    b.laplacian = b.degree - graph.adjacency();

    Eigen::SelfAdjointEigenSolver<Matrix> full(b.laplacian, Eigen::EigenvaluesOnly);
    b.spectrum = full.eigenvalues();

    b.reduced.resize(M - 1, M - 1);
    for (int i = 0, ri = 0; i < M; ++i) {
        if (i == removed) {
            continue;
        }
        for (int j = 0, rj = 0; j < M; ++j) {
            if (j == removed) {
                continue;
            }
            b.reduced(ri, rj) = b.laplacian(i, j);
            ++rj;
        }
        ++ri;
    }
    if (M == 1) {
        b.lambda_min_reduced = std::numeric_limits<double>::infinity();
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> red(b.reduced, Eigen::EigenvaluesOnly);
        b.lambda_min_reduced = red.eigenvalues()(0);
    }
    return b;
}

LaplacianBundle build_laplacian(const SensorGraph& graph, int removed) {
    LaplacianBundle b = build_laplacian_unchecked(graph, removed);
    if (graph.M() > 1 && !(b.spectrum(1) > kConnectivityTolerance)) {
        throw ConnectivityError("communication graph is not connected (second smallest Laplacian eigenvalue " +
                                std::to_string(b.spectrum(1)) + ")");
    }
    return b;
}

ReducedHurwitzCertificate check_reduced_hurwitz(const LaplacianBundle& bundle) {
    ReducedHurwitzCertificate cert;
    cert.lambda_min = bundle.lambda_min_reduced;
    cert.holds = bundle.lambda_min_reduced > kConnectivityTolerance;
    return cert;
}

}  // namespace duio

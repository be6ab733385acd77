#include "duio/design_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "duio/errors.hpp"
#include "duio/riccati.hpp"

namespace duio {

std::vector<NodeModel> node_models(const PlantModel& model) {
    std::vector<NodeModel> out;
    out.reserve(static_cast<std::size_t>(model.M()));
    for (const NodeView& v : model.nodes()) {
        out.push_back({model.A(), v.B_m, v.B_p, v.C});
    }
    return out;
}

bool check_rank_condition(const NodeModel& node, const RankPolicy& policy) {
    const int r = static_cast<int>(node.B_p.cols());
    if (r == 0) {
        return true;
    }
    if (numerical_rank(node.B_p, policy) != r || node.C.rows() == 0) {
        return false;
    }
    auto norm2 = [](const Matrix& m) { return Eigen::JacobiSVD<Matrix>(m).singularValues()(0); };
    const double scale = norm2(node.C) * norm2(node.B_p);
    return numerical_rank_scaled(node.C * node.B_p, scale, policy) == r;
}

bool check_rank_condition(const PlantModel& model, int i, const RankPolicy& policy) {
    model.node(i);
    return check_rank_condition(node_models(model)[static_cast<std::size_t>(i)], policy);
}

Matrix parametrize_H(const NodeModel& node, const std::optional<Matrix>& y_free, const RankPolicy& policy) {
    if (!check_rank_condition(node, policy)) {
        throw SolvabilityError("rank(C B_p) != rank(B_p): no H with H C B_p = B_p exists");
    }
    const Eigen::Index n_x = node.A.rows();
    const Eigen::Index n_y = node.C.rows();
    const Matrix cb = node.C * node.B_p;
    const Matrix cb_pinv = pinv(cb, policy);
    Matrix H = node.B_p * cb_pinv;
    if (y_free) {
        if (y_free->rows() != n_x || y_free->cols() != n_y) {
            throw DimensionError("free parameter must be n_x x n_y");
        }
        H += *y_free * (Matrix::Identity(n_y, n_y) - cb * cb_pinv);
    }
    return H;
}

Matrix parametrize_H(const PlantModel& model, int i, const std::optional<Matrix>& y_free, const RankPolicy& policy) {
    model.node(i);
    return parametrize_H(node_models(model)[static_cast<std::size_t>(i)], y_free, policy);
}

DesignBlocks model_design_blocks(const NodeModel& node, const RankPolicy& policy) {
    const Matrix H = parametrize_H(node, std::nullopt, policy);
    const Matrix P = Matrix::Identity(node.A.rows(), node.A.rows()) - H * node.C;
    return {P * node.B_m, H, P * node.A, node.C};
}

PbhReport check_detectability(const NodeModel& node, const PbhOptions& pbh, const RankPolicy& policy) {
    const DesignBlocks b = model_design_blocks(node, policy);
    return pbh_detectability(b.T_x, b.C, pbh);
}

PbhReport check_detectability(const PlantModel& model, int i, const PbhOptions& pbh, const RankPolicy& policy) {
    model.node(i);
    return check_detectability(node_models(model)[static_cast<std::size_t>(i)], pbh, policy);
}

LeaderInjection design_leader_injection(const Matrix& T_x, const Matrix& C, double decay, const PbhOptions& pbh) {
    const Eigen::Index n = T_x.rows();
    if (T_x.cols() != n || C.cols() != n) {
        throw DimensionError("leader injection: T_x must be square and C must have n_x columns");
    }
    if (!(decay > 0.0)) {
        throw DesignError("leader injection: decay must be positive");
    }
    if (!pbh_detectability(T_x, C, pbh).detectable) {
        throw DesignError("leader pair (T_x, C) is not detectable");
    }

    // Unobservable stable modes slower than the requested decay cap the
    // achievable rate.
    double used = decay;
    const Matrix I = Matrix::Identity(n, n);
    const PbhReport shifted = pbh_detectability(T_x + used * I, C, pbh);
    for (const PbhPoint& p : shifted.tested) {
        if (!p.full_rank) {
            const double re = p.lambda.real() - decay;
            used = std::min(used, -0.5 * re);
        }
    }

    const Matrix A_s = T_x + used * I;
    const CareSolution care = solve_care(A_s.transpose(), C.transpose(), I);
    LeaderInjection out;
    out.M1 = care.X * C.transpose();
    out.decay_used = used;
    out.abscissa = spectral_abscissa(T_x - out.M1 * C);
    if (!(out.abscissa <= -used + 1e-9 * std::max(1.0, T_x.norm()))) {
        throw NumericsError("leader injection did not reach the prescribed decay");
    }
    return out;
}

GammaBound gamma_bound(const std::vector<Matrix>& follower_E, const LaplacianBundle& bundle) {
    GammaBound g;
    g.lambda_min = bundle.lambda_min_reduced;
    if (follower_E.empty()) {
        return g;
    }
    const Matrix Et = block_diagonal(follower_E);
    g.symmetric_norm = symmetric_spectral_norm(Et + Et.transpose());
    // lambda_min(reduced kron I) == lambda_min(reduced)
    g.bound = g.symmetric_norm / (2.0 * g.lambda_min);
    return g;
}

double choose_gamma(const GammaBound& bound, double margin, const std::optional<double>& override_gamma) {
    if (override_gamma) {
        return *override_gamma;
    }
    const double g = bound.bound * (1.0 + margin);
    // The bound is strict; a zero bound still needs a positive gain.
    return g > 0.0 ? g : std::max(margin, std::numeric_limits<double>::min());
}

Matrix coupled_error_matrix(const std::vector<Matrix>& E, const std::vector<Matrix>& K, const Matrix& laplacian) {
    const auto M = static_cast<Eigen::Index>(E.size());
    if (M == 0) {
        return Matrix(0, 0);
    }
    const Eigen::Index n = E.front().rows();
    if (static_cast<Eigen::Index>(K.size()) != M || laplacian.rows() != M || laplacian.cols() != M) {
        throw DimensionError("coupled error matrix: inconsistent node counts");
    }
    Matrix out = block_diagonal(E);
    for (Eigen::Index i = 0; i < M; ++i) {
        const Matrix& Ki = K[static_cast<std::size_t>(i)];
        if (Ki.size() == 0) {
            continue;
        }
        for (Eigen::Index j = 0; j < M; ++j) {
            if (laplacian(i, j) != 0.0) {
                out.block(i * n, j * n, n, n) -= laplacian(i, j) * Ki;
            }
        }
    }
    return out;
}

DuioGains assemble_duio(const std::vector<DesignBlocks>& blocks, const SensorGraph& graph, int leader,
                        const DesignOptions& options, std::string method) {
    const int M = static_cast<int>(blocks.size());
    if (M != graph.M()) {
        throw DimensionError("graph has " + std::to_string(graph.M()) + " nodes but the design has " +
                             std::to_string(M));
    }
    if (leader < 0 || leader >= M) {
        throw IndexError("leader index out of range");
    }
    const LaplacianBundle bundle = build_laplacian(graph, leader);
    const auto n = blocks.front().T_x.rows();
    const Matrix I = Matrix::Identity(n, n);

    DuioGains g;
    g.method = std::move(method);
    g.leader = leader;
    g.lambda_min_reduced = bundle.lambda_min_reduced;
    g.nodes.resize(static_cast<std::size_t>(M));

    const DesignBlocks& lb = blocks[static_cast<std::size_t>(leader)];
    const LeaderInjection inj = design_leader_injection(lb.T_x, lb.C, options.decay, options.pbh);
    g.M1 = inj.M1;
    g.decay = inj.decay_used;

    std::vector<Matrix> followers;
    for (int i = 0; i < M; ++i) {
        const DesignBlocks& b = blocks[static_cast<std::size_t>(i)];
        NodeGains& ng = g.nodes[static_cast<std::size_t>(i)];
        ng.F = b.T_u;
        ng.H = b.T_y;
        if (i == leader) {
            ng.E = b.T_x - inj.M1 * b.C;
            ng.L = inj.M1 + ng.E * b.T_y;
            ng.K = Matrix::Zero(n, n);
        } else {
            ng.E = b.T_x;
            ng.L = ng.E * b.T_y;
            followers.push_back(ng.E);
        }
    }

    const GammaBound gb = gamma_bound(followers, bundle);
    g.gamma_bound = gb.bound;
    g.gamma = M > 1 ? choose_gamma(gb, options.gamma_margin, options.gamma_override) : 0.0;
    std::vector<Matrix> E;
    std::vector<Matrix> K;
    for (int i = 0; i < M; ++i) {
        NodeGains& ng = g.nodes[static_cast<std::size_t>(i)];
        if (i != leader) {
            ng.K = g.gamma * I;
        }
        E.push_back(ng.E);
        K.push_back(ng.K);
    }
    g.spectral_abscissa = spectral_abscissa(coupled_error_matrix(E, K, bundle.laplacian));
    if (!(g.spectral_abscissa < -options.hurwitz_tolerance)) {
        const std::string msg = "coupled error dynamics not Hurwitz (spectral abscissa " +
                                std::to_string(g.spectral_abscissa) + ", gamma " + std::to_string(g.gamma) +
                                ", bound " + std::to_string(gb.bound) + ")";
        if (options.gamma_override) {
            throw DesignError(msg);
        }
        throw NumericsError(msg);
    }
    return g;
}

DuioGains build_model_based_gains(const std::vector<NodeModel>& nodes, const SensorGraph& graph,
                                  const DesignOptions& options, std::string method) {
    const int M = static_cast<int>(nodes.size());
    std::vector<DesignBlocks> blocks;
    blocks.reserve(nodes.size());
    for (int i = 0; i < M; ++i) {
        if (!check_rank_condition(nodes[static_cast<std::size_t>(i)], options.rank)) {
            throw SolvabilityError("node " + std::to_string(i + 1) + ": rank(C B_p) != rank(B_p)");
        }
        blocks.push_back(model_design_blocks(nodes[static_cast<std::size_t>(i)], options.rank));
    }
    int leader = -1;
    if (options.leader) {
        leader = *options.leader;
        if (leader < 0 || leader >= M) {
            throw IndexError("leader index out of range");
        }
        const auto& b = blocks[static_cast<std::size_t>(leader)];
        if (!pbh_detectability(b.T_x, b.C, options.pbh).detectable) {
            throw DesignError("node " + std::to_string(leader + 1) + ": leader pair is not detectable");
        }
    } else {
        for (int i = 0; i < M && leader < 0; ++i) {
            const auto& b = blocks[static_cast<std::size_t>(i)];
            if (pbh_detectability(b.T_x, b.C, options.pbh).detectable) {
                leader = i;
            }
        }
        if (leader < 0) {
            throw DesignError("no node has a detectable pair ((I - H C) A, C)");
        }
    }
    return assemble_duio(blocks, graph, leader, options, std::move(method));
}

DuioGains build_model_based_gains(const PlantModel& model, const SensorGraph& graph, const DesignOptions& options) {
    return build_model_based_gains(node_models(model), graph, options, "model");
}

}  // namespace duio

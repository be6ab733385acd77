#pragma once

#include <optional>
#include <string>
#include <vector>

#include "duio/linalg.hpp"
#include "duio/network.hpp"
#include "duio/plant.hpp"

namespace duio {

// Observer matrices of one node:
//   z' = E z + F u_i + L y_i + K sum_j a_ij (xhat_j - xhat_i),  xhat = z + H y_i
struct NodeGains {
    Matrix E;
    Matrix F;
    Matrix L;
    Matrix H;
    Matrix K;
};

struct DuioGains {
    std::string method;
    std::vector<NodeGains> nodes;
    int leader = 0;
    Matrix M1;
    double decay = 0.0;
    double gamma = 0.0;
    double gamma_bound = 0.0;
    double lambda_min_reduced = 0.0;
    double spectral_abscissa = 0.0;

    int M() const { return static_cast<int>(nodes.size()); }
    int n_x() const { return nodes.empty() ? 0 : static_cast<int>(nodes.front().E.rows()); }
};

// What the model-based construction needs to know about one node.
struct NodeModel {
    Matrix A;
    Matrix B_m;
    Matrix B_p;
    Matrix C;
};

std::vector<NodeModel> node_models(const PlantModel& model);

struct DesignOptions {
    double decay = 0.5;
    double gamma_margin = 0.1;
    std::optional<double> gamma_override;
    std::optional<int> leader;  // default: first node passing the detectability test
    PbhOptions pbh{};
    RankPolicy rank{};
    double hurwitz_tolerance = 1e-8;
};

// rank(C B_p) == rank(B_p) == r.
bool check_rank_condition(const NodeModel& node, const RankPolicy& policy = {});
bool check_rank_condition(const PlantModel& model, int i, const RankPolicy& policy = {});

// H = B_p (C B_p)^+ + Y_free [I - (C B_p)(C B_p)^+]; Y_free omitted gives the
// particular solution. Throws SolvabilityError when check_rank_condition fails.
Matrix parametrize_H(const NodeModel& node, const std::optional<Matrix>& y_free = std::nullopt,
                     const RankPolicy& policy = {});
Matrix parametrize_H(const PlantModel& model, int i, const std::optional<Matrix>& y_free = std::nullopt,
                     const RankPolicy& policy = {});

// PBH detectability of ((I - Hbar C) A, C).
PbhReport check_detectability(const NodeModel& node, const PbhOptions& pbh = {}, const RankPolicy& policy = {});
PbhReport check_detectability(const PlantModel& model, int i, const PbhOptions& pbh = {},
                              const RankPolicy& policy = {});

struct LeaderInjection {
    Matrix M1;
    double decay_used = 0.0;
    double abscissa = 0.0;  // of T_x - M1 C
};

// Output injection with prescribed decay: M1 = P C^T where P solves
//   (T + a I) P + P (T + a I)^T - P C^T C P + I = 0,  a = decay.
// If some stable but unobservable mode sits in (-decay, 0) the decay is
// reduced to half its distance from the axis.
LeaderInjection design_leader_injection(const Matrix& T_x, const Matrix& C, double decay,
                                        const PbhOptions& pbh = {});

struct GammaBound {
    double bound = 0.0;          // ||Et + Et^T|| / (2 lambda_min(reduced L))
    double symmetric_norm = 0.0;
    double lambda_min = 0.0;
};

GammaBound gamma_bound(const std::vector<Matrix>& follower_E, const LaplacianBundle& bundle);
double choose_gamma(const GammaBound& bound, double margin, const std::optional<double>& override_gamma);

// blockdiag(E_i) - blockdiag(K_i) (L kron I)
Matrix coupled_error_matrix(const std::vector<Matrix>& E, const std::vector<Matrix>& K, const Matrix& laplacian);

// Per-node ingredients of the leader/follower construction:
//   T_u = (I - H C) B_m,  T_y = H,  T_x = (I - H C) A
// (or their data-driven counterparts), together with the output map C.
struct DesignBlocks {
    Matrix T_u;
    Matrix T_y;
    Matrix T_x;
    Matrix C;
};

// E_1 = T_x^1 - M1 C_1, E_i = T_x^i, L_1 = M1 + E_1 T_y^1, L_i = E_i T_y^i,
// F_i = T_u^i, H_i = T_y^i, K_1 = 0, K_i = gamma I, then checks the coupled
// error matrix is Hurwitz.
DuioGains assemble_duio(const std::vector<DesignBlocks>& blocks, const SensorGraph& graph, int leader,
                        const DesignOptions& options, std::string method);

DesignBlocks model_design_blocks(const NodeModel& node, const RankPolicy& policy = {});

DuioGains build_model_based_gains(const std::vector<NodeModel>& nodes, const SensorGraph& graph,
                                  const DesignOptions& options = {}, std::string method = "model");
DuioGains build_model_based_gains(const PlantModel& model, const SensorGraph& graph,
                                  const DesignOptions& options = {});

}  // namespace duio

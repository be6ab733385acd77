#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "duio/datagen.hpp"
#include "duio/design_model.hpp"
#include "duio/linalg.hpp"
#include "duio/network.hpp"

namespace duio {

// Everything in this header works on NodeData, which carries no unknown-input
// samples: the data-driven design never sees W.

struct RankEqualityResult {
    bool holds = false;
    int rank_lhs = 0;  // rank([U; Ydot; X])
    int rank_rhs = 0;  // rank([U; X; Xdot])
    Vector sv_lhs;
    Vector sv_rhs;
    int inferred_r = 0;  // rank_rhs - n_m - n_x
};

RankEqualityResult test_rank_equality(const NodeData& data, const RankPolicy& policy = {});

// C = Y X^+. Throws RankError when X lacks full row rank.
Matrix recover_C(const NodeData& data, const RankPolicy& policy = {});

struct DataEquationOptions {
    double relative_tolerance = 1e-6;  // ||Xdot - T S||_F <= tol * ||Xdot||_F
    RankPolicy rank{};
};

// One solution of  Xdot = [T_u T_y T_x] [U; Ydot; X].
struct DataEquationSolution {
    Matrix T;  // n_x x (n_m + n_y + n_x)
    Matrix T_u;
    Matrix T_y;
    Matrix T_x;
    double residual = 0.0;           // ||Xdot - T S||_F
    double relative_residual = 0.0;  // residual / ||Xdot||_F
    int rank_Ty = 0;
    Matrix S;                // stacked [U; Ydot; X]
    Matrix null_projector;   // I - S S^+
    Matrix Xdot;
    int n_m = 0;
    int n_y = 0;
};

// Minimum-norm solution Xdot S^+. Throws ConsistencyError when the residual is
// above tolerance (the data do not come from an LTI plant of this structure).
DataEquationSolution solve_data_equation(const NodeData& data, const DataEquationOptions& options = {});

// base.T + Z (I - S S^+): every member solves the same equation.
DataEquationSolution data_equation_member(const DataEquationSolution& base, const Matrix& Z, const RankPolicy& policy = {});

// Member of the solution family whose T_y block has the least Frobenius norm.
// On exact data this is T_y = B_p (C B_p)^+, the particular solution used by
// the model-based design.
DataEquationSolution canonical_solution(const DataEquationSolution& base, const RankPolicy& policy = {});

struct PencilPoint {
    std::complex<double> s;
    int rank = 0;
};

struct DataDetectabilityOptions {
    PbhOptions pbh{};
    RankPolicy rank{};
    DataEquationOptions data_equation{};
    int pencil_points = 16;
    double pencil_re_max = 10.0;
    double pencil_im_max = 10.0;
    std::uint64_t pencil_seed = 0x5EEDULL;
};

struct DataDetectabilityResult {
    bool holds = false;
    PbhReport pbh;                  // on (T_x, C_recovered)
    bool pencil_cross_check = true;  // rank([sX - Xdot; U; Y]) == n_x + n_m + r at the sampled points
    int expected_pencil_rank = 0;
    std::vector<PencilPoint> pencil;
};

// Detectability from data. Throws PreconditionError when test_rank_equality fails.
DataDetectabilityResult test_detectability_from_data(const NodeData& data, const DataDetectabilityOptions& options = {});

struct DataDesignReport {
    int node = 0;
    RankEqualityResult rank_equality;
    std::optional<DataDetectabilityResult> detectability;
    Matrix T_u;
    Matrix T_y;
    Matrix T_x;
    int rank_Ty = 0;
    int inferred_r = 0;
    Matrix C_recovered;
    double residual_data_equation = 0.0;
    double residual_C = 0.0;
};

struct DataDesignOptions {
    DataDetectabilityOptions detectability{};
    bool use_min_norm = false;  // assemble gains from the min-norm solution instead of the canonical one
    bool test_detectability = true;
};

// Runs every data test for one node. data_equation quantities are filled only when
// rank_equality holds.
DataDesignReport analyze_node(const NodeData& data, const DataDesignOptions& options = {});

std::vector<DataDesignReport> analyze_nodes(const std::vector<NodeData>& data, const DataDesignOptions& options = {},
                                            Execution execution = Execution::Parallel);

// Leader/follower construction from the per-node reports. Throws DesignError
// when a precondition fails (rank_equality anywhere, no node passing detectability, or
// rank(T_y) != r).
DuioGains build_data_driven_gains(const std::vector<DataDesignReport>& reports, const SensorGraph& graph,
                                  const DesignOptions& options = {});

std::vector<NodeData> design_view(const std::vector<NodeDataset>& datasets);

}  // namespace duio

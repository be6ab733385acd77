#include "duio/design_data.hpp"

#include <string>

#include "duio/errors.hpp"
#include "duio/signals.hpp"

namespace duio {

RankEqualityResult test_rank_equality(const NodeData& data, const RankPolicy& policy) {
    data.validate();
    const Matrix lhs = vstack({&data.U, &data.Ydot, &data.X});
    const Matrix rhs = vstack({&data.U, &data.X, &data.Xdot});
    const RankReport l = rank_report(lhs, policy);
    const RankReport r = rank_report(rhs, policy);
    RankEqualityResult out;
    out.rank_lhs = l.rank;
    out.rank_rhs = r.rank;
    out.sv_lhs = l.singular_values;
    out.sv_rhs = r.singular_values;
    out.holds = l.rank == r.rank;
    out.inferred_r = r.rank - data.n_m() - data.n_x();
    return out;
}

Matrix recover_C(const NodeData& data, const RankPolicy& policy) {
    data.validate();
    if (numerical_rank(data.X, policy) < data.n_x()) {
        throw RankError("state data X does not have full row rank; C cannot be recovered");
    }
    return data.Y * pinv(data.X, policy);
}

namespace {

void split_blocks(DataEquationSolution& s, const RankPolicy& policy) {
    const Eigen::Index n_x = s.T.rows();
    s.T_u = s.T.leftCols(s.n_m);
    s.T_y = s.T.middleCols(s.n_m, s.n_y);
    s.T_x = s.T.rightCols(n_x);
    s.residual = (s.Xdot - s.T * s.S).norm();
    const double scale = s.Xdot.norm();
    s.relative_residual = scale > 0.0 ? s.residual / scale : s.residual;
    s.rank_Ty = numerical_rank(s.T_y, policy);
}

}  // namespace

DataEquationSolution solve_data_equation(const NodeData& data, const DataEquationOptions& options) {
    data.validate();
    DataEquationSolution s;
    s.n_m = data.n_m();
    s.n_y = data.n_y();
    s.S = vstack({&data.U, &data.Ydot, &data.X});
    s.Xdot = data.Xdot;
    s.T = data.Xdot * pinv(s.S, options.rank);
    const Matrix nb = left_null_basis(s.S, options.rank);
    s.null_projector = nb * nb.transpose();
    split_blocks(s, options.rank);
    if (!(s.relative_residual <= options.relative_tolerance)) {
        throw ConsistencyError("data equation residual " + std::to_string(s.relative_residual) +
                               " exceeds tolerance; data inconsistent with an LTI plant of this structure");
    }
    return s;
}

DataEquationSolution data_equation_member(const DataEquationSolution& base, const Matrix& Z, const RankPolicy& policy) {
    if (Z.rows() != base.T.rows() || Z.cols() != base.T.cols()) {
        throw DimensionError("family parameter Z must have the shape of T");
    }
    DataEquationSolution s = base;
    s.T = base.T + Z * base.null_projector;
    split_blocks(s, policy);
    return s;
}

DataEquationSolution canonical_solution(const DataEquationSolution& base, const RankPolicy& policy) {
    const Matrix P_y = base.null_projector.middleCols(base.n_m, base.n_y);
    const Matrix Z = -base.T_y * pinv(P_y, policy);
    return data_equation_member(base, Z, policy);
}

DataDetectabilityResult test_detectability_from_data(const NodeData& data, const DataDetectabilityOptions& options) {
    const RankEqualityResult equality = test_rank_equality(data, options.rank);
    if (!equality.holds) {
        throw PreconditionError("detectability test from data requires the rank equality test to hold");
    }
    const DataEquationSolution sol = canonical_solution(solve_data_equation(data, options.data_equation), options.rank);
    const Matrix C = recover_C(data, options.rank);

    DataDetectabilityResult out;
    out.pbh = pbh_detectability(sol.T_x, C, options.pbh);
    out.expected_pencil_rank = data.n_x() + data.n_m() + equality.inferred_r;

    const Matrix& X = data.X;
    std::uint64_t counter = 0;
    auto uniform = [&](double lo, double hi) {
        return lo + (hi - lo) * uniform_from_bits(mix_seed(options.pencil_seed ^ mix_seed(++counter)));
    };
    for (int k = 0; k < options.pencil_points; ++k) {
        const std::complex<double> s(uniform(0.0, options.pencil_re_max),
                                     uniform(-options.pencil_im_max, options.pencil_im_max));
        ComplexMatrix pencil(X.rows() + data.U.rows() + data.Y.rows(), X.cols());
        pencil.topRows(X.rows()) = s * X.cast<std::complex<double>>() - data.Xdot.cast<std::complex<double>>();
        if (data.U.rows() > 0) {
            pencil.middleRows(X.rows(), data.U.rows()) = data.U.cast<std::complex<double>>();
        }
        if (data.Y.rows() > 0) {
            pencil.bottomRows(data.Y.rows()) = data.Y.cast<std::complex<double>>();
        }
        PencilPoint p{s, numerical_rank(pencil, options.rank)};
        out.pencil_cross_check = out.pencil_cross_check && p.rank == out.expected_pencil_rank;
        out.pencil.push_back(p);
    }
    out.holds = out.pbh.detectable && out.pencil_cross_check;
    return out;
}

DataDesignReport analyze_node(const NodeData& data, const DataDesignOptions& options) {
    DataDesignReport rep;
    rep.node = data.node;
    const RankPolicy& policy = options.detectability.rank;
    rep.rank_equality = test_rank_equality(data, policy);
    rep.inferred_r = rep.rank_equality.inferred_r;
    rep.C_recovered = recover_C(data, policy);
    rep.residual_C = (data.Y - rep.C_recovered * data.X).norm() / std::max(1.0, data.Y.norm());
    if (!rep.rank_equality.holds) {
        return rep;
    }
    const DataEquationSolution base = solve_data_equation(data, options.detectability.data_equation);
    const DataEquationSolution sol = options.use_min_norm ? base : canonical_solution(base, policy);
    rep.T_u = sol.T_u;
    rep.T_y = sol.T_y;
    rep.T_x = sol.T_x;
    rep.rank_Ty = sol.rank_Ty;
    rep.residual_data_equation = sol.relative_residual;
    if (options.test_detectability) {
        rep.detectability = test_detectability_from_data(data, options.detectability);
    }
    return rep;
}

std::vector<DataDesignReport> analyze_nodes(const std::vector<NodeData>& data, const DataDesignOptions& options,
                                            Execution execution) {
    const int M = static_cast<int>(data.size());
    std::vector<DataDesignReport> out(data.size());
    if (execution == Execution::Serial) {
        for (int i = 0; i < M; ++i) {
            out[static_cast<std::size_t>(i)] = analyze_node(data[static_cast<std::size_t>(i)], options);
        }
        return out;
    }
    ExceptionSlot slot;
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < M; ++i) {
        slot.run([&] { out[static_cast<std::size_t>(i)] = analyze_node(data[static_cast<std::size_t>(i)], options); });
    }
    slot.rethrow();
    return out;
}

DuioGains build_data_driven_gains(const std::vector<DataDesignReport>& reports, const SensorGraph& graph,
                                  const DesignOptions& options) {
    const int M = static_cast<int>(reports.size());
    if (M == 0) {
        throw DesignError("no node reports");
    }
    std::vector<DesignBlocks> blocks;
    for (int i = 0; i < M; ++i) {
        const DataDesignReport& r = reports[static_cast<std::size_t>(i)];
        const std::string tag = "node " + std::to_string(i + 1) + ": ";
        if (!r.rank_equality.holds) {
            throw DesignError(tag + "rank([U; Ydot; X]) = " + std::to_string(r.rank_equality.rank_lhs) +
                              " != rank([U; X; Xdot]) = " + std::to_string(r.rank_equality.rank_rhs));
        }
        if (r.rank_Ty != r.inferred_r) {
            throw DesignError(tag + "rank(T_y) = " + std::to_string(r.rank_Ty) + " differs from r = " +
                              std::to_string(r.inferred_r));
        }
        blocks.push_back({r.T_u, r.T_y, r.T_x, r.C_recovered});
    }

    auto detectable = [&](int i) {
        const auto& r = reports[static_cast<std::size_t>(i)];
        return r.detectability && r.detectability->holds;
    };
    int leader = -1;
    if (options.leader) {
        leader = *options.leader;
        if (leader < 0 || leader >= M) {
            throw IndexError("leader index out of range");
        }
        if (!detectable(leader)) {
            throw DesignError("node " + std::to_string(leader + 1) + ": detectability test from data fails");
        }
    } else {
        for (int i = 0; i < M && leader < 0; ++i) {
            if (detectable(i)) {
                leader = i;
            }
        }
        if (leader < 0) {
            throw DesignError("no node passes the detectability test from data");
        }
    }
    return assemble_duio(blocks, graph, leader, options, "data");
}

std::vector<NodeData> design_view(const std::vector<NodeDataset>& datasets) {
    std::vector<NodeData> out;
    out.reserve(datasets.size());
    for (const auto& ds : datasets) {
        out.push_back(ds.data);
    }
    return out;
}

}  // namespace duio

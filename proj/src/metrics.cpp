#include "duio/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "duio/errors.hpp"

namespace duio {

IdentifiedModel identify_least_squares(const NodeData& data, const RankPolicy& policy) {
    data.validate();
    const Matrix Z = vstack({&data.X, &data.U});
    if (numerical_rank(Z, policy) < Z.rows()) {
        throw RankError("node " + std::to_string(data.node + 1) + ": [X; U] is rank deficient (rank " +
                        std::to_string(numerical_rank(Z, policy)) + " < " + std::to_string(Z.rows()) + ")");
    }
    if (numerical_rank(data.X, policy) < data.n_x()) {
        throw RankError("node " + std::to_string(data.node + 1) + ": X lacks full row rank");
    }
    const Matrix theta = data.Xdot * pinv(Z, policy);
    IdentifiedModel out;
    out.A_hat = theta.leftCols(data.n_x());
    out.B_m_hat = theta.rightCols(data.n_m());
    out.C_hat = data.Y * pinv(data.X, policy);
    out.residual = (data.Xdot - theta * Z).norm();
    return out;
}

DuioGains build_id_gains(const std::vector<NodeData>& data, const std::vector<Matrix>& granted_B_p,
                         const SensorGraph& graph, const DesignOptions& options) {
    if (granted_B_p.size() != data.size()) {
        throw PreconditionError("ID-DUIO needs the unknown-input matrix B_p of every node");
    }
    std::vector<NodeModel> nodes;
    nodes.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (granted_B_p[i].rows() != data[i].n_x()) {
            throw PreconditionError("node " + std::to_string(i + 1) + ": granted B_p must have n_x rows");
        }
        const IdentifiedModel id = identify_least_squares(data[i], options.rank);
        nodes.push_back(NodeModel{id.A_hat, id.B_m_hat, granted_B_p[i], id.C_hat});
    }
    return build_model_based_gains(nodes, graph, options, "id");
}

RunMetrics compute_mse_mae(const RunResult& run) {
    const Eigen::Index T = run.size();
    if (T < 2 || run.error_norms.cols() != T) {
        throw EmptyRunError("metrics need a run with at least two samples");
    }
    const double span = run.t.back() - run.t.front();
    if (!(span > 0.0)) {
        throw EmptyRunError("metrics need a run of positive duration");
    }
    const Eigen::Index M = run.error_norms.rows();
    RunMetrics out;
    out.mse = Vector::Zero(M);
    out.mae = Vector::Zero(M);
    for (Eigen::Index k = 0; k + 1 < T; ++k) {
        const double h = run.t[static_cast<std::size_t>(k + 1)] - run.t[static_cast<std::size_t>(k)];
        for (Eigen::Index i = 0; i < M; ++i) {
            const double a = run.error_norms(i, k);
            const double b = run.error_norms(i, k + 1);
            out.mse(i) += 0.5 * h * (a * a + b * b);
            out.mae(i) += 0.5 * h * (a + b);
        }
    }
    out.mse /= span;
    out.mae /= span;
    out.mse_mean = M ? out.mse.mean() : 0.0;
    out.mae_mean = M ? out.mae.mean() : 0.0;
    return out;
}

std::string method_name(Method m) {
    switch (m) {
        case Method::Model:
            return "model";
        case Method::Data:
            return "data";
        case Method::Id:
            return "id";
    }
    return "model";
}

Method parse_method(const std::string& name) {
    if (name == "model" || name == "DUIO") {
        return Method::Model;
    }
    if (name == "data" || name == "D-DUIO") {
        return Method::Data;
    }
    if (name == "id" || name == "ID-DUIO") {
        return Method::Id;
    }
    throw ConfigError("unknown method '" + name + "' (expected model, data or id)");
}

Scenario realize(const PlantModel& model, const ScenarioSpec& spec, double dt, std::uint64_t seed) {
    std::uint64_t counter = 0;
    auto uniform = [&](double lo, double hi) {
        return lo + (hi - lo) * uniform_from_bits(mix_seed(derive_seed(seed, counter++)));
    };
    Scenario out;
    out.x0.resize(model.n_x());
    for (int k = 0; k < model.n_x(); ++k) {
        out.x0(k) = uniform(-spec.x0_amplitude, spec.x0_amplitude);
    }
    std::set<int> known;
    for (const NodeView& v : model.nodes()) {
        known.insert(v.known_inputs.begin(), v.known_inputs.end());
    }
    for (int c = 0; c < model.n_u(); ++c) {
        if (known.count(c)) {
            out.inputs.u.emplace_back(AutonomousLinear{spec.known_rate, uniform(spec.known_low, spec.known_high)});
        } else if (spec.unknown_active) {
            out.inputs.u.emplace_back(spec.unknown);
        } else {
            out.inputs.u.emplace_back(Zero{});
        }
    }
    const double hold = spec.disturbance_hold > 0.0 ? spec.disturbance_hold : dt;
    for (int c = 0; c < model.n_d(); ++c) {
        if (spec.disturbance_amplitude > 0.0) {
            out.inputs.d.emplace_back(PiecewiseConstantRandom{-spec.disturbance_amplitude, spec.disturbance_amplitude,
                                                              hold, derive_seed(seed, 0xD157ULL + c)});
        } else {
            out.inputs.d.emplace_back(Zero{});
        }
    }
    return out;
}

namespace {

DuioGains design_for(Method method, const MonteCarloSetup& setup, const std::vector<NodeData>& data) {
    switch (method) {
        case Method::Model:
            return build_model_based_gains(setup.model, setup.graph, setup.design);
        case Method::Data:
            return build_data_driven_gains(analyze_nodes(data, setup.data_design, Execution::Serial), setup.graph,
                                           setup.design);
        case Method::Id: {
            if (!setup.grant_unknown_matrices) {
                throw PreconditionError("ID-DUIO needs the unknown-input matrices granted (grant_unknown_matrices)");
            }
            std::vector<Matrix> grant;
            for (const NodeView& v : setup.model.nodes()) {
                grant.push_back(v.B_p);
            }
            return build_id_gains(data, grant, setup.graph, setup.design);
        }
    }
    throw DesignError("unknown method");
}

}  // namespace

ExperimentOutcome run_experiment(const MonteCarloSetup& setup, int index, std::uint64_t seed) {
    ExperimentOutcome out;
    out.index = index;
    out.seed = seed;

    const bool needs_data = std::any_of(setup.methods.begin(), setup.methods.end(),
                                        [](Method m) { return m != Method::Model; });
    std::vector<NodeData> data;
    if (needs_data) {
        data = design_view(collect_all(setup.model, setup.N, setup.excitation, derive_seed(seed, 1), Execution::Serial));
    }
    const Scenario sc = realize(setup.model, setup.scenario, setup.run.dt, derive_seed(seed, 2));
    const std::vector<Vector> z0(static_cast<std::size_t>(setup.model.M()), Vector::Zero(setup.model.n_x()));
    RunOptions run_options = setup.run;
    run_options.noise_seed = derive_seed(seed, 3);

    for (Method m : setup.methods) {
        DuioGains gains;
        try {
            gains = design_for(m, setup, data);
        } catch (const Error& e) {
            throw DesignError(method_name(m) + " design failed for experiment " + std::to_string(index) +
                              " (seed " + std::to_string(seed) + "): " + e.what());
        }
        const RunResult res = run(setup.model, setup.graph, gains, sc.x0, z0, sc.inputs, run_options);
        out.per_method.push_back(compute_mse_mae(res));
    }
    return out;
}

CompareResult monte_carlo_compare(const MonteCarloSetup& setup, int K, std::uint64_t master_seed,
                                  Execution execution) {
    if (K < 1) {
        throw ConfigError("experiment count K must be at least 1");
    }
    if (setup.methods.empty()) {
        throw ConfigError("compare needs at least one method");
    }
    CompareResult out;
    out.experiments.resize(static_cast<std::size_t>(K));
    if (execution == Execution::Serial) {
        for (int k = 0; k < K; ++k) {
            out.experiments[static_cast<std::size_t>(k)] =
                run_experiment(setup, k, derive_seed(master_seed, static_cast<std::uint64_t>(k)));
        }
    } else {
        ExceptionSlot slot;
#pragma omp parallel for schedule(dynamic, 1)
        for (int k = 0; k < K; ++k) {
            slot.run([&] {
                out.experiments[static_cast<std::size_t>(k)] =
                    run_experiment(setup, k, derive_seed(master_seed, static_cast<std::uint64_t>(k)));
            });
        }
        slot.rethrow();
    }

    // Aggregation runs serially in experiment order so both paths round alike.
    const int M = setup.model.M();
    for (std::size_t j = 0; j < setup.methods.size(); ++j) {
        MetricSummary s;
        s.method = setup.methods[j];
        s.experiments = K;
        s.seed = master_seed;
        s.node_mse = Vector::Zero(M);
        s.node_mae = Vector::Zero(M);
        for (const ExperimentOutcome& e : out.experiments) {
            const RunMetrics& r = e.per_method[j];
            s.mse += r.mse_mean;
            s.mae += r.mae_mean;
            s.node_mse += r.mse;
            s.node_mae += r.mae;
        }
        s.mse /= K;
        s.mae /= K;
        s.node_mse /= K;
        s.node_mae /= K;
        out.summaries.push_back(std::move(s));
    }
    return out;
}

}  // namespace duio

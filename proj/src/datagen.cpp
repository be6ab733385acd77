#include "duio/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <omp.h>

#include "duio/errors.hpp"

namespace duio {

int available_threads() {
    return omp_get_max_threads();
}

void NodeData::validate() const {
    const Eigen::Index n = X.cols();
    const bool ok = U.cols() == n && Y.cols() == n && Ydot.cols() == n && Xdot.cols() == n &&
                    static_cast<Eigen::Index>(times.size()) == n && Xdot.rows() == X.rows() &&
                    Ydot.rows() == Y.rows();
    if (!ok) {
        throw DimensionError("dataset blocks must share the same column count N");
    }
}

RankAssumptionReport check_rank_assumption(const NodeDataset& ds, const RankPolicy& policy) {
    if (!ds.W_validation) {
        throw OracleUnavailableError("rank assumption check needs the ground-truth unknown-input samples");
    }
    const Matrix& W = *ds.W_validation;
    const Matrix stacked = vstack({&ds.data.U, &W, &ds.data.X});
    const RankReport rr = rank_report(stacked, policy);
    RankAssumptionReport out;
    out.rank = rr.rank;
    out.required = static_cast<int>(stacked.rows());
    out.singular_values = rr.singular_values;
    out.threshold = rr.threshold;
    out.holds = rr.rank == out.required;
    return out;
}

namespace {

std::string deficient_block(const NodeDataset& ds, const RankPolicy& policy) {
    const auto& d = ds.data;
    if (numerical_rank(d.U, policy) < d.n_m()) {
        return "U (known inputs)";
    }
    if (ds.W_validation && numerical_rank(*ds.W_validation, policy) < ds.W_validation->rows()) {
        return "W (unknown inputs)";
    }
    if (numerical_rank(d.X, policy) < d.n_x()) {
        return "X (states)";
    }
    return "[U; W; X] (joint excitation)";
}

NodeDataset collect_once(const PlantModel& model, int i, int N, const Excitation& ex, std::uint64_t seed) {
    const NodeView& view = model.node(i);
    const int n_x = model.n_x();
    const auto steps_per_sample = std::max<long long>(1, std::llround(ex.sample_interval / ex.dt));
    const double dt = ex.sample_interval / static_cast<double>(steps_per_sample);
    const int per_segment = std::max(1, ex.samples_per_segment);
    const int segments = (N + per_segment - 1) / per_segment;
    const double segment_span = static_cast<double>(per_segment) * ex.sample_interval;

    NodeDataset ds;
    NodeData& out = ds.data;
    out.node = i;
    out.seed = seed;
    out.U.resize(view.n_m(), N);
    out.Y.resize(view.n_y(), N);
    out.Ydot.resize(view.n_y(), N);
    out.X.resize(n_x, N);
    out.Xdot.resize(n_x, N);
    Matrix W(view.r(), N);
    out.times.reserve(static_cast<std::size_t>(N));

    int col = 0;
    for (int s = 0; s < segments; ++s) {
        const std::uint64_t seg_seed = derive_seed(seed, static_cast<std::uint64_t>(s));
        std::uint64_t draw = 0;
        auto uniform = [&](double lo, double hi) {
            return lo + (hi - lo) * uniform_from_bits(mix_seed(seg_seed ^ mix_seed(++draw)));
        };

        Vector x0 = Vector::Zero(n_x);
        if (ex.random_initial_state) {
            for (int k = 0; k < n_x; ++k) {
                x0(k) = uniform(-ex.x0_amplitude, ex.x0_amplitude);
            }
        }
        PlantInputs inputs;
        inputs.u = ex.u;
        inputs.d = ex.d;
        if (inputs.u.empty()) {
            for (int k = 0; k < model.n_u(); ++k) {
                inputs.u.emplace_back(PiecewiseConstantRandom{-ex.amplitude, ex.amplitude, ex.sample_interval,
                                                              derive_seed(seg_seed, 1000 + k)});
            }
        }
        if (inputs.d.empty()) {
            for (int k = 0; k < model.n_d(); ++k) {
                inputs.d.emplace_back(PiecewiseConstantRandom{-ex.amplitude, ex.amplitude, ex.sample_interval,
                                                              derive_seed(seg_seed, 2000 + k)});
            }
        }

        SimulationOptions opts;
        opts.derivatives = ex.derivatives;
        opts.t0 = static_cast<double>(s) * segment_span;
        const Trajectory traj = simulate(model, x0, inputs, segment_span, dt, opts);
        const NodeSamples& ns = traj.nodes[static_cast<std::size_t>(i)];

        for (int k = 0; k < per_segment && col < N; ++k, ++col) {
            long long offset = 0;
            if (ex.jitter) {
                offset = std::min<long long>(steps_per_sample - 1,
                                             static_cast<long long>(uniform(0.0, 1.0) * steps_per_sample));
            }
            const auto idx = static_cast<Eigen::Index>(k * steps_per_sample + offset);
            out.times.push_back(traj.t[static_cast<std::size_t>(idx)]);
            out.U.col(col) = ns.U.col(idx);
            out.Y.col(col) = ns.Y.col(idx);
            out.Ydot.col(col) = ns.Ydot.col(idx);
            out.X.col(col) = traj.X.col(idx);
            out.Xdot.col(col) = traj.Xdot.col(idx);
            W.col(col) = ns.W.col(idx);
            if (ex.output_noise > 0.0) {
                for (int r = 0; r < view.n_y(); ++r) {
                    out.Y(r, col) += uniform(-ex.output_noise, ex.output_noise);
                    out.Ydot(r, col) += uniform(-ex.output_noise, ex.output_noise);
                }
            }
        }
    }
    ds.W_validation = std::move(W);
    return ds;
}

}  // namespace

NodeDataset collect(const PlantModel& model, int i, int N, const Excitation& excitation, std::uint64_t seed) {
    const NodeView& view = model.node(i);
    const int required = view.n_m() + view.r() + model.n_x();
    if (N < required) {
        throw ExcitationError("node " + std::to_string(i + 1) + ": N = " + std::to_string(N) +
                              " samples cannot satisfy the rank assumption (need at least " +
                              std::to_string(required) + ")");
    }
    const int attempts = std::max(1, excitation.max_attempts);
    std::string last_block;
    for (int a = 0; a < attempts; ++a) {
        const std::uint64_t attempt_seed = a == 0 ? seed : derive_seed(seed, 0xA77E0000ULL + a);
        NodeDataset ds = collect_once(model, i, N, excitation, attempt_seed);
        ds.attempts = a + 1;
        if (check_rank_assumption(ds, excitation.rank_policy).holds) {
            return ds;
        }
        last_block = deficient_block(ds, excitation.rank_policy);
    }
    throw ExcitationError("node " + std::to_string(i + 1) + ": rank assumption still violated after " +
                          std::to_string(attempts) + " attempts; deficient block: " + last_block);
}

std::vector<NodeDataset> collect_all(const PlantModel& model, int N, const Excitation& excitation,
                                     std::uint64_t seed, Execution execution) {
    const int M = model.M();
    std::vector<NodeDataset> out(static_cast<std::size_t>(M));
    auto one = [&](int i) {
        out[static_cast<std::size_t>(i)] = collect(model, i, N, excitation, derive_seed(seed, 0xDA7A00ULL + i));
    };
    if (execution == Execution::Serial) {
        for (int i = 0; i < M; ++i) {
            one(i);
        }
        return out;
    }
    ExceptionSlot slot;
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < M; ++i) {
        slot.run([&] { one(i); });
    }
    slot.rethrow();
    return out;
}

CompatibilityReport check_compatibility(const NodeData& data, const OnlineSample& s, double tolerance,
                                        const RankPolicy& policy) {
    if (s.u.size() != data.n_m() || s.y.size() != data.n_y() || s.ydot.size() != data.n_y() ||
        s.x.size() != data.n_x() || s.xdot.size() != data.n_x()) {
        throw DimensionError("online sample dimensions do not match the dataset");
    }
    const Matrix stacked = vstack({&data.U, &data.Y, &data.Ydot, &data.X, &data.Xdot});
    Vector v(stacked.rows());
    v << s.u, s.y, s.ydot, s.x, s.xdot;

    CompatibilityReport out;
    const double norm = v.norm();
    if (norm == 0.0) {
        out.compatible = true;
        return out;
    }
    const Matrix basis = range_basis(stacked, policy);
    const Vector residual = v - basis * (basis.transpose() * v);
    out.residual = residual.norm() / norm;
    out.compatible = out.residual < tolerance;
    return out;
}

OnlineSample online_sample(const Trajectory& traj, int i, Eigen::Index k) {
    const NodeSamples& ns = traj.nodes.at(static_cast<std::size_t>(i));
    return {ns.U.col(k), ns.Y.col(k), ns.Ydot.col(k), traj.X.col(k), traj.Xdot.col(k)};
}

}  // namespace duio

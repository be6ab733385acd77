#include "duio/plant.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "duio/errors.hpp"

namespace duio {
namespace {

void require(bool ok, const std::string& what) {
    if (!ok) {
        throw DimensionError(what);
    }
}

std::vector<int> complement(int n, const std::vector<int>& taken) {
    std::vector<int> out;
    for (int k = 0; k < n; ++k) {
        if (std::find(taken.begin(), taken.end(), k) == taken.end()) {
            out.push_back(k);
        }
    }
    return out;
}

double rel_gap(const Matrix& a, const Matrix& b) {
    if (a.size() == 0 && b.size() == 0) {
        return 0.0;
    }
    return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace

NodeView make_node_view(const Matrix& B, const Matrix& E, Matrix C, std::vector<int> known_inputs,
                        std::vector<double> unknown_scale) {
    const int n_u = static_cast<int>(B.cols());
    for (int k : known_inputs) {
        require(k >= 0 && k < n_u, "known input index out of range");
    }
    const std::vector<int> unknown = complement(n_u, known_inputs);
    if (unknown_scale.empty()) {
        unknown_scale.assign(unknown.size(), 1.0);
    }
    require(unknown_scale.size() == unknown.size(), "unknown_scale must have one entry per unknown input");

    NodeView view;
    view.C = std::move(C);
    view.known_inputs = std::move(known_inputs);
    view.B_m = select_columns(B, view.known_inputs);

    const auto n_unk = static_cast<Eigen::Index>(unknown.size());
    const Eigen::Index n_d = E.cols();
    view.B_p.resize(B.rows(), n_unk + n_d);
    view.unknown_map = Matrix::Zero(n_unk + n_d, n_unk + n_d);
    for (Eigen::Index k = 0; k < n_unk; ++k) {
        require(unknown_scale[k] != 0.0, "unknown_scale entries must be nonzero");
        view.B_p.col(k) = unknown_scale[k] * B.col(unknown[k]);
        view.unknown_map(k, k) = 1.0 / unknown_scale[k];
    }
    if (n_d > 0) {
        view.B_p.rightCols(n_d) = E;
        view.unknown_map.bottomRightCorner(n_d, n_d).setIdentity();
    }
    return view;
}

PlantModel::PlantModel(Matrix A, Matrix B, Matrix E, std::vector<NodeView> nodes)
    : a_(std::move(A)), b_(std::move(B)), e_(std::move(E)), nodes_(std::move(nodes)) {
    require(a_.rows() == a_.cols(), "A must be square");
    require(b_.rows() == a_.rows(), "B must have n_x rows");
    require(e_.rows() == a_.rows(), "E must have n_x rows");
    require(!nodes_.empty(), "a plant needs at least one node");

    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const NodeView& v = nodes_[i];
        const std::string tag = "node " + std::to_string(i + 1) + ": ";
        require(v.C.cols() == a_.rows(), tag + "C must have n_x columns");
        std::set<int> seen;
        for (int k : v.known_inputs) {
            require(k >= 0 && k < n_u(), tag + "known input index out of range");
            require(seen.insert(k).second, tag + "duplicate known input index");
        }
        require(v.B_m.rows() == a_.rows() && v.B_m.cols() == static_cast<Eigen::Index>(v.known_inputs.size()),
                tag + "B_m has wrong shape");
        require(rel_gap(v.B_m, select_columns(b_, v.known_inputs)) < 1e-12, tag + "B_m must equal B[:, known]");
        require(v.B_p.rows() == a_.rows(), tag + "B_p must have n_x rows");
        require(numerical_rank(v.B_p) == v.B_p.cols(), tag + "B_p must have full column rank");

        const std::vector<int> unknown = complement(n_u(), v.known_inputs);
        const Matrix b_unk = select_columns(b_, unknown);
        const Matrix target = hstack({&b_unk, &e_});
        require(v.unknown_map.rows() == v.B_p.cols() && v.unknown_map.cols() == target.cols(),
                tag + "unknown_map has wrong shape");
        require(rel_gap(v.B_p * v.unknown_map, target) < 1e-12, tag + "B_p * unknown_map must equal [B_unknown, E]");
    }
}

const NodeView& PlantModel::node(int i) const {
    if (i < 0 || i >= M()) {
        throw IndexError("node index " + std::to_string(i) + " out of range [0, " + std::to_string(M()) + ")");
    }
    return nodes_[static_cast<std::size_t>(i)];
}

std::vector<int> PlantModel::unknown_inputs(int i) const {
    return complement(n_u(), node(i).known_inputs);
}

Vector PlantModel::known_input(int i, const Vector& u) const {
    const NodeView& v = node(i);
    Vector out(v.n_m());
    for (int k = 0; k < v.n_m(); ++k) {
        out(k) = u(v.known_inputs[static_cast<std::size_t>(k)]);
    }
    return out;
}

Vector PlantModel::unknown_input(int i, const Vector& u, const Vector& d) const {
    const std::vector<int> unknown = unknown_inputs(i);
    Vector stacked(static_cast<Eigen::Index>(unknown.size()) + d.size());
    for (std::size_t k = 0; k < unknown.size(); ++k) {
        stacked(static_cast<Eigen::Index>(k)) = u(unknown[k]);
    }
    stacked.tail(d.size()) = d;
    return node(i).unknown_map * stacked;
}

Vector PlantModel::rhs(const Vector& x, const Vector& u, const Vector& d) const {
    Vector dx = a_ * x;
    if (b_.cols() > 0) {
        dx.noalias() += b_ * u;
    }
    if (e_.cols() > 0) {
        dx.noalias() += e_ * d;
    }
    return dx;
}

NodeDynamics node_dynamics_matrices(const PlantModel& model, int i) {
    const NodeView& v = model.node(i);
    return {model.A(), v.B_m, v.B_p};
}

Vector PlantInputs::u_at(double t, double step_start) const {
    const auto v = evaluate(u, t, step_start);
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Vector PlantInputs::d_at(double t, double step_start) const {
    const auto v = evaluate(d, t, step_start);
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void validate_inputs(const PlantModel& model, const PlantInputs& inputs) {
    require(static_cast<int>(inputs.u.size()) == model.n_u(), "need one input signal per column of B");
    require(static_cast<int>(inputs.d.size()) == model.n_d(), "need one disturbance signal per column of E");
}

Trajectory simulate(const PlantModel& model, const Vector& x0, const PlantInputs& inputs, double horizon,
                    double dt, const SimulationOptions& options) {
    if (!(dt > 0.0) || !(horizon >= dt * (1.0 - 1e-12))) {
        throw DimensionError("simulate requires dt > 0 and horizon >= dt");
    }
    require(x0.size() == model.n_x(), "x0 must have length n_x");
    validate_inputs(model, inputs);

    const auto steps = static_cast<Eigen::Index>(std::llround(horizon / dt));
    const Eigen::Index samples = steps + 1;
    const int n_x = model.n_x();

    Trajectory traj;
    traj.t.resize(static_cast<std::size_t>(samples));
    traj.X.resize(n_x, samples);
    traj.Xdot.resize(n_x, samples);

    Matrix U(model.n_u(), samples);
    Matrix D(model.n_d(), samples);

    Vector x = x0;
    for (Eigen::Index k = 0; k < samples; ++k) {
        const double t = options.t0 + static_cast<double>(k) * dt;
        traj.t[static_cast<std::size_t>(k)] = t;
        if (!x.allFinite() || x.cwiseAbs().maxCoeff() > options.divergence_limit) {
            throw DivergenceError("plant state diverged at t = " + std::to_string(t), t);
        }
        const Vector u = inputs.u_at(t, t);
        const Vector d = inputs.d_at(t, t);
        traj.X.col(k) = x;
        traj.Xdot.col(k) = model.rhs(x, u, d);
        U.col(k) = u;
        D.col(k) = d;
        if (k == steps) {
            break;
        }
        const double th = t + 0.5 * dt;
        const double t1 = t + dt;
        const Vector k1 = traj.Xdot.col(k);
        const Vector k2 = model.rhs(x + 0.5 * dt * k1, inputs.u_at(th, t), inputs.d_at(th, t));
        const Vector k3 = model.rhs(x + 0.5 * dt * k2, inputs.u_at(th, t), inputs.d_at(th, t));
        const Vector k4 = model.rhs(x + dt * k3, inputs.u_at(t1, t), inputs.d_at(t1, t));
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    if (options.derivatives == DerivativeMode::CentralDifference && samples >= 3) {
        Matrix fd(n_x, samples);
        for (Eigen::Index k = 1; k + 1 < samples; ++k) {
            fd.col(k) = (traj.X.col(k + 1) - traj.X.col(k - 1)) / (2.0 * dt);
        }
        fd.col(0) = (-3.0 * traj.X.col(0) + 4.0 * traj.X.col(1) - traj.X.col(2)) / (2.0 * dt);
        const Eigen::Index e = samples - 1;
        fd.col(e) = (3.0 * traj.X.col(e) - 4.0 * traj.X.col(e - 1) + traj.X.col(e - 2)) / (2.0 * dt);
        traj.Xdot = fd;
    }

    traj.nodes.resize(static_cast<std::size_t>(model.M()));
    for (int i = 0; i < model.M(); ++i) {
        const NodeView& v = model.node(i);
        NodeSamples& ns = traj.nodes[static_cast<std::size_t>(i)];
        ns.Y = v.C * traj.X;
        ns.Ydot = v.C * traj.Xdot;
        ns.U.resize(v.n_m(), samples);
        ns.W.resize(v.r(), samples);
        for (Eigen::Index k = 0; k < samples; ++k) {
            const Vector u = U.col(k);
            const Vector d = D.col(k);
            ns.U.col(k) = model.known_input(i, u);
            ns.W.col(k) = model.unknown_input(i, u, d);
        }
    }
    return traj;
}

}  // namespace duio

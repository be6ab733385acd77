#include "duio/observer_sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "duio/errors.hpp"

namespace duio {

Vector RunResult::error_stack(Eigen::Index k) const {
    const Eigen::Index n = X.rows();
    Vector e(n * M());
    for (int i = 0; i < M(); ++i) {
        e.segment(i * n, n) = X.col(k) - xhat[static_cast<std::size_t>(i)].col(k);
    }
    return e;
}

void check_consistency(const PlantModel& model, const SensorGraph& graph, const DuioGains& gains) {
    const int M = model.M();
    const int n = model.n_x();
    auto fail = [](const std::string& what) { throw DimensionError("gains/model mismatch: " + what); };
    if (gains.M() != M || graph.M() != M) {
        fail("node counts differ (model " + std::to_string(M) + ", graph " + std::to_string(graph.M()) +
             ", gains " + std::to_string(gains.M()) + ")");
    }
    for (int i = 0; i < M; ++i) {
        const NodeGains& g = gains.nodes[static_cast<std::size_t>(i)];
        const NodeView& v = model.node(i);
        const std::string tag = "node " + std::to_string(i + 1) + ": ";
        if (g.E.rows() != n || g.E.cols() != n) {
            fail(tag + "E must be n_x x n_x");
        }
        if (g.F.rows() != n || g.F.cols() != v.n_m()) {
            fail(tag + "F must be n_x x n_m");
        }
        if (g.L.rows() != n || g.L.cols() != v.n_y() || g.H.rows() != n || g.H.cols() != v.n_y()) {
            fail(tag + "L and H must be n_x x n_y");
        }
        if (g.K.rows() != n || g.K.cols() != n) {
            fail(tag + "K must be n_x x n_x");
        }
    }
}

namespace {

class CoupledSystem {
public:
    CoupledSystem(const PlantModel& model, const SensorGraph& graph, const DuioGains& gains,
                  const PlantInputs& inputs, const RunOptions& options)
        : model_(model), graph_(graph), gains_(gains), inputs_(inputs), n_(model.n_x()), M_(model.M()) {
        xhat_.assign(static_cast<std::size_t>(M_), Vector::Zero(n_));
        y_.resize(static_cast<std::size_t>(M_));
        if (options.output_noise > 0.0) {
            for (int i = 0; i < M_; ++i) {
                std::vector<SignalGenerator> per_output;
                for (int r = 0; r < model.node(i).n_y(); ++r) {
                    per_output.emplace_back(PiecewiseConstantRandom{
                        -options.output_noise, options.output_noise, options.dt,
                        derive_seed(options.noise_seed, static_cast<std::uint64_t>(i * 1000 + r))});
                }
                noise_.push_back(std::move(per_output));
            }
        }
    }

    int state_size() const { return n_ * (M_ + 1); }

    // Fills y_ and xhat_ for state s at time t of the step starting at t0.
    void observe(const Vector& s, double t, double t0) {
        const auto x = s.head(n_);
        for (int i = 0; i < M_; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            y_[ui].noalias() = model_.node(i).C * x;
            if (!noise_.empty()) {
                for (int r = 0; r < y_[ui].size(); ++r) {
                    y_[ui](r) += noise_[ui][static_cast<std::size_t>(r)].value(t, t0);
                }
            }
            xhat_[ui] = s.segment(n_ * (i + 1), n_);
            xhat_[ui].noalias() += gains_.nodes[ui].H * y_[ui];
        }
    }

    Vector rhs(const Vector& s, double t, double t0) {
        observe(s, t, t0);
        const Vector u = inputs_.u_at(t, t0);
        const Vector d = inputs_.d_at(t, t0);
        Vector ds(state_size());
        ds.head(n_) = model_.rhs(s.head(n_), u, d);
        Vector consensus(n_);
        for (int i = 0; i < M_; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            const NodeGains& g = gains_.nodes[ui];
            auto dz = ds.segment(n_ * (i + 1), n_);
            dz.noalias() = g.E * s.segment(n_ * (i + 1), n_);
            if (g.F.cols() > 0) {
                dz.noalias() += g.F * model_.known_input(i, u);
            }
            dz.noalias() += g.L * y_[ui];
            consensus.setZero();
            for (int j = 0; j < M_; ++j) {
                const double a = graph_.weight(i, j);
                if (a != 0.0) {
                    consensus += a * (xhat_[static_cast<std::size_t>(j)] - xhat_[ui]);
                }
            }
            dz.noalias() += g.K * consensus;
        }
        return ds;
    }

    const std::vector<Vector>& xhat() const { return xhat_; }

private:
    const PlantModel& model_;
    const SensorGraph& graph_;
    const DuioGains& gains_;
    const PlantInputs& inputs_;
    int n_;
    int M_;
    std::vector<Vector> xhat_;
    std::vector<Vector> y_;
    std::vector<std::vector<SignalGenerator>> noise_;
};

}  // namespace

RunResult run(const PlantModel& model, const SensorGraph& graph, const DuioGains& gains, const Vector& x0,
              const std::vector<Vector>& z0, const PlantInputs& inputs, const RunOptions& options) {
    check_consistency(model, graph, gains);
    validate_inputs(model, inputs);
    const int n = model.n_x();
    const int M = model.M();
    if (x0.size() != n) {
        throw DimensionError("x0 must have length n_x");
    }
    if (static_cast<int>(z0.size()) != M) {
        throw DimensionError("need one observer initial state per node");
    }
    if (!(options.dt > 0.0) || !(options.horizon >= options.dt * (1.0 - 1e-12))) {
        throw DimensionError("run requires dt > 0 and horizon >= dt");
    }

    CoupledSystem sys(model, graph, gains, inputs, options);
    Vector s(sys.state_size());
    s.head(n) = x0;
    for (int i = 0; i < M; ++i) {
        if (z0[static_cast<std::size_t>(i)].size() != n) {
            throw DimensionError("observer initial state must have length n_x");
        }
        s.segment(n * (i + 1), n) = z0[static_cast<std::size_t>(i)];
    }

    const double dt = options.dt;
    const auto steps = static_cast<Eigen::Index>(std::llround(options.horizon / dt));
    const Eigen::Index samples = steps + 1;

    RunResult res;
    res.t.resize(static_cast<std::size_t>(samples));
    res.X.resize(n, samples);
    res.xhat.assign(static_cast<std::size_t>(M), Matrix(n, samples));
    res.error_norms.resize(M, samples);
    res.spread.resize(samples);

    for (Eigen::Index k = 0; k < samples; ++k) {
        const double t = static_cast<double>(k) * dt;
        res.t[static_cast<std::size_t>(k)] = t;
        if (!s.allFinite() || s.cwiseAbs().maxCoeff() > options.divergence_limit) {
            throw DivergenceError("observer network diverged at t = " + std::to_string(t), t);
        }
        const Vector k1 = sys.rhs(s, t, t);
        res.X.col(k) = s.head(n);
        double spread = 0.0;
        for (int i = 0; i < M; ++i) {
            const Vector& xi = sys.xhat()[static_cast<std::size_t>(i)];
            res.xhat[static_cast<std::size_t>(i)].col(k) = xi;
            res.error_norms(i, k) = (s.head(n) - xi).norm();
            for (int j = i + 1; j < M; ++j) {
                spread = std::max(spread, (xi - sys.xhat()[static_cast<std::size_t>(j)]).norm());
            }
        }
        res.spread(k) = spread;
        if (k == steps) {
            break;
        }
        const double th = t + 0.5 * dt;
        const Vector k2 = sys.rhs(s + 0.5 * dt * k1, th, t);
        const Vector k3 = sys.rhs(s + 0.5 * dt * k2, th, t);
        const Vector k4 = sys.rhs(s + dt * k3, t + dt, t);
        s += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return res;
}

ErrorDynamics error_dynamics_matrix(const DuioGains& gains, const SensorGraph& graph) {
    if (gains.M() != graph.M()) {
        throw DimensionError("gains and graph node counts differ");
    }
    std::vector<Matrix> E;
    std::vector<Matrix> K;
    for (const NodeGains& g : gains.nodes) {
        E.push_back(g.E);
        K.push_back(g.K);
    }
    const Matrix laplacian = Matrix(graph.adjacency().rowwise().sum().asDiagonal()) - graph.adjacency();
    ErrorDynamics out;
    out.matrix = coupled_error_matrix(E, K, laplacian);
    out.abscissa = spectral_abscissa(out.matrix);
    return out;
}

double DecouplingResiduals::max() const {
    return std::max({input, unknown, state});
}

std::vector<DecouplingResiduals> verify_decoupling(const PlantModel& model, const DuioGains& gains) {
    if (gains.M() != model.M()) {
        throw DimensionError("gains and model node counts differ");
    }
    const Matrix I = Matrix::Identity(model.n_x(), model.n_x());
    std::vector<DecouplingResiduals> out;
    for (int i = 0; i < model.M(); ++i) {
        const NodeView& v = model.node(i);
        const NodeGains& g = gains.nodes[static_cast<std::size_t>(i)];
        const Matrix P = I - g.H * v.C;
        DecouplingResiduals r;
        r.input = (g.F - P * v.B_m).norm();
        r.unknown = (P * v.B_p).norm();
        r.state = (g.E - (P * model.A() - (g.L - g.E * g.H) * v.C)).norm();
        out.push_back(r);
    }
    return out;
}

ErrorTrajectory simulate_error_ode(const DuioGains& gains, const SensorGraph& graph, const Vector& e0,
                                   double horizon, double dt) {
    const ErrorDynamics dyn = error_dynamics_matrix(gains, graph);
    if (e0.size() != dyn.matrix.rows()) {
        throw DimensionError("e0 must have length M n_x");
    }
    if (!(dt > 0.0) || !(horizon >= dt * (1.0 - 1e-12))) {
        throw DimensionError("simulate_error_ode requires dt > 0 and horizon >= dt");
    }
    const auto steps = static_cast<Eigen::Index>(std::llround(horizon / dt));
    ErrorTrajectory out;
    out.t.resize(static_cast<std::size_t>(steps + 1));
    out.e.resize(e0.size(), steps + 1);
    const Matrix& A = dyn.matrix;
    Vector e = e0;
    for (Eigen::Index k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        if (!e.allFinite() || (e.size() && e.cwiseAbs().maxCoeff() > 1e12)) {
            throw DivergenceError("error dynamics diverged at t = " + std::to_string(t), t);
        }
        out.t[static_cast<std::size_t>(k)] = t;
        out.e.col(k) = e;
        if (k == steps) {
            break;
        }
        const Vector k1 = A * e;
        const Vector k2 = A * (e + 0.5 * dt * k1);
        const Vector k3 = A * (e + 0.5 * dt * k2);
        const Vector k4 = A * (e + dt * k3);
        e += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return out;
}

}  // namespace duio

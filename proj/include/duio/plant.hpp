#pragma once

#include <vector>

#include "duio/linalg.hpp"
#include "duio/signals.hpp"

namespace duio {

// How one sensor node sees the plant:  y_i = C x,
//   B u + E d = B_m u_i + B_p w_i,   w_i = unknown_map * [u_unknown; d].
struct NodeView {
    Matrix C;
    std::vector<int> known_inputs;
    Matrix B_m;
    Matrix B_p;
    Matrix unknown_map;

    int n_y() const { return static_cast<int>(C.rows()); }
    int n_m() const { return static_cast<int>(B_m.cols()); }
    int r() const { return static_cast<int>(B_p.cols()); }
};

// Builds the canonical split B_p = [diag(scale) B_unknown, E]. `unknown_scale`
// rescales the unknown-input columns as seen by this node (empty = all ones).
NodeView make_node_view(const Matrix& B, const Matrix& E, Matrix C, std::vector<int> known_inputs,
                        std::vector<double> unknown_scale = {});

class PlantModel {
public:
    PlantModel(Matrix A, Matrix B, Matrix E, std::vector<NodeView> nodes);

    const Matrix& A() const { return a_; }
    const Matrix& B() const { return b_; }
    const Matrix& E() const { return e_; }
    const std::vector<NodeView>& nodes() const { return nodes_; }
    const NodeView& node(int i) const;

    int n_x() const { return static_cast<int>(a_.rows()); }
    int n_u() const { return static_cast<int>(b_.cols()); }
    int n_d() const { return static_cast<int>(e_.cols()); }
    int M() const { return static_cast<int>(nodes_.size()); }

    std::vector<int> unknown_inputs(int i) const;

    // Per-node signals at one instant, from the plant-level input and disturbance.
    Vector known_input(int i, const Vector& u) const;
    Vector unknown_input(int i, const Vector& u, const Vector& d) const;

    Vector rhs(const Vector& x, const Vector& u, const Vector& d) const;

private:
    Matrix a_;
    Matrix b_;
    Matrix e_;
    std::vector<NodeView> nodes_;
};

struct NodeDynamics {
    Matrix A;
    Matrix B_m;
    Matrix B_p;
};

NodeDynamics node_dynamics_matrices(const PlantModel& model, int i);

struct PlantInputs {
    std::vector<SignalGenerator> u;  // one per column of B
    std::vector<SignalGenerator> d;  // one per column of E

    Vector u_at(double t, double step_start) const;
    Vector d_at(double t, double step_start) const;
};

struct NodeSamples {
    Matrix U;     // n_m x T
    Matrix Y;     // n_y x T
    Matrix Ydot;  // n_y x T
    Matrix W;     // r x T, ground truth for oracles only
};

struct Trajectory {
    std::vector<double> t;
    Matrix X;     // n_x x T
    Matrix Xdot;  // n_x x T
    std::vector<NodeSamples> nodes;

    Eigen::Index size() const { return static_cast<Eigen::Index>(t.size()); }
};

enum class DerivativeMode { Exact, CentralDifference };

struct SimulationOptions {
    DerivativeMode derivatives = DerivativeMode::Exact;
    double divergence_limit = 1e12;
    // Time offset of the first sample; signals are evaluated at absolute time.
    double t0 = 0.0;
};

// Classical fixed-step RK4 on  x' = A x + B u + E d.  Samples are taken at
// t0 + k*dt, k = 0..round(horizon/dt).
Trajectory simulate(const PlantModel& model, const Vector& x0, const PlantInputs& inputs, double horizon,
                    double dt, const SimulationOptions& options = {});

void validate_inputs(const PlantModel& model, const PlantInputs& inputs);

}  // namespace duio

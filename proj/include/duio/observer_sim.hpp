#pragma once

#include <vector>

#include "duio/design_model.hpp"
#include "duio/linalg.hpp"
#include "duio/network.hpp"
#include "duio/plant.hpp"

namespace duio {

struct RunOptions {
    double horizon = 40.0;
    double dt = 1e-3;
    double divergence_limit = 1e12;
    // Additive uniform noise on the online outputs (robustness flag).
    double output_noise = 0.0;
    std::uint64_t noise_seed = 0;
};

struct RunResult {
    std::vector<double> t;
    Matrix X;                    // n_x x T
    std::vector<Matrix> xhat;    // per node, n_x x T
    Matrix error_norms;          // M x T, ||x - xhat_i||
    Vector spread;               // max_{i,j} ||xhat_i - xhat_j|| per sample

    int M() const { return static_cast<int>(xhat.size()); }
    Eigen::Index size() const { return static_cast<Eigen::Index>(t.size()); }
    // Stacked e_G = [x - xhat_1; ...; x - xhat_M] at sample k.
    Vector error_stack(Eigen::Index k) const;
    double final_spread() const { return spread.size() ? spread(spread.size() - 1) : 0.0; }
};

// Checks gains against model and graph dimensions; throws DimensionError.
void check_consistency(const PlantModel& model, const SensorGraph& graph, const DuioGains& gains);

// Plant and every node observer integrated as one coupled ODE with RK4; the
// consensus term uses the same-stage neighbour estimates.
RunResult run(const PlantModel& model, const SensorGraph& graph, const DuioGains& gains, const Vector& x0,
              const std::vector<Vector>& z0, const PlantInputs& inputs, const RunOptions& options = {});

struct ErrorDynamics {
    Matrix matrix;
    double abscissa = 0.0;
};

// blockdiag(E_i) - blockdiag(K_i)(L kron I)
ErrorDynamics error_dynamics_matrix(const DuioGains& gains, const SensorGraph& graph);

struct DecouplingResiduals {
    double input = 0.0;        // ||F - (I - H C) B_m||
    double unknown = 0.0;      // ||(I - H C) B_p||
    double state = 0.0;        // ||E - (I - H C) A + (L - E H) C||
    double max() const;
};

std::vector<DecouplingResiduals> verify_decoupling(const PlantModel& model, const DuioGains& gains);

struct ErrorTrajectory {
    std::vector<double> t;
    Matrix e;  // (M n_x) x T
};

ErrorTrajectory simulate_error_ode(const DuioGains& gains, const SensorGraph& graph, const Vector& e0,
                                   double horizon, double dt);

}  // namespace duio

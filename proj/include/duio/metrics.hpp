#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "duio/datagen.hpp"
#include "duio/design_data.hpp"
#include "duio/design_model.hpp"
#include "duio/network.hpp"
#include "duio/observer_sim.hpp"
#include "duio/parallel.hpp"
#include "duio/plant.hpp"

namespace duio {

// Least-squares model of one node: Xdot ~ A_hat X + B_m_hat U, C_hat = Y X^+.
// The unknown-input term is not modelled.
struct IdentifiedModel {
    Matrix A_hat;
    Matrix B_m_hat;
    Matrix C_hat;
    double residual = 0.0;  // ||Xdot - [A_hat B_m_hat] [X; U]||_F
};

// Throws RankError when [X; U] lacks full row rank.
IdentifiedModel identify_least_squares(const NodeData& data, const RankPolicy& policy = {});

// ID-DUIO baseline: identified (A, B_m, C) per node plus the granted B_p,
// pushed through the model-based construction. Throws PreconditionError when
// no grant is supplied for some node.
DuioGains build_id_gains(const std::vector<NodeData>& data, const std::vector<Matrix>& granted_B_p,
                         const SensorGraph& graph, const DesignOptions& options = {});

struct RunMetrics {
    Vector mse;  // per node
    Vector mae;  // per node
    double mse_mean = 0.0;
    double mae_mean = 0.0;
};

// MSE_i = (1/T) int_0^T ||e_i||^2, MAE_i = (1/T) int_0^T ||e_i||, trapezoidal
// rule on the run grid. Throws EmptyRunError for fewer than two samples.
RunMetrics compute_mse_mae(const RunResult& run);

enum class Method { Model, Data, Id };

std::string method_name(Method m);
Method parse_method(const std::string& name);

// Online conditions of one experiment. Plant input columns known to some node
// follow u' = known_rate u with u(0) uniform in [known_low, known_high]; the
// other columns carry `unknown` (or zero); disturbances are uniform in
// [-disturbance_amplitude, disturbance_amplitude] held for disturbance_hold
// (0 = one integration step).
struct ScenarioSpec {
    double known_rate = -0.69314718055994531;  // ln 0.5
    double known_low = 0.0;
    double known_high = 1.0;
    bool unknown_active = true;
    Sinusoid unknown{0.2, 0.2, 2.0};
    double disturbance_amplitude = 0.1;
    double disturbance_hold = 0.0;
    double x0_amplitude = 1.0;
};

struct Scenario {
    Vector x0;
    PlantInputs inputs;
};

Scenario realize(const PlantModel& model, const ScenarioSpec& spec, double dt, std::uint64_t seed);

struct MonteCarloSetup {
    PlantModel model;
    SensorGraph graph;
    int N = 50;
    Excitation excitation{};
    DesignOptions design{};
    DataDesignOptions data_design{};
    RunOptions run{};
    ScenarioSpec scenario{};
    std::vector<Method> methods{Method::Model, Method::Data, Method::Id};
    // ID-DUIO is only run when the true B_p of every node may be handed over.
    bool grant_unknown_matrices = false;
};

struct ExperimentOutcome {
    int index = 0;
    std::uint64_t seed = 0;
    std::vector<RunMetrics> per_method;  // aligned with setup.methods
};

struct MetricSummary {
    Method method = Method::Model;
    double mse = 0.0;
    double mae = 0.0;
    Vector node_mse;  // mean over experiments
    Vector node_mae;
    int experiments = 0;
    std::uint64_t seed = 0;
};

struct CompareResult {
    std::vector<MetricSummary> summaries;  // aligned with setup.methods
    std::vector<ExperimentOutcome> experiments;
};

// One seeded experiment: fresh offline datasets, designs for every requested
// method, one closed-loop run each on the same online scenario. A design
// failure is rethrown as DesignError naming the method and seed.
ExperimentOutcome run_experiment(const MonteCarloSetup& setup, int index, std::uint64_t seed);

// K experiments with seeds derive_seed(master_seed, k). Both execution paths
// produce bit-identical results.
CompareResult monte_carlo_compare(const MonteCarloSetup& setup, int K, std::uint64_t master_seed,
                                  Execution execution = Execution::Parallel);

}  // namespace duio

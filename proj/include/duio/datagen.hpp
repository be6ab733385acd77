#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "duio/linalg.hpp"
#include "duio/parallel.hpp"
#include "duio/plant.hpp"

namespace duio {

// Offline data of one node as the design code is allowed to see it. The
// unknown-input samples are deliberately absent from this type.
struct NodeData {
    int node = 0;
    std::uint64_t seed = 0;
    std::vector<double> times;
    Matrix U;     // n_m x N
    Matrix Y;     // n_y x N
    Matrix Ydot;  // n_y x N
    Matrix X;     // n_x x N
    Matrix Xdot;  // n_x x N

    int N() const { return static_cast<int>(X.cols()); }
    int n_x() const { return static_cast<int>(X.rows()); }
    int n_m() const { return static_cast<int>(U.rows()); }
    int n_y() const { return static_cast<int>(Y.rows()); }

    // Throws DimensionError unless every block has N columns.
    void validate() const;
};

// Generated dataset: design view plus ground-truth unknown inputs retained for
// test oracles only.
struct NodeDataset {
    NodeData data;
    std::optional<Matrix> W_validation;  // r x N
    int attempts = 1;
};

struct Excitation {
    // Fixed signals per plant input / disturbance column. When empty, each
    // channel gets an independent piecewise-constant uniform signal in
    // [-amplitude, amplitude] held for one sample interval.
    std::vector<SignalGenerator> u;
    std::vector<SignalGenerator> d;
    double amplitude = 1.0;

    bool random_initial_state = true;
    double x0_amplitude = 1.0;

    int samples_per_segment = 10;
    double sample_interval = 0.1;
    double dt = 0.01;
    // Sample at a random integration step inside each sample window instead of
    // at its start.
    bool jitter = false;

    // Additive uniform noise in [-a, a] on Y and Ydot (robustness studies only).
    double output_noise = 0.0;

    DerivativeMode derivatives = DerivativeMode::Exact;
    int max_attempts = 5;
    RankPolicy rank_policy{};
};

struct RankAssumptionReport {
    bool holds = false;
    int rank = 0;
    int required = 0;
    Vector singular_values;
    double threshold = 0.0;
};

// rank([U; W; X]) == n_m + r + n_x. Reads the ground-truth W; throws
// OracleUnavailableError when it is missing.
RankAssumptionReport check_rank_assumption(const NodeDataset& ds, const RankPolicy& policy = {});

NodeDataset collect(const PlantModel& model, int i, int N, const Excitation& excitation, std::uint64_t seed);

std::vector<NodeDataset> collect_all(const PlantModel& model, int N, const Excitation& excitation,
                                     std::uint64_t seed, Execution execution = Execution::Parallel);

struct OnlineSample {
    Vector u;
    Vector y;
    Vector ydot;
    Vector x;
    Vector xdot;
};

struct CompatibilityReport {
    bool compatible = false;
    double residual = 0.0;  // ||v - P v|| / ||v||, P projector onto the data range
};

inline constexpr double kCompatibilityTolerance = 1e-8;

// Membership of the stacked online sample in range([U; Y; Ydot; X; Xdot]).
CompatibilityReport check_compatibility(const NodeData& data, const OnlineSample& sample,
                                        double tolerance = kCompatibilityTolerance,
                                        const RankPolicy& policy = {});

// Column k of a simulated trajectory viewed from node i.
OnlineSample online_sample(const Trajectory& traj, int i, Eigen::Index k);

}  // namespace duio

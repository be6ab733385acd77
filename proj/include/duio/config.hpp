#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "duio/datagen.hpp"
#include "duio/design_data.hpp"
#include "duio/design_model.hpp"
#include "duio/metrics.hpp"
#include "duio/network.hpp"
#include "duio/observer_sim.hpp"
#include "duio/plant.hpp"

namespace duio {

struct NodeSpec {
    Matrix C;
    std::vector<int> known_inputs;     // 0-based columns of B
    std::vector<double> unknown_scale;  // per unknown column; empty = ones
};

struct PlantSpec {
    std::string preset;  // "two-mass-spring" or empty for explicit matrices
    Matrix A;
    Matrix B;
    Matrix E;
    std::vector<NodeSpec> nodes;
};

struct GraphSpec {
    std::string generator = "ring";  // ring, complete, star, path, or "edges"
    int size = 0;                    // 0 = number of plant nodes
    std::vector<WeightedEdge> edges; // 0-based endpoints
};

struct DataSpec {
    int N = 50;
    Excitation excitation{};
};

struct DesignSpec {
    DesignOptions options{};
    double data_equation_tolerance = 1e-6;
    bool use_min_norm = false;
    // ID-DUIO may use the true B_p of every node only when this is set.
    bool grant_unknown_matrices = false;
};

enum class InitialObserverState { Zero, Exact };

struct RunSpec {
    RunOptions options{};
    InitialObserverState z0 = InitialObserverState::Zero;
    ScenarioSpec scenario{};
};

struct CompareSpec {
    int K = 100;
    std::vector<Method> methods{Method::Model, Method::Data, Method::Id};
    bool parallel = true;
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    PlantSpec plant{"two-mass-spring", {}, {}, {}, {}};
    GraphSpec graph{};
    DataSpec data{};
    DesignSpec design{};
    RunSpec run{};
    CompareSpec compare{};
};

// Throws ConfigError on unknown keys, wrong types or invalid values.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// Every field with its resolved value.
nlohmann::json resolved_config(const ExperimentConfig& cfg);

PlantModel make_plant(const ExperimentConfig& cfg);
SensorGraph make_graph(const ExperimentConfig& cfg, int M);
DataDesignOptions make_data_design(const ExperimentConfig& cfg);
MonteCarloSetup make_setup(const ExperimentConfig& cfg);

// Seeds of the individual pipeline stages, all derived from cfg.seed.
std::uint64_t data_seed(const ExperimentConfig& cfg);
std::uint64_t scenario_seed(const ExperimentConfig& cfg);

}  // namespace duio

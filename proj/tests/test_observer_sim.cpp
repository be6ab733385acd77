#include <cmath>

#include <doctest.h>

#include "duio/design_model.hpp"
#include "duio/errors.hpp"
#include "duio/observer_sim.hpp"
#include "duio/presets.hpp"
#include "support.hpp"

using namespace duio;

namespace {

DuioGains benchmark_gains() {
    DesignOptions o;
    o.gamma_override = 5.0;
    return build_model_based_gains(two_mass_spring(), two_mass_spring_graph(), o);
}

std::vector<Vector> zero_states(int M, int n) { return std::vector<Vector>(static_cast<std::size_t>(M), Vector::Zero(n)); }

Vector initial_state() {
    Vector x0(4);
    x0 << 0.7, -0.3, 0.2, 0.5;
    return x0;
}

}  // namespace

TEST_SUITE("observer_sim") {

TEST_CASE("matched initial estimates stay exact under unknown inputs") {
    const PlantModel m = two_mass_spring();
    const DuioGains g = benchmark_gains();
    const Vector x0 = initial_state();
    std::vector<Vector> z0;
    for (int i = 0; i < m.M(); ++i) {
        const NodeGains& n = g.nodes[static_cast<std::size_t>(i)];
        z0.push_back((Matrix::Identity(4, 4) - n.H * m.node(i).C) * x0);
    }
    RunOptions o;
    o.horizon = 10.0;
    o.dt = 1e-3;
    const RunResult r = run(m, two_mass_spring_graph(), g, x0, z0, two_mass_spring_inputs(0.8, 0.1, 0.05, 3), o);
    CHECK(r.error_norms.maxCoeff() < 1e-9);
    CHECK(r.spread.maxCoeff() < 1e-9);
}

TEST_CASE("network run agrees with the autonomous error system") {
    const PlantModel m = two_mass_spring();
    const SensorGraph graph = two_mass_spring_graph();
    const DuioGains g = benchmark_gains();
    RunOptions o;
    o.horizon = 10.0;
    o.dt = 1e-3;
    const RunResult r = run(m, graph, g, initial_state(), zero_states(5, 4), two_mass_spring_inputs(1.0, 0.1, 0.01, 9), o);
    const ErrorTrajectory e = simulate_error_ode(g, graph, r.error_stack(0), o.horizon, o.dt);
    REQUIRE(e.t.size() == r.t.size());
    double worst = 0.0;
    for (Eigen::Index k = 0; k < r.size(); ++k) {
        worst = std::max(worst, (r.error_stack(k) - e.e.col(k)).norm());
    }
    CHECK(worst < 1e-7);

    SUBCASE("plant part equals a standalone plant simulation") {
        const Trajectory p = simulate(m, initial_state(), two_mass_spring_inputs(1.0, 0.1, 0.01, 9), o.horizon, o.dt);
        CHECK((p.X - r.X).norm() < 1e-10);
    }
}

TEST_CASE("estimation error does not see the unknown input") {
    const PlantModel m = two_mass_spring();
    const SensorGraph graph = two_mass_spring_graph();
    const DuioGains g = benchmark_gains();
    RunOptions o;
    o.horizon = 10.0;
    PlantInputs quiet = two_mass_spring_inputs(0.5, 0.0, 0.1, 1);
    quiet.u[1] = Zero{};
    const PlantInputs loud = two_mass_spring_inputs(0.5, 0.3, 0.1, 2);
    const RunResult a = run(m, graph, g, initial_state(), zero_states(5, 4), quiet, o);
    const RunResult b = run(m, graph, g, initial_state(), zero_states(5, 4), loud, o);
    CHECK((a.X - b.X).norm() > 1e-2);
    double worst = 0.0;
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        worst = std::max(worst, (a.error_stack(k) - b.error_stack(k)).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("single observer follows the matrix exponential of its error matrix") {
    const PlantModel full = two_mass_spring();
    const DuioGains g5 = benchmark_gains();
    const PlantModel m(full.A(), full.B(), full.E(), {full.node(g5.leader)});
    const SensorGraph graph(Matrix::Zero(1, 1));
    const DuioGains g = build_model_based_gains(m, graph);
    REQUIRE(g.M() == 1);
    RunOptions o;
    o.horizon = 5.0;
    o.dt = 1e-3;
    const Vector x0 = initial_state();
    const RunResult r = run(m, graph, g, x0, zero_states(1, 4), two_mass_spring_inputs(1.0, 0.1, 0.02, 4), o);
    const Vector e0 = r.error_stack(0);
    const Vector expected = support::expm(g.nodes[0].E * o.horizon) * e0;
    CHECK((r.error_stack(r.size() - 1) - expected).norm() < 1e-8 * std::max(1.0, e0.norm()));
}

TEST_CASE("error envelope decays at the spectral abscissa") {
    const PlantModel m = two_mass_spring();
    const SensorGraph graph = two_mass_spring_graph();
    const DuioGains g = benchmark_gains();
    const ErrorDynamics ed = error_dynamics_matrix(g, graph);
    CHECK(ed.abscissa < 0.0);
    CHECK(ed.abscissa == doctest::Approx(g.spectral_abscissa));
    RunOptions o;
    o.horizon = 40.0;
    o.dt = 1e-2;
    const RunResult r = run(m, graph, g, initial_state(), zero_states(5, 4), two_mass_spring_inputs(1.0, 0.1, 0.1, 5), o);
    // Window ends well before the error reaches rounding level.
    const Eigen::Index a = 200;
    const Eigen::Index b = 800;
    const double slope = std::log(r.error_stack(b).norm() / r.error_stack(a).norm()) / 6.0;
    CHECK(slope < ed.abscissa + 0.1);
    CHECK(r.error_norms.col(r.size() - 1).maxCoeff() < 1e-2);
}

TEST_CASE("perturbed gains lose decoupling") {
    const PlantModel m = two_mass_spring();
    DuioGains g = benchmark_gains();
    for (const auto& res : verify_decoupling(m, g)) {
        CHECK(res.max() < 1e-10);
    }
    g.nodes[0].H(0, 0) += 0.1;
    const auto res = verify_decoupling(m, g);
    CHECK(res[0].unknown > 1e-3);
    CHECK(res[1].max() < 1e-10);
}

TEST_CASE("dimension checks") {
    const PlantModel m = two_mass_spring();
    const SensorGraph graph = two_mass_spring_graph();
    const DuioGains g = benchmark_gains();
    const PlantInputs in = two_mass_spring_inputs(1.0, 0.0, 0.1, 1);
    RunOptions o;
    o.horizon = 0.1;
    CHECK_THROWS_AS(run(m, graph, g, Vector::Zero(3), zero_states(5, 4), in, o), DimensionError);
    CHECK_THROWS_AS(run(m, graph, g, Vector::Zero(4), zero_states(4, 4), in, o), DimensionError);
    CHECK_THROWS_AS(run(m, graph, g, Vector::Zero(4), zero_states(5, 3), in, o), DimensionError);
    CHECK_THROWS_AS(run(m, ring_graph(4), g, Vector::Zero(4), zero_states(5, 4), in, o), DimensionError);
    DuioGains bad = g;
    bad.nodes[2].L = Matrix::Zero(4, 1);
    CHECK_THROWS_AS(check_consistency(m, graph, bad), DimensionError);
    CHECK_THROWS_AS(simulate_error_ode(g, graph, Vector::Zero(19), 1.0, 0.1), DimensionError);
}

TEST_CASE("unstable error dynamics are reported as divergence") {
    const PlantModel m = two_mass_spring();
    const SensorGraph graph = two_mass_spring_graph();
    DuioGains g = benchmark_gains();
    for (auto& n : g.nodes) {
        n.E += 5.0 * Matrix::Identity(4, 4);
    }
    RunOptions o;
    o.horizon = 40.0;
    o.dt = 1e-2;
    o.divergence_limit = 1e6;
    CHECK_THROWS_AS(run(m, graph, g, initial_state(), zero_states(5, 4), two_mass_spring_inputs(1.0, 0.0, 0.1, 1), o),
                    DivergenceError);
}

}

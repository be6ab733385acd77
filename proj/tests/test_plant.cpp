#include <cmath>
#include <random>

#include <doctest.h>

#include "duio/errors.hpp"
#include "duio/plant.hpp"
#include "duio/presets.hpp"
#include "support.hpp"

using namespace duio;

TEST_SUITE("plant") {

TEST_CASE("benchmark node split") {
    const PlantModel m = two_mass_spring();
    REQUIRE(m.M() == 5);
    REQUIRE(m.n_x() == 4);
    const NodeView& n1 = m.node(0);

    Vector bm(4);
    bm << 0, 1.3333, 0, 0;
    CHECK((n1.B_m - bm).norm() == 0.0);
    Matrix bp(4, 2);
    bp << 1, 0.1, 1, 0, 1, 0.1, 1, 0;
    CHECK((n1.B_p - bp).norm() < 1e-15);
    CHECK(n1.r() == 2);
    CHECK(n1.n_y() == 4);

    // Node 3 sees the unknown input column scaled by 0.33.
    CHECK(m.node(2).B_p(0, 0) == doctest::Approx(0.33));
    CHECK_THROWS_AS(m.node(5), IndexError);
}

TEST_CASE("fully measured inputs leave B_p empty") {
    Matrix A = -Matrix::Identity(2, 2);
    Matrix B(2, 2);
    B << 1, 0, 0, 1;
    const Matrix E(2, 0);
    const NodeView v = make_node_view(B, E, Matrix::Identity(2, 2), {0, 1});
    CHECK(v.r() == 0);
    CHECK((v.B_m - B).norm() == 0.0);
    const PlantModel m(A, B, E, {v});
    CHECK(m.node(0).B_p.cols() == 0);
}

TEST_CASE("rank-deficient unknown-input matrix is rejected") {
    Matrix A = -Matrix::Identity(3, 3);
    Matrix B(3, 2);
    B << 1, 2, 1, 2, 1, 2;
    const Matrix E(3, 0);
    const NodeView v = make_node_view(B, E, Matrix::Identity(3, 3), {});
    CHECK_THROWS_AS(PlantModel(A, B, E, {v}), DimensionError);
}

TEST_CASE("split reconstructs the plant input for random signals") {
    const PlantModel m = two_mass_spring();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u01(-1.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        Vector u(m.n_u());
        Vector d(m.n_d());
        for (int k = 0; k < u.size(); ++k) {
            u(k) = u01(rng);
        }
        for (int k = 0; k < d.size(); ++k) {
            d(k) = u01(rng);
        }
        const Vector full = m.B() * u + m.E() * d;
        for (int i = 0; i < m.M(); ++i) {
            const NodeView& v = m.node(i);
            const Vector split = v.B_m * m.known_input(i, u) + v.B_p * m.unknown_input(i, u, d);
            worst = std::max(worst, (split - full).norm());
        }
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("output derivative is C times state derivative on every sample") {
    const PlantModel m = two_mass_spring();
    const Vector x0 = Vector::Constant(4, 0.3);
    const PlantInputs in = two_mass_spring_inputs(0.7, 0.1, 0.01, 9);
    const Trajectory tr = simulate(m, x0, in, 5.0, 0.01);
    REQUIRE(tr.size() == 501);
    double worst = 0.0;
    for (int i = 0; i < m.M(); ++i) {
        const NodeSamples& ns = tr.nodes[static_cast<std::size_t>(i)];
        worst = std::max(worst, (ns.Ydot - m.node(i).C * tr.Xdot).cwiseAbs().maxCoeff());
        worst = std::max(worst, (ns.Y - m.node(i).C * tr.X).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-13);
}

TEST_CASE("RK4 converges with fourth order against the matrix exponential") {
    // Inputs generated by linear exosystems so the whole thing is one
    // autonomous linear system: z = [x; u_known; cos(.2t+2); sin(.2t+2)].
    const PlantModel m = two_mass_spring();
    const double rate = std::log(0.5);
    Matrix Aa = Matrix::Zero(7, 7);
    Aa.topLeftCorner(4, 4) = m.A();
    Aa.block(0, 4, 4, 1) = m.B().col(0);
    Aa.block(0, 5, 4, 1) = 0.2 * m.B().col(1);
    Aa(4, 4) = rate;
    Aa(5, 6) = -0.2;
    Aa(6, 5) = 0.2;

    Vector x0(4);
    x0 << 0.5, -0.2, 0.1, 0.3;
    const double u0 = 0.8;
    Vector z0(7);
    z0 << x0, u0, std::cos(2.0), std::sin(2.0);
    const double T = 4.0;
    const Vector exact = (support::expm(Aa * T) * z0).head(4);

    PlantInputs in;
    in.u = {AutonomousLinear{rate, u0}, Sinusoid{0.2, 0.2, 2.0}};
    in.d = {Zero{}};
    const double e1 = (simulate(m, x0, in, T, 0.1).X.rightCols(1) - exact).norm();
    const double e2 = (simulate(m, x0, in, T, 0.05).X.rightCols(1) - exact).norm();
    CHECK(e1 < 1e-3);
    CHECK(e1 / e2 >= 12.0);
}

TEST_CASE("finite-difference derivatives approximate the exact ones") {
    const PlantModel m = two_mass_spring();
    PlantInputs in;
    in.u = {AutonomousLinear{std::log(0.5), 0.5}, Sinusoid{0.2, 0.2, 2.0}};
    in.d = {Zero{}};
    const Vector x0 = Vector::Constant(4, 0.2);
    SimulationOptions fd;
    fd.derivatives = DerivativeMode::CentralDifference;
    const Trajectory a = simulate(m, x0, in, 2.0, 1e-3);
    const Trajectory b = simulate(m, x0, in, 2.0, 1e-3, fd);
    CHECK((a.Xdot - b.Xdot).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("simulation errors") {
    const PlantModel m = two_mass_spring();
    PlantInputs in;
    in.u = {Zero{}, Zero{}};
    in.d = {Zero{}};
    CHECK_THROWS_AS(simulate(m, Vector::Zero(3), in, 1.0, 0.1), DimensionError);
    CHECK_THROWS_AS(simulate(m, Vector::Zero(4), in, 1.0, 0.0), DimensionError);
    PlantInputs short_in;
    short_in.u = {Zero{}};
    CHECK_THROWS_AS(simulate(m, Vector::Zero(4), short_in, 1.0, 0.1), DimensionError);

    Matrix A = Matrix::Identity(1, 1) * 50.0;
    Matrix B = Matrix::Zero(1, 1);
    const NodeView v = make_node_view(B, Matrix(1, 0), Matrix::Identity(1, 1), {0});
    const PlantModel unstable(A, B, Matrix(1, 0), {v});
    PlantInputs z;
    z.u = {Zero{}};
    CHECK_THROWS_AS(simulate(unstable, Vector::Ones(1), z, 10.0, 0.01), DivergenceError);
}

}

#include <random>
#include <string>

#include <doctest.h>

#include "duio/datagen.hpp"
#include "duio/design_data.hpp"
#include "duio/errors.hpp"
#include "duio/presets.hpp"
#include "support.hpp"

using namespace duio;

TEST_SUITE("datagen") {

TEST_CASE("benchmark datasets satisfy the rank assumption") {
    const PlantModel m = two_mass_spring();
    const auto ds = collect_all(m, 50, Excitation{}, 7);
    REQUIRE(ds.size() == 5);
    for (const NodeDataset& d : ds) {
        const RankAssumptionReport r = check_rank_assumption(d);
        CHECK(r.holds);
        CHECK(r.required == 1 + 2 + 4);
        CHECK(d.data.N() == 50);
        CHECK(d.data.times.size() == 50);
        // Samples are exact: Xdot = A X + B_m U + B_p W.
        const NodeView& v = m.node(d.data.node);
        const Matrix rhs = m.A() * d.data.X + v.B_m * d.data.U + v.B_p * *d.W_validation;
        CHECK((d.data.Xdot - rhs).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((d.data.Y - v.C * d.data.X).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("too few samples") {
    const PlantModel m = two_mass_spring();
    CHECK_THROWS_AS(collect(m, 0, 3, Excitation{}, 1), ExcitationError);
    CHECK_THROWS_AS(collect(m, 0, 6, Excitation{}, 1), ExcitationError);
    CHECK_NOTHROW(collect(m, 0, 7, Excitation{}, 1));
}

TEST_CASE("constant excitation is reported with the deficient block") {
    const PlantModel m = two_mass_spring();
    Excitation ex;
    ex.u = {Zero{}, Sinusoid{1.0, 1.3, 0.0}};
    ex.d = {Sinusoid{1.0, 2.1, 0.5}};
    ex.max_attempts = 2;
    try {
        collect(m, 0, 50, ex, 3);
        FAIL("expected an ExcitationError");
    } catch (const ExcitationError& e) {
        CHECK(std::string(e.what()).find("U (known inputs)") != std::string::npos);
    }
}

TEST_CASE("collection is deterministic and independent of the execution path") {
    const PlantModel m = two_mass_spring();
    const auto a = collect_all(m, 30, Excitation{}, 99, Execution::Serial);
    const auto b = collect_all(m, 30, Excitation{}, 99, Execution::Parallel);
    const auto c = collect_all(m, 30, Excitation{}, 100, Execution::Serial);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].data.X == b[i].data.X);
        CHECK(a[i].data.Xdot == b[i].data.Xdot);
        CHECK(a[i].data.Ydot == b[i].data.Ydot);
        CHECK(*a[i].W_validation == *b[i].W_validation);
        CHECK(a[i].data.X != c[i].data.X);
    }
}

TEST_CASE("design view carries no unknown-input samples") {
    const PlantModel m = two_mass_spring();
    auto ds = collect_all(m, 50, Excitation{}, 5);
    const auto with_w = analyze_node(design_view(ds)[0]);
    for (auto& d : ds) {
        d.W_validation.reset();
    }
    const auto without_w = analyze_node(design_view(ds)[0]);
    CHECK(with_w.T_x == without_w.T_x);
    CHECK(with_w.T_y == without_w.T_y);
    CHECK_THROWS_AS(check_rank_assumption(ds[0]), OracleUnavailableError);
}

TEST_CASE("options change the data as documented") {
    const PlantModel m = two_mass_spring();
    Excitation noisy;
    noisy.output_noise = 1e-3;
    const auto clean = collect(m, 0, 20, Excitation{}, 8);
    const auto dirty = collect(m, 0, 20, noisy, 8);
    CHECK(clean.data.X == dirty.data.X);
    const double dy = (clean.data.Y - dirty.data.Y).cwiseAbs().maxCoeff();
    CHECK(dy > 0.0);
    CHECK(dy <= 1e-3);

    Excitation jitter;
    jitter.jitter = true;
    const auto j = collect(m, 0, 20, jitter, 8);
    CHECK(j.data.times != clean.data.times);
}

TEST_CASE("data compatibility") {
    const PlantModel m = two_mass_spring();
    const auto ds = collect_all(m, 50, Excitation{}, 21);
    const PlantInputs in = two_mass_spring_inputs(0.6, 0.1, 0.01, 4);
    Vector x0(4);
    x0 << 0.2, -0.4, 0.5, 0.1;
    const Trajectory tr = simulate(m, x0, in, 3.0, 0.01);
    for (int i = 0; i < m.M(); ++i) {
        for (Eigen::Index k = 0; k < tr.size(); k += 30) {
            CHECK(check_compatibility(ds[static_cast<std::size_t>(i)].data, online_sample(tr, i, k)).compatible);
        }
    }

    OnlineSample s = online_sample(tr, 0, 50);
    s.xdot(1) += 0.05;
    const CompatibilityReport r = check_compatibility(ds[0].data, s);
    CHECK_FALSE(r.compatible);
    CHECK(r.residual > 1e-4);

    OnlineSample bad = s;
    bad.x = Vector::Zero(3);
    CHECK_THROWS_AS(check_compatibility(ds[0].data, bad), DimensionError);
}

}

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "duio/config.hpp"
#include "duio/design_data.hpp"
#include "duio/design_model.hpp"
#include "duio/errors.hpp"
#include "duio/io.hpp"
#include "duio/metrics.hpp"
#include "duio/observer_sim.hpp"
#include "duio/presets.hpp"
#include "support.hpp"

using namespace duio;

namespace {

const std::string kCli = DUIO_CLI_PATH;
const std::string kBenchmark = std::string(DUIO_SOURCE_DIR) + "/configs/benchmark.json";

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

DesignOptions benchmark_design() {
    DesignOptions o;
    o.gamma_override = 5.0;
    return o;
}

DuioGains data_gains(std::uint64_t seed) {
    const auto data = design_view(collect_all(two_mass_spring(), 50, Excitation{}, seed));
    return build_data_driven_gains(analyze_nodes(data), two_mass_spring_graph(), benchmark_design());
}

std::vector<Vector> zeros(int M, int n) { return std::vector<Vector>(static_cast<std::size_t>(M), Vector::Zero(n)); }

Outcome decoupling() {
    const PlantModel m = two_mass_spring();
    double worst = 0.0;
    for (const DuioGains& g : {build_model_based_gains(m, two_mass_spring_graph(), benchmark_design()), data_gains(11)}) {
        for (const auto& r : verify_decoupling(m, g)) {
            worst = std::max(worst, r.max());
        }
    }
    return {worst < 1e-6, fmt("max residual %.2e (< 1e-6)", worst)};
}

Outcome insensitivity() {
    const PlantModel m = two_mass_spring();
    const SensorGraph graph = two_mass_spring_graph();
    const DuioGains g = data_gains(12);
    RunOptions o;
    o.horizon = 10.0;
    o.dt = 1e-3;
    Vector x0(4);
    x0 << 0.4, -0.2, 0.9, 0.1;
    PlantInputs quiet = two_mass_spring_inputs(1.0, 0.0, 0.01, 1);
    quiet.u[1] = Zero{};
    const PlantInputs loud = two_mass_spring_inputs(1.0, 0.1, 0.01, 2);
    const RunResult a = run(m, graph, g, x0, zeros(5, 4), quiet, o);
    const RunResult b = run(m, graph, g, x0, zeros(5, 4), loud, o);
    double worst = 0.0;
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        worst = std::max(worst, (a.error_stack(k) - b.error_stack(k)).cwiseAbs().maxCoeff());
    }
    return {worst < 1e-8, fmt("sup |e_w - e_0| = %.2e over [0, 10] (< 1e-8)", worst)};
}

Outcome model_data_agreement() {
    std::mt19937_64 rng(8080);
    int systems = 0;
    int rank_agree = 0;
    int detect_cases = 0;
    int detect_agree = 0;
    for (int k = 0; k < 50; ++k) {
        const auto p = support::random_node_plant(rng, k);
        const NodeDataset ds = collect(p.model, 0, 40, Excitation{}, static_cast<std::uint64_t>(1000 + k));
        ++systems;
        const bool solvable = check_rank_condition(p.model, 0);
        if (test_rank_equality(ds.data).holds == solvable) {
            ++rank_agree;
        }
        if (solvable) {
            ++detect_cases;
            if (test_detectability_from_data(ds.data).holds == check_detectability(p.model, 0).detectable) {
                ++detect_agree;
            }
        }
    }
    return {rank_agree == systems && detect_agree == detect_cases,
            std::to_string(rank_agree) + "/" + std::to_string(systems) + " rank tests, " + std::to_string(detect_agree) +
                "/" + std::to_string(detect_cases) + " detectability tests agree"};
}

Outcome gain_equivalence() {
    const DuioGains mb = build_model_based_gains(two_mass_spring(), two_mass_spring_graph(), benchmark_design());
    const DuioGains dd = data_gains(13);
    double worst = 0.0;
    for (int i = 0; i < mb.M(); ++i) {
        const auto& a = mb.nodes[static_cast<std::size_t>(i)];
        const auto& b = dd.nodes[static_cast<std::size_t>(i)];
        for (double d : {(a.E - b.E).cwiseAbs().maxCoeff(), (a.F - b.F).cwiseAbs().maxCoeff(),
                         (a.L - b.L).cwiseAbs().maxCoeff(), (a.H - b.H).cwiseAbs().maxCoeff(),
                         (a.K - b.K).cwiseAbs().maxCoeff()}) {
            worst = std::max(worst, d);
        }
    }
    const bool same_leader = mb.leader == dd.leader;
    return {same_leader && worst < 1e-6, fmt("max blockwise difference %.2e (< 1e-6)", worst)};
}

Outcome stability() {
    const PlantModel m = two_mass_spring();
    int designs = 0;
    int hurwitz = 0;
    double worst = -1e300;
    for (int k = 0; k < 20; ++k) {
        const SensorGraph graph = random_connected_graph(5, 0.3, 500 + static_cast<std::uint64_t>(k));
        const double bound = build_model_based_gains(m, graph).gamma_bound;
        for (double factor : {1.001, 1.5, 3.0, 10.0, 100.0}) {
            DesignOptions o;
            o.gamma_override = factor * bound;
            ++designs;
            try {
                const DuioGains g = build_model_based_gains(m, graph, o);
                const double a = error_dynamics_matrix(g, graph).abscissa;
                worst = std::max(worst, a);
                hurwitz += a < 0.0 ? 1 : 0;
            } catch (const DesignError&) {
            }
        }
    }
    const DuioGains g5 = build_model_based_gains(m, two_mass_spring_graph(), benchmark_design());
    const double a5 = error_dynamics_matrix(g5, two_mass_spring_graph()).abscissa;
    return {hurwitz == designs && a5 < 0.0,
            std::to_string(hurwitz) + "/" + std::to_string(designs) + " Hurwitz (worst abscissa " +
                fmt("%.3g", worst) + "), gamma = 5 abscissa " + fmt("%.3g", a5)};
}

Outcome convergence() {
    const PlantModel m = two_mass_spring();
    const SensorGraph graph = two_mass_spring_graph();
    const DuioGains g = data_gains(14);
    RunOptions o;
    o.horizon = 40.0;
    o.dt = 1e-3;
    ScenarioSpec quiet;
    quiet.disturbance_amplitude = 0.0;
    ScenarioSpec noisy = quiet;
    noisy.disturbance_amplitude = 0.1;
    const Scenario a = realize(m, quiet, o.dt, 99);
    const Scenario b = realize(m, noisy, o.dt, 99);
    const RunResult ra = run(m, graph, g, a.x0, zeros(5, 4), a.inputs, o);
    const RunResult rb = run(m, graph, g, b.x0, zeros(5, 4), b.inputs, o);
    const double final_error = ra.error_norms.col(ra.size() - 1).maxCoeff();
    const double spread = ra.final_spread();
    auto tail_mean = [](const RunResult& r) {
        double s = 0.0;
        int n = 0;
        for (Eigen::Index k = 0; k < r.size(); ++k) {
            if (r.t[static_cast<std::size_t>(k)] >= 30.0) {
                s += r.error_norms.col(k).mean();
                ++n;
            }
        }
        return s / n;
    };
    const double ta = tail_mean(ra);
    const double tb = tail_mean(rb);
    // Both tails sit at a few ulps once the error has decayed; compare above that floor.
    const double floor = 1e-12;
    const double ratio = (tb + floor) / (ta + floor);
    char buf[256];
    std::snprintf(buf, sizeof buf, "max ||e_i(40)|| %.2e, spread %.2e, tail mean ratio %.3g", final_error, spread, ratio);
    return {final_error < 1e-2 && spread < 1e-2 && ratio < 10.0, buf};
}

Outcome table_surrogate() {
    const MonteCarloSetup setup = make_setup(load_config(kBenchmark));
    const CompareResult r = monte_carlo_compare(setup, 10, 2024);
    double mse[3] = {0, 0, 0};
    for (const auto& s : r.summaries) {
        mse[static_cast<int>(s.method)] = s.mse;
    }
    // Within rounding: the three designs coincide on noise-free data.
    const double slack = 1e-9;
    const bool ordered = mse[0] <= mse[1] * (1 + slack) && mse[1] <= mse[2] * (1 + slack);
    const double gap = (mse[1] - mse[0]) / mse[0];
    char buf[256];
    std::snprintf(buf, sizeof buf, "MSE DUIO %.6g, D-DUIO %.6g, ID-DUIO %.6g, gap %.2e (< 0.25)", mse[0], mse[1],
                  mse[2], gap);
    return {ordered && gap < 0.25, buf};
}

Outcome laplacian_properties() {
    int ok = 0;
    double worst_row = 0.0;
    for (int k = 0; k < 100; ++k) {
        const int M = 2 + k % 9;
        const SensorGraph g = random_connected_graph(M, 0.25, 7000 + static_cast<std::uint64_t>(k));
        const LaplacianBundle b = build_laplacian(g, k % M);
        const Matrix& A = g.adjacency();
        Matrix L = -A;
        L.diagonal() += A.rowwise().sum();
        worst_row = std::max(worst_row, (Eigen::RowVectorXd::Ones(M) * b.laplacian).cwiseAbs().maxCoeff());
        const double lam = Eigen::SelfAdjointEigenSolver<Matrix>(b.reduced).eigenvalues().minCoeff();
        if (lam > 0.0 && (L - b.laplacian).norm() < 1e-12 && std::abs(lam - b.lambda_min_reduced) < 1e-10) {
            ++ok;
        }
    }
    return {ok == 100 && worst_row < 1e-12,
            std::to_string(ok) + "/100 positive reduced spectra, max |1'L| " + fmt("%.1e", worst_row)};
}

Outcome compatibility() {
    const PlantModel m = two_mass_spring();
    const int node = 2;
    const NodeDataset ds = collect(m, node, 50, Excitation{}, 17);
    PlantInputs in;
    in.u = {PiecewiseConstantRandom{-1, 1, 0.05, 3}, PiecewiseConstantRandom{-1, 1, 0.05, 4}};
    in.d = {PiecewiseConstantRandom{-1, 1, 0.05, 5}};
    Vector x0(4);
    x0 << 0.3, -0.5, 0.2, 0.8;
    const Trajectory good = simulate(m, x0, in, 12.0, 0.05);

    std::mt19937_64 rng(6);
    const PlantModel perturbed(m.A() + support::random_matrix(rng, 4, 4, 0.05), m.B(), m.E(), m.nodes());
    const Trajectory bad = simulate(perturbed, x0, in, 12.0, 0.05);

    int passed = 0;
    int rejected = 0;
    const Eigen::Index T = good.size();
    for (Eigen::Index k = 0; k < T; ++k) {
        passed += check_compatibility(ds.data, online_sample(good, node, k)).compatible ? 1 : 0;
        rejected += check_compatibility(ds.data, online_sample(bad, node, k)).compatible ? 0 : 1;
    }
    const double rejection = static_cast<double>(rejected) / static_cast<double>(T);
    return {T >= 200 && passed == T && rejection >= 0.95,
            std::to_string(passed) + "/" + std::to_string(T) + " true samples compatible, " +
                fmt("%.1f%% perturbed samples rejected", 100.0 * rejection)};
}

Outcome determinism() {
    const std::string dir = support::scratch_dir("acceptance_cli");
    const std::string cfg = " --config \"" + kBenchmark + "\" --seed 31";
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"collect", "collect" + cfg},
        {"check", "check" + cfg + " --data \"" + dir + "/collect_a\""},
        {"design", "design --method data" + cfg},
        {"run", "run --method data" + cfg},
        {"compare", "compare -K 2" + cfg},
    };
    std::string failures;
    for (const auto& [name, args] : commands) {
        const std::string a = dir + "/" + name + "_a";
        const std::string b = dir + "/" + name + "_b";
        const int ca = support::run_cli(kCli, args + " --out \"" + a + "\"");
        const int cb = support::run_cli(kCli, args + " --out \"" + b + "\"");
        std::string diff;
        if (ca != 0 || cb != 0 || !support::same_tree(a, b, &diff)) {
            failures += " " + name + "(" + std::to_string(ca) + "/" + std::to_string(cb) + " " + diff + ")";
        }
    }
    return {failures.empty(), failures.empty() ? "collect, check, design, run, compare byte-identical"
                                               : "differing:" + failures};
}

}  // namespace

int main() {
    const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
        {1, decoupling},  {2, insensitivity},   {3, model_data_agreement}, {4, gain_equivalence},
        {5, stability},   {6, convergence},     {7, table_surrogate},      {8, laplacian_properties},
        {9, compatibility}, {10, determinism},
    };
    int failed = 0;
    for (const auto& [id, check] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %d: %s  %s  [%.2f s]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}

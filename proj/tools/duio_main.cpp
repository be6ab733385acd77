// duio: offline data collection, data checks, observer design, closed-loop
// runs and Monte-Carlo comparison from one JSON config.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "duio/config.hpp"
#include "duio/datagen.hpp"
#include "duio/design_data.hpp"
#include "duio/design_model.hpp"
#include "duio/errors.hpp"
#include "duio/io.hpp"
#include "duio/metrics.hpp"
#include "duio/observer_sim.hpp"

namespace {

using namespace duio;
using nlohmann::json;

enum Exit : int {
    kOk = 0,
    kUsage = 1,
    kExcitation = 2,
    kCheckFailed = 3,
    kIo = 4,
    kDesign = 5,
    kDimension = 6,
    kDivergence = 7,
};

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
};

ExperimentConfig load(const Common& c) {
    ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
    if (c.seed) {
        cfg.seed = *c.seed;
    }
    return cfg;
}

std::string join(const std::string& dir, const std::string& file) {
    return (std::filesystem::path(dir) / file).string();
}

void write_resolved(const std::string& dir, const ExperimentConfig& cfg) {
    ensure_directory(dir);
    write_json(join(dir, "resolved_config.json"), resolved_config(cfg));
}

std::vector<NodeData> offline_data(const ExperimentConfig& cfg, const PlantModel& model, const std::string& data_dir) {
    if (!data_dir.empty()) {
        return design_view(load_datasets(data_dir));
    }
    Excitation ex = cfg.data.excitation;
    ex.rank_policy = cfg.design.options.rank;
    return design_view(collect_all(model, cfg.data.N, ex, data_seed(cfg)));
}

// ---------------------------------------------------------------- collect

int cmd_collect(const Common& c) {
    const ExperimentConfig cfg = load(c);
    const PlantModel model = make_plant(cfg);
    Excitation ex = cfg.data.excitation;
    ex.rank_policy = cfg.design.options.rank;
    const std::vector<NodeDataset> datasets = collect_all(model, cfg.data.N, ex, data_seed(cfg));
    save_datasets(c.out, datasets);
    write_resolved(c.out, cfg);
    for (const NodeDataset& ds : datasets) {
        const RankAssumptionReport r = check_rank_assumption(ds, ex.rank_policy);
        std::printf("node %d: rank [U; W; X] = %d of %d (%s), %d attempt(s)\n", ds.data.node + 1, r.rank, r.required,
                    r.holds ? "holds" : "fails", ds.attempts);
    }
    std::printf("wrote %zu datasets to %s\n", datasets.size(), c.out.c_str());
    return kOk;
}

// ---------------------------------------------------------------- check

int cmd_check(const Common& c, const std::string& data_dir, bool explain) {
    const ExperimentConfig cfg = load(c);
    const std::vector<NodeData> data = design_view(load_datasets(data_dir));
    std::vector<DataDesignReport> reports;
    try {
        reports = analyze_nodes(data, make_data_design(cfg));
    } catch (const ConsistencyError& e) {
        std::printf("FAIL data equation: %s\n", e.what());
        return kCheckFailed;
    } catch (const RankError& e) {
        std::printf("FAIL output map recovery: %s\n", e.what());
        return kCheckFailed;
    }

    json report = json::array();
    std::string failure;
    for (const DataDesignReport& r : reports) {
        report.push_back(report_to_json(r));
        if (explain) {
            std::cout << explain_report(r);
        }
        std::printf("node %d: rank equality %s (%d vs %d), rank T_y %d, r %d\n", r.node + 1,
                    r.rank_equality.holds ? "holds" : "fails", r.rank_equality.rank_lhs, r.rank_equality.rank_rhs, r.rank_Ty, r.inferred_r);
        if (failure.empty() && !r.rank_equality.holds) {
            failure = "node " + std::to_string(r.node + 1) + ": rank([U; Ydot; X]) != rank([U; X; Xdot])";
        }
        if (failure.empty() && r.rank_equality.holds && r.rank_Ty != r.inferred_r) {
            failure = "node " + std::to_string(r.node + 1) + ": rank(T_y) differs from r";
        }
    }

    int leader = -1;
    if (failure.empty()) {
        const auto& wanted = cfg.design.options.leader;
        for (const DataDesignReport& r : reports) {
            const bool ok = r.detectability && r.detectability->holds;
            if (wanted ? r.node == *wanted : ok) {
                leader = r.node;
                if (!ok) {
                    failure = "node " + std::to_string(r.node + 1) + ": detectability test from data fails";
                }
                break;
            }
        }
        if (leader < 0 && failure.empty()) {
            failure = "no node passes the detectability test from data";
        }
    }
    if (!c.out.empty()) {
        ensure_directory(c.out);
        write_json(join(c.out, "report.json"), {{"nodes", report}, {"leader", leader + 1}, {"failure", failure}});
    }
    if (!failure.empty()) {
        std::printf("FAIL %s\n", failure.c_str());
        return kCheckFailed;
    }
    std::printf("leader node %d: detectability from data holds\nall existence conditions hold\n", leader + 1);
    return kOk;
}

// ---------------------------------------------------------------- design

struct Designed {
    DuioGains gains;
    std::vector<DataDesignReport> reports;
};

Designed design(const ExperimentConfig& cfg, const PlantModel& model, const SensorGraph& graph, Method method,
                const std::string& data_dir) {
    Designed d;
    switch (method) {
        case Method::Model:
            d.gains = build_model_based_gains(model, graph, cfg.design.options);
            break;
        case Method::Data: {
            const std::vector<NodeData> data = offline_data(cfg, model, data_dir);
            d.reports = analyze_nodes(data, make_data_design(cfg));
            d.gains = build_data_driven_gains(d.reports, graph, cfg.design.options);
            break;
        }
        case Method::Id: {
            if (!cfg.design.grant_unknown_matrices) {
                throw PreconditionError(
                    "ID-DUIO needs the unknown-input matrices; set design.grant_unknown_matrices in the config");
            }
            const std::vector<NodeData> data = offline_data(cfg, model, data_dir);
            std::vector<Matrix> grant;
            for (const NodeView& v : model.nodes()) {
                grant.push_back(v.B_p);
            }
            d.gains = build_id_gains(data, grant, graph, cfg.design.options);
            break;
        }
    }
    return d;
}

json verification(const PlantModel& model, const SensorGraph& graph, const DuioGains& gains) {
    json v;
    v["spectral_abscissa"] = error_dynamics_matrix(gains, graph).abscissa;
    if (model.M() == gains.M() && model.n_x() == gains.n_x()) {
        json res = json::array();
        for (const DecouplingResiduals& r : verify_decoupling(model, gains)) {
            res.push_back({{"input", r.input}, {"unknown", r.unknown}, {"state", r.state}});
        }
        v["decoupling_residuals"] = res;
    }
    return v;
}

int cmd_design(const Common& c, const std::string& method_name_arg, const std::string& data_dir,
               std::optional<double> gamma, bool explain) {
    ExperimentConfig cfg = load(c);
    if (gamma) {
        cfg.design.options.gamma_override = *gamma;
    }
    const Method method = parse_method(method_name_arg);
    const PlantModel model = make_plant(cfg);
    const SensorGraph graph = make_graph(cfg, model.M());
    const Designed d = design(cfg, model, graph, method, data_dir);
    if (explain) {
        for (const DataDesignReport& r : d.reports) {
            std::cout << explain_report(r);
        }
    }
    json out = gains_to_json(d.gains);
    out["verification"] = verification(model, graph, d.gains);
    if (!d.reports.empty()) {
        json reports = json::array();
        for (const DataDesignReport& r : d.reports) {
            reports.push_back(report_to_json(r));
        }
        out["data_reports"] = reports;
    }
    ensure_directory(c.out);
    write_json(join(c.out, "gains.json"), out);
    write_resolved(c.out, cfg);
    std::printf("method %s: leader node %d, gamma %.6g (bound %.6g), spectral abscissa %.6g\n",
                display_name(method).c_str(), d.gains.leader + 1, d.gains.gamma, d.gains.gamma_bound,
                d.gains.spectral_abscissa);
    return kOk;
}

// ---------------------------------------------------------------- run

int cmd_run(const Common& c, const std::string& gains_path, const std::string& method_name_arg,
            const std::string& data_dir, std::optional<double> gamma) {
    ExperimentConfig cfg = load(c);
    if (gamma) {
        cfg.design.options.gamma_override = *gamma;
    }
    const PlantModel model = make_plant(cfg);
    const SensorGraph graph = make_graph(cfg, model.M());
    DuioGains gains = gains_path.empty()
                          ? design(cfg, model, graph, parse_method(method_name_arg), data_dir).gains
                          : gains_from_json(read_json(gains_path));
    check_consistency(model, graph, gains);

    const Scenario sc = realize(model, cfg.run.scenario, cfg.run.options.dt, scenario_seed(cfg));
    std::vector<Vector> z0;
    for (int i = 0; i < model.M(); ++i) {
        if (cfg.run.z0 == InitialObserverState::Zero) {
            z0.push_back(Vector::Zero(model.n_x()));
        } else {
            const NodeGains& g = gains.nodes[static_cast<std::size_t>(i)];
            z0.push_back(sc.x0 - g.H * (model.node(i).C * sc.x0));
        }
    }
    RunOptions opts = cfg.run.options;
    opts.noise_seed = derive_seed(cfg.seed, 3);
    const RunResult res = run(model, graph, gains, sc.x0, z0, sc.inputs, opts);
    const RunMetrics m = compute_mse_mae(res);

    json final_errors = json::array();
    for (int i = 0; i < res.M(); ++i) {
        final_errors.push_back(res.error_norms(i, res.size() - 1));
    }
    json summary = {{"method", gains.method},
                    {"horizon", cfg.run.options.horizon},
                    {"dt", cfg.run.options.dt},
                    {"seed", cfg.seed},
                    {"final_error_norms", final_errors},
                    {"final_spread", res.final_spread()},
                    {"mse", m.mse_mean},
                    {"mae", m.mae_mean},
                    {"spectral_abscissa", error_dynamics_matrix(gains, graph).abscissa}};
    write_run(c.out, res, summary);
    write_resolved(c.out, cfg);
    std::printf("final spread %.3e, max final error %.3e, MSE %.6g, MAE %.6g\n", res.final_spread(),
                res.error_norms.col(res.size() - 1).maxCoeff(), m.mse_mean, m.mae_mean);
    return kOk;
}

// ---------------------------------------------------------------- compare

int cmd_compare(const Common& c, std::optional<int> K) {
    ExperimentConfig cfg = load(c);
    if (K) {
        cfg.compare.K = *K;
    }
    if (cfg.compare.K < 1) {
        throw ConfigError("K must be at least 1");
    }
    const MonteCarloSetup setup = make_setup(cfg);
    const CompareResult result = monte_carlo_compare(setup, cfg.compare.K, cfg.seed,
                                                     cfg.compare.parallel ? Execution::Parallel : Execution::Serial);
    write_compare(c.out, result);
    json summary = json::array();
    for (const MetricSummary& s : result.summaries) {
        json node_mse = json::array();
        json node_mae = json::array();
        for (Eigen::Index i = 0; i < s.node_mse.size(); ++i) {
            node_mse.push_back(s.node_mse(i));
            node_mae.push_back(s.node_mae(i));
        }
        summary.push_back({{"method", display_name(s.method)},
                           {"mse", s.mse},
                           {"mae", s.mae},
                           {"node_mse", node_mse},
                           {"node_mae", node_mae},
                           {"experiments", s.experiments},
                           {"seed", s.seed}});
    }
    write_json(join(c.out, "summary.json"), summary);
    write_resolved(c.out, cfg);
    std::printf("%-8s %14s %14s\n", "Method", "MSE", "MAE");
    for (const MetricSummary& s : result.summaries) {
        std::printf("%-8s %14.6g %14.6g\n", display_name(s.method).c_str(), s.mse, s.mae);
    }
    return kOk;
}

template <class F>
int guarded(F&& f) {
    try {
        return f();
    } catch (const ExcitationError& e) {
        std::fprintf(stderr, "excitation error: %s\n", e.what());
        return kExcitation;
    } catch (const IoError& e) {
        std::fprintf(stderr, "I/O error: %s\n", e.what());
        return kIo;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kUsage;
    } catch (const DimensionError& e) {
        std::fprintf(stderr, "dimension mismatch: %s\n", e.what());
        return kDimension;
    } catch (const DivergenceError& e) {
        std::fprintf(stderr, "divergence: %s\n", e.what());
        return kDivergence;
    } catch (const Error& e) {
        std::fprintf(stderr, "design error: %s\n", e.what());
        return kDesign;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsage;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributed unknown-input observers: model-based, data-driven and identified baselines"};
    app.require_subcommand(1);

    Common common;
    std::string data_dir;
    std::string gains_path;
    std::string method = "model";
    std::optional<double> gamma;
    std::optional<int> K;
    bool explain = false;

    auto add_common = [&](CLI::App* sub, bool out_required) {
        sub->add_option("--config", common.config, "JSON experiment config (defaults to the built-in benchmark)");
        sub->add_option("--seed", common.seed, "master seed, overrides the config");
        auto* out = sub->add_option("--out", common.out, "output directory");
        if (out_required) {
            out->required();
        }
    };

    auto* collect = app.add_subcommand("collect", "generate offline datasets for every node");
    add_common(collect, true);

    auto* check = app.add_subcommand("check", "test the existence conditions on stored datasets");
    add_common(check, false);
    check->add_option("--data", data_dir, "dataset directory written by collect")->required();
    check->add_flag("--explain", explain, "print each rank test with its singular values");

    auto* design_cmd = app.add_subcommand("design", "compute observer gains");
    add_common(design_cmd, true);
    design_cmd->add_option("--method", method, "model, data or id")->check(CLI::IsMember({"model", "data", "id"}));
    design_cmd->add_option("--data", data_dir, "dataset directory (data/id; default: collect from the config)");
    design_cmd->add_option("--gamma", gamma, "coupling gain, overrides the automatic choice");
    design_cmd->add_flag("--explain", explain, "print the data tests behind the design");

    auto* run_cmd = app.add_subcommand("run", "simulate the plant with the observer network");
    add_common(run_cmd, true);
    run_cmd->add_option("--gains", gains_path, "gains.json written by design (default: design now)");
    run_cmd->add_option("--method", method, "design method when no gains file is given")
        ->check(CLI::IsMember({"model", "data", "id"}));
    run_cmd->add_option("--data", data_dir, "dataset directory for data/id designs");
    run_cmd->add_option("--gamma", gamma, "coupling gain, overrides the automatic choice");

    auto* compare = app.add_subcommand("compare", "Monte-Carlo comparison of the three observers");
    add_common(compare, true);
    compare->add_option("-K,--experiments", K, "number of experiments, overrides the config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    if (*collect) {
        return guarded([&] { return cmd_collect(common); });
    }
    if (*check) {
        return guarded([&] { return cmd_check(common, data_dir, explain); });
    }
    if (*design_cmd) {
        return guarded([&] { return cmd_design(common, method, data_dir, gamma, explain); });
    }
    if (*run_cmd) {
        return guarded([&] { return cmd_run(common, gains_path, method, data_dir, gamma); });
    }
    return guarded([&] { return cmd_compare(common, K); });
}

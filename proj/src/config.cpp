#include "duio/config.hpp"

#include <fstream>
#include <set>

#include "duio/errors.hpp"
#include "duio/presets.hpp"

namespace duio {

using nlohmann::json;

namespace {

// Reads fields of one JSON object and rejects keys nobody asked for.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) {
            throw ConfigError(path_ + " must be an object");
        }
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    const json& at(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    template <class T>
    void get(const std::string& key, T& out) {
        if (!has(key)) {
            return;
        }
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(path_ + "." + key + " has the wrong type");
        }
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) {
                throw ConfigError("unknown key " + path_ + "." + it.key());
            }
        }
    }

    const std::string& path() const { return path_; }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

Matrix matrix_from(const json& j, const std::string& what) {
    if (!j.is_array()) {
        throw ConfigError(what + " must be a nested array (row-major)");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (rows == 0) {
        return Matrix();
    }
    if (!j[0].is_array()) {
        throw ConfigError(what + " must be a nested array (row-major)");
    }
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw ConfigError(what + ": ragged rows");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            const json& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number()) {
                throw ConfigError(what + ": entries must be numbers");
            }
            m(r, c) = v.get<double>();
        }
    }
    return m;
}

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(row);
    }
    return rows;
}

void require(bool ok, const std::string& message) {
    if (!ok) {
        throw ConfigError(message);
    }
}

void parse_plant(const json& j, PlantSpec& p) {
    Section s(j, "plant");
    p.preset.clear();
    s.get("preset", p.preset);
    if (!p.preset.empty()) {
        require(p.preset == "two-mass-spring", "unknown plant preset '" + p.preset + "'");
        s.finish();
        return;
    }
    require(s.has("A") && s.has("B") && s.has("nodes"), "plant needs a preset or A, B and nodes");
    p.A = matrix_from(s.at("A"), "plant.A");
    p.B = matrix_from(s.at("B"), "plant.B");
    p.E = s.has("E") ? matrix_from(s.at("E"), "plant.E") : Matrix(p.A.rows(), 0);
    if (p.E.size() == 0) {
        p.E.resize(p.A.rows(), 0);
    }
    const json& nodes = s.at("nodes");
    require(nodes.is_array() && !nodes.empty(), "plant.nodes must be a non-empty array");
    p.nodes.clear();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        Section n(nodes[i], "plant.nodes[" + std::to_string(i) + "]");
        NodeSpec spec;
        require(n.has("C"), n.path() + ".C is required");
        spec.C = matrix_from(n.at("C"), n.path() + ".C");
        n.get("known_inputs", spec.known_inputs);
        n.get("unknown_scale", spec.unknown_scale);
        n.finish();
        p.nodes.push_back(std::move(spec));
    }
    s.finish();
}

void parse_graph(const json& j, GraphSpec& g) {
    Section s(j, "graph");
    s.get("generator", g.generator);
    s.get("size", g.size);
    if (s.has("edges")) {
        g.generator = "edges";
        g.edges.clear();
        const json& edges = s.at("edges");
        require(edges.is_array(), "graph.edges must be an array of [a, b, weight]");
        for (const json& e : edges) {
            require(e.is_array() && (e.size() == 2 || e.size() == 3) && e[0].is_number_integer() &&
                        e[1].is_number_integer(),
                    "graph.edges entries must be [a, b] or [a, b, weight] with 1-based node indices");
            WeightedEdge we;
            we.a = e[0].get<int>() - 1;
            we.b = e[1].get<int>() - 1;
            we.weight = e.size() == 3 ? e[2].get<double>() : 1.0;
            g.edges.push_back(we);
        }
    }
    require(g.generator == "ring" || g.generator == "complete" || g.generator == "star" || g.generator == "path" ||
                g.generator == "edges",
            "graph.generator must be ring, complete, star, path (or give edges)");
    require(g.generator != "edges" || !g.edges.empty(), "graph.edges must not be empty");
    require(g.size >= 0, "graph.size must be non-negative");
    s.finish();
}

DerivativeMode parse_derivatives(const std::string& name) {
    if (name == "exact") {
        return DerivativeMode::Exact;
    }
    if (name == "central-difference") {
        return DerivativeMode::CentralDifference;
    }
    throw ConfigError("data.derivatives must be 'exact' or 'central-difference'");
}

std::string derivatives_name(DerivativeMode m) {
    return m == DerivativeMode::Exact ? "exact" : "central-difference";
}

void parse_data(const json& j, DataSpec& d) {
    Section s(j, "data");
    Excitation& ex = d.excitation;
    s.get("N", d.N);
    s.get("amplitude", ex.amplitude);
    s.get("random_initial_state", ex.random_initial_state);
    s.get("x0_amplitude", ex.x0_amplitude);
    s.get("samples_per_segment", ex.samples_per_segment);
    s.get("sample_interval", ex.sample_interval);
    s.get("dt", ex.dt);
    s.get("jitter", ex.jitter);
    s.get("noise", ex.output_noise);
    s.get("max_attempts", ex.max_attempts);
    std::string deriv = derivatives_name(ex.derivatives);
    s.get("derivatives", deriv);
    ex.derivatives = parse_derivatives(deriv);
    s.finish();
    require(d.N >= 1, "data.N must be positive");
    require(ex.sample_interval > 0.0 && ex.dt > 0.0, "data.sample_interval and data.dt must be positive");
    require(ex.samples_per_segment >= 1 && ex.max_attempts >= 1, "data.samples_per_segment and max_attempts >= 1");
    require(ex.output_noise >= 0.0 && ex.amplitude > 0.0, "data.noise >= 0 and data.amplitude > 0 required");
}

void parse_design(const json& j, DesignSpec& d) {
    Section s(j, "design");
    DesignOptions& o = d.options;
    s.get("decay", o.decay);
    s.get("gamma_margin", o.gamma_margin);
    if (s.has("gamma_override")) {
        double g = 0.0;
        s.get("gamma_override", g);
        o.gamma_override = g;
    }
    if (s.has("leader")) {
        int leader = 0;
        s.get("leader", leader);
        o.leader = leader - 1;
    }
    s.get("rank_multiplier", o.rank.multiplier);
    s.get("pbh_re_tolerance", o.pbh.re_tolerance);
    s.get("pbh_rank_tolerance", o.pbh.rank_tolerance);
    s.get("hurwitz_tolerance", o.hurwitz_tolerance);
    s.get("data_equation_tolerance", d.data_equation_tolerance);
    s.get("use_min_norm", d.use_min_norm);
    s.get("grant_unknown_matrices", d.grant_unknown_matrices);
    s.finish();
    require(o.decay > 0.0, "design.decay must be positive");
    require(o.gamma_margin > 0.0, "design.gamma_margin must be positive");
    require(!o.gamma_override || *o.gamma_override > 0.0, "design.gamma_override must be positive");
    require(o.rank.multiplier > 0.0 && d.data_equation_tolerance > 0.0, "design tolerances must be positive");
}

void parse_scenario(const json& j, ScenarioSpec& sc) {
    Section s(j, "run.scenario");
    s.get("known_rate", sc.known_rate);
    s.get("known_low", sc.known_low);
    s.get("known_high", sc.known_high);
    s.get("unknown_active", sc.unknown_active);
    s.get("unknown_amplitude", sc.unknown.amplitude);
    s.get("unknown_frequency", sc.unknown.frequency);
    s.get("unknown_phase", sc.unknown.phase);
    s.get("disturbance_amplitude", sc.disturbance_amplitude);
    s.get("disturbance_hold", sc.disturbance_hold);
    s.get("x0_amplitude", sc.x0_amplitude);
    s.finish();
    require(sc.known_low <= sc.known_high, "run.scenario.known_low must not exceed known_high");
    require(sc.disturbance_amplitude >= 0.0 && sc.disturbance_hold >= 0.0 && sc.x0_amplitude >= 0.0,
            "run.scenario amplitudes and hold must be non-negative");
}

void parse_run(const json& j, RunSpec& r) {
    Section s(j, "run");
    s.get("horizon", r.options.horizon);
    s.get("dt", r.options.dt);
    s.get("divergence_limit", r.options.divergence_limit);
    s.get("output_noise", r.options.output_noise);
    std::string z0 = r.z0 == InitialObserverState::Zero ? "zero" : "exact";
    s.get("z0", z0);
    require(z0 == "zero" || z0 == "exact", "run.z0 must be 'zero' or 'exact'");
    r.z0 = z0 == "zero" ? InitialObserverState::Zero : InitialObserverState::Exact;
    if (s.has("scenario")) {
        parse_scenario(s.at("scenario"), r.scenario);
    }
    s.finish();
    require(r.options.dt > 0.0 && r.options.horizon >= r.options.dt, "run needs dt > 0 and horizon >= dt");
    require(r.options.output_noise >= 0.0, "run.output_noise must be non-negative");
}

void parse_compare(const json& j, CompareSpec& c) {
    Section s(j, "compare");
    s.get("K", c.K);
    if (s.has("methods")) {
        std::vector<std::string> names;
        s.get("methods", names);
        c.methods.clear();
        for (const auto& n : names) {
            c.methods.push_back(parse_method(n));
        }
    }
    s.get("parallel", c.parallel);
    s.finish();
    require(c.K >= 1, "compare.K must be at least 1");
    require(!c.methods.empty(), "compare.methods must not be empty");
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
    ExperimentConfig cfg;
    Section s(j, "config");
    s.get("seed", cfg.seed);
    if (s.has("plant")) {
        parse_plant(s.at("plant"), cfg.plant);
    }
    if (s.has("graph")) {
        parse_graph(s.at("graph"), cfg.graph);
    }
    if (s.has("data")) {
        parse_data(s.at("data"), cfg.data);
    }
    if (s.has("design")) {
        parse_design(s.at("design"), cfg.design);
    }
    if (s.has("run")) {
        parse_run(s.at("run"), cfg.run);
    }
    if (s.has("compare")) {
        parse_compare(s.at("compare"), cfg.compare);
    }
    s.finish();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file " + path);
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path + " is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

json resolved_config(const ExperimentConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;

    json plant;
    if (!cfg.plant.preset.empty()) {
        plant["preset"] = cfg.plant.preset;
    } else {
        plant["A"] = matrix_json(cfg.plant.A);
        plant["B"] = matrix_json(cfg.plant.B);
        plant["E"] = matrix_json(cfg.plant.E);
        plant["nodes"] = json::array();
        for (const NodeSpec& n : cfg.plant.nodes) {
            plant["nodes"].push_back(
                {{"C", matrix_json(n.C)}, {"known_inputs", n.known_inputs}, {"unknown_scale", n.unknown_scale}});
        }
    }
    j["plant"] = plant;

    json graph;
    graph["generator"] = cfg.graph.generator;
    graph["size"] = cfg.graph.size;
    if (cfg.graph.generator == "edges") {
        graph["edges"] = json::array();
        for (const WeightedEdge& e : cfg.graph.edges) {
            graph["edges"].push_back({e.a + 1, e.b + 1, e.weight});
        }
    }
    j["graph"] = graph;

    const Excitation& ex = cfg.data.excitation;
    j["data"] = {{"N", cfg.data.N},
                 {"amplitude", ex.amplitude},
                 {"random_initial_state", ex.random_initial_state},
                 {"x0_amplitude", ex.x0_amplitude},
                 {"samples_per_segment", ex.samples_per_segment},
                 {"sample_interval", ex.sample_interval},
                 {"dt", ex.dt},
                 {"jitter", ex.jitter},
                 {"noise", ex.output_noise},
                 {"max_attempts", ex.max_attempts},
                 {"derivatives", derivatives_name(ex.derivatives)}};

    const DesignOptions& o = cfg.design.options;
    json design = {{"decay", o.decay},
                   {"gamma_margin", o.gamma_margin},
                   {"gamma_override", nullptr},
                   {"leader", nullptr},
                   {"rank_multiplier", o.rank.multiplier},
                   {"pbh_re_tolerance", o.pbh.re_tolerance},
                   {"pbh_rank_tolerance", o.pbh.rank_tolerance},
                   {"hurwitz_tolerance", o.hurwitz_tolerance},
                   {"data_equation_tolerance", cfg.design.data_equation_tolerance},
                   {"use_min_norm", cfg.design.use_min_norm},
                   {"grant_unknown_matrices", cfg.design.grant_unknown_matrices}};
    if (o.gamma_override) {
        design["gamma_override"] = *o.gamma_override;
    }
    if (o.leader) {
        design["leader"] = *o.leader + 1;
    }
    j["design"] = design;

    const ScenarioSpec& sc = cfg.run.scenario;
    j["run"] = {{"horizon", cfg.run.options.horizon},
                {"dt", cfg.run.options.dt},
                {"divergence_limit", cfg.run.options.divergence_limit},
                {"output_noise", cfg.run.options.output_noise},
                {"z0", cfg.run.z0 == InitialObserverState::Zero ? "zero" : "exact"},
                {"scenario",
                 {{"known_rate", sc.known_rate},
                  {"known_low", sc.known_low},
                  {"known_high", sc.known_high},
                  {"unknown_active", sc.unknown_active},
                  {"unknown_amplitude", sc.unknown.amplitude},
                  {"unknown_frequency", sc.unknown.frequency},
                  {"unknown_phase", sc.unknown.phase},
                  {"disturbance_amplitude", sc.disturbance_amplitude},
                  {"disturbance_hold", sc.disturbance_hold},
                  {"x0_amplitude", sc.x0_amplitude}}}};

    json methods = json::array();
    for (Method m : cfg.compare.methods) {
        methods.push_back(method_name(m));
    }
    j["compare"] = {{"K", cfg.compare.K}, {"methods", methods}, {"parallel", cfg.compare.parallel}};
    return j;
}

PlantModel make_plant(const ExperimentConfig& cfg) {
    if (!cfg.plant.preset.empty()) {
        return two_mass_spring();
    }
    const PlantSpec& p = cfg.plant;
    std::vector<NodeView> nodes;
    try {
        for (const NodeSpec& n : p.nodes) {
            nodes.push_back(make_node_view(p.B, p.E, n.C, n.known_inputs, n.unknown_scale));
        }
        return PlantModel(p.A, p.B, p.E, std::move(nodes));
    } catch (const DimensionError& e) {
        throw ConfigError(std::string("plant: ") + e.what());
    } catch (const IndexError& e) {
        throw ConfigError(std::string("plant: ") + e.what());
    }
}

SensorGraph make_graph(const ExperimentConfig& cfg, int M) {
    const int size = cfg.graph.size > 0 ? cfg.graph.size : M;
    if (cfg.graph.generator == "edges") {
        return graph_from_edges(size, cfg.graph.edges);
    }
    return named_graph(cfg.graph.generator, size);
}

DataDesignOptions make_data_design(const ExperimentConfig& cfg) {
    DataDesignOptions o;
    o.detectability.pbh = cfg.design.options.pbh;
    o.detectability.rank = cfg.design.options.rank;
    o.detectability.data_equation.rank = cfg.design.options.rank;
    o.detectability.data_equation.relative_tolerance = cfg.design.data_equation_tolerance;
    o.use_min_norm = cfg.design.use_min_norm;
    return o;
}

MonteCarloSetup make_setup(const ExperimentConfig& cfg) {
    PlantModel model = make_plant(cfg);
    SensorGraph graph = make_graph(cfg, model.M());
    MonteCarloSetup s{std::move(model), std::move(graph)};
    s.N = cfg.data.N;
    s.excitation = cfg.data.excitation;
    s.excitation.rank_policy = cfg.design.options.rank;
    s.design = cfg.design.options;
    s.data_design = make_data_design(cfg);
    s.run = cfg.run.options;
    s.scenario = cfg.run.scenario;
    s.methods = cfg.compare.methods;
    s.grant_unknown_matrices = cfg.design.grant_unknown_matrices;
    return s;
}

std::uint64_t data_seed(const ExperimentConfig& cfg) {
    return derive_seed(cfg.seed, 1);
}

std::uint64_t scenario_seed(const ExperimentConfig& cfg) {
    return derive_seed(cfg.seed, 2);
}

}  // namespace duio

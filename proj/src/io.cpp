#include "duio/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "duio/errors.hpp"

namespace duio {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out << text;
    if (!out) {
        throw IoError("write failed for " + path);
    }
}

void ensure_directory(const std::string& path) {
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec || !fs::is_directory(path)) {
        throw IoError("cannot create directory " + path);
    }
}

void write_csv(const std::string& path, const std::vector<std::string>& header, const Matrix& rows) {
    if (static_cast<Eigen::Index>(header.size()) != rows.cols()) {
        throw DimensionError("CSV header has " + std::to_string(header.size()) + " names for " +
                             std::to_string(rows.cols()) + " columns");
    }
    std::string text;
    for (std::size_t c = 0; c < header.size(); ++c) {
        text += (c ? "," : "") + header[c];
    }
    text += '\n';
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        for (Eigen::Index c = 0; c < rows.cols(); ++c) {
            if (c) {
                text += ',';
            }
            text += format_number(rows(r, c));
        }
        text += '\n';
    }
    write_text(path, text);
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

std::vector<std::string> names(const std::string& prefix, Eigen::Index n) {
    std::vector<std::string> out;
    for (Eigen::Index k = 1; k <= n; ++k) {
        out.push_back(prefix + "_" + std::to_string(k));
    }
    return out;
}

std::string path_join(const std::string& dir, const std::string& file) {
    return (fs::path(dir) / file).string();
}

}  // namespace

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError(path + " is empty");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    table.header = line.empty() ? std::vector<std::string>{} : split(line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != table.header.size()) {
            throw IoError(path + ": row " + std::to_string(rows.size() + 2) + " has " + std::to_string(cells.size()) +
                          " fields, header has " + std::to_string(table.header.size()));
        }
        std::vector<double> row;
        for (const auto& cell : cells) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (cell.empty() || end != cell.c_str() + cell.size()) {
                throw IoError(path + ": cannot parse number '" + cell + "'");
            }
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(table.header.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return table;
}

void write_json(const std::string& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

json read_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError(path + " is not valid JSON: " + e.what());
    }
}

json matrix_to_json(const Matrix& m) {
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

Matrix matrix_from_json(const json& j, const std::string& what) {
    if (!j.is_array()) {
        throw IoError(what + " must be a nested array");
    }
    if (j.empty()) {
        return Matrix();
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw IoError(what + ": ragged rows");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            const json& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number()) {
                throw IoError(what + ": entries must be numbers");
            }
            m(r, c) = v.get<double>();
        }
    }
    return m;
}

// Dataset files.

namespace {

void save_block(const std::string& dir, const std::string& file, const std::string& prefix, const Matrix& m) {
    write_csv(path_join(dir, file), names(prefix, m.rows()), m.transpose());
}

Matrix load_block(const std::string& dir, const std::string& file, Eigen::Index rows, Eigen::Index N) {
    if (rows == 0) {
        return Matrix(0, N);
    }
    const CsvTable t = read_csv(path_join(dir, file));
    if (t.values.cols() != rows || t.values.rows() != N) {
        throw IoError(path_join(dir, file) + ": expected " + std::to_string(N) + " samples of " +
                             std::to_string(rows) + " values");
    }
    return t.values.transpose();
}

}  // namespace

void save_dataset(const std::string& dir, const NodeDataset& ds) {
    const NodeData& d = ds.data;
    d.validate();
    ensure_directory(dir);
    Matrix times(d.N(), 1);
    for (int k = 0; k < d.N(); ++k) {
        times(k, 0) = d.times[static_cast<std::size_t>(k)];
    }
    write_csv(path_join(dir, "times.csv"), {"t"}, times);
    save_block(dir, "U.csv", "u", d.U);
    save_block(dir, "Y.csv", "y", d.Y);
    save_block(dir, "Ydot.csv", "ydot", d.Ydot);
    save_block(dir, "X.csv", "x", d.X);
    save_block(dir, "Xdot.csv", "xdot", d.Xdot);
    json meta = {{"node", d.node + 1}, {"seed", d.seed}, {"N", d.N()},      {"n_x", d.n_x()},
                 {"n_m", d.n_m()},     {"n_y", d.n_y()}, {"attempts", ds.attempts}};
    if (ds.W_validation) {
        save_block(dir, "W_validation.csv", "w", *ds.W_validation);
        meta["r"] = ds.W_validation->rows();
    }
    write_json(path_join(dir, "meta.json"), meta);
}

NodeDataset load_dataset(const std::string& dir) {
    const json meta = read_json(path_join(dir, "meta.json"));
    NodeDataset ds;
    NodeData& d = ds.data;
    try {
        d.node = meta.at("node").get<int>() - 1;
        d.seed = meta.at("seed").get<std::uint64_t>();
        ds.attempts = meta.value("attempts", 1);
        const auto N = meta.at("N").get<Eigen::Index>();
        const auto n_x = meta.at("n_x").get<Eigen::Index>();
        const auto n_m = meta.at("n_m").get<Eigen::Index>();
        const auto n_y = meta.at("n_y").get<Eigen::Index>();
        const Matrix times = load_block(dir, "times.csv", 1, N);
        d.times.assign(times.data(), times.data() + times.size());
        d.U = load_block(dir, "U.csv", n_m, N);
        d.Y = load_block(dir, "Y.csv", n_y, N);
        d.Ydot = load_block(dir, "Ydot.csv", n_y, N);
        d.X = load_block(dir, "X.csv", n_x, N);
        d.Xdot = load_block(dir, "Xdot.csv", n_x, N);
        if (meta.contains("r") && fs::exists(path_join(dir, "W_validation.csv"))) {
            ds.W_validation = load_block(dir, "W_validation.csv", meta.at("r").get<Eigen::Index>(), N);
        }
    } catch (const json::exception& e) {
        throw IoError(path_join(dir, "meta.json") + ": " + e.what());
    }
    d.validate();
    return ds;
}

void save_datasets(const std::string& root, const std::vector<NodeDataset>& datasets) {
    ensure_directory(root);
    for (std::size_t i = 0; i < datasets.size(); ++i) {
        save_dataset(path_join(root, "node_" + std::to_string(i + 1)), datasets[i]);
    }
    write_json(path_join(root, "meta.json"), {{"nodes", datasets.size()}});
}

std::vector<NodeDataset> load_datasets(const std::string& root) {
    const json meta = read_json(path_join(root, "meta.json"));
    if (!meta.contains("nodes") || !meta.at("nodes").is_number_integer()) {
        throw IoError(path_join(root, "meta.json") + ": missing node count");
    }
    const int M = meta.at("nodes").get<int>();
    std::vector<NodeDataset> out;
    for (int i = 1; i <= M; ++i) {
        out.push_back(load_dataset(path_join(root, "node_" + std::to_string(i))));
    }
    return out;
}

// Gains.

namespace {

json finite_or_null(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

double number_or_inf(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

}  // namespace

json gains_to_json(const DuioGains& g) {
    json nodes = json::array();
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const NodeGains& n = g.nodes[i];
        nodes.push_back({{"node", i + 1},
                         {"E", matrix_to_json(n.E)},
                         {"F", matrix_to_json(n.F)},
                         {"L", matrix_to_json(n.L)},
                         {"H", matrix_to_json(n.H)},
                         {"K", matrix_to_json(n.K)}});
    }
    return {{"method", g.method},
            {"leader", g.leader + 1},
            {"M1", matrix_to_json(g.M1)},
            {"decay", g.decay},
            {"gamma", g.gamma},
            {"gamma_bound", g.gamma_bound},
            {"lambda_min_reduced", finite_or_null(g.lambda_min_reduced)},
            {"spectral_abscissa", g.spectral_abscissa},
            {"nodes", nodes}};
}

DuioGains gains_from_json(const json& j) {
    DuioGains g;
    try {
        g.method = j.at("method").get<std::string>();
        g.leader = j.at("leader").get<int>() - 1;
        g.M1 = matrix_from_json(j.at("M1"), "M1");
        g.decay = j.at("decay").get<double>();
        g.gamma = j.at("gamma").get<double>();
        g.gamma_bound = j.at("gamma_bound").get<double>();
        g.lambda_min_reduced = number_or_inf(j.at("lambda_min_reduced"));
        g.spectral_abscissa = j.at("spectral_abscissa").get<double>();
        for (const json& n : j.at("nodes")) {
            NodeGains ng;
            const std::string tag = "node " + std::to_string(n.at("node").get<int>());
            ng.E = matrix_from_json(n.at("E"), tag + " E");
            ng.F = matrix_from_json(n.at("F"), tag + " F");
            ng.L = matrix_from_json(n.at("L"), tag + " L");
            ng.H = matrix_from_json(n.at("H"), tag + " H");
            ng.K = matrix_from_json(n.at("K"), tag + " K");
            // Empty nested arrays lose their row count; restore n_x rows.
            const Eigen::Index n_x = ng.E.rows();
            if (ng.F.size() == 0) {
                ng.F.resize(n_x, 0);
            }
            if (ng.L.size() == 0) {
                ng.L.resize(n_x, 0);
            }
            if (ng.H.size() == 0) {
                ng.H.resize(n_x, 0);
            }
            g.nodes.push_back(std::move(ng));
        }
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed gains JSON: ") + e.what());
    }
    return g;
}

// Reports.

namespace {

json vector_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        a.push_back(v(k));
    }
    return a;
}

json complex_json(std::complex<double> z) {
    return json::array({z.real(), z.imag()});
}

std::string vector_text(const Vector& v) {
    std::string s = "[";
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%s%.3e", k ? ", " : "", v(k));
        s += buf;
    }
    return s + "]";
}

}  // namespace

json report_to_json(const DataDesignReport& r) {
    json j;
    j["node"] = r.node + 1;
    j["rank_equality"] = {{"holds", r.rank_equality.holds},
                 {"rank_U_Ydot_X", r.rank_equality.rank_lhs},
                 {"rank_U_X_Xdot", r.rank_equality.rank_rhs},
                 {"singular_values_U_Ydot_X", vector_json(r.rank_equality.sv_lhs)},
                 {"singular_values_U_X_Xdot", vector_json(r.rank_equality.sv_rhs)},
                 {"inferred_r", r.rank_equality.inferred_r}};
    if (r.detectability) {
        json pbh = json::array();
        for (const PbhPoint& p : r.detectability->pbh.tested) {
            pbh.push_back({{"lambda", complex_json(p.lambda)}, {"sigma_min", p.sigma_min}, {"full_rank", p.full_rank}});
        }
        json pencil = json::array();
        for (const PencilPoint& p : r.detectability->pencil) {
            pencil.push_back({{"s", complex_json(p.s)}, {"rank", p.rank}});
        }
        j["detectability"] = {{"holds", r.detectability->holds},
                     {"detectable", r.detectability->pbh.detectable},
                     {"pbh", pbh},
                     {"pencil_cross_check", r.detectability->pencil_cross_check},
                     {"expected_pencil_rank", r.detectability->expected_pencil_rank},
                     {"pencil", pencil}};
    } else {
        j["detectability"] = nullptr;
    }
    if (r.rank_equality.holds) {
        j["T_u"] = matrix_to_json(r.T_u);
        j["T_y"] = matrix_to_json(r.T_y);
        j["T_x"] = matrix_to_json(r.T_x);
        j["rank_T_y"] = r.rank_Ty;
        j["C_recovered"] = matrix_to_json(r.C_recovered);
        j["residual_data_equation"] = r.residual_data_equation;
        j["residual_C"] = r.residual_C;
    }
    return j;
}

std::string explain_report(const DataDesignReport& r) {
    std::ostringstream out;
    out << "node " << r.node + 1 << "\n";
    out << "  rank [U; Ydot; X] = " << r.rank_equality.rank_lhs << "  sv " << vector_text(r.rank_equality.sv_lhs) << "\n";
    out << "  rank [U; X; Xdot] = " << r.rank_equality.rank_rhs << "  sv " << vector_text(r.rank_equality.sv_rhs) << "\n";
    out << "  rank equality: " << (r.rank_equality.holds ? "holds" : "FAILS") << " (inferred r = " << r.rank_equality.inferred_r
        << ")\n";
    if (r.rank_equality.holds) {
        out << "  rank T_y = " << r.rank_Ty << ", data equation residual " << format_number(r.residual_data_equation)
            << ", C recovery residual " << format_number(r.residual_C) << "\n";
    }
    if (r.detectability) {
        out << "  detectability from data: " << (r.detectability->holds ? "holds" : "FAILS") << "\n";
        for (const PbhPoint& p : r.detectability->pbh.tested) {
            char buf[128];
            std::snprintf(buf, sizeof(buf), "    PBH at %.6g%+.6gi: sigma_min %.3e (%s)\n", p.lambda.real(),
                          p.lambda.imag(), p.sigma_min, p.full_rank ? "full rank" : "deficient");
            out << buf;
        }
        out << "    pencil cross-check (" << r.detectability->pencil.size() << " points, expected rank "
            << r.detectability->expected_pencil_rank << "): " << (r.detectability->pencil_cross_check ? "agrees" : "DISAGREES") << "\n";
    }
    return out.str();
}

// Trajectories and results.

void write_plant_trajectory(const std::string& path, const Trajectory& traj) {
    const Eigen::Index T = traj.size();
    const Eigen::Index n = traj.X.rows();
    std::vector<std::string> header{"t"};
    for (const auto& s : names("x", n)) {
        header.push_back(s);
    }
    for (const auto& s : names("xdot", n)) {
        header.push_back(s);
    }
    Eigen::Index cols = 1 + 2 * n;
    for (std::size_t i = 0; i < traj.nodes.size(); ++i) {
        const NodeSamples& ns = traj.nodes[i];
        const std::string tag = "n" + std::to_string(i + 1) + "_";
        for (const auto& s : names(tag + "u", ns.U.rows())) {
            header.push_back(s);
        }
        for (const auto& s : names(tag + "y", ns.Y.rows())) {
            header.push_back(s);
        }
        for (const auto& s : names(tag + "ydot", ns.Ydot.rows())) {
            header.push_back(s);
        }
        cols += ns.U.rows() + 2 * ns.Y.rows();
    }
    Matrix rows(T, cols);
    for (Eigen::Index k = 0; k < T; ++k) {
        rows(k, 0) = traj.t[static_cast<std::size_t>(k)];
    }
    rows.middleCols(1, n) = traj.X.transpose();
    rows.middleCols(1 + n, n) = traj.Xdot.transpose();
    Eigen::Index c = 1 + 2 * n;
    for (const NodeSamples& ns : traj.nodes) {
        rows.middleCols(c, ns.U.rows()) = ns.U.transpose();
        c += ns.U.rows();
        rows.middleCols(c, ns.Y.rows()) = ns.Y.transpose();
        c += ns.Y.rows();
        rows.middleCols(c, ns.Ydot.rows()) = ns.Ydot.transpose();
        c += ns.Ydot.rows();
    }
    write_csv(path, header, rows);
}

void write_run(const std::string& dir, const RunResult& run, const json& summary) {
    ensure_directory(dir);
    const Eigen::Index T = run.size();
    const Eigen::Index n = run.X.rows();
    const int M = run.M();

    std::vector<std::string> header{"t"};
    for (const auto& s : names("x", n)) {
        header.push_back(s);
    }
    for (int i = 1; i <= M; ++i) {
        for (const auto& s : names("xhat" + std::to_string(i), n)) {
            header.push_back(s);
        }
    }
    Matrix traj(T, 1 + n * (M + 1));
    for (Eigen::Index k = 0; k < T; ++k) {
        traj(k, 0) = run.t[static_cast<std::size_t>(k)];
    }
    traj.middleCols(1, n) = run.X.transpose();
    for (int i = 0; i < M; ++i) {
        traj.middleCols(1 + n * (i + 1), n) = run.xhat[static_cast<std::size_t>(i)].transpose();
    }
    write_csv(path_join(dir, "trajectory.csv"), header, traj);

    std::vector<std::string> eh{"t"};
    for (int i = 1; i <= M; ++i) {
        eh.push_back("e_" + std::to_string(i));
    }
    eh.emplace_back("spread");
    Matrix err(T, M + 2);
    for (Eigen::Index k = 0; k < T; ++k) {
        err(k, 0) = run.t[static_cast<std::size_t>(k)];
    }
    err.middleCols(1, M) = run.error_norms.transpose();
    err.col(M + 1) = run.spread;
    write_csv(path_join(dir, "errors.csv"), eh, err);
    write_json(path_join(dir, "summary.json"), summary);
}

std::string display_name(Method m) {
    switch (m) {
        case Method::Model:
            return "DUIO";
        case Method::Data:
            return "D-DUIO";
        case Method::Id:
            return "ID-DUIO";
    }
    return "DUIO";
}

void write_compare(const std::string& dir, const CompareResult& result) {
    ensure_directory(dir);
    std::string csv = "method,mse,mae\n";
    std::string md = "| Method | MSE | MAE |\n|---|---|---|\n";
    for (const MetricSummary& s : result.summaries) {
        csv += display_name(s.method) + "," + format_number(s.mse) + "," + format_number(s.mae) + "\n";
        char buf[160];
        std::snprintf(buf, sizeof(buf), "| %s | %.4f | %.4f |\n", display_name(s.method).c_str(), s.mse, s.mae);
        md += buf;
    }
    write_text(path_join(dir, "table1.csv"), csv);
    write_text(path_join(dir, "table1.md"), md);

    std::string ex = "experiment,seed,method,node,mse,mae\n";
    for (const ExperimentOutcome& e : result.experiments) {
        for (std::size_t j = 0; j < e.per_method.size(); ++j) {
            const RunMetrics& r = e.per_method[j];
            for (Eigen::Index i = 0; i < r.mse.size(); ++i) {
                ex += std::to_string(e.index + 1) + "," + std::to_string(e.seed) + "," +
                      display_name(result.summaries[j].method) + "," + std::to_string(i + 1) + "," +
                      format_number(r.mse(i)) + "," + format_number(r.mae(i)) + "\n";
            }
        }
    }
    write_text(path_join(dir, "experiments.csv"), ex);
}

}  // namespace duio

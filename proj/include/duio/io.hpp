#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "duio/datagen.hpp"
#include "duio/design_data.hpp"
#include "duio/design_model.hpp"
#include "duio/metrics.hpp"
#include "duio/observer_sim.hpp"
#include "duio/plant.hpp"

namespace duio {

// CSV convention: comma separated, one header row, %.17g numbers, LF endings.
std::string format_number(double v);

struct CsvTable {
    std::vector<std::string> header;
    Matrix values;  // rows x columns as in the file
};

void write_csv(const std::string& path, const std::vector<std::string>& header, const Matrix& rows);
CsvTable read_csv(const std::string& path);

void write_text(const std::string& path, const std::string& text);
void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);
void ensure_directory(const std::string& path);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j, const std::string& what);

// Dataset directory: U.csv Y.csv Ydot.csv X.csv Xdot.csv times.csv meta.json,
// plus W_validation.csv when the ground truth is kept. Every matrix file has
// one row per sample.
void save_dataset(const std::string& dir, const NodeDataset& ds);
NodeDataset load_dataset(const std::string& dir);

// root/node_<i>/ for i = 1..M plus root/meta.json with the node count.
void save_datasets(const std::string& root, const std::vector<NodeDataset>& datasets);
std::vector<NodeDataset> load_datasets(const std::string& root);

nlohmann::json gains_to_json(const DuioGains& gains);
DuioGains gains_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const DataDesignReport& report);
// Human-readable rank tests with their singular values.
std::string explain_report(const DataDesignReport& report);

// t, x_1..x_n, xdot_1..xdot_n, then per node u, y, ydot columns.
void write_plant_trajectory(const std::string& path, const Trajectory& traj);

// trajectory.csv (t, x, xhat_1..xhat_M), errors.csv (t, ||e_1||..||e_M||,
// spread) and summary.json.
void write_run(const std::string& dir, const RunResult& run, const nlohmann::json& summary);

// table1.csv, table1.md and experiments.csv (per-experiment, per-node values).
void write_compare(const std::string& dir, const CompareResult& result);

std::string display_name(Method m);

}  // namespace duio

#pragma once

#include <random>
#include <string>

#include "duio/design_model.hpp"
#include "duio/linalg.hpp"
#include "duio/plant.hpp"

namespace support {

using duio::Matrix;
using duio::Vector;

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0);

// Independent matrix exponential (Eigen's Pade implementation).
Matrix expm(const Matrix& a);

// One-node plant drawn for the model/data agreement checks. The draw cycles
// through three shapes by `index`: generic with n_y >= r, fewer outputs than
// unknown inputs, and C annihilating one unknown-input direction.
struct RandomNodePlant {
    duio::PlantModel model;
    int shape = 0;
};

RandomNodePlant random_node_plant(std::mt19937_64& rng, int index);

// Fresh empty directory under the system temp dir.
std::string scratch_dir(const std::string& name);

std::string read_file(const std::string& path);

// Runs the CLI with `args`, output discarded; returns the exit status.
int run_cli(const std::string& cli, const std::string& args, const std::string& log = "/dev/null");

// Byte-wise comparison of two directory trees.
bool same_tree(const std::string& a, const std::string& b, std::string* difference = nullptr);

}  // namespace support

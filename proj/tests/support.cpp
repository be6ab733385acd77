#include "support.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <sys/wait.h>
#include <unsupported/Eigen/MatrixFunctions>

namespace support {

namespace fs = std::filesystem;

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale) {
    std::normal_distribution<double> n(0.0, scale);
    Matrix m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            m(r, c) = n(rng);
        }
    }
    return m;
}

Matrix expm(const Matrix& a) {
    return a.exp();
}

RandomNodePlant random_node_plant(std::mt19937_64& rng, int index) {
    std::uniform_int_distribution<int> nx_dist(2, 5);
    const int shape = index % 3;
    int n_x = nx_dist(rng);
    if (shape == 1 && n_x < 3) {
        n_x = 3;
    }
    const int n_m = std::uniform_int_distribution<int>(0, 1)(rng);
    int r = 0;
    int n_y = 0;
    if (shape == 1) {
        r = std::uniform_int_distribution<int>(2, n_x - 1)(rng);
        n_y = std::uniform_int_distribution<int>(1, r - 1)(rng);
    } else {
        r = std::uniform_int_distribution<int>(1, n_x - 1)(rng);
        n_y = std::uniform_int_distribution<int>(r, n_x)(rng);
    }
    const Matrix A = random_matrix(rng, n_x, n_x, 0.6);
    const Matrix B = random_matrix(rng, n_x, n_m + r);
    Matrix C = random_matrix(rng, n_y, n_x);
    if (shape == 2) {
        const Vector b = B.col(n_m);
        C = C * (Matrix::Identity(n_x, n_x) - b * b.transpose() / b.squaredNorm());
    }
    std::vector<int> known;
    for (int k = 0; k < n_m; ++k) {
        known.push_back(k);
    }
    const Matrix E(n_x, 0);
    std::vector<duio::NodeView> nodes{duio::make_node_view(B, E, C, known)};
    return RandomNodePlant{duio::PlantModel(A, B, E, std::move(nodes)), shape};
}

std::string scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("duio_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(const std::string& cli, const std::string& args, const std::string& log) {
    const std::string cmd = "\"" + cli + "\" " + args + " > \"" + log + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool same_tree(const std::string& a, const std::string& b, std::string* difference) {
    std::set<std::string> files_a;
    std::set<std::string> files_b;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (e.is_regular_file()) {
            files_a.insert(fs::relative(e.path(), a).string());
        }
    }
    for (const auto& e : fs::recursive_directory_iterator(b)) {
        if (e.is_regular_file()) {
            files_b.insert(fs::relative(e.path(), b).string());
        }
    }
    if (files_a != files_b || files_a.empty()) {
        if (difference) {
            *difference = "file lists differ";
        }
        return false;
    }
    for (const auto& f : files_a) {
        if (read_file((fs::path(a) / f).string()) != read_file((fs::path(b) / f).string())) {
            if (difference) {
                *difference = f;
            }
            return false;
        }
    }
    return true;
}

}  // namespace support

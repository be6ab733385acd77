#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

namespace duio {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;

// Numerical rank threshold: sigma_k counts when
// sigma_k > max(rows, cols) * eps * sigma_1 * multiplier.
struct RankPolicy {
    double multiplier = 1e3;

    double threshold(Eigen::Index rows, Eigen::Index cols, double sigma_max) const;
};

struct RankReport {
    int rank = 0;
    double threshold = 0.0;
    Vector singular_values;
};

RankReport rank_report(const Matrix& m, const RankPolicy& policy = {});
int numerical_rank(const Matrix& m, const RankPolicy& policy = {});
int numerical_rank(const ComplexMatrix& m, const RankPolicy& policy = {});
// Rank with the threshold taken against max(sigma_1, scale); for products such
// as C B whose own largest singular value may be pure rounding.
int numerical_rank_scaled(const Matrix& m, double scale, const RankPolicy& policy = {});

// Moore-Penrose pseudoinverse through the SVD, truncated with the rank policy.
Matrix pinv(const Matrix& m, const RankPolicy& policy = {});

// Orthonormal basis of range(m) and of its orthogonal complement.
Matrix range_basis(const Matrix& m, const RankPolicy& policy = {});
Matrix left_null_basis(const Matrix& m, const RankPolicy& policy = {});

Matrix vstack(std::initializer_list<const Matrix*> blocks);
Matrix hstack(std::initializer_list<const Matrix*> blocks);
Matrix block_diagonal(const std::vector<Matrix>& blocks);
Matrix kron(const Matrix& a, const Matrix& b);
Matrix select_columns(const Matrix& m, const std::vector<int>& columns);

std::vector<std::complex<double>> eigenvalues(const Matrix& a);

// max Re(lambda) over the spectrum; -inf for an empty matrix.
double spectral_abscissa(const Matrix& a);

// Largest-magnitude eigenvalue of a symmetric matrix (its spectral norm).
double symmetric_spectral_norm(const Matrix& s);

bool all_finite(const Matrix& m);

struct PbhOptions {
    // Eigenvalues with Re(lambda) >= -re_tolerance are tested.
    double re_tolerance = 1e-8;
    // [lambda I - A; C] is declared rank deficient when
    // sigma_min < rank_tolerance * max(1, ||[A; C]||).
    double rank_tolerance = 1e-7;
};

struct PbhPoint {
    std::complex<double> lambda;
    double sigma_min = 0.0;
    bool full_rank = true;
};

struct PbhReport {
    bool detectable = true;
    std::vector<PbhPoint> tested;
};

// Detectability of (A, C) by the PBH rank test at every eigenvalue of A in the
// closed right half plane.
PbhReport pbh_detectability(const Matrix& a, const Matrix& c, const PbhOptions& options = {});

}  // namespace duio

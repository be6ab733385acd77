#include "duio/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace duio {

double RankPolicy::threshold(Eigen::Index rows, Eigen::Index cols, double sigma_max) const {
    const double dim = static_cast<double>(std::max<Eigen::Index>({rows, cols, 1}));
    return dim * std::numeric_limits<double>::epsilon() * sigma_max * multiplier;
}

RankReport rank_report(const Matrix& m, const RankPolicy& policy) {
    RankReport report;
    if (m.size() == 0) {
        return report;
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    report.singular_values = svd.singularValues();
    const double smax = report.singular_values.size() ? report.singular_values(0) : 0.0;
    report.threshold = policy.threshold(m.rows(), m.cols(), smax);
    for (Eigen::Index k = 0; k < report.singular_values.size(); ++k) {
        if (report.singular_values(k) > report.threshold && report.singular_values(k) > 0.0) {
            ++report.rank;
        }
    }
    return report;
}

int numerical_rank(const Matrix& m, const RankPolicy& policy) {
    return rank_report(m, policy).rank;
}

int numerical_rank_scaled(const Matrix& m, double scale, const RankPolicy& policy) {
    if (m.size() == 0) {
        return 0;
    }
    const Vector sv = Eigen::JacobiSVD<Matrix>(m).singularValues();
    const double tol = policy.threshold(m.rows(), m.cols(), std::max(sv(0), scale));
    int rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (sv(k) > tol && sv(k) > 0.0) {
            ++rank;
        }
    }
    return rank;
}

int numerical_rank(const ComplexMatrix& m, const RankPolicy& policy) {
    if (m.size() == 0) {
        return 0;
    }
    Eigen::JacobiSVD<ComplexMatrix> svd(m);
    const auto& sv = svd.singularValues();
    const double tol = policy.threshold(m.rows(), m.cols(), sv(0));
    int rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (sv(k) > tol && sv(k) > 0.0) {
            ++rank;
        }
    }
    return rank;
}

Matrix pinv(const Matrix& m, const RankPolicy& policy) {
    Matrix result = Matrix::Zero(m.cols(), m.rows());
    if (m.size() == 0) {
        return result;
    }
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    const double tol = policy.threshold(m.rows(), m.cols(), sv(0));
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (sv(k) > tol && sv(k) > 0.0) {
            result.noalias() += svd.matrixV().col(k) * (1.0 / sv(k)) * svd.matrixU().col(k).transpose();
        }
    }
    return result;
}

Matrix range_basis(const Matrix& m, const RankPolicy& policy) {
    if (m.size() == 0) {
        return Matrix(m.rows(), 0);
    }
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU);
    const int rank = numerical_rank(m, policy);
    return svd.matrixU().leftCols(rank);
}

Matrix left_null_basis(const Matrix& m, const RankPolicy& policy) {
    if (m.rows() == 0) {
        return Matrix(0, 0);
    }
    if (m.cols() == 0) {
        return Matrix::Identity(m.rows(), m.rows());
    }
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU);
    const int rank = numerical_rank(m, policy);
    return svd.matrixU().rightCols(m.rows() - rank);
}

Matrix vstack(std::initializer_list<const Matrix*> blocks) {
    Eigen::Index rows = 0;
    Eigen::Index cols = -1;
    for (const Matrix* b : blocks) {
        rows += b->rows();
        if (cols < 0) {
            cols = b->cols();
        }
    }
    Matrix out(rows, std::max<Eigen::Index>(cols, 0));
    Eigen::Index r = 0;
    for (const Matrix* b : blocks) {
        if (b->rows() > 0) {
            out.middleRows(r, b->rows()) = *b;
        }
        r += b->rows();
    }
    return out;
}

Matrix hstack(std::initializer_list<const Matrix*> blocks) {
    Eigen::Index cols = 0;
    Eigen::Index rows = -1;
    for (const Matrix* b : blocks) {
        cols += b->cols();
        if (rows < 0) {
            rows = b->rows();
        }
    }
    Matrix out(std::max<Eigen::Index>(rows, 0), cols);
    Eigen::Index c = 0;
    for (const Matrix* b : blocks) {
        if (b->cols() > 0) {
            out.middleCols(c, b->cols()) = *b;
        }
        c += b->cols();
    }
    return out;
}

Matrix block_diagonal(const std::vector<Matrix>& blocks) {
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    for (const auto& b : blocks) {
        rows += b.rows();
        cols += b.cols();
    }
    Matrix out = Matrix::Zero(rows, cols);
    Eigen::Index r = 0;
    Eigen::Index c = 0;
    for (const auto& b : blocks) {
        out.block(r, c, b.rows(), b.cols()) = b;
        r += b.rows();
        c += b.cols();
    }
    return out;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Matrix select_columns(const Matrix& m, const std::vector<int>& columns) {
    Matrix out(m.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t k = 0; k < columns.size(); ++k) {
        out.col(static_cast<Eigen::Index>(k)) = m.col(columns[k]);
    }
    return out;
}

std::vector<std::complex<double>> eigenvalues(const Matrix& a) {
    std::vector<std::complex<double>> out;
    if (a.size() == 0) {
        return out;
    }
    Eigen::EigenSolver<Matrix> solver(a, false);
    const auto& ev = solver.eigenvalues();
    out.assign(ev.data(), ev.data() + ev.size());
    return out;
}

double spectral_abscissa(const Matrix& a) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& lambda : eigenvalues(a)) {
        best = std::max(best, lambda.real());
    }
    return best;
}

double symmetric_spectral_norm(const Matrix& s) {
    if (s.size() == 0) {
        return 0.0;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (s + s.transpose()), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

bool all_finite(const Matrix& m) {
    return m.allFinite();
}

PbhReport pbh_detectability(const Matrix& a, const Matrix& c, const PbhOptions& options) {
    PbhReport report;
    const Eigen::Index n = a.rows();
    if (n == 0) {
        return report;
    }
    const Matrix stacked = vstack({&a, &c});
    const double scale = std::max(1.0, stacked.norm());
    const ComplexMatrix ac = a.cast<std::complex<double>>();
    const ComplexMatrix cc = c.cast<std::complex<double>>();
    for (const auto& lambda : eigenvalues(a)) {
        if (lambda.real() < -options.re_tolerance) {
            continue;
        }
        ComplexMatrix pencil(n + c.rows(), n);
        pencil.topRows(n) = lambda * ComplexMatrix::Identity(n, n) - ac;
        if (c.rows() > 0) {
            pencil.bottomRows(c.rows()) = cc;
        }
        Eigen::JacobiSVD<ComplexMatrix> svd(pencil);
        PbhPoint point;
        point.lambda = lambda;
        point.sigma_min = svd.singularValues()(n - 1);
        point.full_rank = point.sigma_min >= options.rank_tolerance * scale;
        report.detectable = report.detectable && point.full_rank;
        report.tested.push_back(point);
    }
    return report;
}

}  // namespace duio

#include "duio/riccati.hpp"

#include <cmath>

#include <Eigen/LU>
#include <Eigen/QR>

#include "duio/errors.hpp"

namespace duio {
namespace {

double care_residual(const Matrix& A, const Matrix& G, const Matrix& Q, const Matrix& X) {
    const Matrix r = A.transpose() * X + X * A - X * G * X + Q;
    const double scale = std::max(1.0, Q.norm() + 2.0 * (A.transpose() * X).norm() + (X * G * X).norm());
    return r.norm() / scale;
}

}  // namespace

Matrix solve_lyapunov(const Matrix& A, const Matrix& Q) {
    const Eigen::Index n = A.rows();
    const Matrix I = Matrix::Identity(n, n);
    // vec(A^T X + X A) = (I kron A^T + A^T kron I) vec(X)
    const Matrix op = kron(I, A.transpose()) + kron(A.transpose(), I);
    const Vector rhs = -Eigen::Map<const Vector>(Q.data(), Q.size());
    Eigen::FullPivLU<Matrix> lu(op);
    if (!lu.isInvertible()) {
        throw NumericsError("Lyapunov operator is singular (A has eigenvalues summing to zero)");
    }
    Vector x = lu.solve(rhs);
    Matrix X = Eigen::Map<Matrix>(x.data(), n, n);
    return 0.5 * (X + X.transpose());
}

CareSolution solve_care(const Matrix& A, const Matrix& B, const Matrix& Q) {
    const Eigen::Index n = A.rows();
    CareSolution out;
    if (n == 0) {
        out.X = Matrix(0, 0);
        return out;
    }
    const Matrix G = B * B.transpose();

    Matrix Z(2 * n, 2 * n);
    Z << A, -G, -Q, -A.transpose();

    const double dim = static_cast<double>(2 * n);
    bool scaled = true;
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
        Eigen::PartialPivLU<Matrix> lu(Z);
        const double log_det = lu.matrixLU().diagonal().cwiseAbs().array().log().sum();
        if (!std::isfinite(log_det) || lu.rcond() < 1e-14) {
            throw NumericsError("Hamiltonian sign iteration hit a singular iterate; no stabilising solution");
        }
        const double c = scaled ? std::exp(-log_det / dim) : 1.0;
        const Matrix next = 0.5 * (c * Z + lu.inverse() / c);
        const double change = (next - Z).lpNorm<1>() / std::max(1.0, next.lpNorm<1>());
        Z = next;
        out.sign_iterations = it + 1;
        if (change < 1e-2) {
            scaled = false;
        }
        if (change < 1e-13) {
            converged = true;
            break;
        }
    }
    if (!converged || !Z.allFinite()) {
        throw NumericsError("Hamiltonian sign iteration did not converge");
    }

    const Matrix I = Matrix::Identity(n, n);
    Matrix lhs(2 * n, n);
    Matrix rhs(2 * n, n);
    lhs << Z.topRightCorner(n, n), Z.bottomRightCorner(n, n) + I;
    rhs << Z.topLeftCorner(n, n) + I, Z.bottomLeftCorner(n, n);
    Matrix X = lhs.colPivHouseholderQr().solve(-rhs);
    X = 0.5 * (X + X.transpose());

    double res = care_residual(A, G, Q, X);
    for (int k = 0; k < 3 && res > 1e-14; ++k) {
        const Matrix closed = A - G * X;
        Matrix candidate;
        try {
            candidate = solve_lyapunov(closed, Q + X * G * X);
        } catch (const NumericsError&) {
            break;
        }
        const double cres = care_residual(A, G, Q, candidate);
        if (!(cres < res)) {
            break;
        }
        X = candidate;
        res = cres;
        out.newton_steps = k + 1;
    }

    if (!(res < 1e-8)) {
        throw NumericsError("Riccati residual " + std::to_string(res) + " above tolerance");
    }
    if (!(spectral_abscissa(A - G * X) < 0.0)) {
        throw NumericsError("Riccati solution is not stabilising");
    }
    out.X = X;
    out.residual = res;
    return out;
}

}  // namespace duio

#pragma once

#include "duio/linalg.hpp"

namespace duio {

struct CareSolution {
    Matrix X;
    double residual = 0.0;  // relative Frobenius residual of the equation
    int sign_iterations = 0;
    int newton_steps = 0;
};

// Stabilising solution of  A^T X + X A - X B B^T X + Q = 0  (R = I).
// Matrix sign function on the Hamiltonian followed by Newton-Kleinman
// refinement. Throws NumericsError when the Hamiltonian has eigenvalues on the
// imaginary axis (no stabilising solution) or the iteration stalls.
CareSolution solve_care(const Matrix& A, const Matrix& B, const Matrix& Q);

// Solves  A^T X + X A + Q = 0  through the Kronecker form. Intended for the
// small state dimensions this library targets.
Matrix solve_lyapunov(const Matrix& A, const Matrix& Q);

}  // namespace duio

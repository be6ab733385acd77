#include <cmath>
#include <random>

#include <doctest.h>

#include "duio/linalg.hpp"
#include "support.hpp"

using namespace duio;

TEST_SUITE("linalg") {

TEST_CASE("numerical rank") {
    std::mt19937_64 rng(1);
    SUBCASE("outer product has rank one") {
        const Matrix u = support::random_matrix(rng, 5, 1);
        const Matrix v = support::random_matrix(rng, 1, 7);
        CHECK(numerical_rank(Matrix(u * v)) == 1);
    }
    SUBCASE("zero and empty matrices") {
        CHECK(numerical_rank(Matrix(Matrix::Zero(3, 4))) == 0);
        CHECK(numerical_rank(Matrix(0, 4)) == 0);
    }
    SUBCASE("product of random factors") {
        const Matrix m = support::random_matrix(rng, 6, 3) * support::random_matrix(rng, 3, 8);
        const RankReport r = rank_report(m);
        CHECK(r.rank == 3);
        CHECK(r.singular_values(2) > r.threshold);
        CHECK(r.singular_values(3) < r.threshold);
    }
    SUBCASE("complex rank") {
        ComplexMatrix m(2, 2);
        m << std::complex<double>(1, 1), std::complex<double>(2, 2), std::complex<double>(1, 0),
            std::complex<double>(2, 0);
        CHECK(numerical_rank(m) == 1);
    }
}

TEST_CASE("pseudoinverse satisfies the Penrose conditions") {
    std::mt19937_64 rng(2);
    const Matrix a = support::random_matrix(rng, 6, 3) * support::random_matrix(rng, 3, 5);
    const Matrix p = pinv(a);
    CHECK((a * p * a - a).norm() < 1e-10);
    CHECK((p * a * p - p).norm() < 1e-10);
    CHECK((a * p - (a * p).transpose()).norm() < 1e-10);
    CHECK((p * a - (p * a).transpose()).norm() < 1e-10);

    // Full column rank: agrees with the normal-equations inverse.
    const Matrix f = support::random_matrix(rng, 7, 3);
    const Matrix ne = (f.transpose() * f).inverse() * f.transpose();
    CHECK((pinv(f) - ne).norm() < 1e-10);
}

TEST_CASE("range and left null bases") {
    std::mt19937_64 rng(3);
    const Matrix a = support::random_matrix(rng, 5, 2) * support::random_matrix(rng, 2, 4);
    const Matrix R = range_basis(a);
    const Matrix N = left_null_basis(a);
    REQUIRE(R.cols() == 2);
    REQUIRE(N.cols() == 3);
    CHECK((R.transpose() * R - Matrix::Identity(2, 2)).norm() < 1e-12);
    CHECK((N.transpose() * a).norm() < 1e-10);
    CHECK(((Matrix::Identity(5, 5) - R * R.transpose()) * a).norm() < 1e-10);
}

TEST_CASE("stacking, block diagonal and Kronecker products") {
    Matrix a(1, 2);
    a << 1, 2;
    Matrix b(2, 2);
    b << 3, 4, 5, 6;
    const Matrix v = vstack({&a, &b});
    CHECK(v.rows() == 3);
    CHECK(v(2, 1) == 6);
    const Matrix h = hstack({&b, &b});
    CHECK(h.cols() == 4);
    CHECK(h(1, 3) == 6);

    const Matrix bd = block_diagonal({a, b});
    CHECK(bd.rows() == 3);
    CHECK(bd.cols() == 4);
    CHECK(bd(0, 2) == 0);
    CHECK(bd(2, 3) == 6);

    const Matrix k = kron(Matrix::Identity(2, 2), b);
    CHECK(k.rows() == 4);
    CHECK(k(2, 2) == 3);
    CHECK(k(0, 2) == 0);
    Matrix two(1, 1);
    two << 2;
    CHECK((kron(two, b) - 2 * b).norm() == 0);

    CHECK((select_columns(b, {1}) - b.col(1)).norm() == 0);
}

TEST_CASE("spectral abscissa") {
    Matrix a = Matrix::Zero(3, 3);
    a.diagonal() << -1, -3, -0.5;
    CHECK(spectral_abscissa(a) == doctest::Approx(-0.5));
    Matrix rot(2, 2);
    rot << -0.1, 2, -2, -0.1;
    CHECK(spectral_abscissa(rot) == doctest::Approx(-0.1));
    Matrix s(2, 2);
    s << 1, 2, 2, -4;
    // eigenvalues (-3 +- sqrt(41)) / 2
    CHECK(symmetric_spectral_norm(s) == doctest::Approx((3.0 + std::sqrt(41.0)) / 2.0));
}

TEST_CASE("PBH detectability") {
    Matrix A = Matrix::Zero(2, 2);
    A.diagonal() << 1, -1;
    SUBCASE("unstable mode invisible") {
        Matrix C(1, 2);
        C << 0, 1;
        const PbhReport r = pbh_detectability(A, C);
        CHECK_FALSE(r.detectable);
        REQUIRE(r.tested.size() == 1);
        CHECK(r.tested[0].lambda.real() == doctest::Approx(1.0));
        CHECK_FALSE(r.tested[0].full_rank);
    }
    SUBCASE("only the stable mode invisible") {
        Matrix C(1, 2);
        C << 1, 0;
        CHECK(pbh_detectability(A, C).detectable);
    }
    SUBCASE("marginal modes count as unstable") {
        Matrix R(2, 2);
        R << 0, 1, -1, 0;
        CHECK_FALSE(pbh_detectability(R, Matrix::Zero(1, 2)).detectable);
        Matrix C(1, 2);
        C << 1, 0;
        CHECK(pbh_detectability(R, C).detectable);
    }
    SUBCASE("Hurwitz matrix is detectable with no output") {
        Matrix H = Matrix::Zero(2, 2);
        H.diagonal() << -1, -2;
        const PbhReport r = pbh_detectability(H, Matrix(0, 2));
        CHECK(r.detectable);
        CHECK(r.tested.empty());
    }
}

}

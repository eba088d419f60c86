#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"
#include "urv/preconditions.hpp"
#include "urv/svd.hpp"

using urv::Index;
using urv::Matrix;
using urv::Vector;
using urv::testing::counterexampleTriangular;
using urv::testing::randomTriangular;
using urv::testing::section1Matrix;

namespace {

void checkFactorization(const Matrix& a, const urv::SvdResult<double>& f)
{
    const Index n = a.rows();
    const Matrix reconstructed = f.u * f.sigma.asDiagonal() * f.v.transpose();
    CHECK(urv::frobeniusNorm(Matrix(reconstructed - a)) <= 1e-12 * urv::frobeniusNorm(a));
    CHECK(urv::frobeniusNorm(Matrix(f.u.transpose() * f.u - Matrix::Identity(n, n))) <=
          1e-12 * static_cast<double>(n));
    CHECK(urv::frobeniusNorm(Matrix(f.v.transpose() * f.v - Matrix::Identity(n, n))) <=
          1e-12 * static_cast<double>(n));
    for (Index i = 0; i + 1 < n; ++i) {
        CHECK(f.sigma(i) >= f.sigma(i + 1));
    }
}

}  // namespace

TEST_CASE("svd of a diagonal matrix is a signed permutation")
{
    Matrix m = Vector::Zero(3).asDiagonal();
    m(0, 0) = 1.0;
    m(1, 1) = 2.0;
    m(2, 2) = 10.0;
    const auto f = urv::svd(m);
    CHECK(f.sigma(0) == 10.0);
    CHECK(f.sigma(1) == 2.0);
    CHECK(f.sigma(2) == 1.0);
    // columns are canonical basis vectors with positive sign
    Matrix expected(3, 3);
    expected << 0, 0, 1, 0, 1, 0, 1, 0, 0;
    CHECK(f.v == expected);
    CHECK(f.u == expected);
    checkFactorization(m, f);
}

TEST_CASE("svd of [[9,1],[1,10]] matches the characteristic polynomial roots")
{
    // symmetric positive definite, so sigma are the eigenvalues;
    // lambda^2 - 19 lambda + 89 = 0 gives (19 +- sqrt 5)/2
    Matrix m(2, 2);
    m << 9.0, 1.0, 1.0, 10.0;
    const double hi = (19.0 + std::sqrt(5.0)) / 2.0;
    const double lo = (19.0 - std::sqrt(5.0)) / 2.0;
    const auto f = urv::svd(m);
    CHECK(f.sigma(0) == doctest::Approx(hi).epsilon(1e-14));
    CHECK(f.sigma(1) == doctest::Approx(lo).epsilon(1e-14));
    checkFactorization(m, f);
}

TEST_CASE("svd of the identity is the identity")
{
    const Matrix m = Matrix::Identity(4, 4);
    const auto f = urv::svd(m);
    for (Index i = 0; i < 4; ++i) {
        CHECK(f.sigma(i) == 1.0);
    }
    CHECK(f.u == m);
    CHECK(f.v == m);
}

TEST_CASE("svd rejects bad inputs")
{
    CHECK_THROWS_AS(urv::svd(Matrix(Matrix::Zero(2, 3))), std::invalid_argument);
    Matrix bad = Matrix::Identity(2, 2);
    bad(0, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(urv::svd(bad), std::invalid_argument);
}

TEST_CASE("svd handles exactly singular matrices via basis completion")
{
    Matrix m = Matrix::Zero(3, 3);
    m(0, 0) = 5.0;
    m(1, 1) = 3.0;
    const auto f = urv::svd(m);
    CHECK(f.sigma(2) == 0.0);
    checkFactorization(m, f);
}

TEST_CASE("svd is deterministic")
{
    const auto t = randomTriangular(6, 123);
    const auto f1 = urv::svd(t.matrix());
    const auto f2 = urv::svd(t.matrix());
    CHECK(f1.sigma == f2.sigma);
    CHECK(f1.u == f2.u);
    CHECK(f1.v == f2.v);
}

TEST_CASE("sigmaMin")
{
    SUBCASE("diagonal")
    {
        Matrix m = Matrix::Zero(2, 2);
        m(0, 0) = 3.0;
        m(1, 1) = 0.5;
        CHECK(urv::sigmaMin(m) == 0.5);
    }
    SUBCASE("introductory example is just below one")
    {
        // 0.999999999999995004 cross-checked against LAPACK dgesvd
        const double smin = urv::sigmaMin(section1Matrix());
        CHECK(smin == doctest::Approx(0.999999999999995004).epsilon(1e-14));
        CHECK(smin < 1.0);
    }
    SUBCASE("block-diagonal coupling: smallest value comes from the 1x1 block")
    {
        Matrix m(3, 3);
        m << 1, 0, 0, 0, 9, 1, 0, 1, 10;  // min(1, (19 - sqrt 5)/2) = 1
        CHECK(urv::sigmaMin(m) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("oracle reconstruction and orthogonality on random matrices")
{
    std::mt19937_64 rng(31337);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::uniform_int_distribution<Index> dims(1, 12);
    for (int trial = 0; trial < 100; ++trial) {
        const Index n = dims(rng);
        Matrix m(n, n);
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) {
                m(i, j) = dist(rng);
            }
        }
        checkFactorization(m, urv::svd(m));
    }
}

TEST_CASE("Lemma 1: sigma_min is at most any diagonal magnitude of a triangular matrix")
{
    std::mt19937_64 seeds(11);
    for (int trial = 0; trial < 200; ++trial) {
        const Index n = 2 + static_cast<Index>(seeds() % 11);
        const auto t = randomTriangular(n, seeds());
        const double smin = urv::sigmaMin(t.matrix());
        const double minDiag = t.matrix().diagonal().cwiseAbs().minCoeff();
        CHECK(smin <= minDiag + 1e-12 * urv::frobeniusNorm(t.matrix()));
    }
}

TEST_CASE("Lemma 5: sigma_min of the first n-1 columns sits between sigma_{n-1} and sigma_n")
{
    std::mt19937_64 seeds(17);
    for (int trial = 0; trial < 200; ++trial) {
        const Index n = 2 + static_cast<Index>(seeds() % 11);
        const auto t = randomTriangular(n, seeds());
        // for triangular R the first n-1 columns are [S; 0], so sigma_min(R_1)
        // equals sigma_min of the leading block
        const double sminR1 = n == 2 ? std::abs(t(0, 0))
                                     : urv::sigmaMin(Matrix(t.matrix().topLeftCorner(n - 1, n - 1)));
        const auto f = urv::svd(t.matrix());
        const double tol = 1e-12 * urv::frobeniusNorm(t.matrix());
        CHECK(f.sigma(n - 2) + tol >= sminR1);
        CHECK(sminR1 >= f.sigma(n - 1) - tol);
    }
}

TEST_CASE("checkPreconditions classifies the worked examples")
{
    SUBCASE("introductory example: rho = 10 but the corollary hypothesis holds")
    {
        const auto report =
            urv::checkPreconditions(urv::UpperTriangular<double>(section1Matrix()));
        CHECK(report.rho0 == 10.0);  // e = 10, sigma_min(diag(1,2)) = 1, both exact
        CHECK_FALSE(report.rhoLtOne);
        CHECK(report.sigmaMinS == 1.0);
        CHECK(report.sigmaMinR < 1.0);
        CHECK(report.sminSGtSminR);
        CHECK(report.verdict == urv::Verdict::GuaranteedCorollary);
    }
    SUBCASE("counterexample: v_nn = 0 means stationary risk")
    {
        const auto report =
            urv::checkPreconditions(urv::UpperTriangular<double>(counterexampleTriangular()));
        CHECK(std::abs(report.vnn) <= 1e-10);
        CHECK_FALSE(report.vnnNonzero);
        CHECK(report.verdict == urv::Verdict::StationaryRisk);
    }
    SUBCASE("corner already smallest")
    {
        Matrix m = Matrix::Zero(3, 3);
        m(0, 0) = 1.0;
        m(1, 1) = 2.0;
        m(2, 2) = 0.5;
        const auto report = urv::checkPreconditions(urv::UpperTriangular<double>(m));
        CHECK(report.vnn == 1.0);
        CHECK(report.sigmaMinS == 1.0);
        CHECK(report.sigmaMinR == 0.5);
        CHECK(report.verdict == urv::Verdict::GuaranteedCorollary);
    }
    SUBCASE("order below 2 is rejected")
    {
        Matrix one(1, 1);
        one << 3.0;
        CHECK_THROWS_AS(urv::checkPreconditions(urv::UpperTriangular<double>(one)),
                        std::invalid_argument);
    }
}

TEST_CASE("Theorem 3: a sigma_min(S) gap implies a simple sigma_n and nonzero v_nn")
{
    std::mt19937_64 seeds(23);
    int applicable = 0;
    for (int trial = 0; trial < 300; ++trial) {
        const Index n = 2 + static_cast<Index>(seeds() % 11);
        const auto t = randomTriangular(n, seeds());
        const auto report = urv::checkPreconditions(t);
        if (report.sminSGtSminR &&
            (report.sigmaMinS - report.sigmaMinR) / report.sigmaMinS > 1e-6) {
            ++applicable;
            CHECK(report.sigmaNextR > report.sigmaMinR);
            CHECK(std::abs(report.vnn) > 0.0);
        }
    }
    CHECK(applicable > 50);  // the corpus genuinely exercises the hypothesis
}

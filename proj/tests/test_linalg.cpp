#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "bcones/linalg.hpp"
#include "oracles.hpp"

using namespace bcones;

namespace {

Matrix leslie_h4()
{
    Matrix H(4, 4);
    H << 0, 0, 1, 1,
         0, 1, 1, 0,
         1, 1, 0, 0,
         1, 0, 0, 1;
    return H;
}

Vector vec(std::initializer_list<double> v)
{
    Vector out(static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

} // namespace

TEST(NumericRank, Identity) { EXPECT_EQ(numeric_rank(Matrix::Identity(3, 3)), 3u); }

TEST(NumericRank, LeslieHankelHasRankThree)
{
    EXPECT_EQ(numeric_rank(leslie_h4()), 3u);
    EXPECT_EQ(oracle::gauss_rank(leslie_h4()), 3u);
}

TEST(NumericRank, OuterProductMatchesElimination)
{
    const Matrix M = vec({1, 2, 3}) * vec({4, 5}).transpose();
    EXPECT_EQ(oracle::gauss_rank(M), 1u);
    EXPECT_EQ(numeric_rank(M), 1u);
}

TEST(NumericRank, ZeroAndEmpty)
{
    EXPECT_EQ(numeric_rank(Matrix::Zero(3, 2)), 0u);
    EXPECT_EQ(numeric_rank(Matrix(0, 3)), 0u);
}

TEST(NumericRank, RejectsNonFinite)
{
    Matrix M = Matrix::Identity(2, 2);
    M(0, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(numeric_rank(M), InputError);
    EXPECT_THROW(numeric_rank(Matrix::Identity(2, 2), -1.0), InputError);
}

TEST(NumericRank, ExplicitToleranceDropsSmallPivots)
{
    Matrix M = Matrix::Identity(3, 3);
    M(2, 2) = 1e-6;
    EXPECT_EQ(numeric_rank(M), 3u);
    EXPECT_EQ(numeric_rank(M, 1e-3), 2u);
}

TEST(NumericRank, TransposeInvariantAndMatchesElimination)
{
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> dim(1, 7);
    for (int trial = 0; trial < 200; ++trial) {
        const Index r = dim(rng), c = dim(rng), k = dim(rng);
        // integer low-rank products keep the exact rank unambiguous
        std::uniform_int_distribution<int> entry(-3, 3);
        const Matrix P = Matrix::NullaryExpr(r, k, [&]() { return double(entry(rng)); });
        const Matrix Q = Matrix::NullaryExpr(k, c, [&]() { return double(entry(rng)); });
        const Matrix M = P * Q;
        EXPECT_EQ(numeric_rank(M), numeric_rank(M.transpose()));
        EXPECT_EQ(numeric_rank(M), oracle::gauss_rank(M));
    }
}

TEST(Nnls, IdentityExact)
{
    const auto r = nnls(Matrix::Identity(2, 2), vec({1, 2}));
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.coefficients(0), 1.0, 1e-14);
    EXPECT_NEAR(r.coefficients(1), 2.0, 1e-14);
    EXPECT_NEAR(r.residualNorm, 0.0, 1e-14);
}

TEST(Nnls, ProjectsOntoOrthant)
{
    const auto r = nnls(Matrix::Identity(2, 2), vec({-1, 0}));
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.coefficients, Vector::Zero(2));
    EXPECT_NEAR(r.residualNorm, 1.0, 1e-14);
}

TEST(Nnls, GeneratorSelfMembership)
{
    const Matrix H = leslie_h4();
    const auto r = nnls(H, H.col(0));
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.residualNorm, 0.0, 1e-12);
    // substitution with g = e1
    EXPECT_NEAR((H * Vector::Unit(4, 0) - H.col(0)).norm(), 0.0, 0.0);
}

TEST(Nnls, DimensionMismatch)
{
    EXPECT_THROW(nnls(Matrix::Identity(2, 2), vec({1, 2, 3})), InputError);
}

TEST(Nnls, AgreesWithSupportEnumeration)
{
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> dim(1, 6);
    for (int trial = 0; trial < 300; ++trial) {
        const Index rows = dim(rng), cols = dim(rng);
        const Matrix A = oracle::uniform(rows, cols, rng, -1.0, 1.0);
        const Vector b = oracle::uniform(rows, 1, rng, -1.0, 1.0);
        const auto r = nnls(A, b);
        EXPECT_TRUE(r.converged);
        EXPECT_GE(r.coefficients.minCoeff(), -1e-12);
        EXPECT_LE(r.residualNorm, b.norm() + 1e-12);
        EXPECT_NEAR(r.residualNorm, oracle::brute_nnls_residual(A, b), 1e-9);
    }
}

TEST(AffineNonnegFeasible, SimplexCombination)
{
    const auto r = affine_nonneg_feasible(Matrix::Identity(2, 2), vec({0.3, 0.7}), true);
    EXPECT_TRUE(r.feasible);
    EXPECT_NEAR(r.coefficients(0), 0.3, 1e-12);
    EXPECT_NEAR(r.coefficients(1), 0.7, 1e-12);
}

TEST(AffineNonnegFeasible, CoordinatesMustSumToOne)
{
    const auto r = affine_nonneg_feasible(Matrix::Identity(2, 2), vec({2, 0}), true);
    EXPECT_TRUE(r.converged);
    EXPECT_FALSE(r.feasible);
    EXPECT_GT(r.infeasibility, 0.5);
}

TEST(AffineNonnegFeasible, OverdeterminedConsistentSystem)
{
    Matrix A(3, 2);
    A << 1, 0, 0, 1, 1, 1;
    const auto r = affine_nonneg_feasible(A, vec({1, 1, 2}), false);
    EXPECT_TRUE(r.feasible);
    EXPECT_NEAR(r.coefficients(0), 1.0, 1e-12);
    EXPECT_NEAR(r.coefficients(1), 1.0, 1e-12);
    EXPECT_NEAR((A * r.coefficients - vec({1, 1, 2})).norm(), 0.0, 1e-12);
}

TEST(AffineNonnegFeasible, NegativeRightHandSideRows)
{
    Matrix A(2, 2);
    A << -1, 0, 0, 1;
    const auto r = affine_nonneg_feasible(A, vec({-2, 3}), false);
    EXPECT_TRUE(r.feasible);
    EXPECT_NEAR(r.coefficients(0), 2.0, 1e-12);
    EXPECT_NEAR(r.coefficients(1), 3.0, 1e-12);
}

TEST(AffineNonnegFeasible, RandomFeasiblePointsAreRecovered)
{
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> dim(1, 8);
    for (int trial = 0; trial < 300; ++trial) {
        const Index rows = dim(rng), cols = dim(rng);
        const bool sumToOne = trial % 2 == 0;
        const Matrix A = oracle::uniform(rows, cols, rng, -2.0, 2.0);
        Vector g0 = oracle::uniform(cols, 1, rng);
        if (sumToOne) g0 /= g0.sum();
        const auto r = affine_nonneg_feasible(A, A * g0, sumToOne);
        EXPECT_TRUE(r.converged);
        EXPECT_TRUE(r.feasible) << "trial " << trial;
        EXPECT_GE(r.coefficients.minCoeff(), 0.0);
        EXPECT_LE(r.residualNorm, 1e-8);
        if (sumToOne) {
            EXPECT_NEAR(r.coefficients.sum(), 1.0, 1e-9);
        }
    }
}

TEST(LeastSquares, Examples)
{
    EXPECT_NEAR(least_squares(Matrix::Identity(2, 2), vec({3, 4})).residualNorm, 0.0, 1e-14);

    const auto mean = least_squares(Matrix::Ones(2, 1), vec({0, 2}));
    EXPECT_NEAR(mean.coefficients(0), 1.0, 1e-14);
    EXPECT_NEAR(mean.residualNorm, std::sqrt(2.0), 1e-14);

    const auto aff = least_squares(Matrix::Identity(2, 2), vec({0.2, 0.8}), true);
    EXPECT_NEAR(aff.coefficients(0), 0.2, 1e-14);
    EXPECT_NEAR(aff.coefficients(1), 0.8, 1e-14);
    EXPECT_NEAR(aff.residualNorm, 0.0, 1e-14);
}

TEST(LeastSquares, AffineConstraintAlwaysHolds)
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix A = oracle::uniform(4, 1 + trial % 6, rng, -1, 1);
        const Vector b = oracle::uniform(4, 1, rng, -1, 1);
        EXPECT_NEAR(least_squares(A, b, true).coefficients.sum(), 1.0, 1e-12);
    }
}

TEST(LeastSquares, AffineSingleColumnIsThatColumn)
{
    const auto r = least_squares(Matrix::Ones(2, 1), vec({0, 2}), true);
    EXPECT_DOUBLE_EQ(r.coefficients(0), 1.0);
}

TEST(ConstraintNesting, ResidualsGrowWithConstraints)
{
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int> dim(1, 6);
    for (int trial = 0; trial < 300; ++trial) {
        const Index rows = dim(rng), cols = dim(rng);
        const Matrix A = oracle::uniform(rows, cols, rng, -1, 1);
        const Vector b = oracle::uniform(rows, 1, rng, -1, 1);
        const double ls = least_squares(A, b).residualNorm;
        const double nn = nnls(A, b).residualNorm;
        const double lp = affine_nonneg_feasible(A, b, false).residualNorm;
        EXPECT_LE(ls, nn + 1e-10);
        EXPECT_LE(nn, lp + 1e-10);
    }
}

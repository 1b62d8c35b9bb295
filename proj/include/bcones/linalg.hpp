#pragma once

// Dense numerical kernels: numeric rank, least squares (plain and affinely
// constrained), non-negative least squares and a phase-1 simplex feasibility
// solver. Every routine is a pure function of its arguments.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bcones/errors.hpp"

namespace bcones {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct SolveResult {
    Vector coefficients;
    double residualNorm = 0.0;
    bool converged = false;
};

/// Result of a feasibility solve. `infeasibility` is the attained phase-1
/// objective (sum of artificial variables, i.e. an L1 constraint violation).
struct FeasibilityResult : SolveResult {
    bool feasible = false;
    double infeasibility = 0.0;
};

namespace detail {

inline void require_finite(const Matrix& M, const char* what)
{
    if (!M.allFinite()) throw InputError(std::string(what) + ": non-finite entries");
}

inline void require_system(const Matrix& A, const Vector& b)
{
    require_finite(A, "system matrix");
    require_finite(b, "right-hand side");
    require(A.rows() == b.size(), "system matrix rows (" + std::to_string(A.rows()) +
                                      ") differ from right-hand side length (" +
                                      std::to_string(b.size()) + ")");
}

/// Orthonormal basis (N x N-1) of the complement of the all-ones vector.
inline Matrix ones_complement_basis(Index N)
{
    if (N <= 1) return Matrix(N, 0);
    Eigen::HouseholderQR<Matrix> qr(Matrix::Ones(N, 1));
    Matrix Q = qr.householderQ() * Matrix::Identity(N, N);
    return Q.rightCols(N - 1);
}

} // namespace detail

/// Number of numerically independent columns of `M`.
///
/// Uses Householder QR with column pivoting. A pivot |R(i,i)| counts when it
/// exceeds `tol * max|R(i,i)|`; `tol == 0` selects the default relative
/// threshold max(rows, cols) * machine epsilon.
inline std::size_t numeric_rank(const Matrix& M, double tol = 0.0)
{
    detail::require(tol >= 0.0, "rank tolerance must be non-negative");
    detail::require_finite(M, "numeric_rank");
    if (M.size() == 0) return 0;

    const Eigen::ColPivHouseholderQR<Matrix> qr(M);
    const Vector diag = qr.matrixQR().diagonal().cwiseAbs();
    const double largest = diag.size() > 0 ? diag.maxCoeff() : 0.0;
    if (largest == 0.0) return 0;

    const double rel = tol > 0.0 ? tol
                                 : static_cast<double>(std::max(M.rows(), M.cols())) *
                                       std::numeric_limits<double>::epsilon();
    const double threshold = rel * largest;
    std::size_t rank = 0;
    for (Index i = 0; i < diag.size(); ++i)
        if (diag(i) > threshold) ++rank;
    return rank;
}

/// Minimum-norm least squares `min ||A g - b||`, optionally subject to
/// `sum(g) == 1` (affine combinations). The constrained problem is reduced
/// to an unconstrained one on the complement of the ones vector.
inline SolveResult least_squares(const Matrix& A, const Vector& b, bool sumToOne = false)
{
    detail::require_system(A, b);
    const Index N = A.cols();
    SolveResult out;
    if (N == 0) {
        detail::require(!sumToOne, "affine least squares needs at least one column");
        out.coefficients = Vector(0);
        out.residualNorm = b.norm();
        out.converged = true;
        return out;
    }

    if (!sumToOne) {
        out.coefficients = A.completeOrthogonalDecomposition().solve(b);
    } else {
        const Vector g0 = Vector::Constant(N, 1.0 / static_cast<double>(N));
        const Matrix basis = detail::ones_complement_basis(N);
        Vector g = g0;
        if (basis.cols() > 0) {
            const Matrix AN = A * basis;
            const Vector z = AN.completeOrthogonalDecomposition().solve(b - A * g0);
            g += basis * z;
        }
        out.coefficients = g;
    }
    out.residualNorm = (A * out.coefficients - b).norm();
    out.converged = true;
    return out;
}

/// Non-negative least squares `min ||A g - b||, g >= 0` by the Lawson-Hanson
/// active-set method.
///
/// The outer loop is capped at 10 * cols iterations; hitting the cap returns
/// the best iterate with `converged == false`. KKT optimality is accepted
/// when every dual component of the inactive set is at most
/// `tol * max(1, ||A||_F * ||b||)`.
inline SolveResult nnls(const Matrix& A, const Vector& b, double tol = 1e-10)
{
    detail::require_system(A, b);
    detail::require(tol >= 0.0, "nnls tolerance must be non-negative");
    const Index N = A.cols();

    SolveResult out;
    Vector x = Vector::Zero(N);
    if (N == 0) {
        out.coefficients = x;
        out.residualNorm = b.norm();
        out.converged = true;
        return out;
    }

    const double dualTol = tol * std::max(1.0, A.norm() * b.norm());
    std::vector<bool> passive(static_cast<std::size_t>(N), false);
    const std::size_t maxOuter = 10 * static_cast<std::size_t>(N);
    bool converged = false;

    auto solve_passive = [&](Vector& z) {
        std::vector<Index> idx;
        for (Index j = 0; j < N; ++j)
            if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
        z.setZero(N);
        if (idx.empty()) return;
        Matrix Ap(A.rows(), static_cast<Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) Ap.col(static_cast<Index>(k)) = A.col(idx[k]);
        const Vector zp = Ap.completeOrthogonalDecomposition().solve(b);
        for (std::size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zp(static_cast<Index>(k));
    };

    for (std::size_t outer = 0; outer < maxOuter; ++outer) {
        Vector dual = A.transpose() * (b - A * x);
        Vector z;
        Index enter = -1;
        // Take the most violated inactive column whose unconstrained coefficient
        // comes out positive; others are skipped for this iteration.
        while (true) {
            enter = -1;
            double best = dualTol;
            for (Index j = 0; j < N; ++j) {
                if (!passive[static_cast<std::size_t>(j)] && dual(j) > best) {
                    best = dual(j);
                    enter = j;
                }
            }
            if (enter < 0) break;
            passive[static_cast<std::size_t>(enter)] = true;
            solve_passive(z);
            if (z(enter) > 0.0) break;
            passive[static_cast<std::size_t>(enter)] = false;
            dual(enter) = 0.0;
        }
        if (enter < 0) {
            converged = true;
            break;
        }

        for (std::size_t inner = 0; inner <= static_cast<std::size_t>(N); ++inner) {
            if (inner > 0) solve_passive(z);
            bool allPositive = true;
            for (Index j = 0; j < N; ++j)
                if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) allPositive = false;
            if (allPositive) break;

            double alpha = 1.0;
            for (Index j = 0; j < N; ++j) {
                if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) {
                    const double denom = x(j) - z(j);
                    if (denom > 0.0) alpha = std::min(alpha, x(j) / denom);
                    else alpha = 0.0;
                }
            }
            x += alpha * (z - x);
            for (Index j = 0; j < N; ++j) {
                if (passive[static_cast<std::size_t>(j)] && x(j) <= 1e-300) {
                    passive[static_cast<std::size_t>(j)] = false;
                    x(j) = 0.0;
                }
            }
        }
        for (Index j = 0; j < N; ++j)
            x(j) = passive[static_cast<std::size_t>(j)] ? std::max(z(j), 0.0) : 0.0;
    }

    out.coefficients = x;
    out.residualNorm = (A * x - b).norm();
    out.converged = converged;
    return out;
}

/// Feasibility of `{A g = b, g >= 0}` (plus `sum(g) = 1` when `sumToOne`) by a
/// phase-1 simplex on a dense tableau with Bland's smallest-index rule.
///
/// The problem is declared feasible iff the attained phase-1 objective is at
/// most `tol`. The returned coefficients are the phase-1 optimum, which is a
/// feasible point whenever one exists. `residualNorm` is the Euclidean
/// violation of all equality rows, the sum row included.
inline FeasibilityResult affine_nonneg_feasible(const Matrix& A, const Vector& b, bool sumToOne,
                                                double tol = 1e-9)
{
    detail::require_system(A, b);
    detail::require(tol >= 0.0, "feasibility tolerance must be non-negative");
    const Index N = A.cols();
    const Index R = A.rows() + (sumToOne ? 1 : 0);

    Matrix E(R, N);
    Vector f(R);
    E.topRows(A.rows()) = A;
    f.head(A.rows()) = b;
    if (sumToOne) {
        E.row(R - 1).setOnes();
        f(R - 1) = 1.0;
    }

    FeasibilityResult out;
    auto finish = [&](const Vector& g, double infeas, bool converged) {
        out.coefficients = g;
        out.residualNorm = (E * g - f).norm();
        out.infeasibility = infeas;
        out.converged = converged;
        out.feasible = converged && infeas <= tol;
        return out;
    };
    if (N == 0) return finish(Vector(0), f.lpNorm<1>(), true);

    // Tableau columns: N structural, R artificial, 1 right-hand side.
    const Index cols = N + R + 1;
    Matrix T = Matrix::Zero(R, cols);
    for (Index i = 0; i < R; ++i) {
        const double sign = f(i) < 0.0 ? -1.0 : 1.0;
        T.row(i).head(N) = sign * E.row(i);
        T(i, N + i) = 1.0;
        T(i, cols - 1) = sign * f(i);
    }
    std::vector<Index> basis(static_cast<std::size_t>(R));
    for (Index i = 0; i < R; ++i) basis[static_cast<std::size_t>(i)] = N + i;

    // Reduced costs of the phase-1 objective (minimize the artificial sum).
    Vector cost = Vector::Zero(cols);
    for (Index j = 0; j < N; ++j) cost(j) = -T.col(j).sum();
    cost(cols - 1) = -T.col(cols - 1).sum();

    const double scale = std::max(1.0, T.cwiseAbs().maxCoeff());
    const double eps = 1e-12 * scale;
    const std::size_t maxIter = 50 * static_cast<std::size_t>(N + R) + 100;
    bool converged = false;

    for (std::size_t iter = 0; iter < maxIter; ++iter) {
        Index enter = -1;
        for (Index j = 0; j < N + R; ++j) {
            if (cost(j) < -eps) {
                enter = j;
                break;
            }
        }
        if (enter < 0) {
            converged = true;
            break;
        }
        Index leave = -1;
        double bestRatio = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < R; ++i) {
            if (T(i, enter) > eps) {
                const double ratio = T(i, cols - 1) / T(i, enter);
                const bool better = ratio < bestRatio - eps;
                const bool tie = std::abs(ratio - bestRatio) <= eps && leave >= 0 &&
                                 basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)];
                if (better || tie) {
                    bestRatio = ratio;
                    leave = i;
                }
            }
        }
        if (leave < 0) {
            // Unbounded direction cannot occur for a phase-1 objective bounded below by 0.
            converged = true;
            break;
        }
        T.row(leave) /= T(leave, enter);
        for (Index i = 0; i < R; ++i) {
            if (i != leave && T(i, enter) != 0.0) T.row(i) -= T(i, enter) * T.row(leave);
        }
        if (cost(enter) != 0.0) cost -= cost(enter) * T.row(leave).transpose();
        basis[static_cast<std::size_t>(leave)] = enter;
    }

    Vector g = Vector::Zero(N);
    double infeas = 0.0;
    for (Index i = 0; i < R; ++i) {
        const Index var = basis[static_cast<std::size_t>(i)];
        const double value = std::max(T(i, cols - 1), 0.0);
        if (var < N) g(var) = value;
        else infeas += value;
    }
    return finish(g, infeas, converged);
}

} // namespace bcones

#pragma once

// Linear (sigma x = Ax + Bu, y = Cx + Du) and affine (with offsets E, F)
// time-invariant state-space models, and the structured matrices that tie a
// model to the Hankel matrix of its trajectories.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bcones/behavior.hpp"
#include "bcones/errors.hpp"
#include "bcones/linalg.hpp"

namespace bcones {

class StateSpaceModel {
public:
    StateSpaceModel(Matrix A, Matrix B, Matrix C, Matrix D)
        : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)), D_(std::move(D))
    {
        validate();
    }

    StateSpaceModel(Matrix A, Matrix B, Matrix C, Matrix D, Vector E, Vector F)
        : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)), D_(std::move(D)),
          E_(std::move(E)), F_(std::move(F)), affine_(true)
    {
        validate();
    }

    [[nodiscard]] std::size_t n() const { return static_cast<std::size_t>(A_.rows()); }
    [[nodiscard]] std::size_t m() const { return static_cast<std::size_t>(B_.cols()); }
    [[nodiscard]] std::size_t p() const { return static_cast<std::size_t>(C_.rows()); }
    [[nodiscard]] std::size_t q() const { return m() + p(); }
    [[nodiscard]] bool affine() const { return affine_; }

    [[nodiscard]] const Matrix& A() const { return A_; }
    [[nodiscard]] const Matrix& B() const { return B_; }
    [[nodiscard]] const Matrix& C() const { return C_; }
    [[nodiscard]] const Matrix& D() const { return D_; }
    /// Affine offsets; zero vectors for linear models.
    [[nodiscard]] Vector E() const { return affine_ ? E_ : Vector::Zero(A_.rows()); }
    [[nodiscard]] Vector F() const { return affine_ ? F_ : Vector::Zero(C_.rows()); }

private:
    void validate() const
    {
        const Index n = A_.rows();
        detail::require(A_.cols() == n, "A must be square");
        detail::require(B_.rows() == n, "B must have n rows");
        detail::require(C_.cols() == n, "C must have n columns");
        detail::require(D_.rows() == C_.rows() && D_.cols() == B_.cols(), "D must be p x m");
        detail::require(C_.rows() >= 1, "model needs at least one output");
        if (affine_) {
            detail::require(E_.size() == n, "E must have n entries");
            detail::require(F_.size() == C_.rows(), "F must have p entries");
            detail::require_finite(E_, "E");
            detail::require_finite(F_, "F");
        }
        for (const Matrix* M : {&A_, &B_, &C_, &D_}) detail::require_finite(*M, "model matrix");
    }

    Matrix A_, B_, C_, D_;
    Vector E_, F_;
    bool affine_ = false;
};

/// x(0), ..., x(T-1) as rows. n = 0 is allowed (static models).
class StateTrajectory {
public:
    explicit StateTrajectory(Matrix samples) : samples_(std::move(samples))
    {
        detail::require(samples_.rows() >= 1, "state trajectory needs at least one sample");
        detail::require_finite(samples_, "state trajectory");
    }

    [[nodiscard]] std::size_t n() const { return static_cast<std::size_t>(samples_.cols()); }
    [[nodiscard]] std::size_t length() const { return static_cast<std::size_t>(samples_.rows()); }
    [[nodiscard]] const Matrix& samples() const { return samples_; }

private:
    Matrix samples_;
};

struct Simulation {
    Trajectory trajectory;
    StateTrajectory states;
};

/// Iterates the model for T steps from x0. `inputs` holds u(t) as rows and
/// needs at least T rows when m > 0; it is ignored when m = 0.
inline Simulation simulate(const StateSpaceModel& ss, const Vector& x0, const Matrix& inputs,
                           std::size_t T)
{
    detail::require(T >= 1, "simulation needs T >= 1");
    detail::require(x0.size() == static_cast<Index>(ss.n()), "x0 must have n entries");
    const auto m = static_cast<Index>(ss.m());
    const auto Ti = static_cast<Index>(T);
    if (m > 0) {
        detail::require(inputs.cols() == m, "input signal must have m columns");
        detail::require(inputs.rows() >= Ti, "input signal shorter than T");
        detail::require_finite(inputs, "input signal");
    }
    const Vector E = ss.E();
    const Vector F = ss.F();
    Matrix u = m > 0 ? Matrix(inputs.topRows(Ti)) : Matrix(Ti, 0);
    Matrix y(Ti, static_cast<Index>(ss.p()));
    Matrix x(Ti, static_cast<Index>(ss.n()));
    Vector state = x0;
    for (Index t = 0; t < Ti; ++t) {
        const Vector ut = u.row(t).transpose();
        x.row(t) = state.transpose();
        y.row(t) = (ss.C() * state + ss.D() * ut + F).transpose();
        state = ss.A() * state + ss.B() * ut + E;
    }
    return {Trajectory::from_io(u, y), StateTrajectory(std::move(x))};
}

inline Simulation simulate(const StateSpaceModel& ss, const Vector& x0, std::size_t T)
{
    detail::require(ss.m() == 0, "model has inputs; supply an input signal");
    return simulate(ss, x0, Matrix(0, 0), T);
}

/// Entrywise non-negativity of A, B, C, D (and E, F), which for this model
/// class is equivalent to invariance of the non-negative orthant.
inline bool is_internally_positive(const StateSpaceModel& ss)
{
    auto nonneg = [](const Matrix& M) { return M.size() == 0 || M.minCoeff() >= 0.0; };
    return nonneg(ss.A()) && nonneg(ss.B()) && nonneg(ss.C()) && nonneg(ss.D()) &&
           nonneg(ss.E()) && nonneg(ss.F());
}

/// [C; CA; ...; CA^(L-1)], a (pL) x n matrix.
inline Matrix observability_matrix(const StateSpaceModel& ss, std::size_t L)
{
    detail::require(L >= 1, "observability matrix needs L >= 1");
    const auto p = static_cast<Index>(ss.p());
    Matrix O(p * static_cast<Index>(L), static_cast<Index>(ss.n()));
    Matrix block = ss.C();
    for (Index k = 0; k < static_cast<Index>(L); ++k) {
        O.middleRows(k * p, p) = block;
        block = block * ss.A();
    }
    return O;
}

/// Smallest l <= max(n, 1) with rank O_l = n, or nullopt when none exists.
inline std::optional<std::size_t> lag(const StateSpaceModel& ss, double tol = 0.0)
{
    const std::size_t n = ss.n();
    for (std::size_t l = 1; l <= std::max<std::size_t>(n, 1); ++l)
        if (numeric_rank(observability_matrix(ss, l), tol) == n) return l;
    return std::nullopt;
}

/// Lower block-triangular Toeplitz matrix mapping u(0..L-1) to the forced
/// response: D on the diagonal, C A^(k-1) B on the k-th sub-diagonal.
inline Matrix convolution_matrix(const StateSpaceModel& ss, std::size_t L)
{
    detail::require(L >= 1, "convolution matrix needs L >= 1");
    const auto p = static_cast<Index>(ss.p());
    const auto m = static_cast<Index>(ss.m());
    const auto Li = static_cast<Index>(L);
    Matrix T = Matrix::Zero(p * Li, m * Li);
    if (m == 0) return T;
    std::vector<Matrix> markov;
    markov.push_back(ss.D());
    Matrix CAk = ss.C();
    for (Index k = 1; k < Li; ++k) {
        markov.push_back(CAk * ss.B());
        CAk = CAk * ss.A();
    }
    for (Index i = 0; i < Li; ++i)
        for (Index j = 0; j <= i; ++j) T.block(i * p, j * m, p, m) = markov[static_cast<std::size_t>(i - j)];
    return T;
}

/// M_L = Pi [[I, 0], [T_L, O_L]], of size (qL) x (mL + n). Pi reorders the
/// stacked rows (u(0..L-1), y(0..L-1)) into per-time order (u(0), y(0),
/// u(1), y(1), ...), the same ordering build_hankel uses. Uses the linear
/// part (A, B, C, D) of affine models.
inline Matrix model_matrix(const StateSpaceModel& ss, std::size_t L)
{
    detail::require(L >= 1, "model matrix needs L >= 1");
    const auto m = static_cast<Index>(ss.m());
    const auto p = static_cast<Index>(ss.p());
    const auto n = static_cast<Index>(ss.n());
    const auto q = m + p;
    const auto Li = static_cast<Index>(L);
    const Matrix T = convolution_matrix(ss, L);
    const Matrix O = observability_matrix(ss, L);

    Matrix M = Matrix::Zero(q * Li, m * Li + n);
    for (Index t = 0; t < Li; ++t) {
        for (Index k = 0; k < m; ++k) M(t * q + k, t * m + k) = 1.0;
        for (Index k = 0; k < p; ++k) {
            const Index src = t * p + k;
            if (m > 0) M.block(t * q + m + k, 0, 1, m * Li) = T.row(src);
            if (n > 0) M.block(t * q + m + k, m * Li, 1, n) = O.row(src);
        }
    }
    return M;
}

/// Linear model with state (x, 1): A~ = [[A, E], [0, 1]], B~ = [B; 0],
/// C~ = [C, F], D~ = D. Identity for linear models.
inline StateSpaceModel augmented(const StateSpaceModel& ss)
{
    if (!ss.affine()) return ss;
    const auto n = static_cast<Index>(ss.n());
    const auto m = static_cast<Index>(ss.m());
    const auto p = static_cast<Index>(ss.p());
    Matrix A = Matrix::Zero(n + 1, n + 1);
    A.topLeftCorner(n, n) = ss.A();
    A.topRightCorner(n, 1) = ss.E();
    A(n, n) = 1.0;
    Matrix B = Matrix::Zero(n + 1, m);
    B.topRows(n) = ss.B();
    Matrix C(p, n + 1);
    C.leftCols(n) = ss.C();
    C.rightCols(1) = ss.F();
    return StateSpaceModel(std::move(A), std::move(B), std::move(C), ss.D());
}

/// Stacked [H_L(u); H_1(x(0..N-1))] with N = T - L + 1 columns.
inline Matrix input_state_matrix(const Trajectory& w, const StateTrajectory& x, std::size_t L)
{
    detail::require(L >= 1 && L <= w.length(), "depth must satisfy 1 <= L <= T");
    const auto N = static_cast<Index>(w.length() - L + 1);
    detail::require(x.length() >= static_cast<std::size_t>(N), "state trajectory too short");
    const auto mL = static_cast<Index>(w.m() * L);
    const auto n = static_cast<Index>(x.n());
    Matrix X(mL + n, N);
    if (mL > 0) X.topRows(mL) = hankel(w.inputs(), L);
    if (n > 0) X.bottomRows(n) = x.samples().topRows(N).transpose();
    return X;
}

/// Checks H_L(w) = M_L [H_L(u); H_1(x)] up to tol * max(1, ||H_L(w)||).
/// Affine models are checked through their augmented linear form.
inline bool factorization_check(const StateSpaceModel& ss, const Trajectory& w,
                                const StateTrajectory& x, std::size_t L, double tol = 1e-9)
{
    detail::require(w.m() == ss.m() && w.p() == ss.p(), "trajectory does not match model signal sizes");
    detail::require(x.n() == ss.n(), "state trajectory does not match model order");
    detail::require(x.length() == w.length(), "state and signal trajectories differ in length");
    const StateSpaceModel lin = augmented(ss);
    Matrix xs = x.samples();
    if (ss.affine()) {
        xs.conservativeResize(Eigen::NoChange, xs.cols() + 1);
        xs.col(xs.cols() - 1).setOnes();
    }
    const Matrix H = build_hankel(w, L).entries;
    const Matrix rhs = model_matrix(lin, L) * input_state_matrix(w, StateTrajectory(xs), L);
    return (H - rhs).norm() <= tol * std::max(1.0, H.norm());
}

/// Autonomous Leslie age-structured model: fertility on the first row of A,
/// survival on its sub-diagonal, output = total of the last k age classes.
inline StateSpaceModel leslie_model(const std::vector<double>& fertility,
                                    const std::vector<double>& survival, std::size_t k)
{
    const std::size_t n = fertility.size();
    detail::require(n >= 1, "Leslie model needs at least one age class");
    detail::require(survival.size() == n - 1, "Leslie model needs n - 1 survival rates");
    detail::require(k >= 1 && k <= n, "observed class count must satisfy 1 <= k <= n");
    for (double a : fertility) detail::require(a >= 0.0 && std::isfinite(a), "fertility rates must be >= 0");
    for (double b : survival)
        detail::require(b >= 0.0 && b <= 1.0, "survival rates must lie in [0, 1]");

    const auto ni = static_cast<Index>(n);
    Matrix A = Matrix::Zero(ni, ni);
    for (Index j = 0; j < ni; ++j) A(0, j) = fertility[static_cast<std::size_t>(j)];
    for (Index i = 1; i < ni; ++i) A(i, i - 1) = survival[static_cast<std::size_t>(i - 1)];
    Matrix C = Matrix::Zero(1, ni);
    for (Index j = ni - static_cast<Index>(k); j < ni; ++j) C(0, j) = 1.0;
    return StateSpaceModel(std::move(A), Matrix(ni, 0), std::move(C), Matrix(1, 0));
}

} // namespace bcones

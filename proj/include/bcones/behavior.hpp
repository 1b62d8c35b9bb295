#pragma once

// Finite-horizon behaviors represented as hulls of generator columns, plus
// the trajectory and Hankel-matrix machinery that produces those generators.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bcones/errors.hpp"
#include "bcones/linalg.hpp"

namespace bcones {

/// Sampled signal w = (u, y). Row t of `samples()` is w(t): the first m
/// entries are inputs, the remaining p entries outputs.
class Trajectory {
public:
    Trajectory(Matrix samples, std::size_t inputs) : samples_(std::move(samples)), m_(inputs)
    {
        detail::require(samples_.rows() >= 1, "trajectory needs at least one sample");
        detail::require(samples_.cols() >= 1, "trajectory needs a signal dimension >= 1");
        detail::require(static_cast<Index>(m_) <= samples_.cols(),
                        "input count exceeds signal dimension");
        detail::require_finite(samples_, "trajectory");
    }

    /// Autonomous scalar signal (m = 0, p = 1).
    static Trajectory scalar(const std::vector<double>& values)
    {
        Matrix s(static_cast<Index>(values.size()), 1);
        for (std::size_t t = 0; t < values.size(); ++t) s(static_cast<Index>(t), 0) = values[t];
        return Trajectory(std::move(s), 0);
    }

    /// Joins input and output sample matrices (each T rows) into one trajectory.
    static Trajectory from_io(const Matrix& inputs, const Matrix& outputs)
    {
        detail::require(inputs.rows() == outputs.rows() || inputs.cols() == 0,
                        "input and output sample counts differ");
        Matrix s(outputs.rows(), inputs.cols() + outputs.cols());
        if (inputs.cols() > 0) s.leftCols(inputs.cols()) = inputs;
        s.rightCols(outputs.cols()) = outputs;
        return Trajectory(std::move(s), static_cast<std::size_t>(inputs.cols()));
    }

    [[nodiscard]] std::size_t length() const { return static_cast<std::size_t>(samples_.rows()); }
    [[nodiscard]] std::size_t q() const { return static_cast<std::size_t>(samples_.cols()); }
    [[nodiscard]] std::size_t m() const { return m_; }
    [[nodiscard]] std::size_t p() const { return q() - m_; }

    [[nodiscard]] const Matrix& samples() const { return samples_; }
    [[nodiscard]] Matrix inputs() const { return samples_.leftCols(static_cast<Index>(m_)); }
    [[nodiscard]] Matrix outputs() const { return samples_.rightCols(static_cast<Index>(p())); }

    /// (w(0), ..., w(T-1)) stacked into a single qT vector.
    [[nodiscard]] Vector stacked() const
    {
        const Matrix t = samples_.transpose();
        return Eigen::Map<const Vector>(t.data(), t.size());
    }

    friend bool operator==(const Trajectory& a, const Trajectory& b)
    {
        return a.m_ == b.m_ && a.samples_.rows() == b.samples_.rows() &&
               a.samples_.cols() == b.samples_.cols() && a.samples_ == b.samples_;
    }

private:
    Matrix samples_;
    std::size_t m_;
};

/// Block-Hankel matrix of depth L; column j stacks w(j), ..., w(j+L-1).
struct HankelMatrix {
    std::size_t depth = 0;
    std::size_t blockSize = 0;
    Matrix entries;

    [[nodiscard]] std::size_t num_cols() const { return static_cast<std::size_t>(entries.cols()); }
};

enum class HullType { linear, affine, convexCone, convex };

inline std::string_view to_string(HullType hull)
{
    switch (hull) {
    case HullType::linear: return "linear";
    case HullType::affine: return "affine";
    case HullType::convexCone: return "ccone";
    case HullType::convex: return "conv";
    }
    return "?";
}

inline HullType parse_hull(std::string_view name)
{
    if (name == "linear" || name == "span") return HullType::linear;
    if (name == "affine" || name == "aff") return HullType::affine;
    if (name == "ccone" || name == "convexCone" || name == "cone") return HullType::convexCone;
    if (name == "conv" || name == "convex") return HullType::convex;
    throw InputError("unknown hull type '" + std::string(name) + "'");
}

/// Horizon-L behavior {G g : g subject to the hull constraints}.
class FiniteBehavior {
public:
    FiniteBehavior(std::size_t horizon, std::size_t signalDim, Matrix generators, HullType hull)
        : L_(horizon), q_(signalDim), G_(std::move(generators)), hull_(hull)
    {
        detail::require(L_ >= 1 && q_ >= 1, "behavior needs L >= 1 and q >= 1");
        detail::require(G_.rows() == static_cast<Index>(L_ * q_),
                        "generator rows must equal q * L");
        detail::require(G_.cols() >= 1, "behavior needs at least one generator");
        detail::require_finite(G_, "generators");
    }

    [[nodiscard]] std::size_t horizon() const { return L_; }
    [[nodiscard]] std::size_t q() const { return q_; }
    [[nodiscard]] std::size_t dimension() const { return L_ * q_; }
    [[nodiscard]] const Matrix& generators() const { return G_; }
    [[nodiscard]] HullType hull() const { return hull_; }

private:
    std::size_t L_;
    std::size_t q_;
    Matrix G_;
    HullType hull_;
};

struct MembershipCertificate {
    bool feasible = false;
    std::optional<Vector> coefficients;
    double residualNorm = 0.0;
    double tolUsed = 0.0;
};

inline constexpr double kDefaultMembershipTol = 1e-8;

/// Depth-L block-Hankel matrix of a T x k sample matrix (rows are samples).
inline Matrix hankel(const Matrix& samples, std::size_t L)
{
    const auto T = static_cast<std::size_t>(samples.rows());
    detail::require(L >= 1 && L <= T, "Hankel depth must satisfy 1 <= L <= T (L = " +
                                          std::to_string(L) + ", T = " + std::to_string(T) + ")");
    const Index k = samples.cols();
    const auto Li = static_cast<Index>(L);
    const Index N = static_cast<Index>(T - L + 1);
    Matrix H(k * Li, N);
    for (Index j = 0; j < N; ++j)
        for (Index i = 0; i < Li; ++i) H.block(i * k, j, k, 1) = samples.row(j + i).transpose();
    return H;
}

inline HankelMatrix build_hankel(const Trajectory& w, std::size_t L)
{
    return HankelMatrix{L, w.q(), hankel(w.samples(), L)};
}

/// sigma^t w: samples w(t), ..., w(T-1).
inline Trajectory shift(const Trajectory& w, std::size_t t)
{
    detail::require(t < w.length(), "shift must be smaller than the trajectory length");
    const auto n = static_cast<Index>(w.length() - t);
    return Trajectory(w.samples().bottomRows(n), w.m());
}

/// w restricted to [t1, t2] (inclusive).
inline Trajectory restrict(const Trajectory& w, std::size_t t1, std::size_t t2)
{
    detail::require(t1 <= t2 && t2 < w.length(), "restriction needs 0 <= t1 <= t2 < T");
    return Trajectory(w.samples().middleRows(static_cast<Index>(t1), static_cast<Index>(t2 - t1 + 1)),
                      w.m());
}

inline FiniteBehavior behavior_from_hankel(const HankelMatrix& H, HullType hull)
{
    return FiniteBehavior(H.depth, H.blockSize, H.entries, hull);
}

/// The behavior restricted to the time window [t1, t2] of its horizon.
inline FiniteBehavior restrict_behavior(const FiniteBehavior& B, std::size_t t1, std::size_t t2)
{
    detail::require(t1 <= t2 && t2 < B.horizon(), "restriction needs 0 <= t1 <= t2 < L");
    const auto q = static_cast<Index>(B.q());
    return FiniteBehavior(t2 - t1 + 1, B.q(),
                          B.generators().middleRows(static_cast<Index>(t1) * q,
                                                    static_cast<Index>(t2 - t1 + 1) * q),
                          B.hull());
}

/// Decides w in B. Feasible iff the best admissible residual is at most
/// tol * max(1, ||w||).
inline MembershipCertificate membership(const FiniteBehavior& B, const Vector& w,
                                        double tol = kDefaultMembershipTol)
{
    detail::require(w.size() == static_cast<Index>(B.dimension()),
                    "window length " + std::to_string(w.size()) + " differs from q*L = " +
                        std::to_string(B.dimension()));
    detail::require(tol >= 0.0, "membership tolerance must be non-negative");
    detail::require_finite(w, "membership window");

    MembershipCertificate cert;
    cert.tolUsed = tol * std::max(1.0, w.norm());
    const Matrix& G = B.generators();
    switch (B.hull()) {
    case HullType::linear:
    case HullType::affine: {
        const SolveResult r = least_squares(G, w, B.hull() == HullType::affine);
        cert.coefficients = r.coefficients;
        cert.residualNorm = r.residualNorm;
        cert.feasible = r.residualNorm <= cert.tolUsed;
        break;
    }
    case HullType::convexCone: {
        const SolveResult r = nnls(G, w);
        cert.coefficients = r.coefficients;
        cert.residualNorm = r.residualNorm;
        cert.feasible = r.residualNorm <= cert.tolUsed;
        break;
    }
    case HullType::convex: {
        const FeasibilityResult r = affine_nonneg_feasible(G, w, true, cert.tolUsed);
        cert.coefficients = r.coefficients;
        cert.residualNorm = r.residualNorm;
        cert.feasible = r.feasible && r.residualNorm <= cert.tolUsed;
        break;
    }
    }
    return cert;
}

namespace detail {

/// Membership of direction d in the recession cone of B: the generator span
/// (linear), the span of generator differences (affine), the cone itself
/// (convexCone) or {0} (convex, a bounded polytope).
inline bool in_recession_cone(const FiniteBehavior& B, const Vector& d, double tol)
{
    const double bound = tol * std::max(1.0, d.norm());
    const Matrix& G = B.generators();
    switch (B.hull()) {
    case HullType::linear: return least_squares(G, d).residualNorm <= bound;
    case HullType::affine: {
        if (G.cols() == 1) return d.norm() <= bound;
        const Matrix D = G.rightCols(G.cols() - 1).colwise() - G.col(0);
        return least_squares(D, d).residualNorm <= bound;
    }
    case HullType::convexCone: return nnls(G, d).residualNorm <= bound;
    case HullType::convex: return d.norm() <= bound;
    }
    return false;
}

} // namespace detail

/// Decides B1 subset-of B2 for closed convex B2.
///
/// B1 decomposes as (polytope) + (finitely generated cone): conv(G) + {0} for
/// convex, {0} + ccone(G) for convexCone, {g0} + span(G - g0) for affine and
/// {0} + span(G) for linear. Inclusion holds iff every polytope vertex is a
/// member of B2 and every cone generator lies in the recession cone of B2.
/// When the hulls agree (or B2 is linear) this reduces to generator
/// membership.
inline bool behavior_included(const FiniteBehavior& B1, const FiniteBehavior& B2,
                              double tol = kDefaultMembershipTol)
{
    detail::require(B1.dimension() == B2.dimension(), "behaviors live in different spaces");
    const Matrix& G = B1.generators();
    const Index N = G.cols();
    auto member = [&](const Vector& v) { return membership(B2, v, tol).feasible; };
    auto recedes = [&](const Vector& d) { return detail::in_recession_cone(B2, d, tol); };

    switch (B1.hull()) {
    case HullType::convex:
        for (Index j = 0; j < N; ++j)
            if (!member(G.col(j))) return false;
        return true;
    case HullType::convexCone:
        if (!member(Vector::Zero(G.rows()))) return false;
        for (Index j = 0; j < N; ++j)
            if (!recedes(G.col(j))) return false;
        return true;
    case HullType::affine:
        if (!member(G.col(0))) return false;
        for (Index j = 1; j < N; ++j) {
            const Vector d = G.col(j) - G.col(0);
            if (!recedes(d) || !recedes(-d)) return false;
        }
        return true;
    case HullType::linear:
        if (!member(Vector::Zero(G.rows()))) return false;
        for (Index j = 0; j < N; ++j)
            if (!recedes(G.col(j)) || !recedes(-G.col(j))) return false;
        return true;
    }
    return false;
}

/// Checks (y - alpha u)(y - beta u) <= tol at every sample of a (u, y) signal.
///
/// An infinite bound drops its factor and leaves the one-sided limit:
/// alpha = -inf gives u (y - beta u) <= tol, beta = +inf gives
/// u (y - alpha u) >= -tol, and both infinite accept everything.
inline bool sector_membership(const Trajectory& w, double alpha, double beta, double tol = 0.0)
{
    detail::require(w.q() == 2 && w.m() == 1, "sector condition needs a (u, y) signal with m = p = 1");
    detail::require(!std::isnan(alpha) && !std::isnan(beta), "sector bounds must not be NaN");
    detail::require(alpha < beta, "sector needs alpha < beta");
    detail::require(alpha != std::numeric_limits<double>::infinity() &&
                        beta != -std::numeric_limits<double>::infinity(),
                    "sector needs -inf <= alpha < beta <= +inf");
    const bool lowerInf = std::isinf(alpha);
    const bool upperInf = std::isinf(beta);
    for (std::size_t t = 0; t < w.length(); ++t) {
        const double u = w.samples()(static_cast<Index>(t), 0);
        const double y = w.samples()(static_cast<Index>(t), 1);
        double value = 0.0;
        if (lowerInf && upperInf) value = 0.0;
        else if (lowerInf) value = u * (y - beta * u);
        else if (upperInf) value = -u * (y - alpha * u);
        else value = (y - alpha * u) * (y - beta * u);
        if (value > tol) return false;
    }
    return true;
}

} // namespace bcones

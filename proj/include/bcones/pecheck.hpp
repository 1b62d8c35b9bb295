#pragma once

// Generalized persistence-of-excitation checks for the four model classes
// (linear, affine, positive linear, positive affine) and the corresponding
// data-driven representations (span, aff, ccone, conv of H_L(w)).

#include <optional>
#include <string>
#include <string_view>

#include "bcones/behavior.hpp"
#include "bcones/errors.hpp"
#include "bcones/linalg.hpp"
#include "bcones/nnrank.hpp"
#include "bcones/statespace.hpp"

namespace bcones {

enum class ModelClass { linear, affine, positiveLinear, positiveAffine };

inline HullType hull_of(ModelClass cls)
{
    switch (cls) {
    case ModelClass::linear: return HullType::linear;
    case ModelClass::affine: return HullType::affine;
    case ModelClass::positiveLinear: return HullType::convexCone;
    case ModelClass::positiveAffine: return HullType::convex;
    }
    return HullType::linear;
}

inline bool is_affine_class(ModelClass cls)
{
    return cls == ModelClass::affine || cls == ModelClass::positiveAffine;
}

inline std::string_view to_string(ModelClass cls)
{
    switch (cls) {
    case ModelClass::linear: return "linear";
    case ModelClass::affine: return "affine";
    case ModelClass::positiveLinear: return "positiveLinear";
    case ModelClass::positiveAffine: return "positiveAffine";
    }
    return "?";
}

inline ModelClass parse_model_class(std::string_view name)
{
    if (name == "linear") return ModelClass::linear;
    if (name == "affine") return ModelClass::affine;
    if (name == "positiveLinear" || name == "conical" || name == "ccone") return ModelClass::positiveLinear;
    if (name == "positiveAffine" || name == "convex" || name == "conv") return ModelClass::positiveAffine;
    throw InputError("unknown model class '" + std::string(name) + "'");
}

enum class Verdict { representative, notRepresentative, undecided };

inline std::string_view to_string(Verdict v)
{
    switch (v) {
    case Verdict::representative: return "REPRESENTATIVE";
    case Verdict::notRepresentative: return "NOT_REPRESENTATIVE";
    case Verdict::undecided: return "UNDECIDED";
    }
    return "?";
}

enum class MonomialStatus { found, absent, notChecked };

struct PEReport {
    ModelClass modelClass = ModelClass::linear;
    std::size_t L = 0;
    std::size_t m = 0;
    std::size_t n = 0;
    std::size_t requiredRank = 0;
    std::size_t ordinaryRank = 0;
    std::optional<NnRankBounds> nnBounds;
    MonomialStatus monomialStatus = MonomialStatus::notChecked;
    std::optional<MonomialCertificate> monomial;
    Verdict verdict = Verdict::undecided;
    std::optional<FiniteBehavior> representation;
};

/// m L + n, plus one for the affine classes.
inline std::size_t required_rank(ModelClass cls, std::size_t m, std::size_t n, std::size_t L)
{
    return m * L + n + (is_affine_class(cls) ? 1 : 0);
}

/// Unconditional hull-of-columns construction; the pe_check_* functions
/// certify when it equals the restricted behavior.
inline FiniteBehavior data_driven_representation(const Trajectory& w, ModelClass cls, std::size_t L)
{
    const HankelMatrix H = build_hankel(w, L);
    if (cls == ModelClass::positiveLinear || cls == ModelClass::positiveAffine)
        detail::require(H.entries.minCoeff() >= 0.0, "positive model classes need non-negative data");
    return behavior_from_hankel(H, hull_of(cls));
}

namespace detail {

inline Matrix append_ones_row(const Matrix& H)
{
    Matrix out(H.rows() + 1, H.cols());
    out.topRows(H.rows()) = H;
    out.row(H.rows()).setOnes();
    return out;
}

inline PEReport rank_report(const Trajectory& w, ModelClass cls, std::size_t m, std::size_t n,
                            std::size_t L, double tol)
{
    require(w.m() == m, "trajectory input count (" + std::to_string(w.m()) + ") differs from m = " +
                            std::to_string(m));
    require(L >= 1 && L <= w.length(), "depth must satisfy 1 <= L <= T");
    PEReport r;
    r.modelClass = cls;
    r.L = L;
    r.m = m;
    r.n = n;
    r.requiredRank = required_rank(cls, m, n, L);
    Matrix H = build_hankel(w, L).entries;
    if (is_affine_class(cls)) H = append_ones_row(H);
    r.ordinaryRank = numeric_rank(H, tol);
    r.verdict = r.ordinaryRank == r.requiredRank ? Verdict::representative : Verdict::notRepresentative;
    if (r.verdict == Verdict::representative) r.representation = data_driven_representation(w, cls, L);
    return r;
}

/// Non-negative factorization of H read off a full-order monomial
/// certificate of X = [H_L(u); H_1(x)]: with Q the non-negative right
/// inverse of X supported on the certificate, H = (H Q) X whenever the data
/// satisfy H = M_L X. The caller validates the product.
inline std::optional<Factorization> factorization_from_monomial(const Matrix& H, const Matrix& X,
                                                                const MonomialCertificate& cert)
{
    if (cert.order() != static_cast<std::size_t>(X.rows()) || cert.order() == 0) return std::nullopt;
    Matrix Q = Matrix::Zero(X.cols(), X.rows());
    for (std::size_t t = 0; t < cert.order(); ++t) {
        const Index r = cert.rowIndices[t];
        const Index c = cert.colIndices[t];
        Q(c, r) = 1.0 / X(r, c);
    }
    const Matrix P = H * Q;
    return Factorization{P, X, (H - P * X).norm()};
}

inline PEReport positive_report(const Trajectory& w, const StateTrajectory& x, ModelClass cls,
                                std::size_t m, std::size_t n, std::size_t L, const NnRankConfig& config)
{
    require(w.m() == m, "trajectory input count (" + std::to_string(w.m()) + ") differs from m = " +
                            std::to_string(m));
    require(L >= 1 && L <= w.length(), "depth must satisfy 1 <= L <= T");
    require(w.samples().minCoeff() >= 0.0, "positive checks need non-negative signal data");
    require(x.n() == 0 || x.samples().minCoeff() >= 0.0, "positive checks need non-negative state data");
    require(x.length() >= w.length() - L + 1, "state trajectory must cover the first T - L + 1 samples");

    PEReport r;
    r.modelClass = cls;
    r.L = L;
    r.m = m;
    r.n = n;
    r.requiredRank = required_rank(cls, m, n, L);
    Matrix H = build_hankel(w, L).entries;
    const bool affine = is_affine_class(cls);
    if (affine) H = append_ones_row(H);
    r.ordinaryRank = numeric_rank(H, config.rankTol);

    const Matrix X = input_state_matrix(w, x, L);
    const std::size_t order = m * L + n;
    try {
        r.monomial = monomial_submatrix(X, order, config.zeroTol, config.cap);
        r.monomialStatus = r.monomial ? MonomialStatus::found : MonomialStatus::absent;
    } catch (const CapabilityError&) {
        r.monomialStatus = MonomialStatus::notChecked;
    }

    std::optional<Factorization> hint;
    if (!affine && r.monomial) hint = factorization_from_monomial(H, X, *r.monomial);
    r.nnBounds = nonneg_rank_bounds(H, config, hint);

    const std::size_t target = r.requiredRank;
    const NnRankBounds& b = *r.nnBounds;
    if (b.lower > target || (b.upper && *b.upper < target) || r.monomialStatus == MonomialStatus::absent)
        r.verdict = Verdict::notRepresentative;
    else if (b.lower == target && b.upper && *b.upper == target && r.monomialStatus == MonomialStatus::found)
        r.verdict = Verdict::representative;
    else
        r.verdict = Verdict::undecided;

    if (r.verdict == Verdict::representative) r.representation = data_driven_representation(w, cls, L);
    return r;
}

} // namespace detail

/// rank H_L(w) == mL + n certifies span H_L(w) as the restricted behavior.
inline PEReport pe_check_linear(const Trajectory& w, std::size_t m, std::size_t n, std::size_t L,
                                double tol = 0.0)
{
    return detail::rank_report(w, ModelClass::linear, m, n, L, tol);
}

/// rank [H_L(w); 1^T] == mL + n + 1 certifies aff H_L(w).
inline PEReport pe_check_affine(const Trajectory& w, std::size_t m, std::size_t n, std::size_t L,
                                double tol = 0.0)
{
    return detail::rank_report(w, ModelClass::affine, m, n, L, tol);
}

/// rank+ H_L(w) == mL + n together with a monomial submatrix of order mL + n
/// in [H_L(u); H_1(x)] certifies ccone H_L(w). Bounds that do not pin rank+
/// give UNDECIDED rather than a guess.
inline PEReport pe_check_positive(const Trajectory& w, const StateTrajectory& x, std::size_t m,
                                  std::size_t n, std::size_t L, const NnRankConfig& config = {})
{
    return detail::positive_report(w, x, ModelClass::positiveLinear, m, n, L, config);
}

/// rank+ [H_L(w); 1^T] == mL + n + 1 plus the same monomial condition
/// certifies conv H_L(w).
inline PEReport pe_check_positive_affine(const Trajectory& w, const StateTrajectory& x, std::size_t m,
                                         std::size_t n, std::size_t L, const NnRankConfig& config = {})
{
    return detail::positive_report(w, x, ModelClass::positiveAffine, m, n, L, config);
}

} // namespace bcones

#pragma once

// Finite-horizon most powerful unfalsified models: the span / aff / ccone /
// conv hull of every length-L window sigma^t w|[0, L-1] of the data.

#include "bcones/behavior.hpp"
#include "bcones/errors.hpp"
#include "bcones/pecheck.hpp"

namespace bcones {

struct MpumResult {
    FiniteBehavior behavior;
    bool generatorsAreWindows = true;
    std::size_t sourceLength = 0;
};

/// Hull (per model class) of all length-L windows of w, in shift order.
inline MpumResult mpum_finite(const Trajectory& w, std::size_t L, ModelClass cls)
{
    detail::require(L >= 1 && L <= w.length(), "MPUM horizon must satisfy 1 <= L <= T");
    return MpumResult{behavior_from_hankel(build_hankel(w, L), hull_of(cls)), true, w.length()};
}

/// True iff every length-L window of w belongs to the model.
inline bool unfalsified_check(const MpumResult& result, const Trajectory& w,
                              double tol = kDefaultMembershipTol)
{
    const FiniteBehavior& B = result.behavior;
    detail::require(w.q() == B.q(), "trajectory signal dimension differs from the model's");
    detail::require(w.length() >= B.horizon(), "trajectory shorter than the model horizon");
    const Matrix windows = build_hankel(w, B.horizon()).entries;
    for (Index j = 0; j < windows.cols(); ++j)
        if (!membership(B, windows.col(j), tol).feasible) return false;
    return true;
}

/// True iff the MPUM is contained in `other`, a behavior of the same class.
inline bool minimality_check(const MpumResult& result, const FiniteBehavior& other,
                             double tol = kDefaultMembershipTol)
{
    detail::require(other.hull() == result.behavior.hull(), "minimality compares behaviors of one class");
    detail::require(other.dimension() == result.behavior.dimension(), "behaviors live in different spaces");
    return behavior_included(result.behavior, other, tol);
}

} // namespace bcones

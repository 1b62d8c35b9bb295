#pragma once

// Certified bounds on the non-negative rank rank+(M): the smallest r with
// M = P Q, P and Q entrywise non-negative with inner dimension r. Exact rank+
// is NP-hard, so callers get a lower bound (ordinary rank or fooling set) and
// an upper bound witnessed by an explicit factorization.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bcones/errors.hpp"
#include "bcones/linalg.hpp"

namespace bcones {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

enum class LowerBoundMethod { ordinaryRank, foolingSet };

inline const char* to_string(LowerBoundMethod method)
{
    return method == LowerBoundMethod::ordinaryRank ? "ordinaryRank" : "foolingSet";
}

/// Non-negative factorization M ~ P Q.
struct Factorization {
    Matrix P;
    Matrix Q;
    double residualNorm = 0.0;

    [[nodiscard]] std::size_t inner_dimension() const { return static_cast<std::size_t>(P.cols()); }
};

struct NnRankBounds {
    std::size_t lower = 0;
    LowerBoundMethod lowerMethod = LowerBoundMethod::ordinaryRank;
    std::optional<std::size_t> upper;
    std::optional<Factorization> factors;  ///< witness of `upper`
};

/// k x k monomial submatrix: `rowIndices[t]` is matched with `colIndices[t]`.
struct MonomialCertificate {
    std::vector<Index> rowIndices;
    std::vector<Index> colIndices;

    [[nodiscard]] std::size_t order() const { return rowIndices.size(); }
};

/// Size limit for the exact combinatorial searches (fooling set, monomial).
struct SearchCap {
    Index rows = 12;
    Index cols = 12;

    [[nodiscard]] bool admits(const Matrix& M) const { return M.rows() <= rows && M.cols() <= cols; }
};

struct NnRankConfig {
    double zeroTol = 0.0;        ///< entries <= zeroTol count as zero
    double rankTol = 0.0;        ///< forwarded to numeric_rank
    std::size_t restarts = 50;
    std::size_t iters = 2000;
    double nmfTol = 1e-9;        ///< relative Frobenius residual accepted as exact
    std::uint64_t seed = 20240601;
    SearchCap cap;
};

namespace detail {

/// Dynamic bitset sized for graph vertex sets.
class VertexSet {
public:
    explicit VertexSet(std::size_t n = 0) : words_((n + 63) / 64, 0), size_(n) {}

    void set(std::size_t i) { words_[i / 64] |= (std::uint64_t{1} << (i % 64)); }
    void reset(std::size_t i) { words_[i / 64] &= ~(std::uint64_t{1} << (i % 64)); }
    [[nodiscard]] bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }

    [[nodiscard]] bool empty() const
    {
        return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
    }

    [[nodiscard]] std::size_t first() const
    {
        for (std::size_t w = 0; w < words_.size(); ++w)
            if (words_[w] != 0) return w * 64 + static_cast<std::size_t>(__builtin_ctzll(words_[w]));
        return size_;
    }

    VertexSet& operator&=(const VertexSet& other)
    {
        for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= other.words_[w];
        return *this;
    }

    void subtract(const VertexSet& other)
    {
        for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= ~other.words_[w];
    }

private:
    std::vector<std::uint64_t> words_;
    std::size_t size_;
};

/// Exact maximum clique by branch and bound with a greedy-colouring bound.
/// Stops early once a clique of size `stopAt` is found.
class CliqueSearch {
public:
    explicit CliqueSearch(std::vector<VertexSet> adjacency) : adj_(std::move(adjacency)) {}

    std::vector<std::size_t> run(std::size_t stopAt)
    {
        stopAt_ = stopAt;
        best_.clear();
        VertexSet all(adj_.size());
        for (std::size_t v = 0; v < adj_.size(); ++v) all.set(v);
        std::vector<std::size_t> clique;
        if (!adj_.empty()) expand(clique, all);
        return best_;
    }

private:
    void colour_sort(VertexSet cand, std::vector<std::size_t>& order,
                     std::vector<std::size_t>& bound) const
    {
        std::size_t colour = 0;
        while (!cand.empty()) {
            ++colour;
            VertexSet q = cand;
            while (!q.empty()) {
                const std::size_t v = q.first();
                q.reset(v);
                q.subtract(adj_[v]);
                cand.reset(v);
                order.push_back(v);
                bound.push_back(colour);
            }
        }
    }

    void expand(std::vector<std::size_t>& clique, VertexSet cand)
    {
        std::vector<std::size_t> order;
        std::vector<std::size_t> bound;
        colour_sort(cand, order, bound);
        for (std::size_t k = order.size(); k-- > 0;) {
            if (done()) return;
            if (clique.size() + bound[k] <= best_.size()) return;
            const std::size_t v = order[k];
            clique.push_back(v);
            VertexSet next = cand;
            next &= adj_[v];
            if (next.empty()) {
                if (clique.size() > best_.size()) best_ = clique;
            } else {
                expand(clique, next);
            }
            clique.pop_back();
            cand.reset(v);
        }
    }

    [[nodiscard]] bool done() const { return stopAt_ > 0 && best_.size() >= stopAt_; }

    std::vector<VertexSet> adj_;
    std::vector<std::size_t> best_;
    std::size_t stopAt_ = 0;
};

struct Position {
    Index row;
    Index col;
};

inline std::vector<Position> positive_positions(const Matrix& M, double tol)
{
    std::vector<Position> out;
    for (Index i = 0; i < M.rows(); ++i)
        for (Index j = 0; j < M.cols(); ++j)
            if (M(i, j) > tol) out.push_back({i, j});
    return out;
}

inline void require_nonnegative(const Matrix& M, double tol, const char* what)
{
    require_finite(M, what);
    if (M.size() > 0 && M.minCoeff() < -tol)
        throw InputError(std::string(what) + ": matrix has negative entries");
}

inline void require_within(const SearchCap& cap, const Matrix& M, const char* what)
{
    if (!cap.admits(M))
        throw CapabilityError(std::string(what) + ": " + std::to_string(M.rows()) + "x" +
                              std::to_string(M.cols()) + " exceeds the exact-search cap " +
                              std::to_string(cap.rows) + "x" + std::to_string(cap.cols));
}

inline double relative_residual(const Matrix& M, const Matrix& P, const Matrix& Q)
{
    return (M - P * Q).norm() / std::max(1.0, M.norm());
}

/// Column indices chosen by the successive projection algorithm on
/// L1-normalised columns. For separable data these are hull vertices.
inline std::vector<Index> spa_columns(const Matrix& M, std::size_t r)
{
    Matrix R = M;
    for (Index j = 0; j < R.cols(); ++j) {
        const double s = R.col(j).lpNorm<1>();
        if (s > 0.0) R.col(j) /= s;
    }
    std::vector<Index> picked;
    for (std::size_t k = 0; k < r && k < static_cast<std::size_t>(M.cols()); ++k) {
        Index best = -1;
        double bestNorm = 0.0;
        for (Index j = 0; j < R.cols(); ++j) {
            if (std::find(picked.begin(), picked.end(), j) != picked.end()) continue;
            const double nrm = R.col(j).squaredNorm();
            if (best < 0 || nrm > bestNorm) {
                best = j;
                bestNorm = nrm;
            }
        }
        picked.push_back(best);
        const double nn = R.col(best).squaredNorm();
        if (nn > 0.0) {
            const Vector u = R.col(best) / std::sqrt(nn);
            R -= u * (u.transpose() * R);
        }
    }
    return picked;
}

/// One sweep of alternating exact non-negative least squares.
inline void anls_sweep(const Matrix& M, Matrix& P, Matrix& Q)
{
    for (Index j = 0; j < M.cols(); ++j) Q.col(j) = nnls(P, M.col(j)).coefficients;
    const Matrix Qt = Q.transpose();
    for (Index i = 0; i < M.rows(); ++i) P.row(i) = nnls(Qt, M.row(i).transpose()).coefficients.transpose();
}

} // namespace detail

/// Entry (i, j) is true iff M(i, j) > tol. Rejects entries below -tol.
inline BoolMatrix support_pattern(const Matrix& M, double tol = 0.0)
{
    detail::require(tol >= 0.0, "support tolerance must be non-negative");
    detail::require_nonnegative(M, tol, "support_pattern");
    return (M.array() > tol).matrix();
}

/// Size of a maximum fooling set of `M`, a lower bound on rank+(M).
///
/// A fooling set is a set of positive positions such that for any two of
/// them, (i, j) and (k, l), M(i, l) * M(k, j) <= tol^2. Solved exactly as a
/// maximum clique on the compatibility graph.
inline std::size_t fooling_set_bound(const Matrix& M, double tol = 0.0, const SearchCap& cap = {})
{
    detail::require(tol >= 0.0, "fooling-set tolerance must be non-negative");
    detail::require_nonnegative(M, tol, "fooling_set_bound");
    detail::require_within(cap, M, "fooling_set_bound");

    const auto pos = detail::positive_positions(M, tol);
    const double tol2 = tol * tol;
    std::vector<detail::VertexSet> adj(pos.size(), detail::VertexSet(pos.size()));
    for (std::size_t a = 0; a < pos.size(); ++a) {
        for (std::size_t b = a + 1; b < pos.size(); ++b) {
            const auto [i, j] = pos[a];
            const auto [k, l] = pos[b];
            if (M(i, l) * M(k, j) <= tol2) {
                adj[a].set(b);
                adj[b].set(a);
            }
        }
    }
    return detail::CliqueSearch(std::move(adj)).run(0).size();
}

/// Searches for a k x k monomial submatrix: k positive entries in distinct
/// rows and columns such that every other entry of the selected submatrix is
/// <= tol. Exact backtracking; returns nullopt iff none exists.
inline std::optional<MonomialCertificate> monomial_submatrix(const Matrix& M, std::size_t k,
                                                             double tol = 0.0,
                                                             const SearchCap& cap = {})
{
    detail::require(tol >= 0.0, "monomial tolerance must be non-negative");
    detail::require_nonnegative(M, tol, "monomial_submatrix");
    if (k == 0) return MonomialCertificate{};
    if (k > static_cast<std::size_t>(std::min(M.rows(), M.cols()))) return std::nullopt;
    detail::require_within(cap, M, "monomial_submatrix");

    const auto pos = detail::positive_positions(M, tol);
    std::vector<detail::VertexSet> adj(pos.size(), detail::VertexSet(pos.size()));
    for (std::size_t a = 0; a < pos.size(); ++a) {
        for (std::size_t b = a + 1; b < pos.size(); ++b) {
            const auto [i, j] = pos[a];
            const auto [r, c] = pos[b];
            if (i != r && j != c && M(i, c) <= tol && M(r, j) <= tol) {
                adj[a].set(b);
                adj[b].set(a);
            }
        }
    }
    const auto clique = detail::CliqueSearch(std::move(adj)).run(k);
    if (clique.size() < k) return std::nullopt;

    std::vector<detail::Position> chosen;
    for (std::size_t t = 0; t < k; ++t) chosen.push_back(pos[clique[t]]);
    std::sort(chosen.begin(), chosen.end(), [](const auto& a, const auto& b) { return a.row < b.row; });
    MonomialCertificate cert;
    for (const auto& p : chosen) {
        cert.rowIndices.push_back(p.row);
        cert.colIndices.push_back(p.col);
    }
    return cert;
}

/// Re-validates a certificate against `M`.
inline bool is_monomial(const Matrix& M, const MonomialCertificate& cert, double tol = 0.0)
{
    if (cert.rowIndices.size() != cert.colIndices.size()) return false;
    const std::size_t k = cert.order();
    for (std::size_t s = 0; s < k; ++s) {
        const Index i = cert.rowIndices[s];
        if (i < 0 || i >= M.rows() || cert.colIndices[s] < 0 || cert.colIndices[s] >= M.cols()) return false;
        for (std::size_t t = 0; t < k; ++t) {
            const double v = M(i, cert.colIndices[t]);
            if (s == t ? !(v > tol) : v > tol) return false;
        }
        for (std::size_t t = s + 1; t < k; ++t)
            if (cert.rowIndices[t] == i || cert.colIndices[t] == cert.colIndices[s]) return false;
    }
    return true;
}

/// Looks for an exact non-negative factorization with inner dimension `r`.
///
/// Restart 0 starts from columns chosen by successive projection; the rest
/// start from seeded uniform random factors. Each restart runs up to `iters`
/// multiplicative updates followed by alternating exact NNLS sweeps, and the
/// first factorization with ||M - PQ||_F <= tol * max(1, ||M||_F) is returned.
/// Deterministic for a given seed.
inline std::optional<Factorization> nmf_search(const Matrix& M, std::size_t r, std::size_t restarts,
                                               std::size_t iters, double tol, std::uint64_t seed)
{
    detail::require(r >= 1, "nmf_search needs r >= 1");
    detail::require(tol >= 0.0, "nmf tolerance must be non-negative");
    detail::require_nonnegative(M, 0.0, "nmf_search");
    const Index rows = M.rows();
    const Index cols = M.cols();
    const Index ri = static_cast<Index>(r);

    auto accept = [&](const Matrix& P, const Matrix& Q) -> std::optional<Factorization> {
        if (detail::relative_residual(M, P, Q) <= tol && P.minCoeff() >= 0.0 && Q.minCoeff() >= 0.0)
            return Factorization{P, Q, (M - P * Q).norm()};
        return std::nullopt;
    };

    // Inner dimension at least min(rows, cols) admits M = M I or M = I M.
    if (ri >= std::min(rows, cols)) {
        Matrix P = Matrix::Zero(rows, ri);
        Matrix Q = Matrix::Zero(ri, cols);
        if (cols <= rows) {
            P.leftCols(cols) = M;
            Q.topRows(cols) = Matrix::Identity(cols, cols);
        } else {
            P.leftCols(rows) = Matrix::Identity(rows, rows);
            Q.topRows(rows) = M;
        }
        return accept(P, Q);
    }
    if (M.norm() == 0.0) return accept(Matrix::Zero(rows, ri), Matrix::Zero(ri, cols));

    const double scale = std::sqrt(M.mean() / static_cast<double>(r));
    constexpr double kEps = 1e-300;
    constexpr std::size_t kPolishSweeps = 200;
    constexpr std::size_t kCheckEvery = 20;

    for (std::size_t restart = 0; restart < restarts; ++restart) {
        Matrix P(rows, ri);
        Matrix Q(ri, cols);
        if (restart == 0) {
            const auto picked = detail::spa_columns(M, r);
            for (Index k = 0; k < ri; ++k) P.col(k) = M.col(picked[static_cast<std::size_t>(k)]);
            for (Index j = 0; j < cols; ++j) Q.col(j) = nnls(P, M.col(j)).coefficients;
            if (auto f = accept(P, Q)) return f;
        } else {
            std::seed_seq seq{seed, static_cast<std::uint64_t>(restart)};
            std::mt19937_64 rng(seq);
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            P = Matrix::NullaryExpr(rows, ri, [&]() { return scale * unif(rng) + kEps; });
            Q = Matrix::NullaryExpr(ri, cols, [&]() { return scale * unif(rng) + kEps; });
        }

        double last = detail::relative_residual(M, P, Q);
        for (std::size_t it = 1; it <= iters; ++it) {
            Q.array() *= (P.transpose() * M).array() / ((P.transpose() * P) * Q).array().max(kEps);
            P.array() *= (M * Q.transpose()).array() / (P * (Q * Q.transpose())).array().max(kEps);
            if (it % kCheckEvery == 0) {
                const double res = detail::relative_residual(M, P, Q);
                if (res <= tol) break;
                if (res > last * (1.0 - 1e-4)) break;  // stalled; hand over to NNLS sweeps
                last = res;
            }
        }
        if (auto f = accept(P, Q)) return f;

        last = detail::relative_residual(M, P, Q);
        for (std::size_t sweep = 0; sweep < kPolishSweeps; ++sweep) {
            detail::anls_sweep(M, P, Q);
            const double res = detail::relative_residual(M, P, Q);
            if (res <= tol) break;
            if (sweep % 10 == 9) {
                if (res > last * 0.5) break;
                last = res;
            }
        }
        if (auto f = accept(P, Q)) return f;
    }
    return std::nullopt;
}

/// Bounds rank+(M) from both sides.
///
/// lower = max(numeric rank, fooling-set bound when M is within the search
/// cap). upper = the smallest r found by scanning nmf_search upward from the
/// lower bound. An optional externally derived factorization `hint` is
/// validated and, if exact, caps the scan.
inline NnRankBounds nonneg_rank_bounds(const Matrix& M, const NnRankConfig& config = {},
                                       const std::optional<Factorization>& hint = std::nullopt)
{
    detail::require_nonnegative(M, config.zeroTol, "nonneg_rank_bounds");
    NnRankBounds out;
    const std::size_t ordinary = numeric_rank(M, config.rankTol);
    out.lower = ordinary;
    out.lowerMethod = LowerBoundMethod::ordinaryRank;

    if (ordinary == 0) {
        out.upper = 0;
        out.factors = Factorization{Matrix(M.rows(), 0), Matrix(0, M.cols()), M.norm()};
        return out;
    }
    if (config.cap.admits(M)) {
        const std::size_t fooling = fooling_set_bound(M, config.zeroTol, config.cap);
        if (fooling > out.lower) {
            out.lower = fooling;
            out.lowerMethod = LowerBoundMethod::foolingSet;
        }
    }

    const auto minDim = static_cast<std::size_t>(std::min(M.rows(), M.cols()));
    std::size_t scanEnd = minDim;
    if (hint && hint->P.rows() == M.rows() && hint->Q.cols() == M.cols() &&
        hint->P.cols() == hint->Q.rows() && hint->P.minCoeff() >= 0.0 && hint->Q.minCoeff() >= 0.0 &&
        detail::relative_residual(M, hint->P, hint->Q) <= config.nmfTol) {
        out.upper = hint->inner_dimension();
        out.factors = Factorization{hint->P, hint->Q, (M - hint->P * hint->Q).norm()};
        if (*out.upper == 0) return out;
        scanEnd = std::min(scanEnd, *out.upper - 1);
        if (*out.upper <= out.lower) return out;
    }

    const Matrix clamped = M.cwiseMax(0.0);
    for (std::size_t r = std::max<std::size_t>(out.lower, 1); r <= scanEnd; ++r) {
        if (auto f = nmf_search(clamped, r, config.restarts, config.iters, config.nmfTol, config.seed)) {
            out.upper = r;
            out.factors = std::move(f);
            break;
        }
    }
    return out;
}

} // namespace bcones

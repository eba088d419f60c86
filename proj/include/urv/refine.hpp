#pragma once

#include <cmath>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "urv/core.hpp"
#include "urv/svd.hpp"

namespace urv {

template <typename Scalar>
struct IterationRecord {
    Index l;                    // half-sweep index, matching the iterate superscript
    Scalar e;                   // corner r_nn^(l), positive
    Scalar hNorm;               // ||h^(l)||: last column above the diagonal at even l,
                                // leading part of the bottom row at odd l
    std::optional<Scalar> rho;  // |e^(l)| / sigma_min(S^(l)), when recorded
    bool cornerFlipped;         // a sign flip was absorbed into the sweep's factor
};

template <typename Scalar = double>
struct RefineOptions {
    Scalar tolH = Scalar(1e-14);            // relative to ||R^(0)||_F; 0 demands exact zero
    Scalar tolEStagnation = Scalar(1e-15);  // relative corner change per double sweep
    int maxDoubleSweeps = 1000;
    bool recordRho = false;                 // costs one oracle SVD per half-sweep
    bool accumulateFactors = true;
};

enum class StopReason { HNormTol, EStagnation, MaxIter };

inline const char* to_string(StopReason r)
{
    switch (r) {
        case StopReason::HNormTol: return "H_NORM_TOL";
        case StopReason::EStagnation: return "E_STAGNATION";
        case StopReason::MaxIter: return "MAX_ITER";
    }
    return "UNKNOWN";
}

inline std::ostream& operator<<(std::ostream& os, StopReason value)
{
    return os << to_string(value);
}

/// State of the alternating-sweep iteration.
///
/// Even l: R^(l) is upper triangular. Odd l: the last column is zero above the
/// diagonal and the leading (n-1) x (n-1) block is upper triangular, with the
/// mass moved to the bottom row. The corner r_nn is kept positive throughout;
/// any sign flip is absorbed into the accumulated factor of the sweep that
/// produced it. With factor accumulation on,
///   gEven * R^(0) * gOdd^T == R^(l)
/// holds to rounding at every l, where R^(0) is the corner-normalized initial
/// iterate (the input with its last row negated when the corner was negative).
template <typename Scalar>
class RefinementState {
public:
    explicit RefinementState(const UpperTriangular<Scalar>& r0, bool accumulateFactors = true)
        : accumulateFactors_(accumulateFactors)
    {
        const Index n = r0.order();
        if (n < 2) {
            throw std::invalid_argument("RefinementState: order must be at least 2");
        }
        r_ = r0.matrix();
        initialCornerFlipped_ = r_(n - 1, n - 1) < Scalar(0);
        if (initialCornerFlipped_) {
            r_.row(n - 1) = -r_.row(n - 1);
        }
        r0_ = r_;
        if (accumulateFactors_) {
            gOdd_ = MatrixX<Scalar>::Identity(n, n);
            gEven_ = MatrixX<Scalar>::Identity(n, n);
        }
        history_.push_back({0, cornerValue(), hNorm(), std::nullopt, initialCornerFlipped_});
    }

    Index order() const { return r_.rows(); }
    Index halfSweep() const { return l_; }
    bool atEvenParity() const { return l_ % 2 == 0; }
    const MatrixX<Scalar>& iterate() const { return r_; }
    const MatrixX<Scalar>& initial() const { return r0_; }
    bool initialCornerFlipped() const { return initialCornerFlipped_; }
    bool factorsAccumulated() const { return accumulateFactors_; }
    const std::vector<IterationRecord<Scalar>>& history() const { return history_; }

    const MatrixX<Scalar>& gOdd() const
    {
        requireFactors();
        return gOdd_;
    }
    const MatrixX<Scalar>& gEven() const
    {
        requireFactors();
        return gEven_;
    }

    Scalar cornerValue() const { return r_(order() - 1, order() - 1); }

    /// ||h^(l)|| for the current iterate.
    Scalar hNorm() const
    {
        const Index n = order();
        return atEvenParity() ? vectorTwoNorm(r_.col(n - 1).head(n - 1))
                              : vectorTwoNorm(r_.row(n - 1).head(n - 1));
    }

    /// Leading (n-1) x (n-1) block S^(l); upper triangular at every parity.
    MatrixX<Scalar> leadingBlock() const
    {
        const Index n = order();
        return r_.topLeftCorner(n - 1, n - 1);
    }

    /// Right sweep (form (2)): rotations in planes (i, n) zero the last-column
    /// entries against their diagonal pivots in descending i, which never
    /// refills a zeroed entry. Rotations with an already-zero target are
    /// skipped, so decoupled coordinates are left untouched exactly.
    void oddSweep()
    {
        if (!atEvenParity()) {
            throw std::logic_error("oddSweep: iterate is not at even parity");
        }
        const Index n = order();
        bool flipped = false;
        for (Index i = n - 2; i >= 0; --i) {
            const Scalar target = r_(i, n - 1);
            if (target == Scalar(0)) {
                continue;
            }
            const auto g = computeGivens(r_(i, i), target);
            const GivensRotation<Scalar> rot{i, n - 1, g.c, g.s};
            applyRightInPlace(r_, rot);
            if (accumulateFactors_) {
                applyLeftInPlace(gOdd_, rot);
            }
            r_(i, n - 1) = Scalar(0);
        }
        if (r_(n - 1, n - 1) < Scalar(0)) {
            r_.col(n - 1) = -r_.col(n - 1);
            if (accumulateFactors_) {
                gOdd_.row(n - 1) = -gOdd_.row(n - 1);
            }
            flipped = true;
        }
        ++l_;
        history_.push_back({l_, cornerValue(), hNorm(), std::nullopt, flipped});
    }

    /// Left sweep (form (3)): rotations in planes (i, n) zero the bottom-row
    /// entries against their diagonal pivots in ascending i, restoring upper
    /// triangular form.
    void evenSweep()
    {
        if (atEvenParity()) {
            throw std::logic_error("evenSweep: iterate is not at odd parity");
        }
        const Index n = order();
        bool flipped = false;
        for (Index i = 0; i < n - 1; ++i) {
            const Scalar target = r_(n - 1, i);
            if (target == Scalar(0)) {
                continue;
            }
            const auto g = computeGivens(r_(i, i), target);
            const GivensRotation<Scalar> rot{i, n - 1, g.c, g.s};
            applyLeftInPlace(r_, rot);
            if (accumulateFactors_) {
                applyLeftInPlace(gEven_, rot);
            }
            r_(n - 1, i) = Scalar(0);
        }
        if (r_(n - 1, n - 1) < Scalar(0)) {
            r_.row(n - 1) = -r_.row(n - 1);
            if (accumulateFactors_) {
                gEven_.row(n - 1) = -gEven_.row(n - 1);
            }
            flipped = true;
        }
        ++l_;
        history_.push_back({l_, cornerValue(), hNorm(), std::nullopt, flipped});
    }

    void recordRho(Scalar rho) { history_.back().rho = rho; }

    /// Inner products of the accumulated factors' last rows with the initial
    /// singular vectors: <g_odd last row, v^(0)> and <g_even last row, u^(0)>.
    /// svd0 must be the oracle SVD of initial() (the corner-normalized R^(0)).
    std::pair<Scalar, Scalar> alignment(const SvdResult<Scalar>& svd0) const
    {
        requireFactors();
        const Index n = order();
        const Scalar alignV = gOdd_.row(n - 1).dot(svd0.v.col(n - 1).transpose());
        const Scalar alignU = gEven_.row(n - 1).dot(svd0.u.col(n - 1).transpose());
        return {alignV, alignU};
    }

private:
    void requireFactors() const
    {
        if (!accumulateFactors_) {
            throw std::logic_error("RefinementState: orthogonal factors were not accumulated");
        }
    }

    MatrixX<Scalar> r_;
    MatrixX<Scalar> r0_;
    MatrixX<Scalar> gOdd_;
    MatrixX<Scalar> gEven_;
    Index l_ = 0;
    std::vector<IterationRecord<Scalar>> history_;
    bool accumulateFactors_;
    bool initialCornerFlipped_;
};

template <typename Scalar>
struct ConvergenceReport {
    bool converged;
    StopReason reason;
    int doubleSweeps;
    Scalar finalE;
    RefinementState<Scalar> finalState;
};

namespace detail {

template <typename Scalar>
Scalar currentRho(const RefinementState<Scalar>& state)
{
    return state.cornerValue() / sigmaMin(MatrixX<Scalar>(state.leadingBlock()));
}

}  // namespace detail

/// Runs double sweeps (odd then even) until the coupling norm drops below
/// tolH * ||R^(0)||_F, the corner stagnates to relative tolEStagnation between
/// consecutive even iterates, or maxDoubleSweeps is reached. At least one
/// double sweep always runs.
template <typename Scalar>
ConvergenceReport<Scalar> refine(const UpperTriangular<Scalar>& r0,
                                 const RefineOptions<Scalar>& opts = {})
{
    using std::abs;
    if (opts.tolH < Scalar(0) || opts.tolEStagnation < Scalar(0)) {
        throw std::invalid_argument("refine: tolerances must be nonnegative");
    }
    if (opts.maxDoubleSweeps < 1) {
        throw std::invalid_argument("refine: maxDoubleSweeps must be at least 1");
    }

    RefinementState<Scalar> state(r0, opts.accumulateFactors);
    const Scalar scale = frobeniusNorm(state.initial());
    if (opts.recordRho) {
        state.recordRho(detail::currentRho(state));
    }

    Scalar previousE = state.cornerValue();
    for (int k = 1; k <= opts.maxDoubleSweeps; ++k) {
        state.oddSweep();
        if (opts.recordRho) {
            state.recordRho(detail::currentRho(state));
        }
        state.evenSweep();
        if (opts.recordRho) {
            state.recordRho(detail::currentRho(state));
        }
        const Scalar e = state.cornerValue();
        if (state.hNorm() <= opts.tolH * scale) {
            return {true, StopReason::HNormTol, k, e, std::move(state)};
        }
        if (abs(previousE - e) <= opts.tolEStagnation * e) {
            return {true, StopReason::EStagnation, k, e, std::move(state)};
        }
        previousE = e;
    }
    return {false, StopReason::MaxIter, opts.maxDoubleSweeps, state.cornerValue(),
            std::move(state)};
}

template <typename Scalar>
struct RankRevealingResult {
    MatrixX<Scalar> u;
    MatrixX<Scalar> r;  // upper triangular, u * r * v^T reconstructs the input
    MatrixX<Scalar> v;
    Index numericalRank;
    bool allLevelsConverged;
};

/// Repeated refine-and-deflate: drives the corner of the current leading block
/// to its smallest singular value, freezes the last row/column once the corner
/// falls below rankTol times the largest diagonal magnitude of R0 (a cheap
/// sigma_1 proxy), and recurses on the leading block. Stops at the first
/// converged corner at or above the threshold, since every remaining singular
/// value is at least as large.
template <typename Scalar>
RankRevealingResult<Scalar> rankRevealingUrv(const UpperTriangular<Scalar>& r0, Scalar rankTol,
                                             const RefineOptions<Scalar>& opts = {})
{
    using std::abs;
    if (!(rankTol > Scalar(0))) {
        throw std::invalid_argument("rankRevealingUrv: rankTol must be positive");
    }
    const Index n = r0.order();
    Scalar maxDiag(0);
    for (Index i = 0; i < n; ++i) {
        maxDiag = std::max(maxDiag, abs(r0(i, i)));
    }
    const Scalar threshold = rankTol * maxDiag;

    RankRevealingResult<Scalar> result;
    result.u = MatrixX<Scalar>::Identity(n, n);
    result.v = MatrixX<Scalar>::Identity(n, n);
    result.r = r0.matrix();
    result.allLevelsConverged = true;

    RefineOptions<Scalar> levelOpts = opts;
    levelOpts.accumulateFactors = true;
    levelOpts.recordRho = false;

    for (Index m = n; m >= 2; --m) {
        UpperTriangular<Scalar> block(MatrixX<Scalar>(result.r.topLeftCorner(m, m)));
        ConvergenceReport<Scalar> report = refine(block, levelOpts);
        result.allLevelsConverged = result.allLevelsConverged && report.converged;
        const RefinementState<Scalar>& state = report.finalState;

        // Leading block B satisfies B = D * gEven^T * B' * gOdd with B' the
        // refined iterate and D the initial corner flip, so
        //   [B  H]   [D gEven^T   ]   [B'  gEven D H]   [gOdd   ]
        //   [0  E] = [          I ] * [0          E ] * [      I].
        MatrixX<Scalar> flipped = state.gEven();
        if (state.initialCornerFlipped()) {
            flipped.col(m - 1) = -flipped.col(m - 1);  // gEven^T row flip, pre-transposed
        }
        result.u.leftCols(m) = (result.u.leftCols(m) * flipped.transpose()).eval();
        result.v.leftCols(m) = (result.v.leftCols(m) * state.gOdd().transpose()).eval();
        result.r.topLeftCorner(m, m) = state.iterate();
        if (m < n) {
            MatrixX<Scalar> coupling = result.r.block(0, m, m, n - m);
            if (state.initialCornerFlipped()) {
                coupling.row(m - 1) = -coupling.row(m - 1);
            }
            result.r.block(0, m, m, n - m) = state.gEven() * coupling;
        }
        if (report.finalE >= threshold) {
            break;
        }
    }

    result.numericalRank = 0;
    for (Index i = 0; i < n; ++i) {
        if (abs(result.r(i, i)) >= threshold) {
            ++result.numericalRank;
        }
    }
    return result;
}

}  // namespace urv

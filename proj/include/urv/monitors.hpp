#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <Eigen/Householder>
#include <Eigen/QR>

#include "urv/core.hpp"
#include "urv/refine.hpp"
#include "urv/svd.hpp"

namespace urv {

enum class MonitorCheck {
    Lemma1,                  // sigma_min(R^(l)) <= min_i |r_ii^(l)| at even l
    Lemma2MonotoneE,         // e^(l) nonincreasing
    Thm1SigmaNondecreasing,  // sigma_j(S^(l)) nondecreasing, all j
    Thm1HProductBound,       // ||h^(l)|| <= prod_{i<l} rho^(i) * ||h^(0)||
    OrthogonalInvariance,    // sigma multiset of R^(l) equals that of R^(0)
    FactorReconstruction,    // gEven * R^(0) * gOdd^T == R^(l) at even l
    Lemma4MonotoneAlignment, // u-alignment monotone toward sign(v_nn^(0))
    Thm2LimitE,              // final e agrees with oracle sigma_n
    Thm2AlignmentLimit,      // |alignments| -> 1
};

inline const char* to_string(MonitorCheck c)
{
    switch (c) {
        case MonitorCheck::Lemma1: return "LEMMA1";
        case MonitorCheck::Lemma2MonotoneE: return "LEMMA2_MONOTONE_E";
        case MonitorCheck::Thm1SigmaNondecreasing: return "THM1_SIGMA_NONDECREASING";
        case MonitorCheck::Thm1HProductBound: return "THM1_H_PRODUCT_BOUND";
        case MonitorCheck::OrthogonalInvariance: return "ORTHOGONAL_INVARIANCE";
        case MonitorCheck::FactorReconstruction: return "FACTOR_RECONSTRUCTION";
        case MonitorCheck::Lemma4MonotoneAlignment: return "LEMMA4_MONOTONE_ALIGNMENT";
        case MonitorCheck::Thm2LimitE: return "THM2_LIMIT_E";
        case MonitorCheck::Thm2AlignmentLimit: return "THM2_ALIGNMENT_LIMIT";
    }
    return "UNKNOWN";
}

inline std::ostream& operator<<(std::ostream& os, MonitorCheck value)
{
    return os << to_string(value);
}

struct MonitorEntry {
    MonitorCheck id;
    bool applicable;        // limit checks are skipped when their hypotheses fail
    bool holds;             // worstViolation <= tolerance (true when not applicable)
    double worstViolation;  // measured in the same relative/absolute unit as the tolerance
    Index location;         // half-sweep index of the worst violation, 0 if none
};

/// All tolerances are overridable: the monitored statements are exact-arithmetic
/// facts, and the rounding slack grows with n and the iteration count.
struct MonitorTolerances {
    double lemma1 = 1e-12;              // x ||R^(l)||_F
    double lemma2 = 1e-14;              // x e^(0)
    double thm1Sigma = 1e-12;           // relative per step
    double thm1HBound = 1e-12;          // relative to the product bound
    double orthogonalInvariance = 1e-12;// relative per singular value
    double factorReconstruction = 1e-12;// x ||R^(0)||_F
    double lemma4 = 1e-13;              // absolute on alignment values
    double thm2LimitE = 1e-9;           // relative to sigma_n
    double thm2Alignment = 1e-6;        // 1 - |alignment|
    double vnnApplicability = 1e-6;     // |v_nn^(0)| above which limit checks apply
    double gapApplicability = 1e-3;     // (sigma_{n-1} - sigma_n) / sigma_1 for alignment limits
    double convergedTolH = 1e-14;       // used to decide the run terminated, as refine does
    double convergedTolE = 1e-15;
};

struct MonitorReport {
    std::vector<MonitorEntry> entries;

    const MonitorEntry& entry(MonitorCheck id) const
    {
        for (const auto& e : entries) {
            if (e.id == id) {
                return e;
            }
        }
        throw std::logic_error("MonitorReport: unknown check");
    }

    bool allApplicableHold() const
    {
        return std::all_of(entries.begin(), entries.end(),
                           [](const MonitorEntry& e) { return e.holds; });
    }
};

/// Replays the recorded refinement from R^(0) and evaluates every monitored
/// lemma/theorem along the way. svd0 must be the oracle SVD of state.initial().
/// Limit checks (THM2_*) are asserted only when the convergence hypotheses
/// hold and the run actually terminated; otherwise they are not-applicable.
template <typename Scalar>
MonitorReport runMonitors(const RefinementState<Scalar>& state, const SvdResult<Scalar>& svd0,
                          const MonitorTolerances& tol = {})
{
    using std::abs;
    const Index n = state.order();
    const Index total = state.halfSweep();
    if (total < 2) {
        throw std::invalid_argument("runMonitors: at least one completed double sweep required");
    }

    const MatrixX<Scalar>& r0 = state.initial();
    const Scalar r0Norm = frobeniusNorm(r0);
    const VectorX<Scalar> sigma0 = svd0.sigma;
    const double vnn0 = static_cast<double>(svd0.v(n - 1, n - 1));
    const double sigmaGap =
        static_cast<double>((sigma0(n - 2) - sigma0(n - 1)) / sigma0(0));

    struct Violation {
        double worst = 0.0;
        Index at = 0;
        void update(double value, Index l)
        {
            if (value > worst) {
                worst = value;
                at = l;
            }
        }
    };
    Violation lemma1, lemma2, thm1Sigma, thm1HBound, orthInv, factorRecon, lemma4;

    RefinementState<Scalar> replay{UpperTriangular<Scalar>(r0), true};

    const Scalar e0 = replay.cornerValue();
    const Scalar h0 = replay.hNorm();
    Scalar previousE = e0;
    VectorX<Scalar> previousLeadingSigma = svd(MatrixX<Scalar>(replay.leadingBlock())).sigma;
    // h^(0) * prod_{i<l} rho^(i); long double range absorbs long decaying runs
    long double hBound = static_cast<long double>(h0);
    double lastAlignU = static_cast<double>(svd0.u(n - 1, n - 1));
    double finalAlignV = static_cast<double>(svd0.v(n - 1, n - 1));
    double finalAlignU = lastAlignU;

    for (Index l = 1; l <= total; ++l) {
        // rho^(l-1) enters the product bound for ||h^(l)||.
        const Scalar rhoPrev =
            previousE / previousLeadingSigma(previousLeadingSigma.size() - 1);
        hBound *= static_cast<long double>(rhoPrev);
        if (replay.atEvenParity()) {
            replay.oddSweep();
        } else {
            replay.evenSweep();
        }
        const bool evenIterate = replay.atEvenParity();
        const Scalar e = replay.cornerValue();
        const Scalar h = replay.hNorm();

        lemma2.update(static_cast<double>((e - previousE) / e0), l);
        previousE = e;

        const SvdResult<Scalar> leadingSvd = svd(MatrixX<Scalar>(replay.leadingBlock()));
        for (Index j = 0; j < n - 1; ++j) {
            thm1Sigma.update(static_cast<double>((previousLeadingSigma(j) - leadingSvd.sigma(j)) /
                                                 previousLeadingSigma(j)),
                             l);
        }
        previousLeadingSigma = leadingSvd.sigma;

        if (h0 > Scalar(0) && h > Scalar(0)) {
            thm1HBound.update(
                static_cast<double>(static_cast<long double>(h) / hBound - 1.0L), l);
        }

        const SvdResult<Scalar> fullSvd = svd(replay.iterate());
        for (Index j = 0; j < n; ++j) {
            orthInv.update(static_cast<double>(abs(fullSvd.sigma(j) - sigma0(j)) / sigma0(j)), l);
        }

        if (evenIterate) {
            const MatrixX<Scalar> rebuilt =
                replay.gEven() * r0 * replay.gOdd().transpose() - replay.iterate();
            factorRecon.update(static_cast<double>(frobeniusNorm(rebuilt) / r0Norm), l);
            lemma1.update(static_cast<double>(
                              (fullSvd.sigma(n - 1) - replay.iterate().diagonal().cwiseAbs().minCoeff()) /
                              frobeniusNorm(replay.iterate())),
                          l);

            const auto [alignV, alignU] = replay.alignment(svd0);
            const double sign = vnn0 > 0 ? 1.0 : -1.0;
            lemma4.update(sign * (lastAlignU - static_cast<double>(alignU)), l);
            lastAlignU = static_cast<double>(alignU);
            finalAlignV = static_cast<double>(alignV);
            finalAlignU = static_cast<double>(alignU);
        }
    }

    const auto& last = state.history().back();
    const bool terminated =
        static_cast<double>(last.hNorm) <= tol.convergedTolH * static_cast<double>(r0Norm) ||
        (state.history().size() >= 3 &&
         abs(static_cast<double>(state.history()[state.history().size() - 3].e - last.e)) <=
             tol.convergedTolE * static_cast<double>(last.e));

    const bool vnnUsable = abs(vnn0) > tol.vnnApplicability;
    const bool limitApplicable = vnnUsable && terminated;
    const bool alignmentApplicable = limitApplicable && sigmaGap > tol.gapApplicability;

    const double limitEViolation =
        abs(static_cast<double>(last.e - sigma0(n - 1))) / static_cast<double>(sigma0(n - 1));
    const double alignmentViolation =
        std::max(0.0, std::max(1.0 - abs(finalAlignV), 1.0 - abs(finalAlignU)));

    MonitorReport report;
    auto add = [&report](MonitorCheck id, bool applicable, double worst, double tolerance,
                         Index at) {
        report.entries.push_back(
            {id, applicable, !applicable || worst <= tolerance, applicable ? worst : 0.0,
             applicable ? at : Index(0)});
    };
    add(MonitorCheck::Lemma1, true, lemma1.worst, tol.lemma1, lemma1.at);
    add(MonitorCheck::Lemma2MonotoneE, true, lemma2.worst, tol.lemma2, lemma2.at);
    add(MonitorCheck::Thm1SigmaNondecreasing, true, thm1Sigma.worst, tol.thm1Sigma, thm1Sigma.at);
    add(MonitorCheck::Thm1HProductBound, true, thm1HBound.worst, tol.thm1HBound, thm1HBound.at);
    add(MonitorCheck::OrthogonalInvariance, true, orthInv.worst, tol.orthogonalInvariance,
        orthInv.at);
    add(MonitorCheck::FactorReconstruction, true, factorRecon.worst, tol.factorReconstruction,
        factorRecon.at);
    add(MonitorCheck::Lemma4MonotoneAlignment, vnnUsable, lemma4.worst, tol.lemma4, lemma4.at);
    add(MonitorCheck::Thm2LimitE, limitApplicable, limitEViolation, tol.thm2LimitE, total);
    add(MonitorCheck::Thm2AlignmentLimit, alignmentApplicable, alignmentViolation,
        tol.thm2Alignment, total);
    return report;
}

enum class VnnMode { Nonzero, Zero, Tiny };

struct GeneratorSpec {
    Index n;
    Vector sigmaProfile;  // positive, descending
    VnnMode vnnMode = VnnMode::Nonzero;
    std::uint64_t seed = 0;
};

namespace detail {

inline Matrix randomOrthogonal(Index n, std::mt19937_64& rng)
{
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix a(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            a(i, j) = gauss(rng);
        }
    }
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < n; ++j) {
        if (r(j, j) < 0.0) {
            q.col(j) = -q.col(j);
        }
    }
    return q;
}

/// QR-re-triangularization of U * diag(sigma) * V^T with the diagonal made
/// positive; singular values survive to rounding.
inline Matrix triangularizeWithProfile(const Vector& sigma, const Matrix& u, const Matrix& v)
{
    const Matrix a = u * sigma.asDiagonal() * v.transpose();
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix t = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index i = 0; i < t.rows(); ++i) {
        if (t(i, i) < 0.0) {
            t.row(i) = -t.row(i);
        }
    }
    return t;
}

inline UpperTriangular<double> generateNonzero(Index n, const Vector& sigma,
                                               std::mt19937_64& rng)
{
    for (int attempt = 0; attempt < 64; ++attempt) {
        const Matrix u = randomOrthogonal(n, rng);
        const Matrix v = randomOrthogonal(n, rng);
        UpperTriangular<double> t = truncateToUpperTriangular(triangularizeWithProfile(sigma, u, v));
        SvdResult<double> oracle = svd(t.matrix());
        const double vnn = oracle.v(n - 1, n - 1);
        if (std::abs(vnn) < 1e-3) {
            continue;  // too close to the stationary manifold; redraw
        }
        if (vnn < 0.0) {
            Matrix m = t.matrix();
            m.col(n - 1) = -m.col(n - 1);  // flips the sign of v_nn, sigma unchanged
            return UpperTriangular<double>(std::move(m));
        }
        return t;
    }
    throw std::runtime_error("generateTestMatrix: could not reach |v_nn| >= 1e-3");
}

}  // namespace detail

/// Deterministic-per-seed corpus generator. Nonzero mode re-triangularizes a
/// random SVD synthesis and redraws until v_nn^(0) is comfortably positive.
/// Zero mode decouples the smallest singular value into a leading 1x1 block,
/// which forces v_nn^(0) = 0 exactly, like the classical counterexample. Tiny
/// mode couples the zero-mode construction through a small top-right entry
/// scaled until |v_nn^(0)| lands near 1e-8.
inline UpperTriangular<double> generateTestMatrix(const GeneratorSpec& spec)
{
    const Index n = spec.n;
    if (n < 2) {
        throw std::invalid_argument("generateTestMatrix: n must be at least 2");
    }
    if (spec.sigmaProfile.size() != n) {
        throw std::invalid_argument("generateTestMatrix: sigma profile size must equal n");
    }
    for (Index i = 0; i < n; ++i) {
        if (!(spec.sigmaProfile(i) > 0.0)) {
            throw std::invalid_argument("generateTestMatrix: sigma profile must be positive");
        }
        if (i > 0 && spec.sigmaProfile(i) > spec.sigmaProfile(i - 1)) {
            throw std::invalid_argument("generateTestMatrix: sigma profile must be descending");
        }
    }
    std::mt19937_64 rng(spec.seed);

    if (spec.vnnMode == VnnMode::Nonzero) {
        return detail::generateNonzero(n, spec.sigmaProfile, rng);
    }

    if (spec.sigmaProfile(n - 2) <= spec.sigmaProfile(n - 1)) {
        throw std::invalid_argument(
            "generateTestMatrix: zero/tiny modes require a simple smallest singular value");
    }
    Matrix block(n, n);
    block.setZero();
    block(0, 0) = spec.sigmaProfile(n - 1);
    if (n == 2) {
        block(1, 1) = spec.sigmaProfile(0);
    } else {
        const Vector rest = spec.sigmaProfile.head(n - 1);
        block.bottomRightCorner(n - 1, n - 1) =
            detail::generateNonzero(n - 1, rest, rng).matrix();
    }
    if (spec.vnnMode == VnnMode::Zero) {
        return UpperTriangular<double>(std::move(block));
    }

    // Tiny: scale the coupling entry until the oracle v_nn is near the target.
    const double target = 1e-8;
    double eps = target * spec.sigmaProfile(n - 1);
    for (int iteration = 0; iteration < 8; ++iteration) {
        Matrix coupled = block;
        coupled(0, n - 1) = eps;
        const double vnn = std::abs(svd(Matrix(coupled)).v(n - 1, n - 1));
        if (vnn > 0.1 * target && vnn < 10.0 * target) {
            return UpperTriangular<double>(std::move(coupled));
        }
        if (vnn == 0.0) {
            eps *= 1e4;
            continue;
        }
        eps *= target / vnn;
    }
    throw std::runtime_error("generateTestMatrix: tiny mode could not reach |v_nn| ~ 1e-8");
}

}  // namespace urv

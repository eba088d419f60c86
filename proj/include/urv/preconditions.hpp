#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <ostream>

#include "urv/core.hpp"
#include "urv/svd.hpp"

namespace urv {

/// Which convergence hypothesis holds for a given input, strongest first.
/// The corollary-style guarantee dominates: rho < 1 already implies
/// sigma_min(S) > sigma_min(R) via sigma_min(R) <= |e|, so the rho-based
/// verdict only surfaces when the corollary comparison is lost to rounding.
enum class Verdict {
    GuaranteedCorollary,  // sigma_min(S) > sigma_min(R)
    GuaranteedMs,         // rho^(0) < 1
    Likely,               // v_nn != 0 only
    StationaryRisk,       // v_nn numerically zero
};

inline const char* to_string(Verdict v)
{
    switch (v) {
        case Verdict::GuaranteedCorollary: return "GUARANTEED_COROLLARY";
        case Verdict::GuaranteedMs: return "GUARANTEED_MS";
        case Verdict::Likely: return "LIKELY";
        case Verdict::StationaryRisk: return "STATIONARY_RISK";
    }
    return "UNKNOWN";
}

inline std::ostream& operator<<(std::ostream& os, Verdict value)
{
    return os << to_string(value);
}

template <typename Scalar>
struct PreconditionReport {
    Scalar e0;              // corner r_nn of the input
    Scalar rho0;            // |e0| / sigma_min(S)
    Scalar sigmaMinS;       // smallest singular value of the leading block
    Scalar sigmaMinR;       // smallest singular value of the whole matrix
    Scalar sigmaNextR;      // second-smallest singular value of the whole matrix
    Scalar sigmaMaxR;       // largest singular value of the whole matrix
    Scalar vnn;             // trailing entry of V in the oracle SVD
    Scalar vnnZeroThreshold;
    bool rhoLtOne;
    bool vnnNonzero;
    bool sigmaGapSimple;    // sigma_{n-1} - sigma_n > 1e-12 * sigma_1
    bool sminSGtSminR;
    Verdict verdict;
};

/// Evaluates the Theorem 1 / Theorem 2 / Corollary 1 hypotheses on R using the
/// SVD oracle. The v_nn zero threshold is 1e-10: below that the stationary
/// behavior dominates at double precision.
template <typename Scalar>
PreconditionReport<Scalar> checkPreconditions(const UpperTriangular<Scalar>& r)
{
    using std::abs;
    const Index n = r.order();
    if (n < 2) {
        throw std::invalid_argument("checkPreconditions: order must be at least 2");
    }

    const MatrixX<Scalar>& m = r.matrix();
    const SvdResult<Scalar> full = svd(m);
    const MatrixX<Scalar> leading = m.topLeftCorner(n - 1, n - 1);
    const Scalar sminS = sigmaMin(leading);

    PreconditionReport<Scalar> report;
    report.e0 = m(n - 1, n - 1);
    report.sigmaMinS = sminS;
    report.sigmaMinR = full.sigma(n - 1);
    report.sigmaNextR = full.sigma(n - 2);
    report.sigmaMaxR = full.sigma(0);
    report.rho0 = abs(report.e0) / sminS;
    report.vnn = full.v(n - 1, n - 1);
    report.vnnZeroThreshold = Scalar(1e-10);
    report.rhoLtOne = report.rho0 < Scalar(1);
    report.vnnNonzero = abs(report.vnn) > report.vnnZeroThreshold;
    report.sigmaGapSimple =
        report.sigmaNextR - report.sigmaMinR > Scalar(1e-12) * report.sigmaMaxR;
    report.sminSGtSminR = sminS > report.sigmaMinR;

    if (report.sminSGtSminR) {
        report.verdict = Verdict::GuaranteedCorollary;
    } else if (report.rhoLtOne) {
        report.verdict = Verdict::GuaranteedMs;
    } else if (report.vnnNonzero) {
        report.verdict = Verdict::Likely;
    } else {
        report.verdict = Verdict::StationaryRisk;
    }
    return report;
}

}  // namespace urv

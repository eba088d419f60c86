#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "urv/core.hpp"

namespace urv {

/// Full SVD A = U * diag(sigma) * V^T with sigma sorted descending and a fixed
/// sign convention: the largest-magnitude entry of each column of V is positive
/// (first such entry on ties).
template <typename Scalar>
struct SvdResult {
    MatrixX<Scalar> u;
    VectorX<Scalar> sigma;
    MatrixX<Scalar> v;
};

namespace detail {

// Fills in left singular vectors for (numerically) zero singular values by
// completing an orthonormal basis from canonical vectors, deterministically.
template <typename Scalar>
void completeZeroColumns(MatrixX<Scalar>& u, const VectorX<Scalar>& sigma)
{
    using std::abs;
    const Index n = u.rows();
    for (Index j = 0; j < n; ++j) {
        if (sigma(j) != Scalar(0)) {
            continue;
        }
        VectorX<Scalar> candidate(n);
        bool placed = false;
        for (Index attempt = 0; attempt < n && !placed; ++attempt) {
            candidate.setZero();
            candidate((j + attempt) % n) = Scalar(1);
            for (int pass = 0; pass < 2; ++pass) {
                for (Index k = 0; k < n; ++k) {
                    if (k == j || (sigma(k) == Scalar(0) && k > j)) {
                        continue;
                    }
                    candidate -= u.col(k).dot(candidate) * u.col(k);
                }
            }
            const Scalar norm = vectorTwoNorm(candidate);
            if (norm > Scalar(0.5)) {
                u.col(j) = candidate / norm;
                placed = true;
            }
        }
        if (!placed) {
            throw std::runtime_error("svd: failed to complete orthonormal basis");
        }
    }
}

}  // namespace detail

/// One-sided Jacobi SVD: right rotations orthogonalize the columns of A, and
/// the rotation product accumulates V. Cyclic row-major pair sweeps run until
/// every off-diagonal column dot product is at most 1e-15 times the product of
/// the column norms (at most 60 sweeps). Independent of the refinement code.
template <typename Scalar>
SvdResult<Scalar> svd(const MatrixX<Scalar>& a)
{
    using std::abs;
    using std::sqrt;
    if (a.rows() != a.cols() || a.rows() < 1) {
        throw std::invalid_argument("svd: matrix must be square and nonempty");
    }
    if (!allFinite(a)) {
        throw std::invalid_argument("svd: entries must be finite");
    }
    const Index n = a.rows();
    const Scalar dotTol = Scalar(1e-15);
    constexpr int kMaxSweeps = 60;

    MatrixX<Scalar> w = a;
    MatrixX<Scalar> v = MatrixX<Scalar>::Identity(n, n);

    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (Index p = 0; p + 1 < n; ++p) {
            for (Index q = p + 1; q < n; ++q) {
                const Scalar d = w.col(p).dot(w.col(q));
                if (d == Scalar(0)) {
                    continue;
                }
                const Scalar np = vectorTwoNorm(w.col(p));
                const Scalar nq = vectorTwoNorm(w.col(q));
                if (abs(d) <= dotTol * np * nq) {
                    continue;
                }
                rotated = true;
                const Scalar pp = w.col(p).squaredNorm();
                const Scalar qq = w.col(q).squaredNorm();
                const Scalar zeta = (qq - pp) / (Scalar(2) * d);
                const Scalar t = (zeta >= Scalar(0) ? Scalar(1) : Scalar(-1)) /
                                 (abs(zeta) + sqrt(Scalar(1) + zeta * zeta));
                const Scalar c = Scalar(1) / sqrt(Scalar(1) + t * t);
                const Scalar s = c * t;
                // [wp, wq] <- [c*wp - s*wq, s*wp + c*wq], same on V.
                const GivensRotation<Scalar> rot{p, q, c, -s};
                applyRightInPlace(w, rot);
                applyRightInPlace(v, rot);
            }
        }
        if (!rotated) {
            break;
        }
    }

    VectorX<Scalar> sigma(n);
    for (Index j = 0; j < n; ++j) {
        sigma(j) = vectorTwoNorm(w.col(j));
    }

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index(0));
    std::stable_sort(order.begin(), order.end(),
                     [&sigma](Index lhs, Index rhs) { return sigma(lhs) > sigma(rhs); });

    SvdResult<Scalar> result;
    result.u.resize(n, n);
    result.v.resize(n, n);
    result.sigma.resize(n);
    for (Index j = 0; j < n; ++j) {
        const Index src = order[static_cast<std::size_t>(j)];
        result.sigma(j) = sigma(src);
        result.v.col(j) = v.col(src);
        result.u.col(j) = sigma(src) > Scalar(0) ? (w.col(src) / sigma(src)).eval()
                                                 : VectorX<Scalar>::Zero(n).eval();
    }
    detail::completeZeroColumns(result.u, result.sigma);

    for (Index j = 0; j < n; ++j) {
        Index pivot = 0;
        for (Index i = 1; i < n; ++i) {
            if (abs(result.v(i, j)) > abs(result.v(pivot, j))) {
                pivot = i;
            }
        }
        if (result.v(pivot, j) < Scalar(0)) {
            result.v.col(j) = -result.v.col(j);
            result.u.col(j) = -result.u.col(j);
        }
    }
    return result;
}

template <typename Scalar>
Scalar sigmaMin(const MatrixX<Scalar>& a)
{
    return svd(a).sigma(a.rows() - 1);
}

}  // namespace urv

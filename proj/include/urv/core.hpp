#pragma once

#include <Eigen/Core>
#include <Eigen/Jacobi>

#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace urv {

using Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

/// Plane rotation acting on rows/columns i and j (i < j).
/// Convention: on the left, row_i <- c*row_i + s*row_j, row_j <- -s*row_i + c*row_j;
/// on the right the same mix applied to columns i and j.
template <typename Scalar>
struct GivensRotation {
    Index i;
    Index j;
    Scalar c;
    Scalar s;
};

/// Coefficients of the rotation mapping the pair (a, b) to (r, 0), r >= 0.
template <typename Scalar>
struct GivensCoefficients {
    Scalar c;
    Scalar s;
    Scalar r;
    bool degenerate;  // both inputs were zero; identity returned
};

// c = a/r, s = b/r with r = hypot(a, b) >= 0. hypot does the scaling,
// so no intermediate overflow/underflow for representable inputs.
template <typename Scalar>
GivensCoefficients<Scalar> computeGivens(Scalar a, Scalar b)
{
    using std::hypot;
    if (a == Scalar(0) && b == Scalar(0)) {
        return {Scalar(1), Scalar(0), Scalar(0), true};
    }
    const Scalar r = hypot(a, b);
    return {a / r, b / r, r, false};
}

namespace detail {

template <typename Scalar>
void checkPlane(const GivensRotation<Scalar>& g, Index rows, const char* what)
{
    if (g.i < 0 || g.j >= rows || g.i >= g.j) {
        std::ostringstream msg;
        msg << what << ": rotation plane (" << g.i << ", " << g.j
            << ") out of range for dimension " << rows;
        throw std::out_of_range(msg.str());
    }
}

}  // namespace detail

/// Left-multiplies M by the rotation; only rows i and j change.
template <typename Derived, typename Scalar>
void applyLeftInPlace(Eigen::MatrixBase<Derived>& m, const GivensRotation<Scalar>& g)
{
    detail::checkPlane(g, m.rows(), "applyLeftInPlace");
    m.applyOnTheLeft(g.i, g.j, Eigen::JacobiRotation<Scalar>(g.c, g.s));
}

/// Right-multiplies M by the transposed rotation; only columns i and j change.
/// Transpose-consistent with applyLeftInPlace: applyRight(M, g) == applyLeft(M^T, g)^T.
template <typename Derived, typename Scalar>
void applyRightInPlace(Eigen::MatrixBase<Derived>& m, const GivensRotation<Scalar>& g)
{
    detail::checkPlane(g, m.cols(), "applyRightInPlace");
    m.applyOnTheRight(g.i, g.j, Eigen::JacobiRotation<Scalar>(g.c, g.s).transpose());
}

template <typename Scalar>
MatrixX<Scalar> applyLeft(const MatrixX<Scalar>& m, const GivensRotation<Scalar>& g)
{
    MatrixX<Scalar> out = m;
    applyLeftInPlace(out, g);
    return out;
}

template <typename Scalar>
MatrixX<Scalar> applyRight(const MatrixX<Scalar>& m, const GivensRotation<Scalar>& g)
{
    MatrixX<Scalar> out = m;
    applyRightInPlace(out, g);
    return out;
}

/// Two-norm with max-scaling, accumulated in index order.
template <typename Derived>
typename Derived::Scalar vectorTwoNorm(const Eigen::MatrixBase<Derived>& v)
{
    using Scalar = typename Derived::Scalar;
    using std::abs;
    using std::sqrt;
    Scalar scale(0);
    for (Index k = 0; k < v.size(); ++k) {
        scale = std::max(scale, abs(v(k)));
    }
    if (scale == Scalar(0)) {
        return Scalar(0);
    }
    Scalar sum(0);
    for (Index k = 0; k < v.size(); ++k) {
        const Scalar t = v(k) / scale;
        sum += t * t;
    }
    return scale * sqrt(sum);
}

/// Frobenius norm accumulated in row-major order (deterministic).
template <typename Derived>
typename Derived::Scalar frobeniusNorm(const Eigen::MatrixBase<Derived>& m)
{
    using Scalar = typename Derived::Scalar;
    using std::abs;
    using std::sqrt;
    Scalar scale(0);
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            scale = std::max(scale, abs(m(i, j)));
        }
    }
    if (scale == Scalar(0)) {
        return Scalar(0);
    }
    Scalar sum(0);
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            const Scalar t = m(i, j) / scale;
            sum += t * t;
        }
    }
    return scale * sqrt(sum);
}

template <typename Derived>
bool allFinite(const Eigen::MatrixBase<Derived>& m)
{
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            if (!std::isfinite(static_cast<long double>(m(i, j)))) {
                return false;
            }
        }
    }
    return true;
}

/// First strictly-lower entry that is nonzero, scanning row-major; nullopt if none.
template <typename Derived>
std::optional<std::pair<Index, Index>> firstLowerViolation(const Eigen::MatrixBase<Derived>& m)
{
    for (Index i = 1; i < m.rows(); ++i) {
        for (Index j = 0; j < std::min(i, m.cols()); ++j) {
            if (m(i, j) != typename Derived::Scalar(0)) {
                return std::make_pair(i, j);
            }
        }
    }
    return std::nullopt;
}

/// Square upper triangular matrix with exact zeros below the diagonal and a
/// nonzero diagonal. Stored dense; the wrapper only guards the invariants.
template <typename Scalar>
class UpperTriangular {
public:
    explicit UpperTriangular(MatrixX<Scalar> m) : m_(std::move(m))
    {
        if (m_.rows() != m_.cols() || m_.rows() < 1) {
            throw std::invalid_argument("UpperTriangular: matrix must be square and nonempty");
        }
        if (!allFinite(m_)) {
            throw std::invalid_argument("UpperTriangular: entries must be finite");
        }
        if (auto bad = firstLowerViolation(m_)) {
            std::ostringstream msg;
            msg << "UpperTriangular: entry (" << bad->first + 1 << ", " << bad->second + 1
                << ") = " << m_(bad->first, bad->second) << " below the diagonal is nonzero";
            throw std::invalid_argument(msg.str());
        }
        for (Index i = 0; i < m_.rows(); ++i) {
            if (m_(i, i) == Scalar(0)) {
                std::ostringstream msg;
                msg << "UpperTriangular: zero diagonal entry at (" << i + 1 << ", " << i + 1
                    << "); matrix must be nonsingular";
                throw std::invalid_argument(msg.str());
            }
        }
    }

    Index order() const { return m_.rows(); }
    const MatrixX<Scalar>& matrix() const { return m_; }
    Scalar operator()(Index i, Index j) const { return m_(i, j); }

private:
    MatrixX<Scalar> m_;
};

/// Builds an UpperTriangular from the upper triangle of m, storing exact zeros
/// below the diagonal. Intended for re-triangularized products whose lower part
/// is rounding noise.
template <typename Scalar>
UpperTriangular<Scalar> truncateToUpperTriangular(const MatrixX<Scalar>& m)
{
    MatrixX<Scalar> t = m;
    for (Index i = 1; i < t.rows(); ++i) {
        for (Index j = 0; j < std::min(i, t.cols()); ++j) {
            t(i, j) = Scalar(0);
        }
    }
    return UpperTriangular<Scalar>(std::move(t));
}

}  // namespace urv

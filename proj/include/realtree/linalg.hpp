#pragma once

// Dense real matrix primitives used by the encoder and decoder. Every zero
// test takes an explicit tolerance scaled by the magnitude of its inputs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "realtree/error.hpp"

namespace realtree {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative tolerance used by nilpotency_index when none is given.
inline constexpr double kNilpotencyTolerance = 1e-10;
/// Relative tolerance used by in_kernel when none is given.
inline constexpr double kKernelTolerance = 1e-9;

/// Rank cutoff used when the caller passes a negative rtol: eps * max(rows, cols).
inline double default_rank_rtol(Eigen::Index rows, Eigen::Index cols) {
    return std::numeric_limits<double>::epsilon() * static_cast<double>(std::max(rows, cols));
}

/// Throws NonFiniteError naming `what` if `a` has a NaN or infinite entry.
template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& a, const std::string& what) {
    if (!a.allFinite()) {
        throw NonFiniteError(what + " contains a non-finite entry");
    }
}

/// Singular values in decreasing order. Empty for a matrix with no entries.
inline Vector singular_values(const Matrix& a) {
    if (a.size() == 0) {
        return Vector();
    }
    Eigen::BDCSVD<Matrix> svd(a);
    return svd.singularValues();
}

/// Number of singular values strictly above rtol * sigma_max. A negative rtol
/// selects default_rank_rtol.
inline int numerical_rank(const Matrix& a, double rtol = -1.0) {
    if (rtol < 0.0) {
        rtol = default_rank_rtol(a.rows(), a.cols());
    }
    const Vector sv = singular_values(a);
    if (sv.size() == 0 || sv(0) == 0.0) {
        return 0;
    }
    const double cutoff = rtol * sv(0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff) {
            ++rank;
        }
    }
    return rank;
}

/// Largest singular value (operator 2-norm).
inline double spectral_norm(const Matrix& a) {
    const Vector sv = singular_values(a);
    return sv.size() == 0 ? 0.0 : sv(0);
}

struct LstsqResult {
    Vector solution;
    double residual_norm = 0.0;
    int rank_used = 0;
};

/// Minimum 2-norm minimizer of ||M x - y|| via the SVD pseudo-inverse.
/// Singular values at or below rtol * sigma_max are treated as zero; a
/// negative rtol selects default_rank_rtol.
inline LstsqResult lstsq_min_norm(const Matrix& m, const Vector& y, double rtol = -1.0) {
    if (y.size() != m.rows()) {
        throw DimensionError("lstsq: right-hand side has " + std::to_string(y.size()) +
                             " entries, system has " + std::to_string(m.rows()) + " rows");
    }
    require_finite(m, "lstsq system matrix");
    require_finite(y, "lstsq right-hand side");
    if (rtol < 0.0) {
        rtol = default_rank_rtol(m.rows(), m.cols());
    }

    LstsqResult out;
    out.solution = Vector::Zero(m.cols());
    if (m.size() == 0) {
        out.residual_norm = y.norm();
        return out;
    }

    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    const double cutoff = sv.size() > 0 ? rtol * sv(0) : 0.0;

    Vector coeffs = svd.matrixU().transpose() * y;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff && sv(i) > 0.0) {
            coeffs(i) /= sv(i);
            ++out.rank_used;
        } else {
            coeffs(i) = 0.0;
        }
    }
    out.solution = svd.matrixV() * coeffs;
    out.residual_norm = (m * out.solution - y).norm();
    return out;
}

/// [L, R] = LR - RL.
inline Matrix commutator(const Matrix& l, const Matrix& r) {
    if (l.rows() != l.cols() || r.rows() != r.cols() || l.rows() != r.rows()) {
        throw DimensionError("commutator: operands must be square of equal size");
    }
    return l * r - r * l;
}

/// Smallest h in [1, n] with ||A^h|| <= tol * (1 + ||A||^h), or nullopt when
/// A is not nilpotent at this tolerance.
inline std::optional<int> nilpotency_index(const Matrix& a, double tol = kNilpotencyTolerance) {
    if (a.rows() != a.cols()) {
        throw DimensionError("nilpotency_index: matrix must be square");
    }
    const auto n = static_cast<int>(a.rows());
    const double norm_a = spectral_norm(a);
    Matrix power = a;
    for (int h = 1; h <= std::max(n, 1); ++h) {
        const double bound = tol * (1.0 + std::pow(norm_a, h));
        if (spectral_norm(power) <= bound) {
            return h;
        }
        power = a * power;
    }
    return std::nullopt;
}

/// True iff ||A x|| <= tol * (1 + ||A|| ||x||).
inline bool in_kernel(const Matrix& a, const Vector& x, double tol = kKernelTolerance) {
    if (a.cols() != x.size()) {
        throw DimensionError("in_kernel: matrix has " + std::to_string(a.cols()) +
                             " columns, vector has " + std::to_string(x.size()) + " entries");
    }
    return (a * x).norm() <= tol * (1.0 + spectral_norm(a) * x.norm());
}

/// Integer power by repeated squaring. k = 0 gives the identity.
inline Matrix matrix_power(const Matrix& a, unsigned k) {
    Matrix result = Matrix::Identity(a.rows(), a.cols());
    Matrix base = a;
    while (k > 0) {
        if (k & 1u) {
            result = result * base;
        }
        k >>= 1u;
        if (k > 0) {
            base = base * base;
        }
    }
    return result;
}

}  // namespace realtree

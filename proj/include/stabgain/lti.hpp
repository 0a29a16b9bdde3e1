#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <complex>
#include <utility>
#include <vector>

#include "stabgain/errors.hpp"
#include "stabgain/poly.hpp"

namespace stabgain {

enum class Domain { Continuous, Discrete };

namespace defaults {
inline constexpr double rank_tol = 1e-9;
}

/// SISO state-space system (A, b, c^T) with a time-domain tag.
template <typename Scalar>
struct StateSpaceSiso {
    MatrixX<Scalar> A;
    VectorX<Scalar> b;
    VectorX<Scalar> c;
    Domain domain = Domain::Continuous;

    StateSpaceSiso() = default;
    template <typename DA, typename Db, typename Dc>
    StateSpaceSiso(const Eigen::MatrixBase<DA>& A_, const Eigen::MatrixBase<Db>& b_,
                   const Eigen::MatrixBase<Dc>& c_, Domain dom)
        : A(A_), b(b_), c(c_), domain(dom) {
        if (A.rows() < 1 || A.rows() != A.cols() || b.size() != A.rows() || c.size() != A.rows())
            throw AnalysisError("state-space dimensions are inconsistent");
    }

    Eigen::Index n() const { return A.rows(); }
};

/// Closed-loop polynomial family p(lambda, k) = den(lambda) + k * num(lambda),
/// matching the determinant identity det(lambda I - A + k b c^T) = den + k num
/// with den = det(lambda I - A) and num = c^T adj(lambda I - A) b.
template <typename Scalar>
struct TransferFraction {
    RealPoly<Scalar> den;  // monic, degree n
    RealPoly<Scalar> num;  // degree <= n-1
    Domain domain = Domain::Continuous;
};

template <typename Scalar>
struct CanonicalForm {
    MatrixX<Scalar> T;       // similarity transform, rows q, qA, ..., qA^{n-1}
    MatrixX<Scalar> A_flat;  // T A T^{-1}, companion with ones on the superdiagonal
    VectorX<Scalar> b_flat;  // T b = e_n
    VectorX<Scalar> c_tilde; // c^T T^{-1}, as a column vector
};

template <typename Scalar>
MatrixX<Scalar> controllability_matrix(const MatrixX<Scalar>& A, const VectorX<Scalar>& b) {
    const Eigen::Index n = A.rows();
    MatrixX<Scalar> K(n, n);
    VectorX<Scalar> v = b;
    for (Eigen::Index j = 0; j < n; ++j) {
        K.col(j) = v;
        v = A * v;
    }
    return K;
}

namespace detail {

template <typename Scalar>
Eigen::Index svd_rank(const MatrixX<Scalar>& M, Scalar tol) {
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > tol * sv[0]) ++r;
    return r;
}

}  // namespace detail

/// Kalman rank condition: both the controllability matrix and the
/// observability stack must have full rank (singular values above
/// tol * sigma_max).
template <typename Scalar>
bool is_minimal(const StateSpaceSiso<Scalar>& sys, Scalar tol = Scalar(defaults::rank_tol)) {
    const Eigen::Index n = sys.n();
    const MatrixX<Scalar> K = controllability_matrix(sys.A, sys.b);
    if (detail::svd_rank(K, tol) != n) return false;
    MatrixX<Scalar> O(n, n);
    Eigen::RowVectorX<Scalar> w = sys.c.transpose();
    for (Eigen::Index j = 0; j < n; ++j) {
        O.row(j) = w;
        w = w * sys.A;
    }
    return detail::svd_rank(O, tol) == n;
}

/// Characteristic polynomial of A (monic, ascending) via the
/// Faddeev-LeVerrier recursion.
template <typename Scalar>
RealPoly<Scalar> char_poly(const MatrixX<Scalar>& A) {
    const Eigen::Index n = A.rows();
    VectorX<Scalar> den = VectorX<Scalar>::Zero(n + 1);
    den[n] = Scalar(1);
    MatrixX<Scalar> B = MatrixX<Scalar>::Identity(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        const MatrixX<Scalar> AB = A * B;
        const Scalar a = -AB.trace() / Scalar(k);
        den[n - k] = a;
        B = AB + a * MatrixX<Scalar>::Identity(n, n);
    }
    return RealPoly<Scalar>(std::move(den));
}

/// den = det(lambda I - A), num = c^T adj(lambda I - A) b, both from a single
/// Faddeev-LeVerrier sweep.  Requires a minimal realization; otherwise the
/// downstream gain analysis would be degenerate.
template <typename Scalar>
TransferFraction<Scalar> to_transfer(const StateSpaceSiso<Scalar>& sys,
                                     Scalar rank_tol = Scalar(defaults::rank_tol)) {
    if (!is_minimal(sys, rank_tol)) throw NonMinimalError{};
    const Eigen::Index n = sys.n();
    VectorX<Scalar> den = VectorX<Scalar>::Zero(n + 1);
    VectorX<Scalar> num = VectorX<Scalar>::Zero(n);
    den[n] = Scalar(1);
    // adj(lambda I - A) = sum_k B_k lambda^{n-1-k}, B_0 = I.
    MatrixX<Scalar> B = MatrixX<Scalar>::Identity(n, n);
    num[n - 1] = sys.c.dot(sys.b);
    for (Eigen::Index k = 1; k <= n; ++k) {
        const MatrixX<Scalar> AB = sys.A * B;
        const Scalar a = -AB.trace() / Scalar(k);
        den[n - k] = a;
        if (k < n) {
            B = AB + a * MatrixX<Scalar>::Identity(n, n);
            num[n - 1 - k] = sys.c.dot(B * sys.b);
        }
    }
    return TransferFraction<Scalar>{RealPoly<Scalar>(std::move(den)), RealPoly<Scalar>(std::move(num)),
                                    sys.domain};
}

template <typename Scalar>
RealPoly<Scalar> closed_loop_poly(const TransferFraction<Scalar>& tf, Scalar k) {
    return tf.den + k * tf.num;
}

/// Controllable canonical form: T has rows q, qA, ..., qA^{n-1} with q the
/// last row of the inverse controllability matrix, so that T b = e_n and
/// T A T^{-1} is companion.
template <typename Scalar>
CanonicalForm<Scalar> to_canonical(const StateSpaceSiso<Scalar>& sys,
                                   Scalar rank_tol = Scalar(defaults::rank_tol)) {
    const Eigen::Index n = sys.n();
    const MatrixX<Scalar> K = controllability_matrix(sys.A, sys.b);
    if (detail::svd_rank(K, rank_tol) != n) throw NotControllableError{};

    VectorX<Scalar> en = VectorX<Scalar>::Zero(n);
    en[n - 1] = Scalar(1);
    const VectorX<Scalar> q = K.transpose().fullPivLu().solve(en);

    CanonicalForm<Scalar> cf;
    cf.T.resize(n, n);
    Eigen::RowVectorX<Scalar> row = q.transpose();
    for (Eigen::Index j = 0; j < n; ++j) {
        cf.T.row(j) = row;
        row = row * sys.A;
    }
    const auto lu = cf.T.fullPivLu();
    cf.A_flat = cf.T * sys.A * lu.inverse();
    cf.b_flat = cf.T * sys.b;
    cf.c_tilde = lu.solve(MatrixX<Scalar>::Identity(n, n)).transpose() * sys.c;
    return cf;
}

/// State-feedback pole placement on the companion pair: the closed loop
/// A_flat - b_flat k^T must have the target root multiset, which in
/// companion coordinates is a coefficient subtraction.
template <typename Scalar>
VectorX<Scalar> place_poles(const CanonicalForm<Scalar>& cf,
                            const std::vector<std::complex<Scalar>>& targets,
                            Scalar conj_tol = Scalar(1e-9)) {
    const Eigen::Index n = cf.A_flat.rows();
    if (static_cast<Eigen::Index>(targets.size()) != n)
        throw AnalysisError("pole placement needs exactly n targets");

    // Conjugate-closure check: every off-axis target needs a partner.
    std::vector<bool> used(targets.size(), false);
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const auto& z = targets[i];
        if (std::abs(z.imag()) <= conj_tol * (Scalar(1) + std::abs(z)) || used[i]) continue;
        bool found = false;
        for (std::size_t j = 0; j < targets.size(); ++j) {
            if (j == i || used[j]) continue;
            if (std::abs(std::conj(z) - targets[j]) <= conj_tol * (Scalar(1) + std::abs(z))) {
                used[i] = used[j] = true;
                found = true;
                break;
            }
        }
        if (!found) throw ComplexTargetsError{};
    }

    const RealPoly<Scalar> target = poly_from_roots(targets);
    VectorX<Scalar> k(n);
    // Last row of A_flat is -(a_0, ..., a_{n-1}).
    for (Eigen::Index j = 0; j < n; ++j) k[j] = target.coeffs[j] + cf.A_flat(n - 1, j);
    return k;
}

}  // namespace stabgain

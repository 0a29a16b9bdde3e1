#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <utility>
#include <vector>

#include "stabgain/errors.hpp"

namespace stabgain {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

namespace defaults {
// Double roots of eigenvalue-based rooting separate as O(sqrt(eps)), so the
// clustering radius sits well above that while staying far below typical
// root separations.
inline constexpr double real_tol = 1e-9;
inline constexpr double cluster_tol = 1e-6;
inline constexpr double trim_tol = 1e-12;
}  // namespace defaults

/// Real univariate polynomial, coefficients in ascending powers:
/// coeffs[j] multiplies x^j.  The zero polynomial has degree() == -1.
template <typename Scalar>
struct RealPoly {
    VectorX<Scalar> coeffs;

    RealPoly() = default;
    explicit RealPoly(VectorX<Scalar> c) : coeffs(std::move(c)) {}
    RealPoly(std::initializer_list<Scalar> c)
        : coeffs(Eigen::Map<const VectorX<Scalar>>(c.begin(), static_cast<Eigen::Index>(c.size()))) {}
    template <typename Derived>
    explicit RealPoly(const Eigen::MatrixBase<Derived>& c) : coeffs(c) {}

    /// Index of the last nonzero coefficient; -1 for the zero polynomial.
    Eigen::Index degree() const {
        for (Eigen::Index j = coeffs.size() - 1; j >= 0; --j)
            if (coeffs[j] != Scalar(0)) return j;
        return -1;
    }

    bool is_zero() const { return degree() < 0; }

    Scalar leading() const {
        const Eigen::Index d = degree();
        return d < 0 ? Scalar(0) : coeffs[d];
    }

    Scalar max_abs_coeff() const {
        return coeffs.size() == 0 ? Scalar(0) : coeffs.cwiseAbs().maxCoeff();
    }

    /// Copy with trailing coefficients below rel_tol * max|c| dropped.
    RealPoly trimmed(Scalar rel_tol = Scalar(defaults::trim_tol)) const {
        const Scalar scale = max_abs_coeff();
        Eigen::Index d = -1;
        for (Eigen::Index j = coeffs.size() - 1; j >= 0; --j) {
            if (std::abs(coeffs[j]) > rel_tol * scale) {
                d = j;
                break;
            }
        }
        if (d < 0) return RealPoly{};
        return RealPoly(VectorX<Scalar>(coeffs.head(d + 1)));
    }
};

template <typename Scalar>
RealPoly<Scalar> operator+(const RealPoly<Scalar>& a, const RealPoly<Scalar>& b) {
    const Eigen::Index n = std::max(a.coeffs.size(), b.coeffs.size());
    VectorX<Scalar> out = VectorX<Scalar>::Zero(n);
    out.head(a.coeffs.size()) += a.coeffs;
    out.head(b.coeffs.size()) += b.coeffs;
    return RealPoly<Scalar>(std::move(out));
}

template <typename Scalar>
RealPoly<Scalar> operator*(Scalar s, const RealPoly<Scalar>& p) {
    return RealPoly<Scalar>(VectorX<Scalar>(s * p.coeffs));
}

/// Convolution product.
template <typename Scalar>
RealPoly<Scalar> operator*(const RealPoly<Scalar>& a, const RealPoly<Scalar>& b) {
    if (a.coeffs.size() == 0 || b.coeffs.size() == 0) return RealPoly<Scalar>{};
    VectorX<Scalar> out = VectorX<Scalar>::Zero(a.coeffs.size() + b.coeffs.size() - 1);
    for (Eigen::Index i = 0; i < a.coeffs.size(); ++i)
        for (Eigen::Index j = 0; j < b.coeffs.size(); ++j) out[i + j] += a.coeffs[i] * b.coeffs[j];
    return RealPoly<Scalar>(std::move(out));
}

/// Horner evaluation at a complex point.
template <typename Scalar>
std::complex<Scalar> evaluate(const RealPoly<Scalar>& p, std::complex<Scalar> z) {
    std::complex<Scalar> acc(0, 0);
    for (Eigen::Index j = p.coeffs.size() - 1; j >= 0; --j) acc = acc * z + p.coeffs[j];
    return acc;
}

template <typename Scalar>
Scalar evaluate(const RealPoly<Scalar>& p, Scalar x) {
    Scalar acc(0);
    for (Eigen::Index j = p.coeffs.size() - 1; j >= 0; --j) acc = acc * x + p.coeffs[j];
    return acc;
}

/// Coefficient-wise d/dx.  Constants map to the zero polynomial.
template <typename Scalar>
RealPoly<Scalar> derivative(const RealPoly<Scalar>& p) {
    if (p.coeffs.size() <= 1) return RealPoly<Scalar>{};
    VectorX<Scalar> out(p.coeffs.size() - 1);
    for (Eigen::Index j = 1; j < p.coeffs.size(); ++j) out[j - 1] = Scalar(j) * p.coeffs[j];
    return RealPoly<Scalar>(std::move(out));
}

/// Multiset of roots with integer multiplicities.
template <typename Scalar>
struct RootSet {
    std::vector<std::pair<std::complex<Scalar>, int>> roots;

    int total_multiplicity() const {
        int t = 0;
        for (const auto& [z, m] : roots) t += m;
        return t;
    }

    /// Flat list, each root repeated per its multiplicity.
    std::vector<std::complex<Scalar>> expand() const {
        std::vector<std::complex<Scalar>> out;
        out.reserve(static_cast<std::size_t>(total_multiplicity()));
        for (const auto& [z, m] : roots)
            for (int i = 0; i < m; ++i) out.push_back(z);
        return out;
    }
};

namespace detail {

// Parlett-Reinsch balancing; a diagonal similarity, so eigenvalues are
// unchanged while the eigenproblem conditioning improves for companion
// matrices with wide coefficient ranges.
template <typename Scalar>
void balance_in_place(MatrixX<Scalar>& A) {
    const Scalar radix = Scalar(2);
    const Eigen::Index n = A.rows();
    bool converged = false;
    int guard = 0;
    while (!converged && guard++ < 100) {
        converged = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            Scalar c(0), r(0);
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(A(j, i));
                r += std::abs(A(i, j));
            }
            if (c == Scalar(0) || r == Scalar(0)) continue;
            const Scalar s = c + r;
            Scalar f(1);
            while (c < r / radix) {
                c *= radix;
                r /= radix;
                f *= radix;
            }
            while (c >= r * radix) {
                c /= radix;
                r *= radix;
                f /= radix;
            }
            if ((c + r) < Scalar(0.95) * s && f != Scalar(1)) {
                converged = false;
                A.row(i) /= f;
                A.col(i) *= f;
            }
        }
    }
}

// Enforce exact conjugate symmetry on an eigenvalue multiset of a real
// matrix by pairing upper/lower half-plane values and averaging.
template <typename Scalar>
void symmetrize_conjugates(std::vector<std::complex<Scalar>>& zs) {
    std::vector<std::size_t> upper, lower;
    for (std::size_t i = 0; i < zs.size(); ++i) {
        if (zs[i].imag() > Scalar(0))
            upper.push_back(i);
        else if (zs[i].imag() < Scalar(0))
            lower.push_back(i);
    }
    std::vector<bool> used(lower.size(), false);
    for (std::size_t ui : upper) {
        Scalar best = std::numeric_limits<Scalar>::max();
        std::size_t best_j = lower.size();
        for (std::size_t j = 0; j < lower.size(); ++j) {
            if (used[j]) continue;
            const Scalar d = std::abs(zs[ui] - std::conj(zs[lower[j]]));
            if (d < best) {
                best = d;
                best_j = j;
            }
        }
        if (best_j == lower.size()) continue;
        used[best_j] = true;
        const std::complex<Scalar> m =
            (zs[ui] + std::conj(zs[lower[best_j]])) / Scalar(2);
        zs[ui] = m;
        zs[lower[best_j]] = std::conj(m);
    }
}

template <typename Scalar>
bool complex_less(const std::complex<Scalar>& a, const std::complex<Scalar>& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

}  // namespace detail

/// Greedy clustering of nearby roots: each cluster is replaced by its
/// centroid with multiplicity equal to the cluster size.  The radius is
/// tol * (1 + |centroid|).  Conjugate-symmetric inputs yield a
/// conjugate-symmetric result (mirrored clusters are re-paired).
template <typename Scalar>
RootSet<Scalar> cluster_multiplicities(std::vector<std::complex<Scalar>> zs, Scalar tol) {
    std::sort(zs.begin(), zs.end(), detail::complex_less<Scalar>);
    std::vector<bool> taken(zs.size(), false);
    RootSet<Scalar> out;
    for (std::size_t i = 0; i < zs.size(); ++i) {
        if (taken[i]) continue;
        taken[i] = true;
        std::complex<Scalar> centroid = zs[i];
        std::vector<std::size_t> members{i};
        bool grew = true;
        while (grew) {
            grew = false;
            const Scalar radius = tol * (Scalar(1) + std::abs(centroid));
            for (std::size_t j = 0; j < zs.size(); ++j) {
                if (taken[j]) continue;
                if (std::abs(zs[j] - centroid) <= radius) {
                    taken[j] = true;
                    members.push_back(j);
                    centroid = std::complex<Scalar>(0, 0);
                    for (std::size_t m : members) centroid += zs[m];
                    centroid /= Scalar(members.size());
                    grew = true;
                }
            }
        }
        out.roots.emplace_back(centroid, static_cast<int>(members.size()));
    }

    // Re-pair mirrored clusters so centroids are exactly conjugate.
    for (std::size_t i = 0; i < out.roots.size(); ++i) {
        auto& [zi, mi] = out.roots[i];
        if (zi.imag() <= Scalar(0)) continue;
        Scalar best = std::numeric_limits<Scalar>::max();
        std::size_t best_j = out.roots.size();
        for (std::size_t j = 0; j < out.roots.size(); ++j) {
            if (j == i || out.roots[j].first.imag() >= Scalar(0)) continue;
            if (out.roots[j].second != mi) continue;
            const Scalar d = std::abs(zi - std::conj(out.roots[j].first));
            if (d < best) {
                best = d;
                best_j = j;
            }
        }
        if (best_j < out.roots.size() && best <= tol * (Scalar(1) + std::abs(zi))) {
            const std::complex<Scalar> m = (zi + std::conj(out.roots[best_j].first)) / Scalar(2);
            zi = m;
            out.roots[best_j].first = std::conj(m);
        }
    }

    std::sort(out.roots.begin(), out.roots.end(),
              [](const auto& a, const auto& b) { return detail::complex_less<Scalar>(a.first, b.first); });
    return out;
}

/// All complex roots via balanced companion-matrix eigenvalues, with
/// conjugate pairing enforced and multiplicities assigned by clustering.
/// Degree-0 input yields an empty set; the zero polynomial is an error.
template <typename Scalar>
RootSet<Scalar> all_roots(const RealPoly<Scalar>& p, Scalar cluster_tol = Scalar(defaults::cluster_tol)) {
    const RealPoly<Scalar> q = p.trimmed();
    if (q.is_zero()) throw ZeroPolynomialError{};
    const Eigen::Index n = q.degree();
    if (n == 0) return RootSet<Scalar>{};

    MatrixX<Scalar> companion = MatrixX<Scalar>::Zero(n, n);
    for (Eigen::Index i = 1; i < n; ++i) companion(i, i - 1) = Scalar(1);
    for (Eigen::Index i = 0; i < n; ++i) companion(i, n - 1) = -q.coeffs[i] / q.coeffs[n];
    detail::balance_in_place(companion);

    Eigen::EigenSolver<MatrixX<Scalar>> solver(companion, /*computeEigenvectors=*/false);
    std::vector<std::complex<Scalar>> zs(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) zs[static_cast<std::size_t>(i)] = solver.eigenvalues()[i];

    detail::symmetrize_conjugates(zs);
    return cluster_multiplicities(std::move(zs), cluster_tol);
}

/// Distinct real roots in ascending order with multiplicities.  A root z is
/// accepted as real when |Im z| <= real_tol * (1 + |z|).
template <typename Scalar>
std::vector<std::pair<Scalar, int>> real_roots(const RealPoly<Scalar>& p,
                                               Scalar real_tol = Scalar(defaults::real_tol),
                                               Scalar cluster_tol = Scalar(defaults::cluster_tol)) {
    const RootSet<Scalar> rs = all_roots(p, cluster_tol);
    std::vector<std::pair<Scalar, int>> out;
    for (const auto& [z, m] : rs.roots) {
        if (std::abs(z.imag()) <= real_tol * (Scalar(1) + std::abs(z))) out.emplace_back(z.real(), m);
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Monic real polynomial with the given conjugate-closed root multiset;
/// residual imaginary parts of the expanded coefficients are discarded.
template <typename Scalar>
RealPoly<Scalar> poly_from_roots(const std::vector<std::complex<Scalar>>& roots) {
    std::vector<std::complex<Scalar>> c(roots.size() + 1, std::complex<Scalar>(0, 0));
    c[0] = std::complex<Scalar>(1, 0);
    std::size_t deg = 0;
    for (const auto& r : roots) {
        ++deg;
        for (std::size_t j = deg; j > 0; --j) c[j] = c[j - 1] - r * c[j];
        c[0] = -r * c[0];
    }
    VectorX<Scalar> out(static_cast<Eigen::Index>(roots.size() + 1));
    for (std::size_t j = 0; j <= roots.size(); ++j) out[static_cast<Eigen::Index>(j)] = c[j].real();
    return RealPoly<Scalar>(std::move(out));
}

}  // namespace stabgain

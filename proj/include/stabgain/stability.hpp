#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "stabgain/errors.hpp"
#include "stabgain/lti.hpp"
#include "stabgain/poly.hpp"

namespace stabgain {

namespace defaults {
inline constexpr double stability_eps = 1e-9;
}

/// Verdict for one polynomial.  unstable_count and marginal_count are
/// multiplicity-weighted; margin is max Re (continuous) or max |root| - 1
/// (discrete).
template <typename Scalar>
struct StabilityVerdict {
    bool stable = false;
    Scalar margin = Scalar(0);
    int unstable_count = 0;
    int marginal_count = 0;
};

template <typename Scalar>
StabilityVerdict<Scalar> hurwitz_verdict(const RealPoly<Scalar>& p,
                                         Scalar eps = Scalar(defaults::stability_eps),
                                         Scalar cluster_tol = Scalar(defaults::cluster_tol)) {
    const RootSet<Scalar> rs = all_roots(p, cluster_tol);  // throws on the zero polynomial
    StabilityVerdict<Scalar> v;
    v.margin = -std::numeric_limits<Scalar>::infinity();
    for (const auto& [z, m] : rs.roots) {
        v.margin = std::max(v.margin, z.real());
        if (z.real() > eps)
            v.unstable_count += m;
        else if (z.real() >= -eps)
            v.marginal_count += m;
    }
    v.stable = v.margin < -eps;
    return v;
}

template <typename Scalar>
StabilityVerdict<Scalar> schur_verdict(const RealPoly<Scalar>& p,
                                       Scalar eps = Scalar(defaults::stability_eps),
                                       Scalar cluster_tol = Scalar(defaults::cluster_tol)) {
    const RootSet<Scalar> rs = all_roots(p, cluster_tol);
    StabilityVerdict<Scalar> v;
    v.margin = -std::numeric_limits<Scalar>::infinity();
    for (const auto& [z, m] : rs.roots) {
        const Scalar r = std::abs(z);
        v.margin = std::max(v.margin, r - Scalar(1));
        if (r > Scalar(1) + eps)
            v.unstable_count += m;
        else if (r >= Scalar(1) - eps)
            v.marginal_count += m;
    }
    v.stable = v.margin < -eps;
    return v;
}

template <typename Scalar>
StabilityVerdict<Scalar> domain_verdict(const RealPoly<Scalar>& p, Domain domain,
                                        Scalar eps = Scalar(defaults::stability_eps),
                                        Scalar cluster_tol = Scalar(defaults::cluster_tol)) {
    return domain == Domain::Continuous ? hurwitz_verdict(p, eps, cluster_tol)
                                        : schur_verdict(p, eps, cluster_tol);
}

/// Classic Routh array.  True iff every first-column entry is strictly
/// positive.  An exact-zero pivot in a not-all-zero row is replaced by a
/// small positive epsilon (limit-of-signs rule); an all-zero row means a
/// root configuration symmetric about the origin, which is never strictly
/// Hurwitz.
template <typename Scalar>
bool routh_hurwitz_stable(const RealPoly<Scalar>& p) {
    const RealPoly<Scalar> q = p.trimmed();
    const Eigen::Index n = q.degree();
    if (n < 1) throw ZeroPolynomialError{};
    const Scalar scale = q.max_abs_coeff();
    const Scalar zero_tol = Scalar(1e-14) * scale;

    // Descending coefficients split into the two leading rows.
    std::vector<Scalar> row0, row1;
    for (Eigen::Index j = n; j >= 0; j -= 2) row0.push_back(q.coeffs[j]);
    for (Eigen::Index j = n - 1; j >= 0; j -= 2) row1.push_back(q.coeffs[j]);

    if (row0[0] < Scalar(0)) return false;  // callers pass monic polynomials
    for (Eigen::Index count = 1; count <= n; ++count) {
        bool all_zero = true;
        for (Scalar x : row1)
            if (std::abs(x) > zero_tol) all_zero = false;
        if (all_zero) return false;

        Scalar pivot = row1[0];
        if (std::abs(pivot) <= zero_tol) pivot = zero_tol > Scalar(0) ? zero_tol : Scalar(1e-300);
        if (pivot < Scalar(0)) return false;

        std::vector<Scalar> next;
        const std::size_t len = row0.size() > 1 ? row0.size() - 1 : 0;
        for (std::size_t i = 0; i < len; ++i) {
            const Scalar a = i + 1 < row0.size() ? row0[i + 1] : Scalar(0);
            const Scalar b = i + 1 < row1.size() ? row1[i + 1] : Scalar(0);
            next.push_back((pivot * a - row0[0] * b) / pivot);
        }
        row0 = std::move(row1);
        row0[0] = pivot;
        row1 = std::move(next);
        if (row1.empty()) break;
    }
    return true;
}

template <typename Scalar>
struct BilinearResult {
    RealPoly<Scalar> poly;
    /// p(1) vanished within tolerance, so the transformed polynomial lost
    /// degree (p has a root at lambda = 1).
    bool degree_drop = false;
};

/// q(lambda) = (lambda-1)^n p((lambda+1)/(lambda-1)).  p is Schur stable iff
/// q is Hurwitz stable, provided p(1) != 0.
template <typename Scalar>
BilinearResult<Scalar> bilinear_to_hurwitz(const RealPoly<Scalar>& p,
                                           Scalar drop_tol = Scalar(defaults::real_tol)) {
    const RealPoly<Scalar> a = p.trimmed();
    const Eigen::Index n = a.degree();
    if (n < 1) throw ZeroPolynomialError{};

    const RealPoly<Scalar> plus{Scalar(1), Scalar(1)};    // lambda + 1
    const RealPoly<Scalar> minus{Scalar(-1), Scalar(1)};  // lambda - 1
    std::vector<RealPoly<Scalar>> plus_pow(static_cast<std::size_t>(n) + 1),
        minus_pow(static_cast<std::size_t>(n) + 1);
    plus_pow[0] = RealPoly<Scalar>{Scalar(1)};
    minus_pow[0] = RealPoly<Scalar>{Scalar(1)};
    for (Eigen::Index j = 1; j <= n; ++j) {
        plus_pow[j] = plus_pow[j - 1] * plus;
        minus_pow[j] = minus_pow[j - 1] * minus;
    }

    RealPoly<Scalar> q{};
    for (Eigen::Index j = 0; j <= n; ++j)
        q = q + a.coeffs[j] * (plus_pow[static_cast<std::size_t>(j)] *
                               minus_pow[static_cast<std::size_t>(n - j)]);

    BilinearResult<Scalar> out;
    out.poly = std::move(q);
    const Scalar at_one = evaluate(a, Scalar(1));
    out.degree_drop = std::abs(at_one) <= drop_tol * (Scalar(1) + a.max_abs_coeff());
    return out;
}

}  // namespace stabgain

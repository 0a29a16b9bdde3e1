#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "stabgain/errors.hpp"
#include "stabgain/lti.hpp"
#include "stabgain/poly.hpp"
#include "stabgain/stability.hpp"

// Brute-force cross-checks. Nothing in here may depend on the interval
// analyzer; agreement between the two paths is the point.

namespace stabgain::oracle {

template <typename Scalar>
struct GridClassification {
    std::vector<Scalar> k_grid;
    std::vector<bool> stable_mask;
    std::vector<int> unstable_counts;
    /// Maximal stable runs as (first, last) grid values.
    std::vector<std::pair<Scalar, Scalar>> inferred_intervals;
};

/// Pointwise verdicts over a uniform gain grid.
template <typename Scalar>
GridClassification<Scalar> grid_classify(const TransferFraction<Scalar>& tf, Scalar k_lo, Scalar k_hi,
                                         int count, Scalar eps = Scalar(defaults::stability_eps)) {
    if (count < 2 || !(k_lo < k_hi)) throw AnalysisError("grid_classify needs count >= 2 and k_lo < k_hi");
    GridClassification<Scalar> out;
    out.k_grid.resize(static_cast<std::size_t>(count));
    out.stable_mask.resize(static_cast<std::size_t>(count));
    out.unstable_counts.resize(static_cast<std::size_t>(count));
    const Scalar step = (k_hi - k_lo) / Scalar(count - 1);
    for (int i = 0; i < count; ++i) {
        const Scalar k = k_lo + step * Scalar(i);
        const auto v = domain_verdict(closed_loop_poly(tf, k), tf.domain, eps);
        out.k_grid[static_cast<std::size_t>(i)] = k;
        out.stable_mask[static_cast<std::size_t>(i)] = v.stable;
        out.unstable_counts[static_cast<std::size_t>(i)] = v.unstable_count + v.marginal_count;
    }
    for (std::size_t i = 0; i < out.stable_mask.size();) {
        if (!out.stable_mask[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < out.stable_mask.size() && out.stable_mask[j + 1]) ++j;
        out.inferred_intervals.emplace_back(out.k_grid[i], out.k_grid[j]);
        i = j + 1;
    }
    return out;
}

/// i.i.d. standard-normal system entries, rejection-sampled until minimal.
/// Deterministic for a fixed seed.
template <typename Scalar>
StateSpaceSiso<Scalar> random_minimal_system(Eigen::Index n, Domain domain, std::uint64_t seed) {
    if (n < 1) throw AnalysisError("system order must be at least 1");
    std::mt19937_64 eng(seed);
    std::normal_distribution<Scalar> gauss(Scalar(0), Scalar(1));
    for (int attempt = 0; attempt < 1000; ++attempt) {
        MatrixX<Scalar> A(n, n);
        VectorX<Scalar> b(n), c(n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) A(i, j) = gauss(eng);
        for (Eigen::Index i = 0; i < n; ++i) b[i] = gauss(eng);
        for (Eigen::Index i = 0; i < n; ++i) c[i] = gauss(eng);
        StateSpaceSiso<Scalar> sys(A, b, c, domain);
        if (is_minimal(sys)) return sys;
    }
    throw AnalysisError("failed to draw a minimal system in 1000 attempts");
}

namespace detail {

// Synthetic division of an ascending complex coefficient vector by (x - r).
template <typename Scalar>
std::vector<std::complex<Scalar>> deflate(const std::vector<std::complex<Scalar>>& c,
                                          std::complex<Scalar> r) {
    const std::size_t d = c.size() - 1;
    std::vector<std::complex<Scalar>> q(d);
    std::complex<Scalar> carry = c[d];
    for (std::size_t j = d; j-- > 0;) {
        q[j] = carry;
        carry = c[j] + r * carry;
    }
    return q;  // remainder (carry) intentionally dropped
}

template <typename Scalar>
std::complex<Scalar> eval_complex(const std::vector<std::complex<Scalar>>& c, std::complex<Scalar> z) {
    std::complex<Scalar> acc(0, 0);
    for (std::size_t j = c.size(); j-- > 0;) acc = acc * z + c[j];
    return acc;
}

}  // namespace detail

/// Checks the fractional-power expansion of an m-fold root lambda0 of
/// p(lambda, k0): for each delta, the m nearest roots of p(lambda, k0+delta)
/// are matched (over all assignments) against
///   lambda0 + (-delta * num(lambda0) / h(lambda0))^{1/m} * omega_j,
/// with h the m-fold deflation of p(., k0).  Returns the largest
/// |error| / |delta|^{1/m}; the contract is that this ratio shrinks as
/// delta -> 0.
template <typename Scalar>
Scalar asymptotic_root_check(const TransferFraction<Scalar>& tf, Scalar k0, std::complex<Scalar> lambda0,
                             int m, const std::vector<Scalar>& deltas,
                             Scalar cluster_tol = Scalar(defaults::cluster_tol)) {
    const RealPoly<Scalar> p0 = closed_loop_poly(tf, k0).trimmed();
    const RootSet<Scalar> rs = all_roots(p0, cluster_tol);
    int found = 0;
    Scalar best = std::numeric_limits<Scalar>::max();
    for (const auto& [z, mult] : rs.roots) {
        const Scalar d = std::abs(z - lambda0);
        if (d < best) {
            best = d;
            found = mult;
        }
    }
    if (found != m) throw MultiplicityMismatchError(m, found);

    std::vector<std::complex<Scalar>> pc(static_cast<std::size_t>(p0.degree()) + 1);
    for (Eigen::Index j = 0; j <= p0.degree(); ++j) pc[static_cast<std::size_t>(j)] = p0.coeffs[j];
    for (int i = 0; i < m; ++i) pc = detail::deflate(pc, lambda0);
    const std::complex<Scalar> h0 = detail::eval_complex(pc, lambda0);
    const std::complex<Scalar> r0 = evaluate(tf.num, lambda0);

    Scalar worst(0);
    for (Scalar delta : deltas) {
        const RealPoly<Scalar> pd = closed_loop_poly(tf, k0 + delta);
        std::vector<std::complex<Scalar>> roots = all_roots(pd, cluster_tol).expand();
        std::sort(roots.begin(), roots.end(), [&](const auto& a, const auto& b) {
            return std::abs(a - lambda0) < std::abs(b - lambda0);
        });
        roots.resize(static_cast<std::size_t>(m));

        const std::complex<Scalar> base = -delta * r0 / h0;
        const std::complex<Scalar> radial = std::pow(base, Scalar(1) / Scalar(m));
        std::vector<std::complex<Scalar>> preds(static_cast<std::size_t>(m));
        const Scalar two_pi = Scalar(2) * Scalar(M_PI);
        for (int j = 0; j < m; ++j) {
            const std::complex<Scalar> omega =
                std::polar(Scalar(1), two_pi * Scalar(j) / Scalar(m));
            preds[static_cast<std::size_t>(j)] = lambda0 + radial * omega;
        }

        std::vector<int> perm(static_cast<std::size_t>(m));
        std::iota(perm.begin(), perm.end(), 0);
        Scalar err = std::numeric_limits<Scalar>::max();
        do {
            Scalar e(0);
            for (int j = 0; j < m; ++j)
                e = std::max(e, std::abs(preds[static_cast<std::size_t>(j)] -
                                         roots[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])]));
            err = std::min(err, e);
        } while (std::next_permutation(perm.begin(), perm.end()));

        worst = std::max(worst, err / std::pow(std::abs(delta), Scalar(1) / Scalar(m)));
    }
    return worst;
}

/// Regular-openness probe: perturb a marginally stabilizing state gain on a
/// sphere of the given radius and report whether both a strictly stable and
/// an unstable neighbor were found.
template <typename Scalar>
bool boundary_probe(const MatrixX<Scalar>& A, const VectorX<Scalar>& b, const VectorX<Scalar>& k_marginal,
                    int trials, Scalar radius = Scalar(1e-4), std::uint64_t seed = 0) {
    std::mt19937_64 eng(seed);
    std::normal_distribution<Scalar> gauss(Scalar(0), Scalar(1));
    bool saw_stable = false, saw_unstable = false;
    for (int t = 0; t < trials && !(saw_stable && saw_unstable); ++t) {
        VectorX<Scalar> dir(k_marginal.size());
        for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] = gauss(eng);
        const Scalar norm = dir.norm();
        if (norm == Scalar(0)) continue;
        const VectorX<Scalar> kt = k_marginal + (radius / norm) * dir;
        const MatrixX<Scalar> Acl = A - b * kt.transpose();
        const auto v = hurwitz_verdict(char_poly(Acl));
        saw_stable |= v.stable;
        saw_unstable |= v.unstable_count > 0;
    }
    return saw_stable && saw_unstable;
}

}  // namespace stabgain::oracle

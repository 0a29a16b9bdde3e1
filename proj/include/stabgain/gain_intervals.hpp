#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "stabgain/errors.hpp"
#include "stabgain/lti.hpp"
#include "stabgain/oracle.hpp"
#include "stabgain/poly.hpp"
#include "stabgain/stability.hpp"

namespace stabgain {

namespace defaults {
inline constexpr double dedup_tol = 1e-7;
inline constexpr double residual_tol = 1e-7;
inline constexpr double witness_tol = 1e-6;
inline constexpr double tangency_tol = 1e-5;
}  // namespace defaults

/// One contact between the root locus and the stability boundary, recorded
/// by its boundary parameter: beta for lambda = i*beta (continuous), theta in
/// [0, pi] for lambda = e^{i theta} (discrete).  multiplicity is the
/// multiplicity of the parameter as a root of the boundary polynomial
/// (phi resp. g), not of lambda0 as a root of p.
template <typename Scalar>
struct BoundaryRoot {
    Scalar param;
    int multiplicity;
};

template <typename Scalar>
struct CriticalGain {
    Scalar k;
    std::vector<BoundaryRoot<Scalar>> boundary_roots;
    /// The locus touches the boundary at this gain without crossing it.
    bool tangent = false;
};

template <typename Scalar>
struct IntervalReport {
    Scalar lo, hi;  // +-infinity on the unbounded ends
    /// Roots outside the open stability region (boundary-or-beyond) at the
    /// representative gain; constant across the interval.
    int unstable_count = 0;
    bool stabilizing = false;
    Scalar representative_k = Scalar(0);
};

enum class UnboundedSide { None, Left, Right };

template <typename Scalar>
struct AnalysisReport {
    Domain domain = Domain::Continuous;
    std::vector<CriticalGain<Scalar>> critical_gains;
    std::vector<IntervalReport<Scalar>> intervals;
    int num_stabilizing_components = 0;
    int bound = 0;  // ceil(n/2)
    bool bound_satisfied = true;
    UnboundedSide unbounded_stabilizing = UnboundedSide::None;
    /// Advisory diagnostics, e.g. "interlacing-observed",
    /// "degraded-oracle-fallback", "tangency-classification-mismatch".
    std::vector<std::string> flags;
    bool degraded = false;
};

template <typename Scalar>
struct AnalyzeOptions {
    Scalar real_tol = Scalar(defaults::real_tol);
    Scalar cluster_tol = Scalar(defaults::cluster_tol);
    /// Realness/clustering tolerance for roots of the boundary polynomials
    /// (phi, upsilon, g).  Zero means: use real_tol/cluster_tol.  Loosen for
    /// systems whose coefficients are themselves rounded, since an exact
    /// tangency then splits as O(sqrt(coefficient error)).
    Scalar boundary_root_tol = Scalar(0);
    Scalar dedup_tol = Scalar(defaults::dedup_tol);
    Scalar residual_tol = Scalar(defaults::residual_tol);
    Scalar witness_tol = Scalar(defaults::witness_tol);
    Scalar tangency_tol = Scalar(defaults::tangency_tol);
    Scalar eps = Scalar(defaults::stability_eps);
    int fallback_grid_count = 10001;
};

template <typename Scalar>
bool tangency_continuous(const TransferFraction<Scalar>& tf, Scalar k, Scalar beta,
                         Scalar tol = Scalar(defaults::tangency_tol));
template <typename Scalar>
bool tangency_discrete(const TransferFraction<Scalar>& tf, Scalar k, Scalar theta,
                       Scalar tol = Scalar(defaults::tangency_tol));

namespace detail {
template <typename Scalar>
void annotate_tangency(const TransferFraction<Scalar>& tf, std::vector<CriticalGain<Scalar>>& gains,
                       const AnalyzeOptions<Scalar>& opts);
}

/// phi(beta) = Im(den(i beta) * conj(num(i beta))), assembled exactly from
/// the coefficients through the parity of powers of i.  Only odd powers of
/// beta survive: phi(beta) = beta * tau(beta).  Returned sign-normalized
/// (positive leading coefficient); may be identically zero.
template <typename Scalar>
RealPoly<Scalar> phi_poly(const TransferFraction<Scalar>& tf) {
    if (tf.domain != Domain::Continuous)
        throw AnalysisError("phi_poly expects a continuous-domain fraction");
    const RealPoly<Scalar> den = tf.den.trimmed();
    const RealPoly<Scalar> num = tf.num.trimmed();
    if (num.is_zero()) throw DegenerateNumeratorError{};
    const Eigen::Index N = den.degree(), M = num.degree();

    VectorX<Scalar> out = VectorX<Scalar>::Zero(N + M + 1);
    for (Eigen::Index j = 0; j <= N; ++j) {
        for (Eigen::Index l = 0; l <= M; ++l) {
            const Eigen::Index s = j + l;
            if (s % 2 == 0) continue;  // Im(i^{j+l}) = 0 for even j+l
            Scalar sign = (l % 2 == 0) ? Scalar(1) : Scalar(-1);
            if (((s - 1) / 2) % 2 == 1) sign = -sign;
            out[s] += sign * den.coeffs[j] * num.coeffs[l];
        }
    }
    RealPoly<Scalar> phi(std::move(out));
    if (phi.leading() < Scalar(0)) phi = Scalar(-1) * phi;
    return phi;
}

/// With phi odd, phi(beta) = beta * upsilon(beta^2); returns upsilon.
/// Positive real roots of upsilon are the squares of the +-beta root pairs
/// of phi, with matching multiplicities.
template <typename Scalar>
RealPoly<Scalar> odd_part_compress(const RealPoly<Scalar>& phi, Scalar odd_tol = Scalar(1e-9)) {
    const Scalar scale = phi.max_abs_coeff();
    for (Eigen::Index j = 0; j < phi.coeffs.size(); j += 2)
        if (std::abs(phi.coeffs[j]) > odd_tol * scale) throw NotOddError{};
    const Eigen::Index count = phi.coeffs.size() / 2;
    VectorX<Scalar> ups(count);
    for (Eigen::Index j = 0; j < count; ++j) ups[j] = phi.coeffs[2 * j + 1];
    return RealPoly<Scalar>(std::move(ups));
}

/// Chebyshev reduction of the unit-circle crossing condition:
/// Im(den * conj(num)) on the circle equals sum_m beta_m sin(m theta)
///   = sin(theta) * g(cos theta),  g = sum_m beta_m U_{m-1}.
/// Returned sign-normalized; may be identically zero.
template <typename Scalar>
RealPoly<Scalar> g_poly_discrete(const TransferFraction<Scalar>& tf) {
    if (tf.domain != Domain::Discrete)
        throw AnalysisError("g_poly_discrete expects a discrete-domain fraction");
    const RealPoly<Scalar> den = tf.den.trimmed();
    const RealPoly<Scalar> num = tf.num.trimmed();
    if (num.is_zero()) throw DegenerateNumeratorError{};
    const Eigen::Index N = den.degree(), M = num.degree();

    std::vector<Scalar> betas(static_cast<std::size_t>(N) + 1, Scalar(0));
    for (Eigen::Index j = 0; j <= N; ++j) {
        for (Eigen::Index l = 0; l <= M; ++l) {
            const Eigen::Index m = j - l;
            if (m > 0)
                betas[static_cast<std::size_t>(m)] += den.coeffs[j] * num.coeffs[l];
            else if (m < 0)
                betas[static_cast<std::size_t>(-m)] -= den.coeffs[j] * num.coeffs[l];
        }
    }

    // U_0 = 1, U_1 = 2v, U_m = 2v U_{m-1} - U_{m-2}, ascending coefficients.
    VectorX<Scalar> g = VectorX<Scalar>::Zero(std::max<Eigen::Index>(N, 1));
    VectorX<Scalar> Uprev = VectorX<Scalar>::Zero(g.size()), Ucur = VectorX<Scalar>::Zero(g.size());
    Ucur[0] = Scalar(1);
    for (Eigen::Index m = 1; m <= N; ++m) {
        g += betas[static_cast<std::size_t>(m)] * Ucur;
        VectorX<Scalar> Unext = VectorX<Scalar>::Zero(g.size());
        for (Eigen::Index i = 0; i + 1 < g.size(); ++i) Unext[i + 1] = Scalar(2) * Ucur[i];
        Unext -= Uprev;
        Uprev = Ucur;
        Ucur = Unext;
    }
    RealPoly<Scalar> gp(std::move(g));
    if (gp.leading() < Scalar(0)) gp = Scalar(-1) * gp;
    return gp;
}

namespace detail {

template <typename Scalar>
Scalar eval_scale(const RealPoly<Scalar>& p, Scalar abs_z) {
    const Eigen::Index d = std::max<Eigen::Index>(p.degree(), 0);
    return (Scalar(1) + p.max_abs_coeff()) * Scalar(d + 1) *
           std::pow(std::max(Scalar(1), abs_z), Scalar(d));
}

template <typename Scalar>
std::complex<Scalar> boundary_point(Domain domain, Scalar param) {
    return domain == Domain::Continuous ? std::complex<Scalar>(Scalar(0), param)
                                        : std::polar(Scalar(1), param);
}

/// Map boundary-parameter candidates to real gains k = -den/num at the
/// boundary point, dropping candidates whose gain is not real (residual
/// check) or whose closed loop does not actually touch the boundary
/// (witness check); then deduplicate near-coincident gains.
template <typename Scalar>
std::vector<CriticalGain<Scalar>> candidates_to_gains(const TransferFraction<Scalar>& tf,
                                                      std::vector<std::pair<Scalar, int>> params,
                                                      const AnalyzeOptions<Scalar>& opts) {
    struct Cand {
        Scalar k, param;
        int mult;
    };
    std::vector<Cand> cands;
    const Scalar param_tol =
        opts.boundary_root_tol > Scalar(0) ? opts.boundary_root_tol : opts.cluster_tol;
    for (const auto& [prm, mult] : params) {
        const std::complex<Scalar> lam = boundary_point<Scalar>(tf.domain, prm);
        const std::complex<Scalar> nv = evaluate(tf.num, lam);
        const std::complex<Scalar> dv = evaluate(tf.den, lam);
        if (std::abs(nv) <= Scalar(1e-9) * eval_scale(tf.num, std::abs(lam))) {
            if (std::abs(dv) <= Scalar(1e-9) * eval_scale(tf.den, std::abs(lam)))
                throw EmptyStabilizingSetError{};
            continue;  // boundary contact only in the infinite-gain limit
        }
        const std::complex<Scalar> kc = -dv / nv;
        if (std::abs(kc.imag()) > opts.residual_tol * (Scalar(1) + std::abs(kc))) continue;
        const Scalar k = kc.real();
        const Scalar wv = std::abs(evaluate(closed_loop_poly(tf, k), lam));
        if (wv > opts.witness_tol * eval_scale(tf.den, std::abs(lam))) continue;
        cands.push_back({k, prm, mult});
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.k < b.k; });

    std::vector<CriticalGain<Scalar>> out;
    std::size_t i = 0;
    while (i < cands.size()) {
        std::size_t j = i + 1;
        while (j < cands.size() &&
               cands[j].k - cands[j - 1].k <= opts.dedup_tol * (Scalar(1) + std::abs(cands[j - 1].k)))
            ++j;
        CriticalGain<Scalar> g;
        Scalar ksum(0);
        std::vector<std::pair<Scalar, int>> prms;
        for (std::size_t t = i; t < j; ++t) {
            ksum += cands[t].k;
            prms.emplace_back(cands[t].param, cands[t].mult);
        }
        g.k = ksum / Scalar(j - i);
        // Merge contacts whose parameters coincide within tolerance,
        // accumulating multiplicity (a split double root re-fuses here).
        std::sort(prms.begin(), prms.end());
        for (const auto& [prm, m] : prms) {
            if (!g.boundary_roots.empty() &&
                prm - g.boundary_roots.back().param <= param_tol * (Scalar(1) + std::abs(prm)))
                g.boundary_roots.back().multiplicity += m;
            else
                g.boundary_roots.push_back({prm, m});
        }
        out.push_back(std::move(g));
        i = j;
    }
    return out;
}

}  // namespace detail

/// Algorithm-1 step 1: the candidate boundary parameters are beta = 0 plus
/// the square roots of the positive real roots of upsilon; each maps to
/// k = -den(i beta)/num(i beta).
template <typename Scalar>
std::vector<CriticalGain<Scalar>> continuous_critical_gains(const TransferFraction<Scalar>& tf,
                                                            const AnalyzeOptions<Scalar>& opts = {}) {
    const RealPoly<Scalar> phi = phi_poly(tf).trimmed();
    if (phi.is_zero()) throw BoundaryPolyZeroError("phi(beta) is identically zero");
    const RealPoly<Scalar> ups = odd_part_compress(phi);
    const Scalar rt = opts.boundary_root_tol > Scalar(0) ? opts.boundary_root_tol : opts.real_tol;
    const Scalar ct = opts.boundary_root_tol > Scalar(0) ? opts.boundary_root_tol : opts.cluster_tol;

    // Multiplicity of beta = 0 in phi: index of the first surviving
    // coefficient (phi is odd, so this is odd).
    int mult0 = 0;
    const Scalar scale = phi.max_abs_coeff();
    for (Eigen::Index j = 0; j < phi.coeffs.size(); ++j) {
        if (std::abs(phi.coeffs[j]) > Scalar(defaults::trim_tol) * scale) {
            mult0 = static_cast<int>(j);
            break;
        }
    }

    std::vector<std::pair<Scalar, int>> betas;
    betas.emplace_back(Scalar(0), mult0);
    if (ups.degree() >= 1) {
        const Scalar w_floor = Scalar(defaults::trim_tol) * (Scalar(1) + ups.max_abs_coeff());
        for (const auto& [w, m] : real_roots(ups, rt, ct))
            if (w > w_floor) betas.emplace_back(std::sqrt(w), m);
    }
    auto gains = detail::candidates_to_gains(tf, std::move(betas), opts);
    detail::annotate_tangency(tf, gains, opts);
    return gains;
}

/// Algorithm-2 step 1: candidates are theta = arccos(v) for real roots v of
/// g inside [-1, 1], plus theta = 0 and theta = pi (lambda = +-1).
template <typename Scalar>
std::vector<CriticalGain<Scalar>> discrete_critical_gains(const TransferFraction<Scalar>& tf,
                                                          const AnalyzeOptions<Scalar>& opts = {}) {
    const RealPoly<Scalar> g = g_poly_discrete(tf).trimmed();
    if (g.is_zero()) throw BoundaryPolyZeroError("g(cos theta) is identically zero");
    const Scalar rt = opts.boundary_root_tol > Scalar(0) ? opts.boundary_root_tol : opts.real_tol;
    const Scalar ct = opts.boundary_root_tol > Scalar(0) ? opts.boundary_root_tol : opts.cluster_tol;

    std::vector<std::pair<Scalar, int>> thetas;
    if (g.degree() >= 1) {
        for (const auto& [v, m] : real_roots(g, rt, ct)) {
            if (std::abs(v) <= Scalar(1) + rt)
                thetas.emplace_back(std::acos(std::clamp(v, Scalar(-1), Scalar(1))), m);
        }
    }
    thetas.emplace_back(Scalar(0), 1);
    thetas.emplace_back(Scalar(M_PI), 1);
    auto gains = detail::candidates_to_gains(tf, std::move(thetas), opts);
    detail::annotate_tangency(tf, gains, opts);
    return gains;
}

/// Derivative condition at a simple boundary root i*beta of p(., k): the
/// root-path derivative -num/p' is pure imaginary iff
/// Re(p'(i beta) conj(num(i beta))) = 0.  True means the locus is tangent to
/// the imaginary axis there.
template <typename Scalar>
bool tangency_continuous(const TransferFraction<Scalar>& tf, Scalar k, Scalar beta, Scalar tol) {
    const RealPoly<Scalar> p = closed_loop_poly(tf, k);
    const RealPoly<Scalar> dp = derivative(p);
    const std::complex<Scalar> lam(Scalar(0), beta);
    const std::complex<Scalar> dv = evaluate(dp, lam);
    const std::complex<Scalar> nv = evaluate(tf.num, lam);
    const Scalar scale = std::abs(dv) * std::abs(nv);
    if (scale <= Scalar(0)) return false;
    return std::abs((dv * std::conj(nv)).real()) <= tol * scale;
}

/// Discrete counterpart at lambda0 = e^{i theta}: the root path is tangent
/// to the unit circle iff the derivative is orthogonal to lambda0, i.e.
/// Re(num(conj lambda0) p'(lambda0) lambda0) = 0.
template <typename Scalar>
bool tangency_discrete(const TransferFraction<Scalar>& tf, Scalar k, Scalar theta, Scalar tol) {
    const RealPoly<Scalar> p = closed_loop_poly(tf, k);
    const RealPoly<Scalar> dp = derivative(p);
    const std::complex<Scalar> lam = std::polar(Scalar(1), theta);
    const std::complex<Scalar> dv = evaluate(dp, lam);
    const std::complex<Scalar> nv = evaluate(tf.num, std::conj(lam));
    const Scalar scale = std::abs(dv) * std::abs(nv);
    if (scale <= Scalar(0)) return false;
    return std::abs((nv * dv * lam).real()) <= tol * scale;
}

/// The unstable-root count is constant between critical gains, so one
/// representative verdict per open interval classifies it.  Unbounded
/// intervals are sampled one full span beyond the outermost gain.
template <typename Scalar>
std::vector<IntervalReport<Scalar>> classify_intervals(const TransferFraction<Scalar>& tf,
                                                       const std::vector<CriticalGain<Scalar>>& gains,
                                                       Scalar eps = Scalar(defaults::stability_eps),
                                                       Scalar cluster_tol = Scalar(defaults::cluster_tol)) {
    const Scalar inf = std::numeric_limits<Scalar>::infinity();
    std::vector<Scalar> ks;
    ks.reserve(gains.size());
    for (const auto& g : gains) ks.push_back(g.k);

    std::vector<IntervalReport<Scalar>> out;
    auto report_at = [&](Scalar lo, Scalar hi, Scalar rep) {
        const auto v = domain_verdict(closed_loop_poly(tf, rep), tf.domain, eps, cluster_tol);
        out.push_back({lo, hi, v.unstable_count + v.marginal_count, v.stable, rep});
    };
    if (ks.empty()) {
        report_at(-inf, inf, Scalar(0));
        return out;
    }
    const Scalar pad = Scalar(1) + (ks.back() - ks.front());
    report_at(-inf, ks.front(), ks.front() - pad);
    for (std::size_t i = 0; i + 1 < ks.size(); ++i)
        report_at(ks[i], ks[i + 1], (ks[i] + ks[i + 1]) / Scalar(2));
    report_at(ks.back(), inf, ks.back() + pad);
    return out;
}

namespace detail {

template <typename Scalar>
Scalar binomial(int n, int j) {
    Scalar r(1);
    for (int i = 0; i < j; ++i) r = r * Scalar(n - i) / Scalar(i + 1);
    return r;
}

/// Heuristic range that surely contains every critical gain.  In the
/// discrete case the Vieta bound applies: beyond it some closed-loop
/// coefficient exceeds binomial(n, j), which no Schur polynomial allows.
template <typename Scalar>
Scalar gain_range_hint(const TransferFraction<Scalar>& tf) {
    const RealPoly<Scalar> den = tf.den.trimmed(), num = tf.num.trimmed();
    const int n = static_cast<int>(den.degree());
    Scalar K = Scalar(100) * (Scalar(1) + den.max_abs_coeff()) /
               std::max(num.max_abs_coeff(), Scalar(1e-12));
    if (tf.domain == Domain::Discrete) {
        Scalar vieta = std::numeric_limits<Scalar>::infinity();
        for (Eigen::Index j = 0; j <= num.degree(); ++j) {
            if (std::abs(num.coeffs[j]) <= Scalar(1e-12)) continue;
            const Scalar dj = j <= den.degree() ? std::abs(den.coeffs[j]) : Scalar(0);
            vieta = std::min(vieta, (binomial<Scalar>(n, static_cast<int>(j)) + dj) /
                                        std::abs(num.coeffs[j]));
        }
        K = std::min(K, vieta + Scalar(1));
    }
    return K + Scalar(1);
}

/// Tangent iff every contact is non-crossing: the boundary parameter is a
/// multiple root of the boundary polynomial, lambda0 is simple as a root of
/// p(., k), and the root-path derivative condition holds.
template <typename Scalar>
void annotate_tangency(const TransferFraction<Scalar>& tf, std::vector<CriticalGain<Scalar>>& gains,
                       const AnalyzeOptions<Scalar>& opts) {
    for (auto& g : gains) {
        bool has_multiple = false;
        for (const auto& br : g.boundary_roots) has_multiple |= br.multiplicity > 1;
        if (!has_multiple || g.boundary_roots.size() > 1) continue;

        const auto& br = g.boundary_roots.front();
        const std::complex<Scalar> lam0 = boundary_point<Scalar>(tf.domain, br.param);
        // A multiple root of p itself always crosses (the departing branches
        // cover both sides of the boundary).
        const RootSet<Scalar> rs = all_roots(closed_loop_poly(tf, g.k), opts.cluster_tol);
        int mult_p = 0;
        Scalar best = std::numeric_limits<Scalar>::max();
        for (const auto& [z, m] : rs.roots) {
            const Scalar d = std::abs(z - lam0);
            if (d < best) {
                best = d;
                mult_p = m;
            }
        }
        if (mult_p != 1) continue;
        g.tangent = tf.domain == Domain::Continuous
                        ? tangency_continuous(tf, g.k, br.param, opts.tangency_tol)
                        : tangency_discrete(tf, g.k, br.param, opts.tangency_tol);
    }
}

template <typename Scalar>
void fallback_classify(const TransferFraction<Scalar>& tf, const AnalyzeOptions<Scalar>& opts,
                       AnalysisReport<Scalar>& rep) {
    rep.degraded = true;
    rep.flags.push_back("degraded-oracle-fallback");
    const Scalar K = gain_range_hint(tf);
    const auto gc = oracle::grid_classify(tf, -K, K, opts.fallback_grid_count, opts.eps);
    const Scalar inf = std::numeric_limits<Scalar>::infinity();
    std::size_t i = 0;
    while (i < gc.stable_mask.size()) {
        std::size_t j = i;
        while (j + 1 < gc.stable_mask.size() && gc.unstable_counts[j + 1] == gc.unstable_counts[i]) ++j;
        IntervalReport<Scalar> iv;
        iv.lo = i == 0 ? -inf : (gc.k_grid[i - 1] + gc.k_grid[i]) / Scalar(2);
        iv.hi = j + 1 == gc.stable_mask.size() ? inf : (gc.k_grid[j] + gc.k_grid[j + 1]) / Scalar(2);
        iv.stabilizing = gc.stable_mask[i];
        iv.representative_k = gc.k_grid[(i + j) / 2];
        iv.unstable_count = gc.unstable_counts[(i + j) / 2];
        rep.intervals.push_back(iv);
        i = j + 1;
    }
}

template <typename Scalar>
void finalize_report(const TransferFraction<Scalar>& tf, AnalysisReport<Scalar>& rep) {
    rep.num_stabilizing_components = 0;
    for (const auto& iv : rep.intervals)
        if (iv.stabilizing) ++rep.num_stabilizing_components;
    rep.bound_satisfied = rep.num_stabilizing_components <= rep.bound;

    const bool left = !rep.intervals.empty() && rep.intervals.front().stabilizing;
    const bool right = !rep.intervals.empty() && rep.intervals.back().stabilizing;
    rep.unbounded_stabilizing = left ? UnboundedSide::Left
                                     : (right ? UnboundedSide::Right : UnboundedSide::None);
    if (left && right) rep.flags.push_back("both-unbounded-intervals-stabilizing");
    if ((left || right) && tf.domain == Domain::Discrete)
        rep.flags.push_back("discrete-unbounded-stabilizing");

    if ((left || right) && tf.domain == Domain::Continuous) {
        // Necessary condition for an unbounded stabilizing side: the nonzero
        // numerator coefficients share one sign.
        const RealPoly<Scalar> num = tf.num.trimmed();
        bool pos = false, neg = false;
        const Scalar tiny = Scalar(defaults::trim_tol) * num.max_abs_coeff();
        for (Eigen::Index j = 0; j < num.coeffs.size(); ++j) {
            if (num.coeffs[j] > tiny) pos = true;
            if (num.coeffs[j] < -tiny) neg = true;
        }
        if (pos && neg) rep.flags.push_back("unbounded-stabilizing-but-mixed-sign-numerator");
    }

    // Interlacing: no two adjacent stabilizing intervals, i.e. no tangent
    // contact separates two components.
    bool interlace = true;
    for (std::size_t i = 0; i + 1 < rep.intervals.size(); ++i)
        if (rep.intervals[i].stabilizing && rep.intervals[i + 1].stabilizing) interlace = false;
    if (interlace && !rep.intervals.empty()) rep.flags.push_back("interlacing-observed");
}

}  // namespace detail

/// Full pipeline: boundary polynomial -> critical gains -> tangency
/// annotation -> interval classification -> component count and bound check.
/// Interval verdicts come from representative sampling; the derivative
/// conditions are annotations, and a disagreement between the two raises a
/// "tangency-classification-mismatch" flag rather than silently choosing.
template <typename Scalar>
AnalysisReport<Scalar> analyze(const TransferFraction<Scalar>& tf_in,
                               const AnalyzeOptions<Scalar>& opts = {}) {
    TransferFraction<Scalar> tf{tf_in.den.trimmed(), tf_in.num.trimmed(), tf_in.domain};
    if (tf.den.degree() < 1) throw AnalysisError("denominator must have degree >= 1");

    AnalysisReport<Scalar> rep;
    rep.domain = tf.domain;
    const int n = static_cast<int>(tf.den.degree());
    rep.bound = (n + 1) / 2;

    const Scalar lead = tf.den.leading();
    if (lead != Scalar(1)) {
        tf.den = (Scalar(1) / lead) * tf.den;
        tf.num = (Scalar(1) / lead) * tf.num;
        if (std::abs(lead - Scalar(1)) > Scalar(1e-12)) rep.flags.push_back("denominator-normalized");
    }

    std::vector<CriticalGain<Scalar>> gains;
    try {
        gains = tf.domain == Domain::Continuous ? continuous_critical_gains(tf, opts)
                                                : discrete_critical_gains(tf, opts);
    } catch (const BoundaryPolyZeroError&) {
        detail::fallback_classify(tf, opts, rep);
        detail::finalize_report(tf, rep);
        return rep;
    }

    rep.critical_gains = gains;
    rep.intervals = classify_intervals(tf, gains, opts.eps, opts.cluster_tol);

    for (std::size_t i = 0; i < gains.size(); ++i) {
        const bool ls = rep.intervals[i].stabilizing;
        const bool rs = rep.intervals[i + 1].stabilizing;
        if ((gains[i].tangent && ls != rs) || (!gains[i].tangent && ls && rs)) {
            rep.flags.push_back("tangency-classification-mismatch");
            break;
        }
    }
    for (const auto& g : gains) {
        if (g.boundary_roots.size() > 1) {
            rep.flags.push_back("near-coincident-gains-merged");
            break;
        }
    }

    detail::finalize_report(tf, rep);
    return rep;
}

/// State-space entry point; requires a minimal realization.
template <typename Scalar>
AnalysisReport<Scalar> analyze(const StateSpaceSiso<Scalar>& sys, const AnalyzeOptions<Scalar>& opts = {}) {
    return analyze(to_transfer(sys), opts);
}

}  // namespace stabgain

#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "stabgain/gain_intervals.hpp"
#include "stabgain/oracle.hpp"

// Randomized verification harness: draws minimal systems, runs the interval
// analyzer, and cross-checks it against the grid oracle plus the polynomial
// identities the construction relies on.  Used by the trials CLI subcommand
// and the acceptance suite.

namespace stabgain::trials {

struct TrialConfig {
    int n_min = 2;
    int n_max = 6;
    int per_n = 500;
    bool continuous = true;
    bool discrete = true;
    std::uint64_t seed = 1;
    int grid_count = 1200;
    /// Self-test hook: deliberately corrupt the analyzer output so the
    /// harness must report a failure.
    bool inject_fault = false;
};

struct TrialFailure {
    std::uint64_t seed = 0;
    int n = 0;
    Domain domain = Domain::Continuous;
    std::string what;
};

struct TrialSummary {
    // (domain, n) -> histogram of stabilizing-component counts.
    std::map<std::pair<int, int>, std::map<int, int>> histograms;
    std::vector<TrialFailure> failures;
    long trials_run = 0;
    long degraded = 0;

    bool ok() const { return failures.empty(); }
};

namespace detail {

template <typename Scalar>
int binom_int(int n, int j) {
    double r = 1;
    for (int i = 0; i < j; ++i) r = r * double(n - i) / double(i + 1);
    return static_cast<int>(r + 0.5);
}

template <typename Scalar>
void check_trial(const StateSpaceSiso<Scalar>& sys, std::uint64_t seed, const TrialConfig& cfg,
                 TrialSummary& summary) {
    const Domain domain = sys.domain;
    const int n = static_cast<int>(sys.n());
    auto fail = [&](const std::string& what) {
        summary.failures.push_back({seed, n, domain, what});
    };

    const TransferFraction<Scalar> tf = to_transfer(sys);
    AnalysisReport<Scalar> rep;
    try {
        rep = analyze(tf);
    } catch (const AnalysisError& e) {
        fail(std::string("analyze raised: ") + e.what());
        return;
    }
    if (rep.degraded) {
        ++summary.degraded;
        return;  // oracle-only path carries no analyzer claims to cross-check
    }

    std::vector<CriticalGain<Scalar>> gains = rep.critical_gains;
    if (cfg.inject_fault) {
        for (auto& g : gains) g.k += Scalar(0.01);
        rep.critical_gains = gains;
        rep.intervals = classify_intervals(tf, gains);
        rep.num_stabilizing_components = 0;
        for (const auto& iv : rep.intervals)
            if (iv.stabilizing) ++rep.num_stabilizing_components;
    }

    summary.histograms[{domain == Domain::Continuous ? 0 : 1, n}]
                      [rep.num_stabilizing_components]++;

    const int bound = (n + 1) / 2;
    if (rep.num_stabilizing_components > bound) {
        fail("component bound violated: " + std::to_string(rep.num_stabilizing_components) + " > " +
             std::to_string(bound));
        return;
    }
    if (n == 2 && rep.num_stabilizing_components > 1) {
        fail("n=2 produced more than one stabilizing interval");
        return;
    }
    if (domain == Domain::Discrete &&
        (rep.intervals.front().stabilizing || rep.intervals.back().stabilizing)) {
        fail("discrete unbounded interval classified stabilizing");
        return;
    }
    // Critical-gain count bounds from the two counting lemmas.
    const int max_gains = domain == Domain::Continuous ? n : n + 1;
    if (static_cast<int>(rep.critical_gains.size()) > max_gains) {
        fail("critical gain count " + std::to_string(rep.critical_gains.size()) + " exceeds " +
             std::to_string(max_gains));
        return;
    }

    std::mt19937_64 eng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<Scalar> unit(Scalar(0), Scalar(1));

    if (domain == Domain::Continuous) {
        // Oddness of the crossing polynomial, sampled directly.
        const RealPoly<Scalar> phi = phi_poly(tf);
        const Scalar scale = Scalar(1) + phi.max_abs_coeff();
        for (int t = 0; t < 3; ++t) {
            const Scalar beta = Scalar(4) * unit(eng) - Scalar(2);
            const Scalar odd = evaluate(phi, beta) + evaluate(phi, -beta);
            if (std::abs(odd) > Scalar(1e-9) * scale * std::pow(Scalar(1) + std::abs(beta), Scalar(2 * n))) {
                fail("phi oddness violated");
                return;
            }
        }
    }

    // Conjugate collapse: the mirrored boundary parameter maps to the same k.
    for (const auto& g : rep.critical_gains) {
        for (const auto& br : g.boundary_roots) {
            const std::complex<Scalar> lp = domain == Domain::Continuous
                                                ? std::complex<Scalar>(0, br.param)
                                                : std::polar(Scalar(1), br.param);
            const std::complex<Scalar> lm = std::conj(lp);
            const std::complex<Scalar> kp = -evaluate(tf.den, lp) / evaluate(tf.num, lp);
            const std::complex<Scalar> km = -evaluate(tf.den, lm) / evaluate(tf.num, lm);
            if (std::abs(kp.real() - km.real()) > Scalar(1e-9) * (Scalar(1) + std::abs(kp.real()))) {
                fail("conjugate boundary parameters mapped to different gains");
                return;
            }
        }
    }

    // Grid oracle agreement away from the critical gains, plus verdict
    // cross-checks on the closed-loop polynomials the grid visits.
    std::vector<Scalar> ks;
    for (const auto& g : rep.critical_gains) ks.push_back(g.k);
    Scalar lo, hi;
    if (ks.empty()) {
        hi = ::stabgain::detail::gain_range_hint(tf);
        lo = -hi;
    } else {
        const Scalar span = ks.back() - ks.front();
        lo = ks.front() - Scalar(1) - span;
        hi = ks.back() + Scalar(1) + span;
        if (domain == Domain::Discrete) {
            const Scalar v = ::stabgain::detail::gain_range_hint(tf);
            lo = std::min(lo, -v);
            hi = std::max(hi, v);
        }
    }
    const auto grid = oracle::grid_classify(tf, lo, hi, cfg.grid_count);
    for (std::size_t i = 0; i < grid.k_grid.size(); ++i) {
        const Scalar k = grid.k_grid[i];
        Scalar dist = std::numeric_limits<Scalar>::infinity();
        for (Scalar kc : ks) dist = std::min(dist, std::abs(k - kc));
        if (dist <= Scalar(1e-4) * (Scalar(1) + std::abs(k))) continue;
        // Locate the analyzer interval containing k.
        std::size_t idx = 0;
        while (idx + 1 < rep.intervals.size() && !(k < rep.intervals[idx].hi)) ++idx;
        if (rep.intervals[idx].stabilizing != grid.stable_mask[i]) {
            std::ostringstream os;
            os << "oracle disagreement at k = " << k;
            fail(os.str());
            return;
        }
    }

    // Constancy of the unstable count inside each bounded interval.
    for (const auto& iv : rep.intervals) {
        if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) continue;
        const Scalar width = iv.hi - iv.lo;
        if (width <= Scalar(1e-6)) continue;
        for (int t = 0; t < 5; ++t) {
            const Scalar k = iv.lo + width * (Scalar(0.05) + Scalar(0.9) * unit(eng));
            const auto v = domain_verdict(closed_loop_poly(tf, k), tf.domain);
            if (v.unstable_count + v.marginal_count != iv.unstable_count) {
                fail("unstable count not constant inside an interval");
                return;
            }
        }
    }

    // Three-way verdict agreement and the Vieta bound, on the interval
    // representatives.
    for (const auto& iv : rep.intervals) {
        const RealPoly<Scalar> p = closed_loop_poly(tf, iv.representative_k).trimmed();
        const auto hv = hurwitz_verdict(p);
        if (std::abs(hv.margin) > Scalar(1e-6) && hv.stable != routh_hurwitz_stable(p)) {
            fail("Routh table disagrees with eigenvalue Hurwitz verdict");
            return;
        }
        if (hv.stable) {
            for (Eigen::Index j = 0; j <= p.degree(); ++j) {
                if (p.coeffs[j] <= Scalar(0)) {
                    fail("Hurwitz-stable polynomial with a non-positive coefficient");
                    return;
                }
            }
        }
        const auto sv = schur_verdict(p);
        const auto bl = bilinear_to_hurwitz(p);
        if (!bl.degree_drop && std::abs(sv.margin) > Scalar(1e-6) &&
            sv.stable != hurwitz_verdict(bl.poly).stable) {
            fail("bilinear-transformed Hurwitz verdict disagrees with Schur verdict");
            return;
        }
        if (sv.stable) {
            const int deg = static_cast<int>(p.degree());
            for (Eigen::Index j = 0; j <= p.degree(); ++j) {
                if (std::abs(p.coeffs[j]) >
                    Scalar(binom_int<Scalar>(deg, static_cast<int>(j))) + Scalar(1e-9)) {
                    fail("Schur-stable polynomial violates the Vieta coefficient bound");
                    return;
                }
            }
        }
    }
}

}  // namespace detail

template <typename Scalar = double>
TrialSummary run_trials(const TrialConfig& cfg) {
    TrialSummary summary;
    std::vector<Domain> domains;
    if (cfg.continuous) domains.push_back(Domain::Continuous);
    if (cfg.discrete) domains.push_back(Domain::Discrete);
    for (Domain domain : domains) {
        for (int n = cfg.n_min; n <= cfg.n_max; ++n) {
            for (int t = 0; t < cfg.per_n; ++t) {
                const std::uint64_t seed = cfg.seed + 1000003ULL * static_cast<std::uint64_t>(n) +
                                           2000029ULL * static_cast<std::uint64_t>(t) +
                                           (domain == Domain::Discrete ? 500009ULL : 0ULL);
                const auto sys = oracle::random_minimal_system<Scalar>(n, domain, seed);
                detail::check_trial(sys, seed, cfg, summary);
                ++summary.trials_run;
            }
        }
    }
    return summary;
}

}  // namespace stabgain::trials

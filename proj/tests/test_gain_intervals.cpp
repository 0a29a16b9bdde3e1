#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "stabgain/gain_intervals.hpp"
#include "stabgain/oracle.hpp"
#include "test_util.hpp"

using namespace stabgain;
using Cplx = std::complex<double>;
using Poly = RealPoly<double>;
using TF = TransferFraction<double>;

namespace {

// Continuous tangency walkthrough family.
TF walkthrough() {
    return {Poly{625919.0 / 4800000.0, 1.21, 0.825, 1.0}, Poly{12.5, 7.5, 1.0}, Domain::Continuous};
}

// Continuous family with two components separated by genuine crossings.
TF two_component_cont() {
    return {Poly{0.133, 1.125, 0.625, 1.0}, Poly{12.5, 7.5, 1.0}, Domain::Continuous};
}

// Discrete tangency family (coefficients as printed, i.e. rounded).
TF discrete_tangent() {
    return {Poly{-0.9217272705, 2.83, -2.909, 1.0}, Poly{0.06229, -0.1846, 0.1343}, Domain::Discrete};
}

// Discrete two-component family (shift register with output weights).
TF discrete_two_component() {
    return {Poly{0.0, 0.0, 0.0, 0.0, 1.0}, Poly{0.5184, -2.448, 4.33, -3.4}, Domain::Discrete};
}

constexpr double kWalkK1 = -625919.0 / 60000000.0;
constexpr double kWalkK2 = 2041.0 / 6000.0;

// The rounded discrete inputs split the engineered double root of g by
// ~1e-5, so boundary-root extraction runs at 1e-4 for this family.
AnalyzeOptions<double> rounded_input_opts() {
    AnalyzeOptions<double> o;
    o.boundary_root_tol = 1e-4;
    return o;
}

Poly reflect(const Poly& p) {
    Poly out = p;
    for (Eigen::Index j = 1; j < out.coeffs.size(); j += 2) out.coeffs[j] = -out.coeffs[j];
    return out;
}

}  // namespace

TEST_CASE("phi_poly on the walkthrough family") {
    const Poly phi = phi_poly(walkthrough());
    REQUIRE(phi.degree() == 5);
    CHECK(phi.coeffs[5] == doctest::Approx(1.0));
    CHECK(phi.coeffs[3] == doctest::Approx(-7.5225).epsilon(1e-14));
    CHECK(phi.coeffs[1] == doctest::Approx(14.1470015625).epsilon(1e-14));
    CHECK(std::abs(phi.coeffs[0]) == 0.0);
    CHECK(std::abs(phi.coeffs[2]) == 0.0);
    CHECK(std::abs(phi.coeffs[4]) == 0.0);
}

TEST_CASE("phi_poly degenerate escape hatch: double integrator") {
    const TF tf{Poly{0.0, 0.0, 1.0}, Poly{1.0}, Domain::Continuous};
    CHECK(phi_poly(tf).trimmed().is_zero());
    CHECK_THROWS_AS(continuous_critical_gains(tf), BoundaryPolyZeroError);
}

TEST_CASE("phi_poly sign-normalized with roots 0, +-1") {
    const TF tf{Poly{1.0, 1.0, 1.0}, Poly{0.0, 1.0}, Domain::Continuous};
    const Poly phi = phi_poly(tf).trimmed();
    REQUIRE(phi.degree() == 3);
    CHECK(phi.coeffs[3] == doctest::Approx(1.0));
    CHECK(phi.coeffs[1] == doctest::Approx(-1.0));
    const auto rr = real_roots(phi);
    REQUIRE(rr.size() == 3);
    CHECK(rr[0].first == doctest::Approx(-1.0));
    CHECK(rr[1].first == doctest::Approx(0.0));
    CHECK(rr[2].first == doctest::Approx(1.0));
}

TEST_CASE("phi_poly requires a nonzero numerator") {
    const TF tf{Poly{1.0, 1.0, 1.0}, Poly{0.0}, Domain::Continuous};
    CHECK_THROWS_AS(phi_poly(tf), DegenerateNumeratorError);
}

TEST_CASE("odd_part_compress") {
    const Poly ups = odd_part_compress(phi_poly(walkthrough()));
    REQUIRE(ups.degree() == 2);
    CHECK(ups.coeffs[2] == doctest::Approx(1.0));
    CHECK(ups.coeffs[1] == doctest::Approx(-7.5225));
    CHECK(ups.coeffs[0] == doctest::Approx(14.1470015625));
    const auto rr = real_roots(ups);
    REQUIRE(rr.size() == 1);
    CHECK(rr[0].second == 2);
    CHECK(rr[0].first == doctest::Approx(6018.0 / 1600.0).epsilon(1e-9));

    const Poly triv = odd_part_compress(Poly{0.0, 1.0});
    REQUIRE(triv.degree() == 0);
    CHECK(triv.coeffs[0] == 1.0);

    const Poly cube = odd_part_compress(Poly{0.0, -1.0, 0.0, 1.0});
    REQUIRE(cube.degree() == 1);
    CHECK(cube.coeffs[0] == -1.0);
    CHECK(cube.coeffs[1] == 1.0);

    CHECK_THROWS_AS(odd_part_compress(Poly{0.0, 1.0, 0.5}), NotOddError);
}

TEST_CASE("continuous_critical_gains on the walkthrough family") {
    const auto gains = continuous_critical_gains(walkthrough());
    REQUIRE(gains.size() == 2);
    CHECK(gains[0].k == doctest::Approx(kWalkK1).epsilon(1e-9));
    REQUIRE(gains[0].boundary_roots.size() == 1);
    CHECK(gains[0].boundary_roots[0].param == doctest::Approx(0.0));
    CHECK(gains[0].boundary_roots[0].multiplicity == 1);
    CHECK_FALSE(gains[0].tangent);

    CHECK(gains[1].k == doctest::Approx(kWalkK2).epsilon(1e-9));
    REQUIRE(gains[1].boundary_roots.size() == 1);
    CHECK(gains[1].boundary_roots[0].param == doctest::Approx(std::sqrt(6018.0) / 40.0).epsilon(1e-7));
    CHECK(gains[1].boundary_roots[0].multiplicity == 2);
    CHECK(gains[1].tangent);
}

TEST_CASE("continuous_critical_gains on the two-component family") {
    const auto gains = continuous_critical_gains(two_component_cont());
    REQUIRE(gains.size() >= 3);
    const auto rep = analyze(two_component_cont());
    CHECK(rep.num_stabilizing_components == 2);
    for (const auto& g : rep.critical_gains) CHECK_FALSE(g.tangent);
}

TEST_CASE("continuous_critical_gains on a first-order lag") {
    const TF tf{Poly{1.0, 1.0}, Poly{1.0}, Domain::Continuous};
    const auto gains = continuous_critical_gains(tf);
    REQUIRE(gains.size() == 1);
    CHECK(gains[0].k == doctest::Approx(-1.0));
    CHECK(gains[0].boundary_roots[0].param == 0.0);
}

TEST_CASE("shared boundary root of den and num empties the stabilizing set") {
    // den = (lambda^2+1)(lambda+1), num = lambda^2+1: i is a closed-loop
    // root for every gain.
    const TF tf{Poly{1.0, 1.0, 1.0, 1.0}, Poly{1.0, 0.0, 1.0}, Domain::Continuous};
    CHECK_THROWS_AS(continuous_critical_gains(tf), EmptyStabilizingSetError);
}

TEST_CASE("tangency_continuous") {
    const TF tf = walkthrough();
    const double beta2 = std::sqrt(6018.0) / 40.0;
    CHECK(tangency_continuous(tf, kWalkK2, beta2));
    CHECK_FALSE(tangency_continuous(tf, kWalkK1, 0.0));

    // Middle gain of the two-component family crosses transversally.
    const auto gains = continuous_critical_gains(two_component_cont());
    REQUIRE(gains.size() == 3);
    CHECK_FALSE(tangency_continuous(two_component_cont(), gains[1].k, gains[1].boundary_roots[0].param));
}

TEST_CASE("g_poly_discrete") {
    SUBCASE("printed discrete family") {
        const Poly g = g_poly_discrete(discrete_tangent());
        REQUIRE(g.degree() == 2);
        CHECK(g.coeffs[2] == doctest::Approx(0.24916).epsilon(1e-12));
        CHECK(g.coeffs[1] == doctest::Approx(-0.4840272751437).epsilon(1e-10));
        CHECK(g.coeffs[0] == doctest::Approx(0.2350722458657).epsilon(1e-10));
    }
    SUBCASE("double delay: g = 2v") {
        const TF tf{Poly{0.0, 0.0, 1.0}, Poly{1.0}, Domain::Discrete};
        const Poly g = g_poly_discrete(tf).trimmed();
        REQUIRE(g.degree() == 1);
        CHECK(g.coeffs[0] == 0.0);
        CHECK(g.coeffs[1] == doctest::Approx(2.0));
    }
    SUBCASE("single delay: g = 1") {
        const TF tf{Poly{0.0, 1.0}, Poly{1.0}, Domain::Discrete};
        const Poly g = g_poly_discrete(tf).trimmed();
        REQUIRE(g.degree() == 0);
        CHECK(g.coeffs[0] == doctest::Approx(1.0));
    }
}

TEST_CASE("discrete_critical_gains on the printed tangency family") {
    const auto gains = discrete_critical_gains(discrete_tangent(), rounded_input_opts());
    REQUIRE(gains.size() == 3);
    CHECK(gains[0].k == doctest::Approx(0.06065642).epsilon(1e-6));
    CHECK_FALSE(gains[0].tangent);

    CHECK(gains[1].k == doctest::Approx(0.6198635016).epsilon(1e-4));
    CHECK(gains[1].tangent);
    REQUIRE(gains[1].boundary_roots.size() == 1);
    CHECK(gains[1].boundary_roots[0].multiplicity == 2);
    CHECK(std::cos(gains[1].boundary_roots[0].param) == doctest::Approx(0.9713181793700835).epsilon(1e-6));

    CHECK(gains[2].k == doctest::Approx(20.09687366).epsilon(1e-5));
    CHECK_FALSE(gains[2].tangent);
    CHECK(gains[2].boundary_roots[0].param == doctest::Approx(M_PI));
}

TEST_CASE("discrete_critical_gains on a first-order lag") {
    const TF tf{Poly{-0.5, 1.0}, Poly{1.0}, Domain::Discrete};
    const auto gains = discrete_critical_gains(tf);
    REQUIRE(gains.size() == 2);
    CHECK(gains[0].k == doctest::Approx(-0.5));
    CHECK(gains[1].k == doctest::Approx(1.5));
    const auto rep = analyze(tf);
    REQUIRE(rep.intervals.size() == 3);
    CHECK(rep.intervals[1].stabilizing);
    CHECK(rep.num_stabilizing_components == 1);
}

TEST_CASE("discrete_critical_gains on the two-component family") {
    const auto rep = analyze(discrete_two_component());
    CHECK(rep.num_stabilizing_components == 2);
    CHECK(rep.critical_gains.size() == 4);
}

TEST_CASE("tangency_discrete") {
    const TF tf = discrete_tangent();
    const auto gains = discrete_critical_gains(tf, rounded_input_opts());
    REQUIRE(gains.size() == 3);
    const double theta2 = gains[1].boundary_roots[0].param;
    CHECK(tangency_discrete(tf, gains[1].k, theta2));
    CHECK_FALSE(tangency_discrete(tf, gains[2].k, M_PI));

    const TF triv{Poly{-0.5, 1.0}, Poly{1.0}, Domain::Discrete};
    CHECK_FALSE(tangency_discrete(triv, -0.5, 0.0));
}

TEST_CASE("classify_intervals") {
    SUBCASE("walkthrough: non-stabilizing, stabilizing, stabilizing") {
        const TF tf = walkthrough();
        const auto ivs = classify_intervals(tf, continuous_critical_gains(tf));
        REQUIRE(ivs.size() == 3);
        CHECK_FALSE(ivs[0].stabilizing);
        CHECK(ivs[0].unstable_count == 1);
        CHECK(ivs[1].stabilizing);
        CHECK(ivs[2].stabilizing);
        CHECK(std::isinf(ivs[0].lo));
        CHECK(ivs[0].hi == ivs[1].lo);
        CHECK(ivs[1].hi == ivs[2].lo);
        CHECK(std::isinf(ivs[2].hi));
    }
    SUBCASE("discrete two-component family has exactly two stabilizing intervals") {
        const TF tf = discrete_two_component();
        const auto ivs = classify_intervals(tf, discrete_critical_gains(tf));
        int stab = 0;
        for (const auto& iv : ivs) stab += iv.stabilizing;
        CHECK(stab == 2);
    }
    SUBCASE("first-order discrete lag counts") {
        const TF tf{Poly{-0.5, 1.0}, Poly{1.0}, Domain::Discrete};
        const auto ivs = classify_intervals(tf, discrete_critical_gains(tf));
        REQUIRE(ivs.size() == 3);
        CHECK(ivs[0].unstable_count == 1);
        CHECK(ivs[1].unstable_count == 0);
        CHECK(ivs[2].unstable_count == 1);
    }
}

TEST_CASE("analyze: continuous walkthrough") {
    const auto rep = analyze(walkthrough());
    CHECK(rep.num_stabilizing_components == 2);
    CHECK(rep.bound == 2);
    CHECK(rep.bound_satisfied);
    REQUIRE(rep.critical_gains.size() == 2);
    CHECK(rep.critical_gains[1].tangent);
    CHECK(rep.unbounded_stabilizing == UnboundedSide::Right);
}

TEST_CASE("analyze: discrete tangency family") {
    const auto rep = analyze(discrete_tangent(), rounded_input_opts());
    CHECK(rep.num_stabilizing_components == 2);
    CHECK(rep.unbounded_stabilizing == UnboundedSide::None);
    bool tangent_interior = false;
    for (const auto& g : rep.critical_gains) tangent_interior |= g.tangent;
    CHECK(tangent_interior);
}

TEST_CASE("analyze: surd-precision discrete family works at default tolerances") {
    // Same family with den constant taken from the exact surd instead of the
    // 10-digit print: the tangency survives in double precision, so the
    // default boundary tolerances find it.
    const TF tf{Poly{-0.9217272700192488, 2.83, -2.909, 1.0}, Poly{0.06229, -0.1846, 0.1343},
                Domain::Discrete};
    const auto rep = analyze(tf);
    CHECK(rep.num_stabilizing_components == 2);
    REQUIRE(rep.critical_gains.size() == 3);
    CHECK(rep.critical_gains[0].k == doctest::Approx(0.06065638).epsilon(1e-7));
    CHECK(rep.critical_gains[1].k == doctest::Approx(0.6198635016).epsilon(1e-7));
    CHECK(rep.critical_gains[1].tangent);
    CHECK(rep.critical_gains[2].k == doctest::Approx(20.09687366).epsilon(1e-8));
}

TEST_CASE("analyze: first-order lag stabilizes an unbounded right interval") {
    const TF tf{Poly{1.0, 1.0}, Poly{1.0}, Domain::Continuous};
    const auto rep = analyze(tf);
    CHECK(rep.num_stabilizing_components == 1);
    CHECK(rep.unbounded_stabilizing == UnboundedSide::Right);
    REQUIRE(rep.intervals.size() == 2);
    CHECK(rep.intervals[1].stabilizing);
    CHECK(std::isinf(rep.intervals[1].hi));
}

TEST_CASE("analyze: degenerate numerator alignment falls back to the grid oracle") {
    const TF tf{Poly{0.0, 0.0, 1.0}, Poly{1.0}, Domain::Continuous};
    const auto rep = analyze(tf);
    CHECK(rep.degraded);
    bool flagged = false;
    for (const auto& f : rep.flags) flagged |= f == "degraded-oracle-fallback";
    CHECK(flagged);
    CHECK(rep.num_stabilizing_components == 0);
}

TEST_CASE("analyze: state-space entry checks minimality") {
    MatrixX<double> A = MatrixX<double>::Zero(2, 2);
    VectorX<double> e1 = VectorX<double>::Zero(2);
    e1[0] = 1.0;
    CHECK_THROWS_AS(analyze(StateSpaceSiso<double>(A, e1, e1, Domain::Continuous)), NonMinimalError);
}

TEST_CASE("quartic boundedness dichotomy for all-positive numerators") {
    // For den = lambda^4 and positive numerator coefficients, the Routh
    // quartic inequality at large gain decides boundedness of the
    // stabilizing set: c3 c2 c1 > c3^2 c0 leaves one unbounded stabilizing
    // side, the reverse strict inequality bounds it.
    {
        const TF tf{Poly{0.0, 0.0, 0.0, 0.0, 1.0}, Poly{1.0, 2.0, 2.0, 1.0}, Domain::Continuous};
        const auto rep = analyze(tf);
        CHECK(rep.unbounded_stabilizing == UnboundedSide::Right);
    }
    {
        const TF tf{Poly{0.0, 0.0, 0.0, 0.0, 1.0}, Poly{4.0, 1.0, 1.0, 1.0}, Domain::Continuous};
        const auto rep = analyze(tf);
        CHECK(rep.unbounded_stabilizing == UnboundedSide::None);
    }
}

TEST_CASE("property: mixed-sign numerator never stabilizes an unbounded interval") {
    // A sign change among the numerator coefficients bounds the stabilizing
    // set in the continuous case.
    std::mt19937_64 eng(2468);
    std::uniform_real_distribution<double> u(0.2, 2.0);
    int analyzed = 0;
    for (int t = 0; t < 60; ++t) {
        const Eigen::Index n = 2 + t % 4;
        MatrixX<double> A = MatrixX<double>::Zero(n, n);
        for (Eigen::Index i = 0; i + 1 < n; ++i) A(i, i + 1) = 1.0;
        VectorX<double> b = VectorX<double>::Zero(n), c(n);
        b[n - 1] = 1.0;
        bool mixed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            A(n - 1, i) = (t % 2 ? 1 : -1) * u(eng);
            c[i] = (i % 2 ? -1.0 : 1.0) * u(eng);
            if (i > 0) mixed = true;
        }
        if (!mixed || n < 2) continue;
        const StateSpaceSiso<double> sys(A, b, c, Domain::Continuous);
        if (!is_minimal(sys)) continue;
        const auto rep = analyze(to_transfer(sys));
        if (rep.degraded) continue;
        ++analyzed;
        CHECK(rep.unbounded_stabilizing == UnboundedSide::None);
        CHECK_FALSE(rep.intervals.front().stabilizing);
        CHECK_FALSE(rep.intervals.back().stabilizing);
    }
    CHECK(analyzed > 40);
}

TEST_CASE("property: phi matches direct complex evaluation and is odd") {
    std::mt19937_64 eng(606);
    std::uniform_real_distribution<double> bs(-3.0, 3.0);
    for (int t = 0; t < 40; ++t) {
        const auto sys = oracle::random_minimal_system<double>(2 + t % 4, Domain::Continuous, 900 + t);
        const auto tf = to_transfer(sys);
        const Poly phi = phi_poly(tf);
        // phi is defined up to a positive factor, so compare against the
        // direct complex product modulo sign.
        for (int s = 0; s < 5; ++s) {
            const double beta = bs(eng);
            const Cplx lam(0.0, beta);
            const double direct = (evaluate(tf.den, lam) * std::conj(evaluate(tf.num, lam))).imag();
            const double scale = (1.0 + tf.den.max_abs_coeff()) * (1.0 + tf.num.max_abs_coeff()) *
                                 std::pow(1.0 + std::abs(beta), double(2 * sys.n()));
            const double v1 = evaluate(phi, beta);
            CHECK(std::min(std::abs(v1 - direct), std::abs(v1 + direct)) <= 1e-9 * scale);
            CHECK(std::abs(evaluate(phi, beta) + evaluate(phi, -beta)) <= 1e-9 * scale);
        }
    }
}

TEST_CASE("property: G(theta) = sin(theta) g(cos theta) on the circle") {
    std::mt19937_64 eng(707);
    std::uniform_real_distribution<double> ts(0.05, M_PI - 0.05);
    for (int t = 0; t < 40; ++t) {
        const auto sys = oracle::random_minimal_system<double>(2 + t % 4, Domain::Discrete, 1700 + t);
        const auto tf = to_transfer(sys);
        const Poly g = g_poly_discrete(tf);
        for (int s = 0; s < 5; ++s) {
            const double theta = ts(eng);
            const Cplx lam = std::polar(1.0, theta);
            const double direct = (evaluate(tf.den, lam) * std::conj(evaluate(tf.num, lam))).imag();
            const double viag = std::sin(theta) * evaluate(g, std::cos(theta));
            const double scale =
                (1.0 + tf.den.max_abs_coeff()) * (1.0 + tf.num.max_abs_coeff()) * double(sys.n());
            CHECK(std::min(std::abs(viag - direct), std::abs(viag + direct)) <= 1e-9 * scale);
        }
    }
}

TEST_CASE("property: conjugate boundary parameters collapse to one gain") {
    std::mt19937_64 eng(808);
    for (int t = 0; t < 30; ++t) {
        const Domain dom = t % 2 ? Domain::Discrete : Domain::Continuous;
        const auto sys = oracle::random_minimal_system<double>(2 + t % 5, dom, 2600 + t);
        const auto tf = to_transfer(sys);
        const auto gains =
            dom == Domain::Continuous ? continuous_critical_gains(tf) : discrete_critical_gains(tf);
        for (const auto& g : gains) {
            for (const auto& br : g.boundary_roots) {
                const Cplx lp = dom == Domain::Continuous ? Cplx(0.0, br.param)
                                                          : std::polar(1.0, br.param);
                const Cplx lm = std::conj(lp);
                const Cplx kp = -evaluate(tf.den, lp) / evaluate(tf.num, lp);
                const Cplx km = -evaluate(tf.den, lm) / evaluate(tf.num, lm);
                CHECK(std::abs(kp.real() - km.real()) <= 1e-9 * (1.0 + std::abs(kp.real())));
            }
        }
    }
}

TEST_CASE("property: every recorded boundary root witnesses a closed-loop boundary contact") {
    for (int t = 0; t < 30; ++t) {
        const Domain dom = t % 2 ? Domain::Discrete : Domain::Continuous;
        const auto sys = oracle::random_minimal_system<double>(2 + t % 5, dom, 3500 + t);
        const auto tf = to_transfer(sys);
        const auto rep = analyze(tf);
        if (rep.degraded) continue;
        const double cscale = 1.0 + std::max(tf.den.max_abs_coeff(), tf.num.max_abs_coeff());
        for (const auto& g : rep.critical_gains) {
            const Poly p = closed_loop_poly(tf, g.k);
            for (const auto& br : g.boundary_roots) {
                const Cplx lam = dom == Domain::Continuous ? Cplx(0.0, br.param)
                                                           : std::polar(1.0, br.param);
                const double growth = std::pow(std::max(1.0, std::abs(lam)), double(p.degree()));
                CHECK(std::abs(evaluate(p, lam)) <= 1e-6 * (1.0 + cscale) * growth * double(p.degree() + 1));
            }
        }
    }
}

TEST_CASE("property: component bound, oracle agreement and count constancy") {
    std::mt19937_64 eng(4040);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int n = 2; n <= 4; ++n) {
        for (int t = 0; t < 60; ++t) {
            const Domain dom = t % 2 ? Domain::Discrete : Domain::Continuous;
            const auto sys = oracle::random_minimal_system<double>(n, dom, 5000 * n + t);
            const auto tf = to_transfer(sys);
            const auto rep = analyze(tf);
            if (rep.degraded) continue;
            REQUIRE(rep.num_stabilizing_components <= (n + 1) / 2);
            if (n == 2) REQUIRE(rep.num_stabilizing_components <= 1);

            std::vector<double> ks;
            for (const auto& g : rep.critical_gains) ks.push_back(g.k);
            double lo = -10, hi = 10;
            if (!ks.empty()) {
                const double span = ks.back() - ks.front();
                lo = ks.front() - 1 - span;
                hi = ks.back() + 1 + span;
            }
            const auto grid = oracle::grid_classify(tf, lo, hi, 801);
            for (std::size_t i = 0; i < grid.k_grid.size(); ++i) {
                const double k = grid.k_grid[i];
                double dist = std::numeric_limits<double>::infinity();
                for (double kc : ks) dist = std::min(dist, std::abs(k - kc));
                if (dist <= 1e-4 * (1.0 + std::abs(k))) continue;
                std::size_t idx = 0;
                while (idx + 1 < rep.intervals.size() && !(k < rep.intervals[idx].hi)) ++idx;
                REQUIRE(rep.intervals[idx].stabilizing == grid.stable_mask[i]);
            }

            for (const auto& iv : rep.intervals) {
                if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.hi - iv.lo < 1e-6) continue;
                for (int s = 0; s < 5; ++s) {
                    const double k = iv.lo + (iv.hi - iv.lo) * (0.05 + 0.9 * unit(eng));
                    const auto v = domain_verdict(closed_loop_poly(tf, k), dom);
                    REQUIRE(v.unstable_count + v.marginal_count == iv.unstable_count);
                }
            }
        }
    }
}

TEST_CASE("property: continuous derivative identity for phi") {
    // d/d beta of Im(f(i beta)) equals Re(f'(i beta)) for real f; here
    // f = den * reflect(num) so that Im(f(i beta)) = phi(beta).
    std::mt19937_64 eng(909);
    std::uniform_real_distribution<double> bs(-2.0, 2.0);
    for (int t = 0; t < 100; ++t) {
        const auto sys = oracle::random_minimal_system<double>(2 + t % 4, Domain::Continuous, 7000 + t);
        const auto tf = to_transfer(sys);
        const Poly f = tf.den * reflect(tf.num);
        const Poly df = derivative(f);
        const double beta = bs(eng);
        const double h = 1e-6 * (1.0 + std::abs(beta));
        auto im_f = [&](double b) { return evaluate(f, Cplx(0.0, b)).imag(); };
        const double fd = (im_f(beta + h) - im_f(beta - h)) / (2 * h);
        const double exact = evaluate(df, Cplx(0.0, beta)).real();
        const double denom = std::max({std::abs(exact), std::abs(fd), 1e-2 * (1.0 + f.max_abs_coeff())});
        CHECK(std::abs(fd - exact) <= 1e-5 * denom);
    }
}

TEST_CASE("property: discrete derivative identity on the circle") {
    // With Phi(lambda) = den(lambda) num(1/lambda) = sum_m gamma_m lambda^m,
    // d/d theta Im(Phi(e^{i theta})) = sum_m m gamma_m cos(m theta), which is
    // Re(lambda Phi'(lambda)) on the circle.
    std::mt19937_64 eng(111);
    std::uniform_real_distribution<double> ts(0.1, M_PI - 0.1);
    for (int t = 0; t < 100; ++t) {
        const auto sys = oracle::random_minimal_system<double>(2 + t % 4, Domain::Discrete, 8200 + t);
        const auto tf = to_transfer(sys);
        const Eigen::Index N = tf.den.degree(), M = tf.num.trimmed().degree();
        std::vector<double> gamma(static_cast<std::size_t>(N + M) + 1, 0.0);  // index m + M
        for (Eigen::Index j = 0; j <= N; ++j)
            for (Eigen::Index l = 0; l <= M; ++l)
                gamma[static_cast<std::size_t>(j - l + M)] += tf.den.coeffs[j] * tf.num.coeffs[l];

        const double theta = ts(eng);
        auto G = [&](double th) {
            const Cplx lam = std::polar(1.0, th);
            return (evaluate(tf.den, lam) * std::conj(evaluate(tf.num, lam))).imag();
        };
        const double h = 1e-6;
        const double fd = (G(theta + h) - G(theta - h)) / (2 * h);
        double exact = 0.0;
        for (Eigen::Index m = -M; m <= N; ++m)
            exact += double(m) * gamma[static_cast<std::size_t>(m + M)] * std::cos(double(m) * theta);
        const double denom = std::max(
            {std::abs(exact), std::abs(fd),
             1e-2 * (1.0 + tf.den.max_abs_coeff()) * (1.0 + tf.num.max_abs_coeff()) * double(N)});
        CHECK(std::abs(fd - exact) <= 1e-5 * denom);
    }
}

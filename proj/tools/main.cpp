#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "spec_io.hpp"
#include "stabgain/gain_intervals.hpp"
#include "stabgain/oracle.hpp"
#include "stabgain/trials.hpp"

namespace {

using namespace stabgain;

void write_atomic(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open output file: " + path);
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

TransferFraction<double> spec_to_tf(const stabgain_cli::SpecFile& spec) {
    if (spec.tf) return *spec.tf;
    return to_transfer(*spec.sys);
}

struct TolFlags {
    double real_tol = -1, cluster_tol = -1, boundary_tol = -1, dedup_tol = -1, residual_tol = -1,
           witness_tol = -1, tangency_tol = -1, eps = -1;

    void attach(CLI::App* cmd) {
        cmd->add_option("--real-tol", real_tol, "realness tolerance for root filtering (default 1e-9)");
        cmd->add_option("--cluster-tol", cluster_tol,
                        "multiplicity clustering tolerance (default 1e-6)");
        cmd->add_option("--boundary-tol", boundary_tol,
                        "realness/clustering tolerance for boundary-polynomial roots "
                        "(default: --real-tol/--cluster-tol)");
        cmd->add_option("--dedup-tol", dedup_tol, "critical-gain merge tolerance (default 1e-7)");
        cmd->add_option("--residual-tol", residual_tol,
                        "imaginary-residual tolerance for accepting a gain (default 1e-7)");
        cmd->add_option("--witness-tol", witness_tol, "boundary-root witness tolerance (default 1e-6)");
        cmd->add_option("--tangency-tol", tangency_tol, "derivative-condition tolerance (default 1e-5)");
        cmd->add_option("--eps", eps, "stability boundary band for verdicts (default 1e-9)");
    }

    void apply(AnalyzeOptions<double>& o) const {
        if (real_tol >= 0) o.real_tol = real_tol;
        if (cluster_tol >= 0) o.cluster_tol = cluster_tol;
        if (boundary_tol >= 0) o.boundary_root_tol = boundary_tol;
        if (dedup_tol >= 0) o.dedup_tol = dedup_tol;
        if (residual_tol >= 0) o.residual_tol = residual_tol;
        if (witness_tol >= 0) o.witness_tol = witness_tol;
        if (tangency_tol >= 0) o.tangency_tol = tangency_tol;
        if (eps >= 0) o.eps = eps;
    }
};

int cmd_analyze(const std::string& spec_path, const std::string& out_path, const TolFlags& tols) {
    auto spec = stabgain_cli::load_spec(spec_path);
    tols.apply(spec.opts);
    const TransferFraction<double> tf = spec_to_tf(spec);
    if (std::abs(tf.den.leading() - 1.0) > 1e-12)
        std::cerr << "warning: denominator is not monic; normalizing\n";
    const auto rep = analyze(tf, spec.opts);
    write_atomic(out_path, stabgain_cli::report_to_json(rep));
    return rep.degraded ? 2 : 0;
}

int cmd_locus(const std::string& spec_path, const std::string& out_path, double k_lo, double k_hi,
              int samples, const TolFlags& tols) {
    auto spec = stabgain_cli::load_spec(spec_path);
    tols.apply(spec.opts);
    const TransferFraction<double> tf = spec_to_tf(spec);
    if (samples < 2 || !(k_lo < k_hi)) throw std::runtime_error("locus needs samples >= 2 and k-min < k-max");

    std::ostringstream os;
    os << "k,root_index,re,im,max_re_or_modulus\n";
    std::vector<std::complex<double>> prev;
    const double step = (k_hi - k_lo) / double(samples - 1);
    for (int s = 0; s < samples; ++s) {
        const double k = k_lo + step * s;
        auto roots = all_roots(closed_loop_poly(tf, k), spec.opts.cluster_tol).expand();
        std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
            return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
        });
        std::vector<std::complex<double>> matched;
        if (prev.empty() || prev.size() != roots.size()) {
            matched = roots;
        } else {
            // Greedy continuity matching to the previous sample's ordering.
            std::vector<bool> used(roots.size(), false);
            for (const auto& p : prev) {
                double best = std::numeric_limits<double>::max();
                std::size_t bi = 0;
                for (std::size_t i = 0; i < roots.size(); ++i) {
                    if (used[i]) continue;
                    const double d = std::abs(roots[i] - p);
                    if (d < best) {
                        best = d;
                        bi = i;
                    }
                }
                used[bi] = true;
                matched.push_back(roots[bi]);
            }
        }
        double extreme = -std::numeric_limits<double>::infinity();
        for (const auto& z : matched)
            extreme = std::max(extreme, tf.domain == Domain::Continuous ? z.real() : std::abs(z));
        for (std::size_t i = 0; i < matched.size(); ++i) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "%.17g,%zu,%.17g,%.17g,%.17g\n", k, i, matched[i].real(),
                          matched[i].imag(), extreme);
            os << buf;
        }
        prev = matched;
    }
    write_atomic(out_path, os.str());
    return 0;
}

int cmd_check(const std::string& spec_path, double k, const TolFlags& tols) {
    auto spec = stabgain_cli::load_spec(spec_path);
    tols.apply(spec.opts);
    const TransferFraction<double> tf = spec_to_tf(spec);
    const auto v = domain_verdict(closed_loop_poly(tf, k), tf.domain, spec.opts.eps, spec.opts.cluster_tol);
    std::cout << "k: " << stabgain_cli::fmt17(k) << "\n"
              << "domain: " << (tf.domain == Domain::Continuous ? "continuous" : "discrete") << "\n"
              << "stabilizing: " << (v.stable ? "yes" : "no") << "\n"
              << "margin: " << stabgain_cli::fmt17(v.margin) << "\n"
              << "unstable_count: " << v.unstable_count << "\n"
              << "marginal_count: " << v.marginal_count << "\n";
    return v.stable ? 0 : 3;
}

int cmd_trials(const trials::TrialConfig& cfg) {
    const auto summary = trials::run_trials(cfg);
    for (const auto& [key, hist] : summary.histograms) {
        std::cout << (key.first == 0 ? "continuous" : "discrete") << " n=" << key.second
                  << " components histogram:";
        for (const auto& [comps, count] : hist) std::cout << "  " << comps << ":" << count;
        std::cout << "\n";
    }
    std::cout << "trials: " << summary.trials_run << ", degraded fallbacks: " << summary.degraded
              << ", failures: " << summary.failures.size() << "\n";
    for (const auto& f : summary.failures)
        std::cerr << "FAIL seed=" << f.seed << " n=" << f.n
                  << " domain=" << (f.domain == Domain::Continuous ? "continuous" : "discrete") << ": "
                  << f.what << "\n";
    return summary.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stabilizing output-feedback gain interval analysis for SISO LTI systems"};
    app.require_subcommand(1);

    std::string spec_path, out_path = "-";
    double k_lo = -1, k_hi = 1, k_check = 0;
    int samples = 500;
    TolFlags tols;

    auto* analyze_cmd = app.add_subcommand(
        "analyze", "decompose the gain axis into stabilizing/non-stabilizing intervals");
    analyze_cmd->add_option("spec", spec_path, "system spec JSON file")->required();
    analyze_cmd->add_option("-o,--output", out_path, "report path (- for stdout)");
    tols.attach(analyze_cmd);

    auto* locus_cmd = app.add_subcommand("locus", "root-locus samples over a gain range (CSV)");
    locus_cmd->add_option("spec", spec_path, "system spec JSON file")->required();
    locus_cmd->add_option("--k-min", k_lo, "lower end of the gain range")->required();
    locus_cmd->add_option("--k-max", k_hi, "upper end of the gain range")->required();
    locus_cmd->add_option("--samples", samples, "number of gain samples (default 500)");
    locus_cmd->add_option("-o,--output", out_path, "CSV path (- for stdout)");
    tols.attach(locus_cmd);

    auto* check_cmd = app.add_subcommand("check", "stability verdict for a single gain");
    check_cmd->add_option("spec", spec_path, "system spec JSON file")->required();
    check_cmd->add_option("-k,--gain", k_check, "feedback gain to test")->required();
    tols.attach(check_cmd);

    trials::TrialConfig cfg;
    cfg.n_min = 2;
    cfg.n_max = 5;
    cfg.per_n = 200;
    cfg.seed = 7;
    std::string domain_opt = "both";
    auto* trials_cmd =
        app.add_subcommand("trials", "randomized analyzer-vs-oracle verification suite");
    trials_cmd->add_option("--n-min", cfg.n_min, "smallest system order (default 2)");
    trials_cmd->add_option("--n-max", cfg.n_max, "largest system order (default 5)");
    trials_cmd->add_option("--count", cfg.per_n, "systems per order per domain (default 200)");
    trials_cmd->add_option("--domain", domain_opt, "continuous | discrete | both (default both)");
    trials_cmd->add_option("--seed", cfg.seed, "base RNG seed (default 7)");
    trials_cmd->add_option("--grid", cfg.grid_count, "oracle grid points per trial (default 1200)");
    trials_cmd->add_flag("--inject-fault", cfg.inject_fault, "harness self-test: corrupt the analyzer")
        ->group("");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(analyze_cmd)) return cmd_analyze(spec_path, out_path, tols);
        if (app.got_subcommand(locus_cmd)) return cmd_locus(spec_path, out_path, k_lo, k_hi, samples, tols);
        if (app.got_subcommand(check_cmd)) return cmd_check(spec_path, k_check, tols);
        if (app.got_subcommand(trials_cmd)) {
            if (domain_opt == "continuous")
                cfg.discrete = false;
            else if (domain_opt == "discrete")
                cfg.continuous = false;
            else if (domain_opt != "both")
                throw std::runtime_error("--domain must be continuous, discrete or both");
            return cmd_trials(cfg);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

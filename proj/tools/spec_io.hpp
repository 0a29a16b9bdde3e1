#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "stabgain/gain_intervals.hpp"
#include "stabgain/lti.hpp"

// System-spec and report file formats owned by the CLI.
//
// Spec file (JSON): exactly one of "matrices" {A, b, c} or "fraction"
// {den, num}; "domain" is "continuous" or "discrete".  Coefficients are
// ascending powers: den = [d0, d1, ..., 1].  Optional "tolerances" override
// the analyzer defaults.

namespace stabgain_cli {

struct SpecFile {
    std::optional<stabgain::StateSpaceSiso<double>> sys;
    std::optional<stabgain::TransferFraction<double>> tf;
    stabgain::AnalyzeOptions<double> opts;
};

class SpecError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

inline stabgain::RealPoly<double> poly_from_json(const nlohmann::json& arr, const char* what) {
    if (!arr.is_array() || arr.empty()) throw SpecError(std::string(what) + " must be a nonempty array");
    stabgain::VectorX<double> c(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number()) throw SpecError(std::string(what) + " must contain numbers");
        c[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    }
    return stabgain::RealPoly<double>(std::move(c));
}

inline SpecFile load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("cannot open spec file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SpecError("spec file is not valid JSON: " + std::string(e.what()));
    }

    SpecFile spec;
    const std::string dom = j.value("domain", "");
    stabgain::Domain domain;
    if (dom == "continuous")
        domain = stabgain::Domain::Continuous;
    else if (dom == "discrete")
        domain = stabgain::Domain::Discrete;
    else
        throw SpecError("\"domain\" must be \"continuous\" or \"discrete\"");

    const bool has_matrices = j.contains("matrices");
    const bool has_fraction = j.contains("fraction");
    if (has_matrices == has_fraction)
        throw SpecError("spec must contain exactly one of \"matrices\" and \"fraction\"");

    if (has_matrices) {
        const auto& m = j["matrices"];
        if (!m.contains("A") || !m.contains("b") || !m.contains("c"))
            throw SpecError("\"matrices\" needs A, b and c");
        const auto& A = m["A"];
        if (!A.is_array() || A.empty()) throw SpecError("A must be a nonempty array of rows");
        const Eigen::Index n = static_cast<Eigen::Index>(A.size());
        stabgain::MatrixX<double> Am(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& row = A[static_cast<std::size_t>(i)];
            if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
                throw SpecError("A must be square");
            for (Eigen::Index jj = 0; jj < n; ++jj)
                Am(i, jj) = row[static_cast<std::size_t>(jj)].get<double>();
        }
        auto vec = [&](const nlohmann::json& v, const char* what) {
            if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != n)
                throw SpecError(std::string(what) + " must have length n");
            stabgain::VectorX<double> out(n);
            for (Eigen::Index i = 0; i < n; ++i) out[i] = v[static_cast<std::size_t>(i)].get<double>();
            return out;
        };
        spec.sys = stabgain::StateSpaceSiso<double>(Am, vec(m["b"], "b"), vec(m["c"], "c"), domain);
    } else {
        const auto& f = j["fraction"];
        if (!f.contains("den") || !f.contains("num")) throw SpecError("\"fraction\" needs den and num");
        stabgain::TransferFraction<double> tf;
        tf.den = poly_from_json(f["den"], "den");
        tf.num = poly_from_json(f["num"], "num");
        tf.domain = domain;
        if (tf.den.trimmed().degree() < 1) throw SpecError("den must have degree >= 1");
        if (tf.num.trimmed().degree() >= tf.den.trimmed().degree())
            throw SpecError("num must have lower degree than den");
        spec.tf = tf;
    }

    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        auto get = [&](const char* name, double& slot) {
            if (t.contains(name)) slot = t[name].get<double>();
        };
        get("real_tol", spec.opts.real_tol);
        get("cluster_tol", spec.opts.cluster_tol);
        get("boundary_root_tol", spec.opts.boundary_root_tol);
        get("dedup_tol", spec.opts.dedup_tol);
        get("residual_tol", spec.opts.residual_tol);
        get("witness_tol", spec.opts.witness_tol);
        get("tangency_tol", spec.opts.tangency_tol);
        get("eps", spec.opts.eps);
    }
    return spec;
}

/// Fixed 17-significant-digit formatting so identical analyses produce
/// byte-identical reports.
inline std::string fmt17(double x) {
    if (std::isinf(x)) return x > 0 ? "\"inf\"" : "\"-inf\"";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string report_to_json(const stabgain::AnalysisReport<double>& rep) {
    std::ostringstream os;
    os << "{\n";
    os << "  \"domain\": \"" << (rep.domain == stabgain::Domain::Continuous ? "continuous" : "discrete")
       << "\",\n";
    os << "  \"critical_gains\": [";
    for (std::size_t i = 0; i < rep.critical_gains.size(); ++i) {
        const auto& g = rep.critical_gains[i];
        os << (i ? ",\n" : "\n");
        os << "    {\"k\": " << fmt17(g.k) << ", \"boundary\": [";
        for (std::size_t b = 0; b < g.boundary_roots.size(); ++b) {
            if (b) os << ", ";
            os << "{\"param\": " << fmt17(g.boundary_roots[b].param)
               << ", \"multiplicity\": " << g.boundary_roots[b].multiplicity << "}";
        }
        os << "], \"tangent\": " << (g.tangent ? "true" : "false") << "}";
    }
    os << (rep.critical_gains.empty() ? "],\n" : "\n  ],\n");
    os << "  \"intervals\": [";
    for (std::size_t i = 0; i < rep.intervals.size(); ++i) {
        const auto& iv = rep.intervals[i];
        os << (i ? ",\n" : "\n");
        os << "    {\"lo\": " << fmt17(iv.lo) << ", \"hi\": " << fmt17(iv.hi)
           << ", \"unstable_count\": " << iv.unstable_count
           << ", \"stabilizing\": " << (iv.stabilizing ? "true" : "false")
           << ", \"representative_k\": " << fmt17(iv.representative_k) << "}";
    }
    os << (rep.intervals.empty() ? "],\n" : "\n  ],\n");
    os << "  \"components\": " << rep.num_stabilizing_components << ",\n";
    os << "  \"bound\": " << rep.bound << ",\n";
    os << "  \"bound_satisfied\": " << (rep.bound_satisfied ? "true" : "false") << ",\n";
    os << "  \"flags\": [";
    for (std::size_t i = 0; i < rep.flags.size(); ++i) os << (i ? ", " : "") << "\"" << rep.flags[i] << "\"";
    os << "]\n}\n";
    return os.str();
}

}  // namespace stabgain_cli

#pragma once

#include <complex>
#include <random>
#include <vector>

#include "stabgain/poly.hpp"

namespace test_util {

inline stabgain::RealPoly<double> random_poly(std::mt19937_64& eng, int max_degree, double span = 5.0) {
    std::uniform_int_distribution<int> deg(1, max_degree);
    std::uniform_real_distribution<double> coeff(-span, span);
    const int d = deg(eng);
    stabgain::VectorX<double> c(d + 1);
    for (int j = 0; j <= d; ++j) c[j] = coeff(eng);
    while (std::abs(c[d]) < 0.5) c[d] = coeff(eng);
    return stabgain::RealPoly<double>(std::move(c));
}

inline stabgain::RealPoly<double> random_monic(std::mt19937_64& eng, int degree, double span = 5.0) {
    std::uniform_real_distribution<double> coeff(-span, span);
    stabgain::VectorX<double> c(degree + 1);
    for (int j = 0; j < degree; ++j) c[j] = coeff(eng);
    c[degree] = 1.0;
    return stabgain::RealPoly<double>(std::move(c));
}

/// Conjugate-closed multiset of `count` points, real or paired, drawn from
/// the given sampler for single points.
template <typename Sampler>
std::vector<std::complex<double>> conjugate_closed_set(std::mt19937_64& eng, int count, Sampler sample) {
    std::vector<std::complex<double>> out;
    std::bernoulli_distribution pair(0.6);
    while (static_cast<int>(out.size()) < count) {
        const bool room_for_pair = count - static_cast<int>(out.size()) >= 2;
        const std::complex<double> z = sample(eng);
        if (room_for_pair && pair(eng)) {
            out.push_back(z);
            out.push_back(std::conj(z));
        } else {
            out.emplace_back(z.real(), 0.0);
        }
    }
    return out;
}

}  // namespace test_util

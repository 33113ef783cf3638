// oracles.hpp - independent reference computations used only by tests
//
// Nothing in here calls into the library's algebra; inputs are plain
// vectors of amplitudes / row-major matrices.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace oracles {

using C = std::complex<double>;
using Mat = std::vector<std::vector<C>>;

inline Mat outer(const std::vector<C>& a) {
    Mat m(a.size(), std::vector<C>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j) m[i][j] = a[i] * std::conj(a[j]);
    return m;
}

// <psi| rho |psi> by explicit double sum
inline double contraction(const Mat& rho, const std::vector<C>& psi) {
    C s = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i)
        for (std::size_t j = 0; j < psi.size(); ++j) s += std::conj(psi[i]) * rho[i][j] * psi[j];
    return s.real();
}

// Tr_B of an operator on A (x) B, dims (da, db), by direct index summation.
inline Mat trace_out_second(const Mat& rho, std::size_t da, std::size_t db) {
    Mat out(da, std::vector<C>(da));
    for (std::size_t i = 0; i < da; ++i)
        for (std::size_t j = 0; j < da; ++j)
            for (std::size_t k = 0; k < db; ++k) out[i][j] += rho[i * db + k][j * db + k];
    return out;
}

// Tr_A of an operator on A (x) B.
inline Mat trace_out_first(const Mat& rho, std::size_t da, std::size_t db) {
    Mat out(db, std::vector<C>(db));
    for (std::size_t i = 0; i < db; ++i)
        for (std::size_t j = 0; j < db; ++j)
            for (std::size_t k = 0; k < da; ++k) out[i][j] += rho[k * db + i][k * db + j];
    return out;
}

inline double binomial_sigma(double p, std::size_t n) { return std::sqrt(p * (1.0 - p) / static_cast<double>(n)); }

// |<a|b>|^2 for plain amplitude vectors
inline double overlap2(const std::vector<C>& a, const std::vector<C>& b) {
    C s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return std::norm(s);
}

// Bob2's normalized qubit after Bob1 projects qubit 1 of |pair> onto
// (|0> + sign e^{-i phi}|1>)/sqrt2, computed as (<b| (x) I)|pair>
// from the 2x2 coefficient matrix pair[2a+b].
inline std::vector<C> bob2_after_projection(const std::vector<C>& pair, double phi, int sign, double* prob) {
    const C b0 = 1.0 / std::sqrt(2.0);
    const C b1 = static_cast<double>(sign) / std::sqrt(2.0) * std::polar(1.0, -phi);
    std::vector<C> v = {std::conj(b0) * pair[0] + std::conj(b1) * pair[2],
                        std::conj(b0) * pair[1] + std::conj(b1) * pair[3]};
    const double n = std::norm(v[0]) + std::norm(v[1]);
    if (prob) *prob = n;
    for (auto& x : v) x /= std::sqrt(n);
    return v;
}

}  // namespace oracles

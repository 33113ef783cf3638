// oracle.hpp - full-Hilbert-space reference for the QND device
//
// Independent of the branch-table engine: the photon pair (16 dims) is
// coupled to a three-level probe register per server (quanta -1/0/+1) by an
// explicit permutation unitary, then the X-quadrature readout merges the
// +1/-1 levels into one Shift class. The merge is an isometry on the evolved
// support, which leaves photon(16) x outcome(2) x outcome(2) = 64 dims.
//
// Factor order of the returned state: polA, pathA, polB, pathB, outA, outB,
// every factor two-dimensional. Outcome index 0 is NoShift, 1 is Shift.

#pragma once

#include "hyperdistill/linalg.hpp"
#include "hyperdistill/qnd.hpp"
#include "hyperdistill/states.hpp"

#include <array>
#include <string>
#include <vector>

namespace hyperdistill::oracle {

inline constexpr std::size_t kPhotonDim = 16;
inline constexpr std::size_t kProbeLevels = 3;
inline constexpr std::size_t kProbeDim = kProbeLevels * kProbeLevels;
inline constexpr std::size_t kJointDim = kPhotonDim * kProbeDim;
inline constexpr std::array<std::size_t, 6> kFactorDims = {2, 2, 2, 2, 2, 2};

namespace detail {

// Probe level index for quantum q in {-1, 0, +1}.
inline std::size_t level(int q) { return static_cast<std::size_t>(q + 1); }

// Phase kick of one photon given its (polarization, path) bits: H on the
// first path advances the probe, V on the second path retards it.
inline int kick(std::size_t pol_bit, std::size_t path_bit) {
    if (pol_bit == 0 && path_bit == 0) return +1;
    if (pol_bit == 1 && path_bit == 1) return -1;
    return 0;
}

inline int kick_a(std::size_t photon) { return kick((photon >> 3) & 1, (photon >> 2) & 1); }
inline int kick_b(std::size_t photon) { return kick((photon >> 1) & 1, photon & 1); }

}  // namespace detail

// U |photon>|qa, qb> = |photon>|qa + kA, qb + kB> (levels mod 3).
inline Matrix coupling_unitary() {
    Matrix u(kJointDim, kJointDim);
    for (std::size_t p = 0; p < kPhotonDim; ++p)
        for (std::size_t qa = 0; qa < kProbeLevels; ++qa)
            for (std::size_t qb = 0; qb < kProbeLevels; ++qb) {
                const auto shift = [](std::size_t q, int k) {
                    return static_cast<std::size_t>((static_cast<int>(q) + k + 3) % 3);
                };
                const std::size_t in = p * kProbeDim + qa * kProbeLevels + qb;
                const std::size_t out = p * kProbeDim + shift(qa, detail::kick_a(p)) * kProbeLevels +
                                        shift(qb, detail::kick_b(p));
                u(out, in) = 1.0;
            }
    return u;
}

// Readout map: levels -1 and +1 -> Shift, level 0 -> NoShift.
inline Matrix readout_map() {
    Matrix k(kPhotonDim * 4, kJointDim);
    for (std::size_t p = 0; p < kPhotonDim; ++p)
        for (std::size_t qa = 0; qa < kProbeLevels; ++qa)
            for (std::size_t qb = 0; qb < kProbeLevels; ++qb) {
                const std::size_t oa = (qa == detail::level(0)) ? 0 : 1;
                const std::size_t ob = (qb == detail::level(0)) ? 0 : 1;
                k(p * 4 + oa * 2 + ob, p * kProbeDim + qa * kProbeLevels + qb) = 1.0;
            }
    return k;
}

inline std::vector<std::string> joint_labels() {
    static const std::array<const char*, 2> pol = {"H", "V"};
    static const std::array<const char*, 2> path_a = {"a3", "a4"};
    static const std::array<const char*, 2> path_b = {"b3", "b4"};
    static const std::array<const char*, 2> out = {"N", "S"};
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < kPhotonDim * 4; ++i) {
        const std::size_t p = i / 4;
        labels.push_back(std::string(pol[(p >> 3) & 1]) + ' ' + path_a[(p >> 2) & 1] + ' ' + pol[(p >> 1) & 1] + ' ' +
                         path_b[p & 1] + ' ' + out[(i >> 1) & 1] + ' ' + out[i & 1]);
    }
    return labels;
}

// Joint photon x outcome-register state after coupling and readout.
inline DensityMatrix oracle_evolve(const HyperComponent& c, const DeviceParams& params) {
    params.validate();
    const StateVector photon = hyper_component_state(c);

    std::vector<Complex> joint(kJointDim);
    for (std::size_t p = 0; p < kPhotonDim; ++p)
        joint[p * kProbeDim + detail::level(0) * kProbeLevels + detail::level(0)] = photon[p];

    const Matrix u = coupling_unitary();
    std::vector<Complex> evolved(kJointDim);
    for (std::size_t i = 0; i < kJointDim; ++i)
        for (std::size_t j = 0; j < kJointDim; ++j) evolved[i] += u(i, j) * joint[j];

    const Matrix k = readout_map();
    std::vector<Complex> read(k.rows());
    for (std::size_t i = 0; i < k.rows(); ++i)
        for (std::size_t j = 0; j < kJointDim; ++j) read[i] += k(i, j) * evolved[j];

    StateVector out(std::move(read), joint_labels());
    if (!out.is_normalized()) throw std::logic_error("oracle_evolve: readout is not isometric on the evolved support");
    return DensityMatrix::pure(out);
}

inline std::size_t outcome_index(QndOutcome o) { return o == QndOutcome::Shift ? 1 : 0; }

inline double outcome_probability(const DensityMatrix& joint, OutcomePair o) {
    static constexpr std::array<std::size_t, 2> keep = {4, 5};
    const Matrix m = partial_trace(joint.matrix(), keep, kFactorDims);
    const std::size_t i = outcome_index(o.a) * 2 + outcome_index(o.b);
    return m(i, i).real();
}

// Output-port isometry for one photon: (pol, path) -> pol, keeping only the
// (pol, path) combinations that exit through the port selected by `o`.
inline Matrix routing_isometry(QndOutcome o) {
    Matrix w(2, 4);  // columns: (H,p1) (H,p2) (V,p1) (V,p2)
    if (o == QndOutcome::Shift) {
        w(0, 0) = 1.0;  // H on first path
        w(1, 3) = 1.0;  // V on second path
    } else {
        w(0, 1) = 1.0;
        w(1, 2) = 1.0;
    }
    return w;
}

// Normalized 4x4 polarization state conditioned on outcome pair `o`.
inline DensityMatrix conditional_polarization(const DensityMatrix& joint, OutcomePair o) {
    Matrix outcome_proj(4, 4);
    const std::size_t i = outcome_index(o.a) * 2 + outcome_index(o.b);
    outcome_proj(i, i) = 1.0;
    const Matrix proj = kron(Matrix::identity(kPhotonDim), outcome_proj);
    const Matrix projected = proj * joint.matrix() * proj;

    static constexpr std::array<std::size_t, 4> photon_factors = {0, 1, 2, 3};
    const Matrix photon = partial_trace(projected, photon_factors, kFactorDims);
    const Matrix w = kron(routing_isometry(o.a), routing_isometry(o.b));
    const Matrix pol = w * photon * w.adjoint();
    if (std::abs(pol.trace().real() - photon.trace().real()) > kEpsNorm)
        throw std::logic_error("conditional_polarization: weight outside the selected output ports");
    return DensityMatrix::from_unnormalized(pol);
}

}  // namespace hyperdistill::oracle

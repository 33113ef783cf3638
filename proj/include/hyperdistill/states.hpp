// states.hpp - Bell states, the hyperentangled source, and the noisy mixture
//
// Global basis order for a photon pair: polA (x) spatialA (x) polB (x) spatialB,
// each factor ordered H before V and a1/b1 before a2/b2.

#pragma once

#include "hyperdistill/linalg.hpp"
#include "hyperdistill/random.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hyperdistill {

enum class PolarizationBell { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

inline constexpr std::array<PolarizationBell, 4> kAllBell = {
    PolarizationBell::PhiPlus, PolarizationBell::PhiMinus, PolarizationBell::PsiPlus, PolarizationBell::PsiMinus};

inline std::string_view to_string(PolarizationBell k) {
    switch (k) {
        case PolarizationBell::PhiPlus: return "PhiPlus";
        case PolarizationBell::PhiMinus: return "PhiMinus";
        case PolarizationBell::PsiPlus: return "PsiPlus";
        case PolarizationBell::PsiMinus: return "PsiMinus";
    }
    return "?";
}

// Phi-type states live in span{HH, VV}; Psi-type in span{HV, VH}.
inline bool is_phi_type(PolarizationBell k) {
    return k == PolarizationBell::PhiPlus || k == PolarizationBell::PhiMinus;
}

// Sign of the |a2 b2> term of the spatial state: Plus is (|a1 b1> + |a2 b2>)/sqrt2.
enum class SpatialSign { Plus, Minus };

inline SpatialSign flipped(SpatialSign s) { return s == SpatialSign::Plus ? SpatialSign::Minus : SpatialSign::Plus; }

// Mixture weights (F, F1, F2, F3) of Phi+, Phi-, Psi+, Psi-.
class FidelityVector {
public:
    FidelityVector(double f, double f1, double f2, double f3) : w_{f, f1, f2, f3} {
        for (double w : w_)
            if (!std::isfinite(w) || w < 0.0 || w > 1.0)
                throw std::invalid_argument("FidelityVector: component outside [0, 1]");
        if (std::abs(sum() - 1.0) > kEpsNorm) throw std::invalid_argument("FidelityVector: components must sum to 1");
    }

    // Accepts components whose sum is within `tol` of 1 and rescales them.
    static FidelityVector normalized(double f, double f1, double f2, double f3, double tol = 1e-9) {
        const double s = f + f1 + f2 + f3;
        if (!std::isfinite(s) || std::abs(s - 1.0) > tol)
            throw std::invalid_argument("FidelityVector: components do not sum to 1");
        return {f / s, f1 / s, f2 / s, f3 / s};
    }

    double f() const { return w_[0]; }
    double f1() const { return w_[1]; }
    double f2() const { return w_[2]; }
    double f3() const { return w_[3]; }
    double weight(PolarizationBell k) const { return w_[static_cast<std::size_t>(k)]; }
    const std::array<double, 4>& weights() const { return w_; }

private:
    double sum() const { return w_[0] + w_[1] + w_[2] + w_[3]; }

    std::array<double, 4> w_;
};

struct HyperComponent {
    PolarizationBell pol = PolarizationBell::PhiPlus;
    SpatialSign spatial = SpatialSign::Plus;
    double weight = 1.0;

    friend bool operator==(const HyperComponent&, const HyperComponent&) = default;
};

// Single-photon factor labels.
inline const std::vector<std::string> kPolLabels = {"H", "V"};
inline const std::vector<std::string> kModeALabels = {"a1", "a2"};
inline const std::vector<std::string> kModeBLabels = {"b1", "b2"};

inline StateVector bell_vector(PolarizationBell kind) {
    const double r = 1.0 / std::sqrt(2.0);
    std::vector<Complex> amps(4);
    switch (kind) {
        case PolarizationBell::PhiPlus: amps = {r, 0.0, 0.0, r}; break;
        case PolarizationBell::PhiMinus: amps = {r, 0.0, 0.0, -r}; break;
        case PolarizationBell::PsiPlus: amps = {0.0, r, r, 0.0}; break;
        case PolarizationBell::PsiMinus: amps = {0.0, r, -r, 0.0}; break;
    }
    return {std::move(amps), {"H H", "H V", "V H", "V V"}};
}

// (|a1 b1> +/- |a2 b2>)/sqrt2
inline StateVector spatial_vector(SpatialSign sign) {
    const double r = 1.0 / std::sqrt(2.0);
    return {{r, 0.0, 0.0, sign == SpatialSign::Plus ? r : -r}, {"a1 b1", "a1 b2", "a2 b1", "a2 b2"}};
}

// 16-dim ket of one mixture term in the global basis order.
inline StateVector hyper_component_state(const HyperComponent& c) {
    static constexpr std::array<std::size_t, 4> dims = {2, 2, 2, 2};
    static constexpr std::array<std::size_t, 4> to_global = {0, 2, 1, 3};
    return permute_subsystems(tensor(bell_vector(c.pol), spatial_vector(c.spatial)), dims, to_global);
}

inline StateVector hyper_source_state() { return hyper_component_state({PolarizationBell::PhiPlus, SpatialSign::Plus, 1.0}); }

inline std::vector<HyperComponent> mixed_ensemble(const FidelityVector& fv) {
    std::vector<HyperComponent> out;
    out.reserve(4);
    for (auto k : kAllBell) out.push_back({k, SpatialSign::Plus, fv.weight(k)});
    return out;
}

// rho_P = sum_k w_k |B_k><B_k|
inline DensityMatrix polarization_density(const FidelityVector& fv) {
    std::vector<StateVector> states;
    for (auto k : kAllBell) states.push_back(bell_vector(k));
    return DensityMatrix::mixture(fv.weights(), states);
}

// One mixture term drawn with probability equal to its weight. Consumes one
// uniform variate.
inline HyperComponent sample_component(const FidelityVector& fv, RandomStream& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    PolarizationBell last = PolarizationBell::PhiPlus;
    for (auto k : kAllBell) {
        if (fv.weight(k) <= 0.0) continue;
        last = k;
        acc += fv.weight(k);
        if (u < acc) return {k, SpatialSign::Plus, fv.weight(k)};
    }
    // u landed in the rounding gap above the cumulative sum
    return {last, SpatialSign::Plus, fv.weight(last)};
}

// Collective spatial phase noise: flips the |a2 b2> sign with probability p.
inline HyperComponent spatial_dephase(HyperComponent c, double p, RandomStream& rng) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("spatial_dephase: p outside [0, 1]");
    if (rng.bernoulli(p)) c.spatial = flipped(c.spatial);
    return c;
}

}  // namespace hyperdistill

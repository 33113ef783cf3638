// qnd.hpp - cross-Kerr QND parity device at each server
//
// The device is modeled at the phase-class level. Each photon path picks up
// a probe phase of +theta (H in the a3/b3 path), -theta (V in the a4/b4
// path) or nothing. An X-quadrature readout cannot tell +theta from -theta,
// so each server sees only Shift or NoShift. After the readout the photon
// is routed to the upper output (a5/b5) on NoShift and the lower output
// (a6/b6) on Shift.

#pragma once

#include "hyperdistill/linalg.hpp"
#include "hyperdistill/random.hpp"
#include "hyperdistill/states.hpp"

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string_view>

namespace hyperdistill {

struct DeviceParams {
    double theta = std::numbers::pi / 4;  // Kerr phase per photon, radians
    double alpha = 1000.0;                // coherent probe amplitude, recorded only
    double homodyne_error = 0.0;          // symmetric Shift/NoShift misread probability

    void validate() const {
        if (!(theta > 0.0 && theta <= std::numbers::pi)) throw std::invalid_argument("DeviceParams: theta outside (0, pi]");
        if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("DeviceParams: alpha must be positive");
        if (!(homodyne_error >= 0.0 && homodyne_error < 0.5))
            throw std::invalid_argument("DeviceParams: homodyne_error outside [0, 0.5)");
    }
};

enum class Pol { H, V };
enum class InternalPath { First, Second };  // a3/b3 and a4/b4
enum class QndOutcome { NoShift, Shift };
enum class OutputMode { Upper, Lower };     // a5/b5 and a6/b6

inline std::string_view to_string(QndOutcome o) { return o == QndOutcome::Shift ? "Shift" : "NoShift"; }
inline QndOutcome flipped(QndOutcome o) { return o == QndOutcome::Shift ? QndOutcome::NoShift : QndOutcome::Shift; }

inline std::string_view mode_name(OutputMode m, bool photon_a) {
    if (photon_a) return m == OutputMode::Upper ? "a5" : "a6";
    return m == OutputMode::Upper ? "b5" : "b6";
}

inline OutputMode route(QndOutcome o) { return o == QndOutcome::NoShift ? OutputMode::Upper : OutputMode::Lower; }

// Probe phase multiplier picked up by one photon.
inline int probe_quantum(Pol p, InternalPath path) {
    if (p == Pol::H && path == InternalPath::First) return +1;
    if (p == Pol::V && path == InternalPath::Second) return -1;
    return 0;
}

// X-quadrature readout identifies +theta with -theta.
inline QndOutcome classify(int quantum) { return quantum == 0 ? QndOutcome::NoShift : QndOutcome::Shift; }

struct OutcomePair {
    QndOutcome a = QndOutcome::NoShift;
    QndOutcome b = QndOutcome::NoShift;

    bool same() const { return a == b; }
    auto operator<=>(const OutcomePair&) const = default;
};

// Sampling and reporting order: (SS, SN, NS, NN).
inline constexpr std::array<OutcomePair, 4> kAllOutcomePairs = {
    OutcomePair{QndOutcome::Shift, QndOutcome::Shift}, OutcomePair{QndOutcome::Shift, QndOutcome::NoShift},
    OutcomePair{QndOutcome::NoShift, QndOutcome::Shift}, OutcomePair{QndOutcome::NoShift, QndOutcome::NoShift}};

struct Branch {
    Complex amplitude;
    Pol pol_a;
    Pol pol_b;
    InternalPath path_a;
    InternalPath path_b;
    int quantum_a;
    int quantum_b;

    OutcomePair outcome() const { return {classify(quantum_a), classify(quantum_b)}; }
};

struct BranchTable {
    std::array<Branch, 4> branches;

    double total_weight() const {
        double s = 0.0;
        for (const auto& b : branches) s += std::norm(b.amplitude);
        return s;
    }
};

struct DistilledPair {
    QndOutcome outcome_a;  // as recorded by each server
    QndOutcome outcome_b;
    OutputMode mode_a;
    OutputMode mode_b;
    StateVector pol_state;  // 4-dim, order HH HV VH VV
    double probability;     // Born probability of the projected outcome pair
    OutcomePair projected;  // outcome the probes were actually projected onto

    OutcomePair recorded() const { return {outcome_a, outcome_b}; }
};

// Four-branch joint photon/probe decomposition. Source a1/b1 terms travel
// the a3/b3 path and a2/b2 terms the a4/b4 path; branches are ordered by
// spatial term, then by polarization basis.
inline BranchTable build_branch_table(const HyperComponent& c) {
    const StateVector pol = bell_vector(c.pol);
    const StateVector spatial = spatial_vector(c.spatial);
    BranchTable table{};
    std::size_t n = 0;
    for (std::size_t s = 0; s < spatial.dim(); ++s) {
        if (spatial[s] == Complex{}) continue;
        const InternalPath pa = (s / 2 == 0) ? InternalPath::First : InternalPath::Second;
        const InternalPath pb = (s % 2 == 0) ? InternalPath::First : InternalPath::Second;
        for (std::size_t p = 0; p < pol.dim(); ++p) {
            if (pol[p] == Complex{}) continue;
            const Pol a = (p / 2 == 0) ? Pol::H : Pol::V;
            const Pol b = (p % 2 == 0) ? Pol::H : Pol::V;
            if (n == table.branches.size()) throw std::logic_error("build_branch_table: more than four branches");
            table.branches[n++] = {pol[p] * spatial[s], a, b, pa, pb, probe_quantum(a, pa), probe_quantum(b, pb)};
        }
    }
    if (n != table.branches.size()) throw std::logic_error("build_branch_table: fewer than four branches");
    return table;
}

inline void validate(const BranchTable& t) {
    if (std::abs(t.total_weight() - 1.0) > kEpsNorm) throw std::invalid_argument("BranchTable: weights do not sum to 1");
}

struct Conditional {
    double probability = 0.0;
    std::optional<StateVector> pol_state;  // normalized, canonical phase
};

// Post-selection on one outcome pair: surviving branches are superposed in
// the routed output modes and renormalized.
inline Conditional condition_on(const BranchTable& t, OutcomePair o) {
    std::vector<Complex> amps(4);
    double p = 0.0;
    for (const auto& b : t.branches) {
        if (b.outcome() != o) continue;
        amps[static_cast<std::size_t>(b.pol_a) * 2 + static_cast<std::size_t>(b.pol_b)] += b.amplitude;
        p += std::norm(b.amplitude);
    }
    Conditional out;
    out.probability = p;
    if (p > kEpsNorm) {
        StateVector v(std::move(amps), {"H H", "H V", "V H", "V V"});
        if (std::abs(v.squared_norm() - p) > kEpsNorm)
            throw std::logic_error("condition_on: surviving branches interfere after routing");
        out.pol_state = v.normalized().canonical_phase();
    }
    return out;
}

inline std::map<OutcomePair, double> outcome_distribution(const BranchTable& t) {
    validate(t);
    std::map<OutcomePair, double> dist;
    for (auto o : kAllOutcomePairs) dist[o] = condition_on(t, o).probability;
    return dist;
}

// Mixture-averaged probability that both servers see the same outcome.
inline double analytic_same_probability(const FidelityVector& fv, SpatialSign spatial = SpatialSign::Plus) {
    double p = 0.0;
    for (auto k : kAllBell) {
        const auto dist = outcome_distribution(build_branch_table({k, spatial, fv.weight(k)}));
        for (const auto& [o, q] : dist)
            if (o.same()) p += fv.weight(k) * q;
    }
    return p;
}

// Samples the projected outcome pair (one uniform variate), then applies the
// optional readout error to each server's record (one variate per server,
// only when homodyne_error > 0).
inline DistilledPair measure_probes(const BranchTable& t, const DeviceParams& params, RandomStream& rng) {
    validate(t);
    const double u = rng.uniform();
    double acc = 0.0;
    std::optional<OutcomePair> chosen;
    std::optional<OutcomePair> last_possible;
    for (auto o : kAllOutcomePairs) {
        const double p = condition_on(t, o).probability;
        if (p <= kEpsNorm) continue;
        last_possible = o;
        acc += p;
        if (!chosen && u < acc) chosen = o;
    }
    if (!last_possible) throw std::logic_error("measure_probes: no surviving branches");
    if (!chosen) chosen = last_possible;

    Conditional c = condition_on(t, *chosen);
    QndOutcome rec_a = chosen->a;
    QndOutcome rec_b = chosen->b;
    if (params.homodyne_error > 0.0) {
        if (rng.bernoulli(params.homodyne_error)) rec_a = flipped(rec_a);
        if (rng.bernoulli(params.homodyne_error)) rec_b = flipped(rec_b);
    }
    return {rec_a, rec_b, route(rec_a), route(rec_b), std::move(*c.pol_state), c.probability, *chosen};
}

}  // namespace hyperdistill

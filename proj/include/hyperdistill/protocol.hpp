// protocol.hpp - distillation + double-server BQC preparation, distribution to handoff
//
// Parties exchange classical messages only through the MessageBus, whose
// transcript is what the auditor inspects. Quantum state lives with the
// servers (DistilledPair); Alice works from her inbox alone.

#pragma once

#include "hyperdistill/audit.hpp"
#include "hyperdistill/linalg.hpp"
#include "hyperdistill/qnd.hpp"
#include "hyperdistill/random.hpp"
#include "hyperdistill/states.hpp"
#include "hyperdistill/transcript.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyperdistill {

enum class BellClass { Phi, Psi };

inline std::string_view to_string(BellClass c) { return c == BellClass::Phi ? "PhiClass" : "PsiClass"; }

// Same outcomes at both servers -> Phi class, different -> Psi class.
inline BellClass infer_class(QndOutcome bob1, QndOutcome bob2) { return bob1 == bob2 ? BellClass::Phi : BellClass::Psi; }

inline constexpr int kAngleSteps = 8;

// k * pi/4, k = 0..7
inline double angle_of_step(int k) { return k * std::numbers::pi / 4.0; }

struct BqcRound {
    std::size_t index = 0;  // 1-based, j
    int angle_step = 0;     // theta_j = angle_step * pi/4
    double theta = 0.0;
    double sent_angle = 0.0;  // +theta for Phi class, -theta for Psi class
    BellClass bell_class = BellClass::Phi;
    std::optional<int> result;  // a_j once Bob1 reports
};

class MessageBus {
public:
    MessageBus(std::string run_id, std::uint64_t seed) : transcript_(std::move(run_id), seed) {}

    const Message& send(Phase phase, Party from, Party to, Payload payload) {
        return transcript_.append(phase, from, to, std::move(payload));
    }

    // Messages addressed to `p` in the given phase, in delivery order.
    std::vector<Message> inbox(Party p, Phase phase) const {
        std::vector<Message> out;
        for (const auto& m : transcript_.messages())
            if (m.to == p && m.phase == phase) out.push_back(m);
        return out;
    }

    const Transcript& transcript() const { return transcript_; }

private:
    Transcript transcript_;
};

// ---------------------------------------------------------------------------
// Distribution
// ---------------------------------------------------------------------------

inline std::vector<HyperComponent> run_distribution(std::size_t m, const FidelityVector& fv, double dephase_p,
                                                    RandomStream& rng, MessageBus& bus) {
    if (m == 0) throw std::invalid_argument("run_distribution: pair count must be at least 1");
    if (!(dephase_p >= 0.0 && dephase_p <= 1.0)) throw std::invalid_argument("run_distribution: dephase_p outside [0, 1]");
    std::vector<HyperComponent> out;
    out.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
        HyperComponent c = sample_component(fv, rng);
        if (dephase_p > 0.0) c = spatial_dephase(c, dephase_p, rng);
        out.push_back(c);
        bus.send(Phase::Distribution, Party::Source, Party::Bob1, Marker{std::string(kQuantumDelivery)});
        bus.send(Phase::Distribution, Party::Source, Party::Bob2, Marker{std::string(kQuantumDelivery)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Distillation
// ---------------------------------------------------------------------------

// Misbehaving-server model: Bob1 flips his reported outcome with this
// probability. Only the report is affected, never the state.
struct FaultModel {
    double bob1_flip_p = 0.0;
};

struct DistillationResult {
    std::vector<DistilledPair> pairs;
    std::vector<BellClass> classes;       // as inferred by Alice from her inbox
    std::vector<BellClass> true_classes;  // from the projected outcomes, never messaged
};

// Alice pairs the j-th Distillation report from each server.
inline std::vector<BellClass> alice_infer_classes(const MessageBus& bus) {
    std::vector<QndOutcome> from1, from2;
    for (const auto& m : bus.inbox(Party::Alice, Phase::Distillation)) {
        const auto o = std::get<QndOutcome>(m.payload);
        if (m.from == Party::Bob1) from1.push_back(o);
        else if (m.from == Party::Bob2) from2.push_back(o);
    }
    if (from1.size() != from2.size()) throw std::logic_error("alice_infer_classes: unequal report counts");
    std::vector<BellClass> out;
    out.reserve(from1.size());
    for (std::size_t j = 0; j < from1.size(); ++j) out.push_back(infer_class(from1[j], from2[j]));
    return out;
}

inline DistillationResult run_distillation(const std::vector<HyperComponent>& components, const DeviceParams& params,
                                           RandomStream& rng, MessageBus& bus, const FaultModel& faults = {},
                                           RandomStream* fault_rng = nullptr) {
    if (components.empty()) throw std::invalid_argument("run_distillation: no pairs");
    params.validate();
    if (!(faults.bob1_flip_p >= 0.0 && faults.bob1_flip_p <= 1.0))
        throw std::invalid_argument("run_distillation: bob1_flip_p outside [0, 1]");
    if (faults.bob1_flip_p > 0.0 && fault_rng == nullptr)
        throw std::invalid_argument("run_distillation: fault model needs its own stream");

    DistillationResult out;
    out.pairs.reserve(components.size());
    for (const auto& c : components) {
        DistilledPair pair = measure_probes(build_branch_table(c), params, rng);
        QndOutcome report1 = pair.outcome_a;
        if (faults.bob1_flip_p > 0.0 && fault_rng->bernoulli(faults.bob1_flip_p)) report1 = flipped(report1);
        bus.send(Phase::Distillation, Party::Bob1, Party::Alice, report1);
        bus.send(Phase::Distillation, Party::Bob2, Party::Alice, pair.outcome_b);
        out.true_classes.push_back(pair.projected.same() ? BellClass::Phi : BellClass::Psi);
        out.pairs.push_back(std::move(pair));
    }
    out.classes = alice_infer_classes(bus);
    return out;
}

// ---------------------------------------------------------------------------
// Angle announcement (Alice -> Bob1)
// ---------------------------------------------------------------------------

inline std::vector<BqcRound> alice_announce_angles(const std::vector<BellClass>& classes, RandomStream& rng,
                                                   MessageBus& bus) {
    std::vector<BqcRound> rounds;
    rounds.reserve(classes.size());
    for (std::size_t j = 0; j < classes.size(); ++j) {
        BqcRound r;
        r.index = j + 1;
        r.angle_step = static_cast<int>(rng.uniform_index(kAngleSteps));
        r.theta = angle_of_step(r.angle_step);
        r.bell_class = classes[j];
        r.sent_angle = classes[j] == BellClass::Phi ? r.theta : -r.theta;
        bus.send(Phase::AngleAnnouncement, Party::Alice, Party::Bob1, Angle{r.sent_angle});
        rounds.push_back(r);
    }
    return rounds;
}

// ---------------------------------------------------------------------------
// Bob1 measures his photon in {|0> +/- e^{-i phi}|1>}
// ---------------------------------------------------------------------------

struct Bob1Measurement {
    int bit;
    double probability;    // Born probability of `bit`
    StateVector residual;  // Bob2's qubit, normalized, canonical phase
};

// Unnormalized Bob2 state after projecting Bob1's qubit onto
// (|0> + (-1)^bit e^{-i phi}|1>)/sqrt2.
inline StateVector project_first_qubit(const StateVector& pair_state, double phi, int bit) {
    const double r = 1.0 / std::sqrt(2.0);
    const Complex c0 = r;
    const Complex c1 = (bit == 0 ? r : -r) * std::exp(Complex(0.0, -phi));
    std::vector<Complex> out(2);
    for (std::size_t j = 0; j < 2; ++j) out[j] = std::conj(c0) * pair_state[j] + std::conj(c1) * pair_state[2 + j];
    return {std::move(out), {"H", "V"}};
}

inline Bob1Measurement bob1_measure(const DistilledPair& pair, double sent_angle, RandomStream& rng, MessageBus& bus) {
    const StateVector& psi = pair.pol_state;
    if (psi.dim() != 4) throw std::invalid_argument("bob1_measure: pair state must be two qubits");
    if (!psi.is_normalized()) throw std::invalid_argument("bob1_measure: pair state not normalized");

    const StateVector v0 = project_first_qubit(psi, sent_angle, 0);
    const double p0 = v0.squared_norm();
    const int bit = rng.uniform() < p0 ? 0 : 1;
    const StateVector v = bit == 0 ? v0 : project_first_qubit(psi, sent_angle, 1);
    bus.send(Phase::ResultReport, Party::Bob1, Party::Alice, Bit{bit});
    return {bit, bit == 0 ? p0 : 1.0 - p0, v.normalized().canonical_phase()};
}

// ---------------------------------------------------------------------------
// Handoff to the single-server protocol between Alice and Bob2
// ---------------------------------------------------------------------------

struct HandoffSummary {
    std::size_t pairs = 0;
    std::size_t phi_class = 0;
    std::size_t psi_class = 0;
    std::vector<StateVector> residuals;
};

inline HandoffSummary handoff_single_server(const std::vector<BqcRound>& rounds, std::vector<StateVector> residuals,
                                            MessageBus& bus) {
    if (rounds.empty()) throw std::invalid_argument("handoff_single_server: no rounds");
    if (residuals.size() != rounds.size()) throw std::invalid_argument("handoff_single_server: residual count mismatch");
    HandoffSummary s;
    for (const auto& r : rounds) {
        if (!r.result) throw std::invalid_argument("handoff_single_server: round " + std::to_string(r.index) + " incomplete");
        (r.bell_class == BellClass::Phi ? s.phi_class : s.psi_class)++;
    }
    s.pairs = rounds.size();
    s.residuals = std::move(residuals);
    bus.send(Phase::Handoff, Party::Alice, Party::Bob2, Marker{std::string(kHandoff)});
    return s;
}

// ---------------------------------------------------------------------------
// Whole run
// ---------------------------------------------------------------------------

struct ProtocolConfig {
    std::size_t pairs = 1000;
    FidelityVector fidelities{0.7, 0.1, 0.1, 0.1};
    DeviceParams device;
    double dephase_p = 0.0;
    FaultModel faults;
};

struct ProtocolRun {
    std::vector<HyperComponent> components;
    DistillationResult distillation;
    std::vector<BqcRound> rounds;
    std::vector<Bob1Measurement> measurements;
    HandoffSummary handoff;
    Transcript transcript;
    AuditReport audit;
};

// Drives the five phases in order; each step may run exactly once.
class ProtocolEngine {
public:
    enum class Stage { Ready, Distributed, Distilled, Announced, Measured, HandedOff };

    ProtocolEngine(ProtocolConfig cfg, std::uint64_t seed, std::string run_id = "run")
        : cfg_(std::move(cfg)), root_(seed, "run"), bus_(std::move(run_id), seed) {
        cfg_.device.validate();
    }

    Stage stage() const { return stage_; }
    const MessageBus& bus() const { return bus_; }

    const std::vector<HyperComponent>& distribute() {
        advance(Stage::Ready, Stage::Distributed);
        auto rng = root_.split("distribution");
        components_ = run_distribution(cfg_.pairs, cfg_.fidelities, cfg_.dephase_p, rng, bus_);
        return components_;
    }

    const DistillationResult& distill() {
        advance(Stage::Distributed, Stage::Distilled);
        auto rng = root_.split("distillation");
        auto fault_rng = root_.split("fault");
        distillation_ = run_distillation(components_, cfg_.device, rng, bus_, cfg_.faults, &fault_rng);
        return distillation_;
    }

    const std::vector<BqcRound>& announce() {
        advance(Stage::Distilled, Stage::Announced);
        auto rng = root_.split("angles");
        rounds_ = alice_announce_angles(distillation_.classes, rng, bus_);
        return rounds_;
    }

    // Bob1 consumes his AngleAnnouncement inbox in order, one pair per round.
    const std::vector<Bob1Measurement>& measure() {
        advance(Stage::Announced, Stage::Measured);
        auto rng = root_.split("bob1");
        const auto angles = bus_.inbox(Party::Bob1, Phase::AngleAnnouncement);
        if (angles.size() != distillation_.pairs.size()) throw std::logic_error("measure: angle/pair count mismatch");
        for (std::size_t j = 0; j < angles.size(); ++j) {
            const double sent = std::get<Angle>(angles[j].payload).radians;
            measurements_.push_back(bob1_measure(distillation_.pairs[j], sent, rng, bus_));
        }
        const auto reports = bus_.inbox(Party::Alice, Phase::ResultReport);
        for (std::size_t j = 0; j < rounds_.size(); ++j) rounds_[j].result = std::get<Bit>(reports.at(j).payload).value;
        return measurements_;
    }

    const HandoffSummary& handoff() {
        advance(Stage::Measured, Stage::HandedOff);
        std::vector<StateVector> residuals;
        residuals.reserve(measurements_.size());
        for (const auto& m : measurements_) residuals.push_back(m.residual);
        handoff_ = handoff_single_server(rounds_, std::move(residuals), bus_);
        return handoff_;
    }

    ProtocolRun run() {
        distribute();
        distill();
        announce();
        measure();
        handoff();
        return {components_, distillation_, rounds_, measurements_, handoff_, bus_.transcript(), audit(bus_.transcript())};
    }

private:
    void advance(Stage expected, Stage next) {
        if (stage_ != expected) throw std::logic_error("ProtocolEngine: step called out of order");
        stage_ = next;
    }

    ProtocolConfig cfg_;
    RandomStream root_;
    MessageBus bus_;
    Stage stage_ = Stage::Ready;
    std::vector<HyperComponent> components_;
    DistillationResult distillation_;
    std::vector<BqcRound> rounds_;
    std::vector<Bob1Measurement> measurements_;
    HandoffSummary handoff_;
};

}  // namespace hyperdistill

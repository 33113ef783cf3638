// audit.hpp - double-server communication rules over a transcript
//
// The servers must never talk to each other, and the client must not send
// them anything while distribution and distillation are running. Angle
// announcements go to Bob1 only and only Bob1 reports measurement bits.

#pragma once

#include "hyperdistill/transcript.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hyperdistill {

enum class ViolationKind {
    BobToBob,        // (a) any message between Bob1 and Bob2
    AliceFeedback,   // (b) Alice -> Bob during Distribution or Distillation
    AngleToBob2,     // (c) AngleAnnouncement addressed to Bob2
    ResultFromBob2,  // (d) ResultReport sent by Bob2
};

inline std::string_view to_string(ViolationKind k) {
    switch (k) {
        case ViolationKind::BobToBob: return "bob_to_bob";
        case ViolationKind::AliceFeedback: return "alice_feedback";
        case ViolationKind::AngleToBob2: return "angle_to_bob2";
        case ViolationKind::ResultFromBob2: return "result_from_bob2";
    }
    return "?";
}

struct Violation {
    ViolationKind kind;
    std::uint64_t seq;
    std::string line;
};

struct AuditReport {
    std::vector<Violation> violations;

    bool pass() const { return violations.empty(); }
};

inline AuditReport audit(const Transcript& transcript) {
    AuditReport report;
    for (const auto& m : transcript.messages()) {
        auto flag = [&](ViolationKind k) { report.violations.push_back({k, m.seq, format_message(m)}); };
        if ((m.from == Party::Bob1 && m.to == Party::Bob2) || (m.from == Party::Bob2 && m.to == Party::Bob1))
            flag(ViolationKind::BobToBob);
        if (m.from == Party::Alice && is_bob(m.to) &&
            (m.phase == Phase::Distribution || m.phase == Phase::Distillation))
            flag(ViolationKind::AliceFeedback);
        if (m.phase == Phase::AngleAnnouncement && m.to == Party::Bob2) flag(ViolationKind::AngleToBob2);
        if (m.phase == Phase::ResultReport && m.from == Party::Bob2) flag(ViolationKind::ResultFromBob2);
    }
    return report;
}

}  // namespace hyperdistill

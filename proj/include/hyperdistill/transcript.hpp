// transcript.hpp - classical messages between Source, Alice, Bob1 and Bob2
//
// Wire format, one message per line:
//
//     seq|phase|from|to|payload_kind|payload_value
//     17|Distillation|Bob1|Alice|qnd_outcome|Shift
//
// Lines starting with '#' are metadata (run_id, seed) and are ignored by
// the message parser.

#pragma once

#include "hyperdistill/qnd.hpp"

#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

namespace hyperdistill {

enum class Party { Source, Alice, Bob1, Bob2 };
enum class Phase { Distribution, Distillation, AngleAnnouncement, ResultReport, Handoff };

inline std::string_view to_string(Party p) {
    switch (p) {
        case Party::Source: return "Source";
        case Party::Alice: return "Alice";
        case Party::Bob1: return "Bob1";
        case Party::Bob2: return "Bob2";
    }
    return "?";
}

inline std::string_view to_string(Phase p) {
    switch (p) {
        case Phase::Distribution: return "Distribution";
        case Phase::Distillation: return "Distillation";
        case Phase::AngleAnnouncement: return "AngleAnnouncement";
        case Phase::ResultReport: return "ResultReport";
        case Phase::Handoff: return "Handoff";
    }
    return "?";
}

inline bool is_bob(Party p) { return p == Party::Bob1 || p == Party::Bob2; }

struct Angle {
    double radians;
    friend bool operator==(const Angle&, const Angle&) = default;
};
struct Bit {
    int value;
    friend bool operator==(const Bit&, const Bit&) = default;
};
// Quantum delivery or control marker; carries no classical information.
struct Marker {
    std::string value;
    friend bool operator==(const Marker&, const Marker&) = default;
};

inline constexpr std::string_view kQuantumDelivery = "quantum_delivery";
inline constexpr std::string_view kHandoff = "handoff";

using Payload = std::variant<QndOutcome, Angle, Bit, Marker>;

inline std::string_view payload_kind(const Payload& p) {
    switch (p.index()) {
        case 0: return "qnd_outcome";
        case 1: return "angle";
        case 2: return "bit";
        default: return "marker";
    }
}

inline std::string_view expected_payload_kind(Phase ph) {
    switch (ph) {
        case Phase::Distribution: return "marker";
        case Phase::Distillation: return "qnd_outcome";
        case Phase::AngleAnnouncement: return "angle";
        case Phase::ResultReport: return "bit";
        case Phase::Handoff: return "marker";
    }
    return "?";
}

// Shortest decimal that round-trips exactly.
inline std::string format_double(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return {buf, end};
}

inline double parse_double(std::string_view s) {
    double x = 0.0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc{} || end != s.data() + s.size())
        throw std::invalid_argument("parse_double: malformed number '" + std::string(s) + "'");
    return x;
}

inline std::string payload_value(const Payload& p) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, QndOutcome>) return std::string(to_string(v));
            else if constexpr (std::is_same_v<T, Angle>) return format_double(v.radians);
            else if constexpr (std::is_same_v<T, Bit>) return std::to_string(v.value);
            else return v.value;
        },
        p);
}

struct Message {
    std::uint64_t seq;
    Phase phase;
    Party from;
    Party to;
    Payload payload;

    friend bool operator==(const Message&, const Message&) = default;
};

inline std::string format_message(const Message& m) {
    std::string s = std::to_string(m.seq);
    s += '|';
    s += to_string(m.phase);
    s += '|';
    s += to_string(m.from);
    s += '|';
    s += to_string(m.to);
    s += '|';
    s += payload_kind(m.payload);
    s += '|';
    s += payload_value(m.payload);
    return s;
}

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline Party parse_party(std::string_view s) {
    for (auto p : {Party::Source, Party::Alice, Party::Bob1, Party::Bob2})
        if (to_string(p) == s) return p;
    throw std::invalid_argument("unknown party '" + std::string(s) + "'");
}

inline Phase parse_phase(std::string_view s) {
    for (auto p : {Phase::Distribution, Phase::Distillation, Phase::AngleAnnouncement, Phase::ResultReport,
                   Phase::Handoff})
        if (to_string(p) == s) return p;
    throw std::invalid_argument("unknown phase '" + std::string(s) + "'");
}

inline Payload parse_payload(std::string_view kind, std::string_view value) {
    if (kind == "qnd_outcome") {
        if (value == "Shift") return QndOutcome::Shift;
        if (value == "NoShift") return QndOutcome::NoShift;
        throw std::invalid_argument("bad qnd_outcome '" + std::string(value) + "'");
    }
    if (kind == "angle") return Angle{parse_double(value)};
    if (kind == "bit") {
        if (value == "0") return Bit{0};
        if (value == "1") return Bit{1};
        throw std::invalid_argument("bad bit '" + std::string(value) + "'");
    }
    if (kind == "marker") {
        if (value.empty()) throw std::invalid_argument("empty marker");
        return Marker{std::string(value)};
    }
    throw std::invalid_argument("unknown payload kind '" + std::string(kind) + "'");
}

}  // namespace detail

inline Message parse_message(std::string_view line) {
    const auto f = detail::split_fields(line, '|');
    if (f.size() != 6) throw std::invalid_argument("transcript line must have 6 fields: '" + std::string(line) + "'");
    std::uint64_t seq = 0;
    auto [end, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), seq);
    if (ec != std::errc{} || end != f[0].data() + f[0].size())
        throw std::invalid_argument("bad seq '" + std::string(f[0]) + "'");
    return {seq, detail::parse_phase(f[1]), detail::parse_party(f[2]), detail::parse_party(f[3]),
            detail::parse_payload(f[4], f[5])};
}

// Append-only, strictly increasing seq, payload kind consistent with phase.
class Transcript {
public:
    Transcript(std::string run_id, std::uint64_t seed) : run_id_(std::move(run_id)), seed_(seed) {}

    const Message& append(Phase phase, Party from, Party to, Payload payload) {
        const std::uint64_t seq = messages_.empty() ? 1 : messages_.back().seq + 1;
        return append(Message{seq, phase, from, to, std::move(payload)});
    }

    const Message& append(Message m) {
        if (!messages_.empty() && m.seq <= messages_.back().seq)
            throw std::invalid_argument("Transcript: seq must be strictly increasing");
        if (payload_kind(m.payload) != expected_payload_kind(m.phase))
            throw std::invalid_argument("Transcript: payload kind inconsistent with phase at seq " +
                                        std::to_string(m.seq));
        messages_.push_back(std::move(m));
        return messages_.back();
    }

    const std::vector<Message>& messages() const { return messages_; }
    const std::string& run_id() const { return run_id_; }
    std::uint64_t seed() const { return seed_; }
    std::size_t size() const { return messages_.size(); }

    std::size_t count(Phase phase) const {
        std::size_t n = 0;
        for (const auto& m : messages_) n += (m.phase == phase);
        return n;
    }

    void write(std::ostream& out) const {
        out << "# run_id=" << run_id_ << '\n' << "# seed=" << seed_ << '\n';
        for (const auto& m : messages_) out << format_message(m) << '\n';
    }

    static Transcript read(std::istream& in) {
        std::string run_id = "unknown";
        std::uint64_t seed = 0;
        std::vector<Message> msgs;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            if (line.front() == '#') {
                const std::string_view body = std::string_view(line).substr(1);
                const auto trimmed = body.substr(body.find_first_not_of(' ') == std::string_view::npos
                                                     ? body.size()
                                                     : body.find_first_not_of(' '));
                if (trimmed.starts_with("run_id=")) run_id = std::string(trimmed.substr(7));
                if (trimmed.starts_with("seed=")) seed = static_cast<std::uint64_t>(std::stoull(std::string(trimmed.substr(5))));
                continue;
            }
            msgs.push_back(parse_message(line));
        }
        Transcript t(run_id, seed);
        for (auto& m : msgs) t.append(std::move(m));
        return t;
    }

private:
    std::string run_id_;
    std::uint64_t seed_;
    std::vector<Message> messages_;
};

}  // namespace hyperdistill

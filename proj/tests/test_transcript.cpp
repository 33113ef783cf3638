#include "hyperdistill/transcript.hpp"
#include "hyperdistill/random.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace hyperdistill;

TEST(Transcript, LineFormat) {
    Transcript t("r", 1);
    for (int i = 0; i < 16; ++i) t.append(Phase::Distribution, Party::Source, Party::Bob1, Marker{"quantum_delivery"});
    const auto& m = t.append(Phase::Distillation, Party::Bob1, Party::Alice, QndOutcome::Shift);
    EXPECT_EQ(format_message(m), "17|Distillation|Bob1|Alice|qnd_outcome|Shift");
    const auto& a = t.append(Phase::AngleAnnouncement, Party::Alice, Party::Bob1, Angle{-std::numbers::pi / 4});
    EXPECT_EQ(format_message(a), "18|AngleAnnouncement|Alice|Bob1|angle|-0.7853981633974483");
    const auto& b = t.append(Phase::ResultReport, Party::Bob1, Party::Alice, Bit{1});
    EXPECT_EQ(format_message(b), "19|ResultReport|Bob1|Alice|bit|1");
}

TEST(Transcript, RejectsNonMonotoneSeqAndWrongPayloadKind) {
    Transcript t("r", 0);
    t.append(Message{5, Phase::Handoff, Party::Alice, Party::Bob2, Marker{"handoff"}});
    EXPECT_THROW(t.append(Message{5, Phase::Handoff, Party::Alice, Party::Bob2, Marker{"handoff"}}),
                 std::invalid_argument);
    EXPECT_THROW(t.append(Phase::Distillation, Party::Bob1, Party::Alice, Bit{0}), std::invalid_argument);
    EXPECT_THROW(t.append(Phase::AngleAnnouncement, Party::Alice, Party::Bob1, QndOutcome::Shift),
                 std::invalid_argument);
}

TEST(Transcript, ParseRejectsMalformedLines) {
    EXPECT_THROW(parse_message("1|Distillation|Bob1|Alice|qnd_outcome"), std::invalid_argument);
    EXPECT_THROW(parse_message("x|Distillation|Bob1|Alice|qnd_outcome|Shift"), std::invalid_argument);
    EXPECT_THROW(parse_message("1|Gossip|Bob1|Alice|qnd_outcome|Shift"), std::invalid_argument);
    EXPECT_THROW(parse_message("1|Distillation|Eve|Alice|qnd_outcome|Shift"), std::invalid_argument);
    EXPECT_THROW(parse_message("1|Distillation|Bob1|Alice|qnd_outcome|Maybe"), std::invalid_argument);
    EXPECT_THROW(parse_message("1|ResultReport|Bob1|Alice|bit|2"), std::invalid_argument);
    EXPECT_THROW(parse_message("1|AngleAnnouncement|Alice|Bob1|angle|pi"), std::invalid_argument);
}

// Random well-formed transcripts survive write -> read unchanged.
TEST(Transcript, WriteReadRoundTripProperty) {
    RandomStream rng(2718);
    const std::array<Party, 4> parties = {Party::Source, Party::Alice, Party::Bob1, Party::Bob2};
    const std::array<Phase, 5> phases = {Phase::Distribution, Phase::Distillation, Phase::AngleAnnouncement,
                                         Phase::ResultReport, Phase::Handoff};
    for (int trial = 0; trial < 50; ++trial) {
        Transcript t("trial-" + std::to_string(trial), rng.uniform_index(1000));
        const std::size_t n = 1 + rng.uniform_index(40);
        for (std::size_t i = 0; i < n; ++i) {
            const Phase ph = phases[rng.uniform_index(5)];
            Payload p;
            switch (ph) {
                case Phase::Distillation: p = rng.bernoulli(0.5) ? QndOutcome::Shift : QndOutcome::NoShift; break;
                case Phase::AngleAnnouncement: p = Angle{(rng.uniform() - 0.5) * 7.0}; break;
                case Phase::ResultReport: p = Bit{static_cast<int>(rng.uniform_index(2))}; break;
                default: p = Marker{"m" + std::to_string(rng.uniform_index(9))}; break;
            }
            t.append(ph, parties[rng.uniform_index(4)], parties[rng.uniform_index(4)], p);
        }
        std::ostringstream out;
        t.write(out);
        std::istringstream in(out.str());
        const Transcript back = Transcript::read(in);
        EXPECT_EQ(back.messages(), t.messages());
        EXPECT_EQ(back.run_id(), t.run_id());
        EXPECT_EQ(back.seed(), t.seed());
    }
}

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace floorkit {

// Contiguous speech by one participant, [start_s, end_s).
struct Turn {
    std::string participant;
    double start_s = 0.0;
    double end_s = 0.0;

    double duration_s() const { return end_s - start_s; }
};

enum class TransitionKind { Gap, BetweenOverlap, WithinOverlap };

const char* to_string(TransitionKind kind);

// Inter-speaker event. For gap/between-overlap (floor transfers), `from` is
// the speaker yielding the floor and `to` the one taking it; for
// within-overlap, `from` holds the floor and `to` is the overlapper.
struct TransitionEvent {
    TransitionKind kind = TransitionKind::Gap;
    double duration_s = 0.0;
    double at_s = 0.0;
    std::string from;
    std::string to;
};

// Maximal 1-runs of the track, with runs merged when the silence between
// them is strictly shorter than min_silence_ms (a silence of exactly the
// threshold splits). Values of -1 count as silence.
std::vector<Turn> segment_turns(std::span<const std::int8_t> track, int rate_hz,
                                double min_silence_ms = 180.0,
                                const std::string& participant = {});

// Classifies the interplay of two speakers' turn sequences:
//   gap              floor transfer with silence in between
//   between-overlap  floor transfer where the new turn starts before the
//                    current one ends and outlasts it
//   within-overlap   a turn fully contained in the other speaker's turn
//                    (no transfer)
// Turns starting at the same instant: the longer one holds the floor; equal
// lengths resolve to the lexicographically smaller participant id.
// Exactly abutting turns (zero silence, zero overlap) emit no event.
std::vector<TransitionEvent> classify_transitions(const std::vector<Turn>& turns_a,
                                                  const std::vector<Turn>& turns_b);

struct DurationSummary {
    std::size_t count = 0;
    std::optional<double> mean_s;
    std::optional<double> median_s;
    std::optional<double> mode_s;  // center of the densest 10 ms bin
};

struct OverlapStats {
    DurationSummary gap;
    DurationSummary between_overlap;
    DurationSummary within_overlap;
    // Fraction of floor transfers that happened in overlap:
    // between / (gap + between). Absent when there are no transfers.
    std::optional<double> overlap_fraction;
};

OverlapStats overlap_stats(const std::vector<TransitionEvent>& events);

} // namespace floorkit

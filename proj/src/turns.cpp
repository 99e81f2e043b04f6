#include "floorkit/turns.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace floorkit {

const char* to_string(TransitionKind kind) {
    switch (kind) {
    case TransitionKind::Gap: return "gap";
    case TransitionKind::BetweenOverlap: return "between-overlap";
    case TransitionKind::WithinOverlap: return "within-overlap";
    }
    return "unknown";
}

std::vector<Turn> segment_turns(std::span<const std::int8_t> track, int rate_hz,
                                double min_silence_ms, const std::string& participant) {
    if (rate_hz <= 0) throw std::invalid_argument("rate_hz must be positive");
    if (min_silence_ms < 0) throw std::invalid_argument("min_silence_ms must be >= 0");

    // Raw maximal 1-runs as [first, last) frame ranges.
    std::vector<std::pair<std::size_t, std::size_t>> runs;
    std::size_t f = 0;
    while (f < track.size()) {
        if (track[f] != 1) {
            ++f;
            continue;
        }
        std::size_t end = f;
        while (end < track.size() && track[end] == 1) ++end;
        runs.emplace_back(f, end);
        f = end;
    }

    // Merge across silences strictly shorter than the delimiter. Both sides
    // of the comparison are exact in double for annotation-scale values.
    std::vector<std::pair<std::size_t, std::size_t>> merged;
    for (const auto& run : runs) {
        if (!merged.empty() &&
            static_cast<double>(run.first - merged.back().second) * 1000.0 <
                min_silence_ms * rate_hz) {
            merged.back().second = run.second;
        } else {
            merged.push_back(run);
        }
    }

    std::vector<Turn> turns;
    turns.reserve(merged.size());
    for (const auto& [first, last] : merged) {
        turns.push_back({participant, static_cast<double>(first) / rate_hz,
                         static_cast<double>(last) / rate_hz});
    }
    return turns;
}

std::vector<TransitionEvent> classify_transitions(const std::vector<Turn>& turns_a,
                                                  const std::vector<Turn>& turns_b) {
    std::vector<Turn> timeline;
    timeline.reserve(turns_a.size() + turns_b.size());
    timeline.insert(timeline.end(), turns_a.begin(), turns_a.end());
    timeline.insert(timeline.end(), turns_b.begin(), turns_b.end());
    // Equal starts: the longer turn holds the floor; equal lengths resolve
    // by participant id so (a,b) and (b,a) classify identically.
    std::sort(timeline.begin(), timeline.end(), [](const Turn& u, const Turn& v) {
        if (u.start_s != v.start_s) return u.start_s < v.start_s;
        if (u.end_s != v.end_s) return u.end_s > v.end_s;
        return u.participant < v.participant;
    });

    std::vector<TransitionEvent> events;
    const Turn* current = nullptr;
    for (const auto& turn : timeline) {
        if (!current || turn.participant == current->participant) {
            current = &turn;  // first turn, or a same-speaker pause: no event
            continue;
        }
        if (turn.end_s <= current->end_s) {
            events.push_back({TransitionKind::WithinOverlap, turn.duration_s(), turn.start_s,
                              current->participant, turn.participant});
            continue;
        }
        if (turn.start_s > current->end_s) {
            events.push_back({TransitionKind::Gap, turn.start_s - current->end_s, current->end_s,
                              current->participant, turn.participant});
        } else if (turn.start_s < current->end_s) {
            events.push_back({TransitionKind::BetweenOverlap, current->end_s - turn.start_s,
                              turn.start_s, current->participant, turn.participant});
        }
        // exact abutment transfers the floor without an event
        current = &turn;
    }
    return events;
}

namespace {

DurationSummary summarize(std::vector<double> durations) {
    DurationSummary summary;
    summary.count = durations.size();
    if (durations.empty()) return summary;

    double total = 0.0;
    for (double d : durations) total += d;
    summary.mean_s = total / durations.size();

    std::sort(durations.begin(), durations.end());
    const std::size_t n = durations.size();
    summary.median_s =
        (n % 2 == 1) ? durations[n / 2] : 0.5 * (durations[n / 2 - 1] + durations[n / 2]);

    // 10 ms histogram; ties go to the shortest bin.
    std::map<long long, std::size_t> bins;
    for (double d : durations) bins[static_cast<long long>(std::floor(d / 0.01))]++;
    long long best_bin = bins.begin()->first;
    std::size_t best_count = 0;
    for (const auto& [bin, count] : bins) {
        if (count > best_count) {
            best_bin = bin;
            best_count = count;
        }
    }
    summary.mode_s = (static_cast<double>(best_bin) + 0.5) * 0.01;
    return summary;
}

} // namespace

OverlapStats overlap_stats(const std::vector<TransitionEvent>& events) {
    std::vector<double> gaps, betweens, withins;
    for (const auto& event : events) {
        switch (event.kind) {
        case TransitionKind::Gap: gaps.push_back(event.duration_s); break;
        case TransitionKind::BetweenOverlap: betweens.push_back(event.duration_s); break;
        case TransitionKind::WithinOverlap: withins.push_back(event.duration_s); break;
        }
    }

    OverlapStats stats;
    const std::size_t transfers = gaps.size() + betweens.size();
    if (transfers > 0) {
        stats.overlap_fraction = static_cast<double>(betweens.size()) / transfers;
    }
    stats.gap = summarize(std::move(gaps));
    stats.between_overlap = summarize(std::move(betweens));
    stats.within_overlap = summarize(std::move(withins));
    return stats;
}

} // namespace floorkit

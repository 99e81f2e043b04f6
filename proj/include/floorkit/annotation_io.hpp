#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "floorkit/util.hpp"

namespace floorkit {

// Sample value meaning "participant not visible / annotation invalid".
inline constexpr std::int8_t kNotVisible = -1;

// Per-participant binary speaking status sampled at a fixed rate.
// samples[p][f] is in {0, 1, -1}; all tracks have equal length.
struct SpeakingMatrix {
    int rate_hz = 20;
    double origin_s = 0.0;
    std::vector<std::string> participants;
    std::vector<std::vector<std::int8_t>> samples;

    std::size_t n_frames() const { return samples.empty() ? 0 : samples.front().size(); }
    double duration_s() const { return static_cast<double>(n_frames()) / rate_hz; }
    std::optional<std::size_t> find_participant(const std::string& id) const;
};

// One annotated F-formation. Times are integer seconds per the annotation
// granularity; lifetime is the half-open interval [start_s, end_s).
struct FFormation {
    std::string id;
    std::vector<std::string> members;
    int start_s = 0;
    int end_s = 0;

    int cardinality() const { return static_cast<int>(members.size()); }
};

struct LintFinding {
    std::string fformation_id;
    std::string participant;
    double turn_start_s = 0.0;
    double turn_duration_s = 0.0;
    std::string rule;
};

struct LintReport {
    std::vector<LintFinding> findings;
};

// Wide CSV: header `frame,<pid1>,<pid2>,...`, one row per frame with
// strictly contiguous frame indices starting at 0. Cells are 0, 1 or -1;
// an empty cell reads as -1. Row/column numbers in errors are 1-based and
// count the header row.
SpeakingMatrix parse_speaking_csv(std::istream& in, int rate_hz);
SpeakingMatrix parse_speaking_csv(const std::string& text, int rate_hz);
void write_speaking_csv(const SpeakingMatrix& matrix, std::ostream& out);

// CSV header `id,start_s,end_s,members`; members joined by ';'.
// start_s/end_s must be integers (fractional values are rejected).
std::vector<FFormation> parse_fformations_csv(std::istream& in);
std::vector<FFormation> parse_fformations_csv(const std::string& text);
void write_fformations_csv(const std::vector<FFormation>& ffs, std::ostream& out);

struct DroppedFFormation {
    FFormation fformation;
    std::string reason;  // "cardinality" or "out-of-view"
};

struct FilterResult {
    std::vector<FFormation> kept;
    std::vector<DroppedFFormation> dropped;
};

// Keeps F-formations with cardinality >= min_cardinality whose members are
// all visible for the whole lifetime. A lifetime extending past the matrix
// extent counts as out-of-view. Throws if a member is not in the matrix.
FilterResult filter_fformations(const std::vector<FFormation>& ffs, const SpeakingMatrix& matrix,
                                int min_cardinality);

// Flags maximal 1-runs of length >= max_turn_s by any member inside an
// F-formation lifetime. Runs are clipped to the lifetime before measuring.
LintReport lint_turns(const SpeakingMatrix& matrix, const std::vector<FFormation>& ffs,
                      double max_turn_s = 20.0);

} // namespace floorkit

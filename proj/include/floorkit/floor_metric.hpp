#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "floorkit/annotation_io.hpp"

namespace floorkit {

// Sliding-window configuration. Windows advance in steps of step_s relative
// to the F-formation start.
struct WindowConfig {
    int d_s = 1;
    int step_s = 1;
    int rate_hz = 20;
};

// One (F-formation, window duration) data point: y is the maximum number of
// simultaneous full-window speakers over all window positions.
struct Observation {
    std::string fformation_id;
    int cardinality = 0;
    int d_s = 0;
    int y = 0;
    int n_windows = 0;
};

// Count of -1 samples that were treated as silence downstream of filtering.
struct WarningTally {
    std::uint64_t invalid_samples = 0;
};

// Number of members speaking through the entire window [t_s, t_s + d_s).
// Frame range is [floor(t*rate), floor((t+d)*rate)). -1 samples count as
// silence and are tallied once per call. cfg.rate_hz must match the matrix.
int count_speakers_in_window(const SpeakingMatrix& matrix, const std::vector<std::string>& members,
                             double t_s, const WindowConfig& cfg, WarningTally* tally = nullptr);

// Max of count_speakers_in_window over positions start_s, start_s + step_s,
// ... while the window fits in the lifetime. nullopt when no position fits.
// -1 samples inside the lifetime are tallied once per member.
std::optional<Observation> max_floors(const FFormation& ff, const SpeakingMatrix& matrix,
                                      const WindowConfig& cfg, WarningTally* tally = nullptr);

// max_floors for every F-formation at every integer d in [d_min_s, d_max_s],
// in (file order, then d ascending) order, skipping undefined combinations.
// The matrix's own sample rate drives the frame math.
std::vector<Observation> sweep(const std::vector<FFormation>& ffs, const SpeakingMatrix& matrix,
                               int d_min_s, int d_max_s, int step_s = 1,
                               WarningTally* tally = nullptr);

struct AggregateRow {
    int cardinality = 0;
    int d_s = 0;
    double mean_y = 0.0;
    std::size_t n = 0;
};

// Groups observations by (cardinality, d_s); rows sorted by the same key.
std::vector<AggregateRow> aggregate_by_cardinality(const std::vector<Observation>& obs);

// CSV: fformation_id,cardinality,d_s,y,n_windows
void write_observations_csv(const std::vector<Observation>& obs, std::ostream& out);
std::vector<Observation> read_observations_csv(std::istream& in);
std::vector<Observation> read_observations_csv(const std::string& text);

// CSV: cardinality,d_s,mean_y and cardinality,d_s,n
void write_mean_table_csv(const std::vector<AggregateRow>& rows, std::ostream& out);
void write_count_table_csv(const std::vector<AggregateRow>& rows, std::ostream& out);

} // namespace floorkit

#include "floorkit/floor_metric.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "floorkit/util.hpp"

namespace floorkit {

namespace {

void check_config(const WindowConfig& cfg, const SpeakingMatrix& matrix) {
    if (cfg.d_s <= 0) throw std::invalid_argument("window duration d_s must be positive");
    if (cfg.step_s <= 0) throw std::invalid_argument("window step_s must be positive");
    if (cfg.rate_hz <= 0) throw std::invalid_argument("rate_hz must be positive");
    if (cfg.rate_hz != matrix.rate_hz) {
        throw std::invalid_argument("window rate_hz (" + std::to_string(cfg.rate_hz) +
                                    ") disagrees with the matrix (" +
                                    std::to_string(matrix.rate_hz) + ")");
    }
}

std::vector<std::size_t> resolve_members(const SpeakingMatrix& matrix,
                                         const std::vector<std::string>& members) {
    std::vector<std::size_t> indices;
    indices.reserve(members.size());
    for (const auto& member : members) {
        auto idx = matrix.find_participant(member);
        if (!idx) throw std::invalid_argument("member '" + member + "' not present in speaking matrix");
        indices.push_back(*idx);
    }
    return indices;
}

// Prefix counts of 1-samples over a frame range, so a full-window check is
// two lookups. Also counts the -1 samples seen in the range.
struct TrackPrefix {
    std::vector<std::uint32_t> ones;  // ones[k] = #1s in the first k frames of the range
    std::uint64_t invalid = 0;
};

TrackPrefix build_prefix(const std::vector<std::int8_t>& track, std::size_t first,
                         std::size_t last) {
    TrackPrefix prefix;
    prefix.ones.resize(last - first + 1, 0);
    for (std::size_t f = first; f < last; ++f) {
        const std::int8_t v = track[f];
        prefix.ones[f - first + 1] = prefix.ones[f - first] + (v == 1 ? 1u : 0u);
        if (v == kNotVisible) ++prefix.invalid;
    }
    return prefix;
}

// y over window positions given per-member prefixes for the lifetime range.
Observation observe_from_prefixes(const FFormation& ff, const std::vector<TrackPrefix>& prefixes,
                                  int d_s, int step_s, int rate_hz, int n_windows) {
    const std::size_t window_frames = static_cast<std::size_t>(d_s) * rate_hz;
    const std::size_t step_frames = static_cast<std::size_t>(step_s) * rate_hz;

    int best = 0;
    for (int w = 0; w < n_windows; ++w) {
        const std::size_t offset = static_cast<std::size_t>(w) * step_frames;
        int speakers = 0;
        for (const auto& prefix : prefixes) {
            if (prefix.ones[offset + window_frames] - prefix.ones[offset] == window_frames)
                ++speakers;
        }
        best = std::max(best, speakers);
    }
    return {ff.id, ff.cardinality(), d_s, best, n_windows};
}

int window_count(const FFormation& ff, int d_s, int step_s) {
    if (ff.end_s - ff.start_s < d_s) return 0;
    return (ff.end_s - ff.start_s - d_s) / step_s + 1;
}

} // namespace

int count_speakers_in_window(const SpeakingMatrix& matrix, const std::vector<std::string>& members,
                             double t_s, const WindowConfig& cfg, WarningTally* tally) {
    check_config(cfg, matrix);
    const auto first = static_cast<long long>(std::floor(t_s * cfg.rate_hz));
    const auto last = static_cast<long long>(std::floor((t_s + cfg.d_s) * cfg.rate_hz));
    if (first < 0 || last > static_cast<long long>(matrix.n_frames())) {
        throw std::out_of_range("window [" + std::to_string(t_s) + ", " +
                                std::to_string(t_s + cfg.d_s) + ") out of matrix bounds");
    }

    int speakers = 0;
    for (std::size_t idx : resolve_members(matrix, members)) {
        const auto& track = matrix.samples[idx];
        bool full = true;
        for (long long f = first; f < last; ++f) {
            if (track[f] == kNotVisible && tally) ++tally->invalid_samples;
            if (track[f] != 1) full = false;
        }
        if (full) ++speakers;
    }
    return speakers;
}

std::optional<Observation> max_floors(const FFormation& ff, const SpeakingMatrix& matrix,
                                      const WindowConfig& cfg, WarningTally* tally) {
    check_config(cfg, matrix);
    const int n_windows = window_count(ff, cfg.d_s, cfg.step_s);
    if (n_windows == 0) return std::nullopt;

    const auto first = static_cast<std::size_t>(ff.start_s) * cfg.rate_hz;
    const auto last = static_cast<std::size_t>(ff.end_s) * cfg.rate_hz;
    if (last > matrix.n_frames()) {
        throw std::out_of_range("f-formation '" + ff.id + "' lifetime exceeds matrix extent");
    }

    std::vector<TrackPrefix> prefixes;
    prefixes.reserve(ff.members.size());
    for (std::size_t idx : resolve_members(matrix, ff.members)) {
        prefixes.push_back(build_prefix(matrix.samples[idx], first, last));
        if (tally) tally->invalid_samples += prefixes.back().invalid;
    }
    return observe_from_prefixes(ff, prefixes, cfg.d_s, cfg.step_s, cfg.rate_hz, n_windows);
}

std::vector<Observation> sweep(const std::vector<FFormation>& ffs, const SpeakingMatrix& matrix,
                               int d_min_s, int d_max_s, int step_s, WarningTally* tally) {
    if (d_min_s <= 0 || d_min_s > d_max_s) {
        throw std::invalid_argument("need 0 < d_min_s <= d_max_s");
    }
    if (step_s <= 0) throw std::invalid_argument("step_s must be positive");
    const int rate_hz = matrix.rate_hz;

    std::vector<Observation> out;
    for (const auto& ff : ffs) {
        const auto first = static_cast<std::size_t>(ff.start_s) * rate_hz;
        const auto last = static_cast<std::size_t>(ff.end_s) * rate_hz;
        if (last > matrix.n_frames()) {
            throw std::out_of_range("f-formation '" + ff.id + "' lifetime exceeds matrix extent");
        }

        // One prefix per member serves every d; -1s tallied once per member.
        std::vector<TrackPrefix> prefixes;
        prefixes.reserve(ff.members.size());
        for (std::size_t idx : resolve_members(matrix, ff.members)) {
            prefixes.push_back(build_prefix(matrix.samples[idx], first, last));
            if (tally) tally->invalid_samples += prefixes.back().invalid;
        }

        for (int d = d_min_s; d <= d_max_s; ++d) {
            const int n_windows = window_count(ff, d, step_s);
            if (n_windows == 0) continue;
            out.push_back(observe_from_prefixes(ff, prefixes, d, step_s, rate_hz, n_windows));
        }
    }
    return out;
}

std::vector<AggregateRow> aggregate_by_cardinality(const std::vector<Observation>& obs) {
    std::map<std::pair<int, int>, std::pair<double, std::size_t>> groups;
    for (const auto& o : obs) {
        auto& [sum, n] = groups[{o.cardinality, o.d_s}];
        sum += o.y;
        ++n;
    }
    std::vector<AggregateRow> rows;
    rows.reserve(groups.size());
    for (const auto& [key, acc] : groups) {
        rows.push_back({key.first, key.second, acc.first / acc.second, acc.second});
    }
    return rows;
}

void write_observations_csv(const std::vector<Observation>& obs, std::ostream& out) {
    out << "fformation_id,cardinality,d_s,y,n_windows\n";
    for (const auto& o : obs) {
        out << o.fformation_id << ',' << o.cardinality << ',' << o.d_s << ',' << o.y << ','
            << o.n_windows << '\n';
    }
}

std::vector<Observation> read_observations_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty observation file", 1);
    if (util::strip_cr(line) != "fformation_id,cardinality,d_s,y,n_windows") {
        throw ParseError("observation header must be 'fformation_id,cardinality,d_s,y,n_windows'", 1);
    }

    std::vector<Observation> obs;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        std::string_view body = util::strip_cr(line);
        if (body.empty()) continue;
        auto cells = util::split(body, ',');
        if (cells.size() != 5) {
            throw ParseError("expected 5 cells but found " + std::to_string(cells.size()) +
                                 " at row " + std::to_string(row),
                             row);
        }
        Observation o;
        o.fformation_id = std::string(util::trim(cells[0]));
        o.cardinality = static_cast<int>(util::parse_int(cells[1], "cardinality", row, 2));
        o.d_s = static_cast<int>(util::parse_int(cells[2], "d_s", row, 3));
        o.y = static_cast<int>(util::parse_int(cells[3], "y", row, 4));
        o.n_windows = static_cast<int>(util::parse_int(cells[4], "n_windows", row, 5));
        if (o.y < 0 || o.y > o.cardinality) {
            throw ParseError("y outside [0, cardinality] at row " + std::to_string(row), row, 4);
        }
        if (o.d_s <= 0 || o.n_windows < 1) {
            throw ParseError("non-positive d_s or n_windows at row " + std::to_string(row), row, 3);
        }
        obs.push_back(std::move(o));
    }
    return obs;
}

std::vector<Observation> read_observations_csv(const std::string& text) {
    std::istringstream in(text);
    return read_observations_csv(in);
}

namespace {

std::string format_mean(double value) {
    std::ostringstream out;
    out << std::setprecision(17) << value;
    return out.str();
}

} // namespace

void write_mean_table_csv(const std::vector<AggregateRow>& rows, std::ostream& out) {
    out << "cardinality,d_s,mean_y\n";
    for (const auto& row : rows) {
        out << row.cardinality << ',' << row.d_s << ',' << format_mean(row.mean_y) << '\n';
    }
}

void write_count_table_csv(const std::vector<AggregateRow>& rows, std::ostream& out) {
    out << "cardinality,d_s,n\n";
    for (const auto& row : rows) {
        out << row.cardinality << ',' << row.d_s << ',' << row.n << '\n';
    }
}

} // namespace floorkit

#include "floorkit/annotation_io.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

namespace floorkit {

std::optional<std::size_t> SpeakingMatrix::find_participant(const std::string& id) const {
    for (std::size_t i = 0; i < participants.size(); ++i) {
        if (participants[i] == id) return i;
    }
    return std::nullopt;
}

SpeakingMatrix parse_speaking_csv(std::istream& in, int rate_hz) {
    if (rate_hz <= 0) throw ParseError("rate_hz must be positive");

    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty speaking-status file", 1);
    auto header = util::split(util::strip_cr(line), ',');
    if (header.empty() || util::trim(header[0]) != "frame") {
        throw ParseError("speaking-status header must start with 'frame' at row 1, column 1", 1, 1);
    }

    SpeakingMatrix matrix;
    matrix.rate_hz = rate_hz;
    matrix.origin_s = 0.0;

    std::unordered_set<std::string> seen;
    for (std::size_t c = 1; c < header.size(); ++c) {
        std::string pid(util::trim(header[c]));
        if (pid.empty()) {
            throw ParseError("empty participant column name at row 1, column " + std::to_string(c + 1),
                             1, c + 1);
        }
        if (!seen.insert(pid).second) {
            throw ParseError("duplicate participant column '" + pid + "' at row 1, column " +
                                 std::to_string(c + 1),
                             1, c + 1);
        }
        matrix.participants.push_back(std::move(pid));
    }
    if (matrix.participants.empty()) throw ParseError("speaking-status file has no participant columns", 1);
    matrix.samples.assign(matrix.participants.size(), {});

    std::size_t row = 1;
    long long expected_frame = 0;
    while (std::getline(in, line)) {
        ++row;
        std::string_view body = util::strip_cr(line);
        if (body.empty()) continue;  // tolerate a trailing blank line
        auto cells = util::split(body, ',');
        if (cells.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " cells but found " +
                                 std::to_string(cells.size()) + " at row " + std::to_string(row),
                             row);
        }
        long long frame = util::parse_int(cells[0], "frame index", row, 1);
        if (frame != expected_frame) {
            throw ParseError("non-contiguous frame index at row " + std::to_string(row), row, 1);
        }
        ++expected_frame;

        for (std::size_t c = 1; c < cells.size(); ++c) {
            std::string_view cell = util::trim(cells[c]);
            std::int8_t value;
            if (cell.empty()) {
                value = kNotVisible;
            } else if (cell == "0") {
                value = 0;
            } else if (cell == "1") {
                value = 1;
            } else if (cell == "-1") {
                value = kNotVisible;
            } else {
                throw ParseError("illegal cell value '" + std::string(cell) + "' at row " +
                                     std::to_string(row) + ", column " + std::to_string(c + 1),
                                 row, c + 1);
            }
            matrix.samples[c - 1].push_back(value);
        }
    }
    return matrix;
}

SpeakingMatrix parse_speaking_csv(const std::string& text, int rate_hz) {
    std::istringstream in(text);
    return parse_speaking_csv(in, rate_hz);
}

void write_speaking_csv(const SpeakingMatrix& matrix, std::ostream& out) {
    out << "frame";
    for (const auto& pid : matrix.participants) out << ',' << pid;
    out << '\n';
    const std::size_t frames = matrix.n_frames();
    for (std::size_t f = 0; f < frames; ++f) {
        out << f;
        for (const auto& track : matrix.samples) out << ',' << static_cast<int>(track[f]);
        out << '\n';
    }
}

namespace {

// start_s/end_s are annotated at whole seconds; anything fractional is a
// format violation, not a rounding candidate.
int parse_whole_seconds(std::string_view field, const std::string& what, std::size_t row,
                        std::size_t col) {
    field = util::trim(field);
    if (field.find('.') != std::string_view::npos) {
        throw ParseError("fractional " + what + " '" + std::string(field) + "' at row " +
                             std::to_string(row) + ", column " + std::to_string(col) +
                             " (annotation times are integer seconds)",
                         row, col);
    }
    return static_cast<int>(util::parse_int(field, what, row, col));
}

} // namespace

std::vector<FFormation> parse_fformations_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty f-formation file", 1);
    auto header = util::split(util::strip_cr(line), ',');
    if (header.size() != 4 || util::trim(header[0]) != "id" || util::trim(header[1]) != "start_s" ||
        util::trim(header[2]) != "end_s" || util::trim(header[3]) != "members") {
        throw ParseError("f-formation header must be 'id,start_s,end_s,members' at row 1", 1);
    }

    std::vector<FFormation> out;
    std::unordered_set<std::string> ids;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        std::string_view body = util::strip_cr(line);
        if (body.empty()) continue;
        auto cells = util::split(body, ',');
        if (cells.size() != 4) {
            throw ParseError("expected 4 cells but found " + std::to_string(cells.size()) +
                                 " at row " + std::to_string(row),
                             row);
        }

        FFormation ff;
        ff.id = std::string(util::trim(cells[0]));
        if (ff.id.empty()) throw ParseError("empty f-formation id at row " + std::to_string(row), row, 1);
        if (!ids.insert(ff.id).second) {
            throw ParseError("duplicate f-formation id '" + ff.id + "' at row " + std::to_string(row),
                             row, 1);
        }
        ff.start_s = parse_whole_seconds(cells[1], "start_s", row, 2);
        ff.end_s = parse_whole_seconds(cells[2], "end_s", row, 3);
        if (ff.start_s < 0) {
            throw ParseError("negative start_s for '" + ff.id + "' at row " + std::to_string(row),
                             row, 2);
        }
        if (ff.start_s >= ff.end_s) {
            throw ParseError("empty lifetime for '" + ff.id + "' at row " + std::to_string(row) +
                                 " (start_s must be < end_s)",
                             row, 2);
        }

        std::unordered_set<std::string_view> member_set;
        for (auto member : util::split(cells[3], ';')) {
            member = util::trim(member);
            if (member.empty()) continue;
            if (!member_set.insert(member).second) {
                throw ParseError("duplicate member " + std::string(member) + " in '" + ff.id +
                                     "' at row " + std::to_string(row),
                                 row, 4);
            }
            ff.members.emplace_back(member);
        }
        if (ff.members.empty()) {
            throw ParseError("empty member list for '" + ff.id + "' at row " + std::to_string(row), row,
                             4);
        }
        if (ff.members.size() < 2) {
            throw ParseError("f-formation '" + ff.id + "' needs at least 2 members at row " +
                                 std::to_string(row),
                             row, 4);
        }
        out.push_back(std::move(ff));
    }
    return out;
}

std::vector<FFormation> parse_fformations_csv(const std::string& text) {
    std::istringstream in(text);
    return parse_fformations_csv(in);
}

void write_fformations_csv(const std::vector<FFormation>& ffs, std::ostream& out) {
    out << "id,start_s,end_s,members\n";
    for (const auto& ff : ffs) {
        out << ff.id << ',' << ff.start_s << ',' << ff.end_s << ',';
        for (std::size_t i = 0; i < ff.members.size(); ++i) {
            if (i) out << ';';
            out << ff.members[i];
        }
        out << '\n';
    }
}

FilterResult filter_fformations(const std::vector<FFormation>& ffs, const SpeakingMatrix& matrix,
                                int min_cardinality) {
    if (min_cardinality < 2) throw std::invalid_argument("min_cardinality must be >= 2");

    FilterResult result;
    const std::size_t frames = matrix.n_frames();
    for (const auto& ff : ffs) {
        if (ff.cardinality() < min_cardinality) {
            result.dropped.push_back({ff, "cardinality"});
            continue;
        }

        bool out_of_view = false;
        const std::size_t first = static_cast<std::size_t>(ff.start_s) * matrix.rate_hz;
        const std::size_t last = static_cast<std::size_t>(ff.end_s) * matrix.rate_hz;
        for (const auto& member : ff.members) {
            auto idx = matrix.find_participant(member);
            if (!idx) {
                throw std::invalid_argument("f-formation '" + ff.id + "' member '" + member +
                                            "' not present in speaking matrix");
            }
            if (last > frames) {
                out_of_view = true;  // lifetime not covered by the annotation
                break;
            }
            const auto& track = matrix.samples[*idx];
            for (std::size_t f = first; f < last; ++f) {
                if (track[f] == kNotVisible) {
                    out_of_view = true;
                    break;
                }
            }
            if (out_of_view) break;
        }

        if (out_of_view) {
            result.dropped.push_back({ff, "out-of-view"});
        } else {
            result.kept.push_back(ff);
        }
    }
    return result;
}

LintReport lint_turns(const SpeakingMatrix& matrix, const std::vector<FFormation>& ffs,
                      double max_turn_s) {
    if (max_turn_s <= 0) throw std::invalid_argument("max_turn_s must be positive");

    LintReport report;
    const std::size_t frames = matrix.n_frames();
    for (const auto& ff : ffs) {
        const std::size_t first = std::min(frames, static_cast<std::size_t>(ff.start_s) * matrix.rate_hz);
        const std::size_t last = std::min(frames, static_cast<std::size_t>(ff.end_s) * matrix.rate_hz);
        for (const auto& member : ff.members) {
            auto idx = matrix.find_participant(member);
            if (!idx) {
                throw std::invalid_argument("f-formation '" + ff.id + "' member '" + member +
                                            "' not present in speaking matrix");
            }
            const auto& track = matrix.samples[*idx];
            std::size_t f = first;
            while (f < last) {
                if (track[f] != 1) {
                    ++f;
                    continue;
                }
                std::size_t run_end = f;
                while (run_end < last && track[run_end] == 1) ++run_end;
                const double duration = static_cast<double>(run_end - f) / matrix.rate_hz;
                if (duration >= max_turn_s) {
                    report.findings.push_back({ff.id, member,
                                               static_cast<double>(f) / matrix.rate_hz, duration,
                                               "max-turn"});
                }
                f = run_end;
            }
        }
    }
    return report;
}

} // namespace floorkit

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "floorkit/annotation_io.hpp"

using namespace floorkit;

namespace {

SpeakingMatrix random_matrix(std::uint64_t seed, int participants, int frames,
                             double invalid_prob = 0.0) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    SpeakingMatrix matrix;
    matrix.rate_hz = 20;
    for (int p = 0; p < participants; ++p) {
        matrix.participants.push_back("P" + std::to_string(p));
        std::vector<std::int8_t> track(frames);
        for (auto& v : track) {
            const double u = unit(gen);
            v = u < invalid_prob ? kNotVisible : (u < 0.5 ? std::int8_t{1} : std::int8_t{0});
        }
        matrix.samples.push_back(std::move(track));
    }
    return matrix;
}

} // namespace

TEST_CASE("speaking csv: direct transcription") {
    const auto m = parse_speaking_csv("frame,A,B\n0,1,0\n1,1,0\n", 20);
    REQUIRE(m.participants == std::vector<std::string>{"A", "B"});
    REQUIRE(m.n_frames() == 2);
    CHECK(m.samples[0] == std::vector<std::int8_t>{1, 1});
    CHECK(m.samples[1] == std::vector<std::int8_t>{0, 0});
    CHECK(m.rate_hz == 20);
    CHECK(m.origin_s == 0.0);
}

TEST_CASE("speaking csv: empty cell reads as -1") {
    const auto m = parse_speaking_csv("frame,A,B\n0,1,0\n1,1,\n", 20);
    CHECK(m.samples[1] == std::vector<std::int8_t>{0, -1});
}

TEST_CASE("speaking csv: crlf line endings accepted") {
    const auto m = parse_speaking_csv("frame,A\r\n0,1\r\n1,-1\r\n", 20);
    CHECK(m.samples[0] == std::vector<std::int8_t>{1, -1});
}

TEST_CASE("speaking csv: non-contiguous frame index") {
    try {
        parse_speaking_csv("frame,A\n0,1\n2,1\n", 20);
        FAIL("expected ParseError");
    } catch (const ParseError& err) {
        CHECK(std::string(err.what()).find("non-contiguous frame index at row 3") !=
              std::string::npos);
        CHECK(err.row() == 3);
    }
}

TEST_CASE("speaking csv: duplicate participant column") {
    try {
        parse_speaking_csv("frame,A,A\n0,1,0\n", 20);
        FAIL("expected ParseError");
    } catch (const ParseError& err) {
        CHECK(std::string(err.what()).find("duplicate participant column 'A'") != std::string::npos);
        CHECK(err.col() == 3);
    }
}

TEST_CASE("speaking csv: illegal cell value with location") {
    try {
        parse_speaking_csv("frame,A,B\n0,1,0\n1,2,0\n", 20);
        FAIL("expected ParseError");
    } catch (const ParseError& err) {
        CHECK(std::string(err.what()).find("illegal cell value '2'") != std::string::npos);
        CHECK(err.row() == 3);
        CHECK(err.col() == 2);
    }
}

TEST_CASE("speaking csv: parse-serialize-parse round trip") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto original = random_matrix(seed, 1 + seed % 5, 40, 0.1);
        std::ostringstream text;
        write_speaking_csv(original, text);
        const auto reparsed = parse_speaking_csv(text.str(), original.rate_hz);
        REQUIRE(reparsed.participants == original.participants);
        REQUIRE(reparsed.samples == original.samples);
    }
}

TEST_CASE("fformation csv: direct transcription") {
    const auto ffs = parse_fformations_csv("id,start_s,end_s,members\nF1,10,40,A;B;C;D\n");
    REQUIRE(ffs.size() == 1);
    CHECK(ffs[0].id == "F1");
    CHECK(ffs[0].start_s == 10);
    CHECK(ffs[0].end_s == 40);
    CHECK(ffs[0].cardinality() == 4);
}

TEST_CASE("fformation csv: empty lifetime") {
    CHECK_THROWS_WITH_AS(parse_fformations_csv("id,start_s,end_s,members\nF2,30,30,A;B\n"),
                         doctest::Contains("empty lifetime"), ParseError);
}

TEST_CASE("fformation csv: duplicate member") {
    CHECK_THROWS_WITH_AS(parse_fformations_csv("id,start_s,end_s,members\nF3,0,5,A;A;B\n"),
                         doctest::Contains("duplicate member A"), ParseError);
}

TEST_CASE("fformation csv: fractional seconds rejected") {
    CHECK_THROWS_WITH_AS(parse_fformations_csv("id,start_s,end_s,members\nF1,0.5,5,A;B\n"),
                         doctest::Contains("fractional"), ParseError);
}

TEST_CASE("fformation csv: round trip") {
    const std::string text = "id,start_s,end_s,members\nF1,10,40,A;B;C;D\nF2,0,5,B;C\n";
    const auto ffs = parse_fformations_csv(text);
    std::ostringstream rewritten;
    write_fformations_csv(ffs, rewritten);
    CHECK(rewritten.str() == text);
}

TEST_CASE("filter: cardinality rule") {
    const auto m = parse_speaking_csv("frame,A,B,C\n0,1,0,1\n", 20);
    // lifetime [0,1) needs 20 frames; extend the matrix
    SpeakingMatrix matrix = m;
    for (auto& track : matrix.samples) track.assign(20, 0);
    const FFormation ff{"G", {"A", "B", "C"}, 0, 1};
    const auto result = filter_fformations({ff}, matrix, 4);
    REQUIRE(result.kept.empty());
    REQUIRE(result.dropped.size() == 1);
    CHECK(result.dropped[0].reason == "cardinality");
}

TEST_CASE("filter: out-of-view rule") {
    SpeakingMatrix matrix;
    matrix.rate_hz = 20;
    matrix.participants = {"A", "B", "C", "D", "E"};
    matrix.samples.assign(5, std::vector<std::int8_t>(40, 1));
    matrix.samples[1][25] = kNotVisible;  // B leaves view inside [0,2)
    const FFormation ff{"G", {"A", "B", "C", "D", "E"}, 0, 2};
    const auto result = filter_fformations({ff}, matrix, 4);
    REQUIRE(result.dropped.size() == 1);
    CHECK(result.dropped[0].reason == "out-of-view");
}

TEST_CASE("filter: clean cardinality-4 group is kept") {
    SpeakingMatrix matrix;
    matrix.rate_hz = 20;
    matrix.participants = {"A", "B", "C", "D"};
    matrix.samples.assign(4, std::vector<std::int8_t>(40, 0));
    matrix.samples[0][3] = 1;
    const FFormation ff{"G", {"A", "B", "C", "D"}, 0, 2};
    const auto result = filter_fformations({ff}, matrix, 4);
    CHECK(result.kept.size() == 1);
    CHECK(result.dropped.empty());
}

TEST_CASE("filter: lifetime past the matrix extent counts as out-of-view") {
    SpeakingMatrix matrix;
    matrix.rate_hz = 20;
    matrix.participants = {"A", "B", "C", "D"};
    matrix.samples.assign(4, std::vector<std::int8_t>(20, 1));  // 1 s of data
    const FFormation ff{"G", {"A", "B", "C", "D"}, 0, 2};
    const auto result = filter_fformations({ff}, matrix, 4);
    REQUIRE(result.dropped.size() == 1);
    CHECK(result.dropped[0].reason == "out-of-view");
}

TEST_CASE("filter: unknown member throws") {
    SpeakingMatrix matrix;
    matrix.rate_hz = 20;
    matrix.participants = {"A", "B", "C", "D"};
    matrix.samples.assign(4, std::vector<std::int8_t>(20, 1));
    const FFormation ff{"G", {"A", "B", "C", "Z"}, 0, 1};
    CHECK_THROWS_AS((void)filter_fformations({ff}, matrix, 4), std::invalid_argument);
}

TEST_CASE("filter: kept and dropped partition the input") {
    std::mt19937_64 gen(7);
    SpeakingMatrix matrix = random_matrix(11, 8, 200, 0.02);
    std::vector<FFormation> ffs;
    std::uniform_int_distribution<int> card(2, 8), start(0, 8);
    for (int i = 0; i < 30; ++i) {
        FFormation ff;
        ff.id = "F" + std::to_string(i);
        ff.start_s = start(gen);
        ff.end_s = ff.start_s + 1 + start(gen) % 3;
        const int c = card(gen);
        for (int p = 0; p < c; ++p) ff.members.push_back("P" + std::to_string(p));
        ffs.push_back(std::move(ff));
    }
    const auto result = filter_fformations(ffs, matrix, 4);
    CHECK(result.kept.size() + result.dropped.size() == ffs.size());

    std::set<std::string> seen;
    for (const auto& ff : result.kept) CHECK(seen.insert(ff.id).second);
    for (const auto& d : result.dropped) CHECK(seen.insert(d.fformation.id).second);

    // no kept group has a -1 sample inside its lifetime
    for (const auto& ff : result.kept) {
        for (const auto& member : ff.members) {
            const auto& track = matrix.samples[*matrix.find_participant(member)];
            for (int f = ff.start_s * 20; f < ff.end_s * 20; ++f) CHECK(track[f] != kNotVisible);
        }
    }
}

namespace {

// Independent run-length scan used to cross-check lint findings.
std::vector<std::pair<double, double>> scan_long_runs(const std::vector<std::int8_t>& track,
                                                      int rate_hz, int first, int last,
                                                      double min_duration_s) {
    std::vector<std::pair<double, double>> found;
    int f = first;
    while (f < last) {
        if (track[f] == 1) {
            int start = f;
            while (f < last && track[f] == 1) ++f;
            const double duration = static_cast<double>(f - start) / rate_hz;
            if (duration >= min_duration_s) {
                found.emplace_back(static_cast<double>(start) / rate_hz, duration);
            }
        } else {
            ++f;
        }
    }
    return found;
}

} // namespace

TEST_CASE("lint: a 20 s turn is flagged at the default threshold") {
    SpeakingMatrix matrix;
    matrix.rate_hz = 20;
    matrix.participants = {"A", "B"};
    matrix.samples.assign(2, std::vector<std::int8_t>(600, 0));
    for (int f = 100; f < 500; ++f) matrix.samples[0][f] = 1;  // exactly 20 s
    const FFormation ff{"G", {"A", "B"}, 0, 30};
    const auto report = lint_turns(matrix, {ff}, 20.0);
    REQUIRE(report.findings.size() == 1);
    CHECK(report.findings[0].participant == "A");
    CHECK(report.findings[0].turn_start_s == doctest::Approx(5.0));
    CHECK(report.findings[0].turn_duration_s == doctest::Approx(20.0));
    CHECK(report.findings[0].rule == "max-turn");
}

TEST_CASE("lint: short turns produce an empty report") {
    SpeakingMatrix matrix;
    matrix.rate_hz = 20;
    matrix.participants = {"A", "B"};
    matrix.samples.assign(2, std::vector<std::int8_t>(600, 0));
    for (int f = 0; f < 399; ++f) matrix.samples[0][f] = 1;  // 19.95 s
    const FFormation ff{"G", {"A", "B"}, 0, 30};
    CHECK(lint_turns(matrix, {ff}, 20.0).findings.empty());
}

TEST_CASE("lint: two disjoint long runs yield two findings") {
    SpeakingMatrix matrix;
    matrix.rate_hz = 20;
    matrix.participants = {"A", "B"};
    matrix.samples.assign(2, std::vector<std::int8_t>(1600, 0));
    for (int f = 0; f < 500; ++f) matrix.samples[0][f] = 1;      // 25 s
    for (int f = 900; f < 1400; ++f) matrix.samples[0][f] = 1;   // 25 s
    const FFormation ff{"G", {"A", "B"}, 0, 80};
    const auto report = lint_turns(matrix, {ff}, 20.0);

    const auto expected = scan_long_runs(matrix.samples[0], 20, 0, 1600, 20.0);
    REQUIRE(report.findings.size() == expected.size());
    REQUIRE(expected.size() == 2);
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(report.findings[i].turn_start_s == doctest::Approx(expected[i].first));
        CHECK(report.findings[i].turn_duration_s == doctest::Approx(expected[i].second));
    }
}

TEST_CASE("lint: runs are clipped to the lifetime") {
    SpeakingMatrix matrix;
    matrix.rate_hz = 20;
    matrix.participants = {"A", "B"};
    matrix.samples.assign(2, std::vector<std::int8_t>(1000, 1));  // speaks the whole 50 s
    const FFormation ff{"G", {"A", "B"}, 10, 25};                 // 15 s window
    CHECK(lint_turns(matrix, {ff}, 20.0).findings.empty());
    const auto report = lint_turns(matrix, {ff}, 15.0);
    REQUIRE(report.findings.size() == 2);  // both members
    CHECK(report.findings[0].turn_start_s == doctest::Approx(10.0));
    CHECK(report.findings[0].turn_duration_s == doctest::Approx(15.0));
}

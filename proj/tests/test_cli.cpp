// Drives the installed CLI binary (path in $FLOORKIT_BIN) through the
// pipeline: synth -> floors -> fit/posthoc, plus overlaps and the error
// paths, against hand-checkable toy inputs.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "floorkit/annotation_io.hpp"
#include "floorkit/floor_metric.hpp"
#include "floorkit/manifest.hpp"

namespace fs = std::filesystem;
using namespace floorkit;

namespace {

std::string cli_path() {
    const char* path = std::getenv("FLOORKIT_BIN");
    REQUIRE_MESSAGE(path != nullptr, "FLOORKIT_BIN must point at the floorkit binary");
    return path;
}

int run(const std::string& args) {
    const std::string cmd = cli_path() + " " + args;
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir =
        fs::temp_directory_path() / ("floorkit_cli_" + std::to_string(getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    REQUIRE(out.good());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// 4 members for 3 s at 20 Hz: A speaks throughout, B for the first second.
void write_toy_corpus(const fs::path& dir) {
    std::ostringstream speaking;
    speaking << "frame,A,B,C,D\n";
    for (int f = 0; f < 60; ++f) {
        speaking << f << ",1," << (f < 20 ? 1 : 0) << ",0,0\n";
    }
    write_file(dir / "speaking.csv", speaking.str());
    write_file(dir / "fformations.csv", "id,start_s,end_s,members\nF1,0,3,A;B;C;D\n");
}

} // namespace

TEST_CASE("floors: toy corpus gives the hand-computed three-row table") {
    const auto dir = fresh_dir("toy_floors");
    write_toy_corpus(dir);
    const auto out_dir = dir / "out";

    REQUIRE(run("floors --speaking " + (dir / "speaking.csv").string() + " --fformations " +
                (dir / "fformations.csv").string() + " --out-dir " + out_dir.string() +
                " > /dev/null") == 0);

    CHECK(read_file(out_dir / "observations.csv") ==
          "fformation_id,cardinality,d_s,y,n_windows\n"
          "F1,4,1,2,3\n"
          "F1,4,2,1,2\n"
          "F1,4,3,1,1\n");
    CHECK(read_file(out_dir / "fig3_means.csv") ==
          "cardinality,d_s,mean_y\n4,1,2\n4,2,1\n4,3,1\n");
    CHECK(read_file(out_dir / "fig5_counts.csv") == "cardinality,d_s,n\n4,1,1\n4,2,1\n4,3,1\n");
    CHECK(fs::exists(out_dir / "manifest.json"));
}

TEST_CASE("floors: reruns are byte-identical and the manifest digests verify") {
    const auto dir = fresh_dir("rerun");
    write_toy_corpus(dir);
    const auto out_a = dir / "a";
    const auto out_b = dir / "b";
    const std::string common = "floors --speaking " + (dir / "speaking.csv").string() +
                               " --fformations " + (dir / "fformations.csv").string() +
                               " --out-dir ";
    REQUIRE(run(common + out_a.string() + " > /dev/null") == 0);
    REQUIRE(run(common + out_b.string() + " > /dev/null") == 0);

    // identical inputs and flags give identical data files
    for (const char* name : {"observations.csv", "fig3_means.csv", "fig5_counts.csv"}) {
        CHECK(read_file(out_a / name) == read_file(out_b / name));
    }

    // a rerun into the same directory reproduces everything, manifest included
    const std::string manifest_before = read_file(out_a / "manifest.json");
    REQUIRE(run(common + out_a.string() + " > /dev/null") == 0);
    CHECK(read_file(out_a / "manifest.json") == manifest_before);

    const auto manifest = nlohmann::json::parse(read_file(out_a / "manifest.json"));
    CHECK(manifest["command"] == "floors");
    for (const auto& entry : manifest["outputs"]) {
        const fs::path path = entry["path"].get<std::string>();
        CHECK(digest_hex(fnv1a64_file(path)) == entry["fnv1a64"].get<std::string>());
    }
    for (const auto& entry : manifest["inputs"]) {
        const fs::path path = entry["path"].get<std::string>();
        CHECK(digest_hex(fnv1a64_file(path)) == entry["fnv1a64"].get<std::string>());
    }
}

TEST_CASE("floors: an empty post-filter corpus is an error") {
    const auto dir = fresh_dir("empty_filter");
    write_toy_corpus(dir);
    CHECK(run("floors --speaking " + (dir / "speaking.csv").string() + " --fformations " +
              (dir / "fformations.csv").string() + " --out-dir " + (dir / "out").string() +
              " --min-cardinality 5 2> /dev/null") != 0);
}

TEST_CASE("synth -> floors -> fit -> posthoc round trip") {
    const auto dir = fresh_dir("pipeline");

    write_file(dir / "scenario6.txt",
               "n_floors = 2\nparticipants_per_floor = 3\nduration_s = 120\nseed = 31\n");
    write_file(dir / "scenario4.txt",
               "n_floors = 2\nparticipants_per_floor = 2\nduration_s = 120\nseed = 32\n");

    const auto synth6 = dir / "synth6";
    const auto synth4 = dir / "synth4";
    REQUIRE(run("synth --scenario " + (dir / "scenario6.txt").string() + " --out-dir " +
                synth6.string() + " > /dev/null") == 0);
    REQUIRE(run("synth --scenario " + (dir / "scenario4.txt").string() + " --out-dir " +
                synth4.string() + " > /dev/null") == 0);

    // ground truth lists two floors
    const std::string truth = read_file(synth6 / "ground_truth.csv");
    CHECK(truth.find(",0\n") != std::string::npos);
    CHECK(truth.find(",1\n") != std::string::npos);

    const auto floors6 = dir / "floors6";
    const auto floors4 = dir / "floors4";
    REQUIRE(run("floors --speaking " + (synth6 / "speaking.csv").string() + " --fformations " +
                (synth6 / "fformations.csv").string() + " --out-dir " + floors6.string() +
                " --d-max-s 10 > /dev/null") == 0);
    REQUIRE(run("floors --speaking " + (synth4 / "speaking.csv").string() + " --fformations " +
                (synth4 / "fformations.csv").string() + " --out-dir " + floors4.string() +
                " --d-max-s 10 --min-cardinality 4 > /dev/null") == 0);

    // merge the two observation tables to get two distinct cardinalities
    const std::string obs6 = read_file(floors6 / "observations.csv");
    const std::string obs4 = read_file(floors4 / "observations.csv");
    const auto merged = dir / "observations.csv";
    write_file(merged, obs6 + obs4.substr(obs4.find('\n') + 1));

    REQUIRE(run("fit --observations " + merged.string() + " --out " + (dir / "fit.txt").string() +
                " > /dev/null") == 0);
    const std::string report = read_file(dir / "fit.txt");
    CHECK(report.find("model = eq1") != std::string::npos);
    CHECK(report.find("converged = true") != std::string::npos);
    CHECK(report.find("term.turn_duration_x_cardinality.p = ") != std::string::npos);

    REQUIRE(run("posthoc --observations " + merged.string() + " --out " +
                (dir / "posthoc.txt").string() + " > /dev/null") == 0);
    const std::string posthoc = read_file(dir / "posthoc.txt");
    CHECK(posthoc.find("n_pairs = 1") != std::string::npos);
    CHECK(posthoc.find("pair.4-6.status = ok") != std::string::npos);
    CHECK(posthoc.find("pair.4-6.term.cardinality.corrected_p = ") != std::string::npos);
}

TEST_CASE("fit: intercept-only report carries ln(mean y)") {
    const auto dir = fresh_dir("intercept");
    write_toy_corpus(dir);
    const auto out_dir = dir / "out";
    REQUIRE(run("floors --speaking " + (dir / "speaking.csv").string() + " --fformations " +
                (dir / "fformations.csv").string() + " --out-dir " + out_dir.string() +
                " > /dev/null") == 0);
    REQUIRE(run("fit --intercept-only --observations " +
                (out_dir / "observations.csv").string() + " --out " + (dir / "fit.txt").string() +
                " > /dev/null") == 0);

    std::ifstream obs_file(out_dir / "observations.csv");
    const auto obs = read_observations_csv(obs_file);
    double mean = 0.0;
    for (const auto& o : obs) mean += o.y;
    mean /= obs.size();

    const std::string report = read_file(dir / "fit.txt");
    const auto pos = report.find("term.intercept.coef = ");
    REQUIRE(pos != std::string::npos);
    const double beta0 = std::stod(report.substr(pos + 22));
    CHECK(std::abs(beta0 - std::log(mean)) < 1e-6);
}

TEST_CASE("overlaps: the textbook two-speaker pattern") {
    const auto dir = fresh_dir("overlaps");
    std::ostringstream speaking;
    speaking << "frame,A,B\n";
    for (int f = 0; f < 160; ++f) {
        const bool a = (f < 40) || (f >= 76 && f < 140);
        const bool b = (f >= 50 && f < 80) || (f >= 100 && f < 120);
        speaking << f << ',' << (a ? 1 : 0) << ',' << (b ? 1 : 0) << '\n';
    }
    write_file(dir / "speaking.csv", speaking.str());
    write_file(dir / "fformations.csv", "id,start_s,end_s,members\nF1,0,8,A;B\n");

    REQUIRE(run("overlaps --speaking " + (dir / "speaking.csv").string() + " --fformations " +
                (dir / "fformations.csv").string() + " --out " + (dir / "pairs.csv").string() +
                " > /dev/null") == 0);
    CHECK(read_file(dir / "pairs.csv") ==
          "fformation_id,participant_a,participant_b,kind,count,mean_s,median_s,mode_s,"
          "overlap_fraction\n"
          "F1,A,B,gap,1,0.5,0.5,0.505,0.5\n"
          "F1,A,B,between-overlap,1,0.2,0.2,0.205,0.5\n"
          "F1,A,B,within-overlap,1,1,1,1.005,0.5\n");
}

TEST_CASE("overlaps: a silent corpus reports zero counts") {
    const auto dir = fresh_dir("silent");
    std::ostringstream speaking;
    speaking << "frame,A,B\n";
    for (int f = 0; f < 100; ++f) speaking << f << ",0,0\n";
    write_file(dir / "speaking.csv", speaking.str());
    write_file(dir / "fformations.csv", "id,start_s,end_s,members\nF1,0,5,A;B\n");

    REQUIRE(run("overlaps --speaking " + (dir / "speaking.csv").string() + " --fformations " +
                (dir / "fformations.csv").string() + " --out " + (dir / "pairs.csv").string() +
                " > /dev/null") == 0);
    CHECK(read_file(dir / "pairs.csv") ==
          "fformation_id,participant_a,participant_b,kind,count,mean_s,median_s,mode_s,"
          "overlap_fraction\n"
          "F1,A,B,gap,0,,,,\n"
          "F1,A,B,between-overlap,0,,,,\n"
          "F1,A,B,within-overlap,0,,,,\n");
}

TEST_CASE("synth: a fixed seed reproduces the corpus byte for byte") {
    const auto dir = fresh_dir("synth_repro");
    write_file(dir / "scenario.txt",
               "n_floors = 2\nparticipants_per_floor = 2\nduration_s = 60\nseed = 8\n");
    REQUIRE(run("synth --scenario " + (dir / "scenario.txt").string() + " --out-dir " +
                (dir / "a").string() + " > /dev/null") == 0);
    REQUIRE(run("synth --scenario " + (dir / "scenario.txt").string() + " --out-dir " +
                (dir / "b").string() + " > /dev/null") == 0);
    for (const char* name : {"speaking.csv", "fformations.csv", "ground_truth.csv"}) {
        CHECK(read_file(dir / "a" / name) == read_file(dir / "b" / name));
    }
}

TEST_CASE("parse failures carry file context and a nonzero exit") {
    const auto dir = fresh_dir("bad_input");
    write_file(dir / "speaking.csv", "frame,A\n0,1\n2,1\n");
    write_file(dir / "fformations.csv", "id,start_s,end_s,members\nF1,0,1,A;B\n");
    CHECK(run("floors --speaking " + (dir / "speaking.csv").string() + " --fformations " +
              (dir / "fformations.csv").string() + " --out-dir " + (dir / "out").string() +
              " 2> " + (dir / "err.txt").string()) != 0);
    const std::string err = read_file(dir / "err.txt");
    CHECK(err.find("non-contiguous frame index at row 3") != std::string::npos);
    CHECK(err.find("speaking.csv") != std::string::npos);
}

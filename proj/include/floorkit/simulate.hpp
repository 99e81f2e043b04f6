#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "floorkit/annotation_io.hpp"
#include "floorkit/floor_metric.hpp"

namespace floorkit {

// Log-normal specified by the (median, mean) pair the turn-taking
// literature reports.
struct LogNormalSpec {
    double median_ms = 0.0;
    double mean_ms = 0.0;
};

struct LogNormalParams {
    double mu_ln = 0.0;
    double sigma_ln = 0.0;
};

// Moment matching: mu = ln(median), sigma = sqrt(2 ln(mean/median)).
// Requires mean >= median > 0.
LogNormalParams lognormal_from_median_mean(const LogNormalSpec& spec);

// Deterministic random stream: mt19937_64 (whose algorithm the C++ standard
// fixes) with explicit output transforms, so sequences are identical across
// platforms and standard libraries. This generator is the repo's stable
// contract; golden outputs depend on it.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // [0, 1) with 53 random bits
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Box-Muller, one value per two uniforms
    double normal();

    double lognormal(const LogNormalParams& params) {
        return std::exp(params.mu_ln + params.sigma_ln * normal());
    }

    // [0, n) by multiply-shift; bias is negligible for the n used here
    std::size_t uniform_index(std::size_t n);

    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 gen_;
};

std::uint64_t splitmix64(std::uint64_t x);

struct SimScenario {
    int n_floors = 2;
    int participants_per_floor = 3;
    int duration_s = 300;
    int rate_hz = 20;
    LogNormalSpec turn_dist{1227.0, 1680.0};
    LogNormalSpec gap_dist{200.0, 275.0};
    double within_overlap_prob = 0.2;
    LogNormalSpec within_dist{389.0, 447.0};
    double between_overlap_prob = 0.4;
    LogNormalSpec between_dist{205.0, 275.0};
    std::uint64_t seed = 1;
};

struct FloorTurn {
    std::string participant;
    double start_s = 0.0;
    double end_s = 0.0;
};

struct GroundTruth {
    std::map<std::string, int> floor_of;
    std::vector<std::vector<FloorTurn>> floor_turns;  // main turns per floor
};

struct SimResult {
    SpeakingMatrix matrix;
    FFormation fformation;  // the whole group, as a single annotated F-formation
    GroundTruth truth;
};

// Each floor runs an independent one-speaker-at-a-time system seeded from
// splitmix64(seed, floor): turns and gaps are log-normal draws; with
// between_overlap_prob the next turn starts before the current one ends;
// with within_overlap_prob a listener backchannels fully inside the turn.
// Identical scenarios produce bit-identical output.
SimResult simulate(const SimScenario& scenario);

// Fraction of n_runs (seeds scenario.seed, scenario.seed+1, ...) whose
// max_floors y equals scenario.n_floors. cfg.rate_hz is taken from the
// scenario.
double recovery_rate(const SimScenario& scenario, const WindowConfig& cfg, int n_runs);

// key = value lines, '#' comments, unknown keys rejected.
SimScenario parse_scenario(std::istream& in);
SimScenario parse_scenario(const std::string& text);
void write_scenario(const SimScenario& scenario, std::ostream& out);

// CSV: participant,floor
void write_ground_truth(const GroundTruth& truth, std::ostream& out);

} // namespace floorkit

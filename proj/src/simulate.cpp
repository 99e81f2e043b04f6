#include "floorkit/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "floorkit/util.hpp"

namespace floorkit {

double Rng::normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index on empty range");
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(gen_()) * n) >> 64);
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

LogNormalParams lognormal_from_median_mean(const LogNormalSpec& spec) {
    if (!(spec.median_ms > 0) || !(spec.mean_ms >= spec.median_ms)) {
        throw std::invalid_argument("log-normal spec needs mean >= median > 0");
    }
    return {std::log(spec.median_ms), std::sqrt(2.0 * std::log(spec.mean_ms / spec.median_ms))};
}

namespace {

std::vector<std::string> scenario_problems(const SimScenario& s) {
    std::vector<std::string> problems;
    if (s.n_floors < 1) problems.push_back("n_floors must be >= 1");
    if (s.participants_per_floor < 1) problems.push_back("participants_per_floor must be >= 1");
    if (s.duration_s <= 0) problems.push_back("duration_s must be positive");
    if (s.rate_hz <= 0) problems.push_back("rate_hz must be positive");
    if (!(s.within_overlap_prob >= 0 && s.within_overlap_prob <= 1))
        problems.push_back("within_overlap_prob must be in [0, 1]");
    if (!(s.between_overlap_prob >= 0 && s.between_overlap_prob <= 1))
        problems.push_back("between_overlap_prob must be in [0, 1]");
    const auto check_dist = [&](const LogNormalSpec& spec, const char* name) {
        if (!(spec.median_ms > 0) || !(spec.mean_ms >= spec.median_ms)) {
            problems.push_back(std::string(name) + " needs mean_ms >= median_ms > 0");
        }
    };
    check_dist(s.turn_dist, "turn_dist");
    check_dist(s.gap_dist, "gap_dist");
    check_dist(s.within_dist, "within_dist");
    check_dist(s.between_dist, "between_dist");
    return problems;
}

void validate_scenario(const SimScenario& s) {
    auto problems = scenario_problems(s);
    if (problems.empty()) return;
    std::string message = "invalid scenario:";
    for (const auto& p : problems) message += " " + p + ";";
    message.pop_back();
    throw std::invalid_argument(message);
}

std::string participant_id(int index, int total) {
    int width = 2;
    for (int v = total - 1; v >= 100; v /= 10) ++width;
    std::string digits = std::to_string(index);
    return "P" + std::string(width - digits.size(), '0') + digits;
}

void paint(std::vector<std::int8_t>& track, double start_s, double end_s, int rate_hz) {
    const auto first = std::max<long long>(0, std::llround(start_s * rate_hz));
    const auto last =
        std::min<long long>(static_cast<long long>(track.size()), std::llround(end_s * rate_hz));
    for (long long f = first; f < last; ++f) track[f] = 1;
}

} // namespace

SimResult simulate(const SimScenario& scenario) {
    validate_scenario(scenario);

    const int total = scenario.n_floors * scenario.participants_per_floor;
    const auto n_frames = static_cast<std::size_t>(scenario.duration_s) * scenario.rate_hz;
    const double duration = scenario.duration_s;

    SimResult result;
    result.matrix.rate_hz = scenario.rate_hz;
    result.matrix.origin_s = 0.0;
    for (int i = 0; i < total; ++i) result.matrix.participants.push_back(participant_id(i, total));
    result.matrix.samples.assign(total, std::vector<std::int8_t>(n_frames, 0));

    result.fformation.id = "SIM";
    result.fformation.members = result.matrix.participants;
    result.fformation.start_s = 0;
    result.fformation.end_s = scenario.duration_s;

    const auto turn_params = lognormal_from_median_mean(scenario.turn_dist);
    const auto gap_params = lognormal_from_median_mean(scenario.gap_dist);
    const auto within_params = lognormal_from_median_mean(scenario.within_dist);
    const auto between_params = lognormal_from_median_mean(scenario.between_dist);

    result.truth.floor_turns.resize(scenario.n_floors);
    for (int floor = 0; floor < scenario.n_floors; ++floor) {
        const int base = floor * scenario.participants_per_floor;
        for (int m = 0; m < scenario.participants_per_floor; ++m) {
            result.truth.floor_of[result.matrix.participants[base + m]] = floor;
        }

        // Independent stream per floor: adding a floor never perturbs the others.
        Rng rng(splitmix64(scenario.seed + static_cast<std::uint64_t>(floor)));

        double t = rng.lognormal(gap_params) / 1000.0;
        if (t >= duration) {
            throw std::invalid_argument("duration too short to place a single turn");
        }
        int speaker = static_cast<int>(rng.uniform_index(scenario.participants_per_floor));

        while (t < duration) {
            const double turn_len = rng.lognormal(turn_params) / 1000.0;
            const double turn_end = std::min(t + turn_len, duration);
            const std::string& pid = result.matrix.participants[base + speaker];
            if (turn_end > t) {
                paint(result.matrix.samples[base + speaker], t, turn_end, scenario.rate_hz);
                result.truth.floor_turns[floor].push_back({pid, t, turn_end});
            }

            if (scenario.participants_per_floor >= 2 && rng.bernoulli(scenario.within_overlap_prob)) {
                auto listener = static_cast<int>(rng.uniform_index(scenario.participants_per_floor - 1));
                if (listener >= speaker) ++listener;
                const double within_len = rng.lognormal(within_params) / 1000.0;
                const double slack = (turn_end - t) - within_len;
                if (slack > 0) {
                    const double within_start = t + rng.uniform01() * slack;
                    paint(result.matrix.samples[base + listener], within_start,
                          within_start + within_len, scenario.rate_hz);
                }
            }

            double next_start;
            if (rng.bernoulli(scenario.between_overlap_prob)) {
                const double overlap = std::min(rng.lognormal(between_params) / 1000.0, turn_len);
                next_start = t + turn_len - overlap;
            } else {
                next_start = t + turn_len + rng.lognormal(gap_params) / 1000.0;
            }

            if (scenario.participants_per_floor >= 2) {
                auto next = static_cast<int>(rng.uniform_index(scenario.participants_per_floor - 1));
                if (next >= speaker) ++next;
                speaker = next;
            }
            t = next_start;
        }
    }
    return result;
}

double recovery_rate(const SimScenario& scenario, const WindowConfig& cfg, int n_runs) {
    if (n_runs < 1) throw std::invalid_argument("n_runs must be >= 1");
    WindowConfig run_cfg = cfg;
    run_cfg.rate_hz = scenario.rate_hz;

    int hits = 0;
    for (int run = 0; run < n_runs; ++run) {
        SimScenario s = scenario;
        s.seed = scenario.seed + static_cast<std::uint64_t>(run);
        const SimResult sim = simulate(s);
        const auto obs = max_floors(sim.fformation, sim.matrix, run_cfg);
        if (obs && obs->y == s.n_floors) ++hits;
    }
    return static_cast<double>(hits) / n_runs;
}

SimScenario parse_scenario(std::istream& in) {
    SimScenario s;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        std::string_view body = util::trim(util::strip_cr(line));
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError("expected 'key = value' at row " + std::to_string(row), row);
        }
        const std::string key(util::trim(body.substr(0, eq)));
        const std::string_view value = util::trim(body.substr(eq + 1));

        const auto as_int = [&] { return static_cast<int>(util::parse_int(value, key, row)); };
        const auto as_double = [&] { return util::parse_double(value, key, row); };

        if (key == "n_floors") s.n_floors = as_int();
        else if (key == "participants_per_floor") s.participants_per_floor = as_int();
        else if (key == "duration_s") s.duration_s = as_int();
        else if (key == "rate_hz") s.rate_hz = as_int();
        else if (key == "turn_median_ms") s.turn_dist.median_ms = as_double();
        else if (key == "turn_mean_ms") s.turn_dist.mean_ms = as_double();
        else if (key == "gap_median_ms") s.gap_dist.median_ms = as_double();
        else if (key == "gap_mean_ms") s.gap_dist.mean_ms = as_double();
        else if (key == "within_overlap_prob") s.within_overlap_prob = as_double();
        else if (key == "within_median_ms") s.within_dist.median_ms = as_double();
        else if (key == "within_mean_ms") s.within_dist.mean_ms = as_double();
        else if (key == "between_overlap_prob") s.between_overlap_prob = as_double();
        else if (key == "between_median_ms") s.between_dist.median_ms = as_double();
        else if (key == "between_mean_ms") s.between_dist.mean_ms = as_double();
        else if (key == "seed") s.seed = static_cast<std::uint64_t>(util::parse_int(value, key, row));
        else throw ParseError("unknown scenario key '" + key + "' at row " + std::to_string(row), row);
    }

    auto problems = scenario_problems(s);
    if (!problems.empty()) {
        std::string message = "invalid scenario:";
        for (const auto& p : problems) message += " " + p + ";";
        message.pop_back();
        throw ParseError(message);
    }
    return s;
}

SimScenario parse_scenario(const std::string& text) {
    std::istringstream in(text);
    return parse_scenario(in);
}

void write_scenario(const SimScenario& s, std::ostream& out) {
    out << "n_floors = " << s.n_floors << '\n'
        << "participants_per_floor = " << s.participants_per_floor << '\n'
        << "duration_s = " << s.duration_s << '\n'
        << "rate_hz = " << s.rate_hz << '\n'
        << "turn_median_ms = " << s.turn_dist.median_ms << '\n'
        << "turn_mean_ms = " << s.turn_dist.mean_ms << '\n'
        << "gap_median_ms = " << s.gap_dist.median_ms << '\n'
        << "gap_mean_ms = " << s.gap_dist.mean_ms << '\n'
        << "within_overlap_prob = " << s.within_overlap_prob << '\n'
        << "within_median_ms = " << s.within_dist.median_ms << '\n'
        << "within_mean_ms = " << s.within_dist.mean_ms << '\n'
        << "between_overlap_prob = " << s.between_overlap_prob << '\n'
        << "between_median_ms = " << s.between_dist.median_ms << '\n'
        << "between_mean_ms = " << s.between_dist.mean_ms << '\n'
        << "seed = " << s.seed << '\n';
}

void write_ground_truth(const GroundTruth& truth, std::ostream& out) {
    out << "participant,floor\n";
    for (const auto& [participant, floor] : truth.floor_of) {
        out << participant << ',' << floor << '\n';
    }
}

} // namespace floorkit

// Command-line front end: ingestion, floor-metric sweep, GLM fits, post-hoc
// comparisons, transition statistics, and synthetic corpus generation.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "floorkit/annotation_io.hpp"
#include "floorkit/floor_metric.hpp"
#include "floorkit/glm.hpp"
#include "floorkit/manifest.hpp"
#include "floorkit/simulate.hpp"
#include "floorkit/turns.hpp"

namespace fs = std::filesystem;
using namespace floorkit;

namespace {

std::string fmt(double value) {
    std::ostringstream out;
    out << std::setprecision(10) << value;
    return out.str();
}

SpeakingMatrix load_speaking(const fs::path& path, int rate_hz) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    try {
        return parse_speaking_csv(in, rate_hz);
    } catch (const ParseError& err) {
        throw std::runtime_error(path.string() + ": " + err.what());
    }
}

std::vector<FFormation> load_fformations(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    try {
        return parse_fformations_csv(in);
    } catch (const ParseError& err) {
        throw std::runtime_error(path.string() + ": " + err.what());
    }
}

std::vector<Observation> load_observations(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    try {
        return read_observations_csv(in);
    } catch (const ParseError& err) {
        throw std::runtime_error(path.string() + ": " + err.what());
    }
}

void warn_invalid(const WarningTally& tally) {
    if (tally.invalid_samples > 0) {
        std::cerr << "warning: " << tally.invalid_samples
                  << " invalid (-1) samples treated as silence\n";
    }
}

struct FloorsArgs {
    std::string speaking_csv;
    std::string fformations_csv;
    std::string out_dir;
    int d_min_s = 1;
    int d_max_s = 20;
    int step_s = 1;
    int min_cardinality = 4;
    int rate_hz = 20;
};

int run_floors(const FloorsArgs& args) {
    const auto matrix = load_speaking(args.speaking_csv, args.rate_hz);
    const auto ffs = load_fformations(args.fformations_csv);

    const FilterResult filtered = filter_fformations(ffs, matrix, args.min_cardinality);
    if (filtered.kept.empty()) {
        throw std::runtime_error("no f-formations remain after filtering (of " +
                                 std::to_string(ffs.size()) + " parsed)");
    }

    WarningTally tally;
    const auto observations =
        sweep(filtered.kept, matrix, args.d_min_s, args.d_max_s, args.step_s, &tally);
    const auto aggregate = aggregate_by_cardinality(observations);
    warn_invalid(tally);

    fs::create_directories(args.out_dir);
    const fs::path out_dir = args.out_dir;

    std::ostringstream obs_csv, means_csv, counts_csv;
    write_observations_csv(observations, obs_csv);
    write_mean_table_csv(aggregate, means_csv);
    write_count_table_csv(aggregate, counts_csv);
    atomic_write(out_dir / "observations.csv", obs_csv.str());
    atomic_write(out_dir / "fig3_means.csv", means_csv.str());
    atomic_write(out_dir / "fig5_counts.csv", counts_csv.str());

    RunManifest manifest;
    manifest.command = "floors";
    manifest.config = {{"d_min_s", std::to_string(args.d_min_s)},
                       {"d_max_s", std::to_string(args.d_max_s)},
                       {"step_s", std::to_string(args.step_s)},
                       {"min_cardinality", std::to_string(args.min_cardinality)},
                       {"rate_hz", std::to_string(args.rate_hz)}};
    manifest.add_input(args.speaking_csv);
    manifest.add_input(args.fformations_csv);
    manifest.add_output(out_dir / "observations.csv");
    manifest.add_output(out_dir / "fig3_means.csv");
    manifest.add_output(out_dir / "fig5_counts.csv");
    write_manifest(manifest, out_dir / "manifest.json");

    std::size_t n_card = 0, n_view = 0;
    for (const auto& d : filtered.dropped) (d.reason == "cardinality" ? n_card : n_view)++;
    std::cout << "kept " << filtered.kept.size() << "/" << ffs.size() << " f-formations ("
              << n_card << " dropped by cardinality, " << n_view << " out-of-view)\n"
              << "wrote " << (out_dir / "observations.csv").string() << ": " << observations.size()
              << " observations\n"
              << "wrote fig3_means.csv, fig5_counts.csv, manifest.json\n";
    return 0;
}

void write_fit_report(const GlmFit& fit, const std::string& model, std::ostream& out) {
    out << "model = " << model << '\n'
        << "n_obs = " << fit.n_obs << '\n'
        << "n_coef = " << fit.n_coef << '\n'
        << "converged = " << (fit.converged ? "true" : "false") << '\n'
        << "iterations = " << fit.iterations << '\n'
        << "deviance = " << fmt(fit.deviance) << '\n';
    for (std::size_t k = 0; k < fit.n_coef; ++k) {
        const std::string term = fit.n_coef == 1 ? "intercept" : kModelTerms[k];
        out << "term." << term << ".coef = " << fmt(fit.beta[k]) << '\n'
            << "term." << term << ".std_err = " << fmt(fit.std_err[k]) << '\n'
            << "term." << term << ".z = " << fmt(fit.z[k]) << '\n'
            << "term." << term << ".p = " << fmt(fit.p[k]) << '\n';
    }
}

struct FitArgs {
    std::string observations_csv;
    std::string out_path;
    bool intercept_only = false;
    double tol = 1e-8;
    int max_iter = 50;
};

int run_fit(const FitArgs& args) {
    const auto observations = load_observations(args.observations_csv);
    const DesignMatrix design =
        args.intercept_only ? build_intercept_design(observations) : build_design(observations);

    GlmFit fit = fit_poisson_irls(design, args.tol, args.max_iter);  // throws on rank deficiency
    wald_inference(fit);

    std::ostringstream report;
    write_fit_report(fit, args.intercept_only ? "intercept-only" : "eq1", report);
    atomic_write(args.out_path, report.str());

    RunManifest manifest;
    manifest.command = "fit";
    manifest.config = {{"intercept_only", args.intercept_only ? "true" : "false"},
                       {"tol", fmt(args.tol)},
                       {"max_iter", std::to_string(args.max_iter)}};
    manifest.add_input(args.observations_csv);
    manifest.add_output(args.out_path);
    write_manifest(manifest, args.out_path + ".manifest.json");

    std::cout << "wrote " << args.out_path << " (" << fit.iterations << " iterations, deviance "
              << fmt(fit.deviance) << ")\n";
    if (!fit.converged) {
        std::cerr << "floorkit: fit did not converge within " << args.max_iter << " iterations\n";
        return 1;
    }
    return 0;
}

struct PosthocArgs {
    std::string observations_csv;
    std::string out_path;
    double alpha = 0.001;
};

int run_posthoc(const PosthocArgs& args) {
    const auto observations = load_observations(args.observations_csv);
    const auto pairs = cardinality_pairs(observations);
    if (pairs.empty()) {
        throw std::runtime_error("post-hoc comparison needs at least 2 distinct cardinalities");
    }
    const PosthocTable table = posthoc_pairwise(observations, pairs, args.alpha);

    std::ostringstream report;
    report << "alpha = " << fmt(table.alpha) << '\n' << "n_pairs = " << table.n_pairs << '\n';
    for (const auto& entry : table.entries) {
        const std::string prefix =
            "pair." + std::to_string(entry.cardinality_a) + "-" + std::to_string(entry.cardinality_b);
        report << prefix << ".status = " << (entry.fitted ? "ok" : entry.note) << '\n'
               << prefix << ".n_obs = " << entry.n_obs << '\n';
        if (!entry.fitted) continue;
        for (std::size_t k = 0; k < entry.fit.n_coef; ++k) {
            report << prefix << ".term." << kModelTerms[k] << ".coef = " << fmt(entry.fit.beta[k])
                   << '\n'
                   << prefix << ".term." << kModelTerms[k] << ".nominal_p = " << fmt(entry.fit.p[k])
                   << '\n'
                   << prefix << ".term." << kModelTerms[k]
                   << ".corrected_p = " << fmt(entry.corrected_p[k]) << '\n'
                   << prefix << ".term." << kModelTerms[k]
                   << ".significant = " << (entry.significant[k] ? "true" : "false") << '\n';
        }
    }
    atomic_write(args.out_path, report.str());

    RunManifest manifest;
    manifest.command = "posthoc";
    manifest.config = {{"alpha", fmt(args.alpha)}};
    manifest.add_input(args.observations_csv);
    manifest.add_output(args.out_path);
    write_manifest(manifest, args.out_path + ".manifest.json");

    std::cout << "wrote " << args.out_path << " (" << table.n_pairs << " pairs)\n";
    return 0;
}

struct SynthArgs {
    std::string scenario_file;
    std::string out_dir;
};

int run_synth(const SynthArgs& args) {
    std::ifstream in(args.scenario_file);
    if (!in) throw std::runtime_error("cannot open '" + args.scenario_file + "'");
    SimScenario scenario;
    try {
        scenario = parse_scenario(in);
    } catch (const ParseError& err) {
        throw std::runtime_error(args.scenario_file + ": " + err.what());
    }

    const SimResult sim = simulate(scenario);

    fs::create_directories(args.out_dir);
    const fs::path out_dir = args.out_dir;

    std::ostringstream speaking_csv, ff_csv, truth_csv;
    write_speaking_csv(sim.matrix, speaking_csv);
    write_fformations_csv({sim.fformation}, ff_csv);
    write_ground_truth(sim.truth, truth_csv);
    atomic_write(out_dir / "speaking.csv", speaking_csv.str());
    atomic_write(out_dir / "fformations.csv", ff_csv.str());
    atomic_write(out_dir / "ground_truth.csv", truth_csv.str());

    RunManifest manifest;
    manifest.command = "synth";
    std::ostringstream resolved;
    write_scenario(scenario, resolved);
    std::istringstream lines(resolved.str());
    std::string line;
    while (std::getline(lines, line)) {
        const auto eq = line.find(" = ");
        manifest.config.emplace_back(line.substr(0, eq), line.substr(eq + 3));
    }
    manifest.add_input(args.scenario_file);
    manifest.add_output(out_dir / "speaking.csv");
    manifest.add_output(out_dir / "fformations.csv");
    manifest.add_output(out_dir / "ground_truth.csv");
    write_manifest(manifest, out_dir / "manifest.json");

    std::cout << "wrote " << (out_dir / "speaking.csv").string() << " ("
              << sim.matrix.participants.size() << " participants, " << sim.matrix.n_frames()
              << " frames), fformations.csv, ground_truth.csv, manifest.json\n";
    return 0;
}

struct OverlapsArgs {
    std::string speaking_csv;
    std::string fformations_csv;
    std::string out_path;
    double min_silence_ms = 180.0;
    int rate_hz = 20;
};

void append_summary_row(std::ostream& out, const std::string& ff_id, const std::string& a,
                        const std::string& b, const char* kind, const DurationSummary& summary,
                        const std::optional<double>& fraction) {
    out << ff_id << ',' << a << ',' << b << ',' << kind << ',' << summary.count << ',';
    if (summary.mean_s) out << fmt(*summary.mean_s);
    out << ',';
    if (summary.median_s) out << fmt(*summary.median_s);
    out << ',';
    if (summary.mode_s) out << fmt(*summary.mode_s);
    out << ',';
    if (fraction) out << fmt(*fraction);
    out << '\n';
}

int run_overlaps(const OverlapsArgs& args) {
    const auto matrix = load_speaking(args.speaking_csv, args.rate_hz);
    const auto ffs = load_fformations(args.fformations_csv);

    std::ostringstream csv;
    csv << "fformation_id,participant_a,participant_b,kind,count,mean_s,median_s,mode_s,"
           "overlap_fraction\n";
    const std::size_t frames = matrix.n_frames();
    for (const auto& ff : ffs) {
        const std::size_t first =
            std::min(frames, static_cast<std::size_t>(ff.start_s) * matrix.rate_hz);
        const std::size_t last =
            std::min(frames, static_cast<std::size_t>(ff.end_s) * matrix.rate_hz);

        // Turns are segmented within the lifetime; times are absolute.
        std::vector<std::vector<Turn>> member_turns;
        for (const auto& member : ff.members) {
            auto idx = matrix.find_participant(member);
            if (!idx) {
                throw std::runtime_error("f-formation '" + ff.id + "' member '" + member +
                                         "' not present in speaking matrix");
            }
            const auto& track = matrix.samples[*idx];
            auto turns = segment_turns({track.data() + first, last - first}, matrix.rate_hz,
                                       args.min_silence_ms, member);
            for (auto& turn : turns) {
                turn.start_s += ff.start_s;
                turn.end_s += ff.start_s;
            }
            member_turns.push_back(std::move(turns));
        }

        for (std::size_t i = 0; i < ff.members.size(); ++i) {
            for (std::size_t j = i + 1; j < ff.members.size(); ++j) {
                const auto events = classify_transitions(member_turns[i], member_turns[j]);
                const OverlapStats stats = overlap_stats(events);
                append_summary_row(csv, ff.id, ff.members[i], ff.members[j], "gap", stats.gap,
                                   stats.overlap_fraction);
                append_summary_row(csv, ff.id, ff.members[i], ff.members[j], "between-overlap",
                                   stats.between_overlap, stats.overlap_fraction);
                append_summary_row(csv, ff.id, ff.members[i], ff.members[j], "within-overlap",
                                   stats.within_overlap, stats.overlap_fraction);
            }
        }
    }
    atomic_write(args.out_path, csv.str());

    RunManifest manifest;
    manifest.command = "overlaps";
    manifest.config = {{"min_silence_ms", fmt(args.min_silence_ms)},
                       {"rate_hz", std::to_string(args.rate_hz)}};
    manifest.add_input(args.speaking_csv);
    manifest.add_input(args.fformations_csv);
    manifest.add_output(args.out_path);
    write_manifest(manifest, args.out_path + ".manifest.json");

    std::cout << "wrote " << args.out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"conversation-floor analysis over speaking-status annotations"};
    app.require_subcommand(1);

    FloorsArgs floors_args;
    auto* floors = app.add_subcommand(
        "floors", "sweep the simultaneous-speaker metric and write observation tables");
    floors->add_option("--speaking", floors_args.speaking_csv, "speaking-status CSV")->required();
    floors->add_option("--fformations", floors_args.fformations_csv, "f-formation CSV")->required();
    floors->add_option("--out-dir", floors_args.out_dir, "output directory")->required();
    floors->add_option("--d-min-s", floors_args.d_min_s, "smallest window duration, seconds");
    floors->add_option("--d-max-s", floors_args.d_max_s, "largest window duration, seconds");
    floors->add_option("--step-s", floors_args.step_s, "window step, seconds");
    floors->add_option("--min-cardinality", floors_args.min_cardinality, "cardinality filter");
    floors->add_option("--rate-hz", floors_args.rate_hz, "samples per second");

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "fit the Poisson GLM to an observation table");
    fit->add_option("--observations", fit_args.observations_csv, "observation CSV")->required();
    fit->add_option("--out", fit_args.out_path, "report path")->required();
    fit->add_flag("--intercept-only", fit_args.intercept_only, "fit only an intercept");
    fit->add_option("--tol", fit_args.tol, "deviance convergence tolerance");
    fit->add_option("--max-iter", fit_args.max_iter, "iteration cap");

    PosthocArgs posthoc_args;
    auto* posthoc =
        app.add_subcommand("posthoc", "pairwise GLM fits per cardinality pair, Bonferroni corrected");
    posthoc->add_option("--observations", posthoc_args.observations_csv, "observation CSV")
        ->required();
    posthoc->add_option("--out", posthoc_args.out_path, "report path")->required();
    posthoc->add_option("--alpha", posthoc_args.alpha, "significance threshold on corrected p");

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "generate a synthetic corpus from a scenario file");
    synth->add_option("--scenario", synth_args.scenario_file, "scenario key/value file")->required();
    synth->add_option("--out-dir", synth_args.out_dir, "output directory")->required();

    OverlapsArgs overlaps_args;
    auto* overlaps =
        app.add_subcommand("overlaps", "per member pair transition statistics (gap/between/within)");
    overlaps->add_option("--speaking", overlaps_args.speaking_csv, "speaking-status CSV")->required();
    overlaps->add_option("--fformations", overlaps_args.fformations_csv, "f-formation CSV")
        ->required();
    overlaps->add_option("--out", overlaps_args.out_path, "output CSV path")->required();
    overlaps->add_option("--min-silence-ms", overlaps_args.min_silence_ms,
                         "turn delimiter silence, milliseconds");
    overlaps->add_option("--rate-hz", overlaps_args.rate_hz, "samples per second");

    CLI11_PARSE(app, argc, argv);

    try {
        if (floors->parsed()) return run_floors(floors_args);
        if (fit->parsed()) return run_fit(fit_args);
        if (posthoc->parsed()) return run_posthoc(posthoc_args);
        if (synth->parsed()) return run_synth(synth_args);
        if (overlaps->parsed()) return run_overlaps(overlaps_args);
    } catch (const std::exception& err) {
        std::cerr << "floorkit: error: " << err.what() << '\n';
        return 1;
    }
    return 0;
}

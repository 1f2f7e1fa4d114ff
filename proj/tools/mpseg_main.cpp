#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mpseg/errors.hpp"
#include "mpseg/pipeline.hpp"
#include "mpseg/serialization.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitInput = 2;
constexpr int kExitCompute = 3;

void add_run_config_flags(CLI::App* cmd, mpseg::RunConfig& config, std::string& config_file) {
    cmd->add_option("--config", config_file, "key=value config file (flags override)");
    cmd->add_option("--dt", config.dt, "resampling step, seconds");
    cmd->add_option("--smooth-window", config.smooth_window,
                    "odd moving-average window for derivative estimation");
    cmd->add_option("--deadband", config.deadband, "zero-crossing deadband, degrees");
    cmd->add_option("--min-gap", config.min_gap, "minimum samples between cuts");
    cmd->add_option("--n-basis", config.n_basis, "forcing basis functions per channel");
    cmd->add_option("--alpha-z", config.alpha_z, "phase decay constant");
    cmd->add_option("--alpha-y", config.alpha_y, "spring constant (beta = alpha/4)");
    cmd->add_option("--pc", config.p_c, "cut-confidence prior in (0,1)");
    cmd->add_option("--kmax", config.k_max, "max cut span of a candidate segment");
    cmd->add_option("--components", config.n_components, "mixture component count");
    cmd->add_flag("--select-m", config.select_m_bic, "pick component count by BIC sweep");
    cmd->add_option("--max-iter", config.max_iter, "EM iteration cap");
    cmd->add_option("--tol", config.tol, "relative evidence improvement threshold");
    cmd->add_option("--baseline-k", config.baseline_k,
                    "baseline cluster count (0: match --components)");
    cmd->add_option("--seed", config.seed, "random seed");
    cmd->add_option("--jobs", config.jobs, "worker threads for per-trajectory stages");
}

int run_segment(const std::vector<std::string>& inputs, const mpseg::RunConfig& config,
                const std::string& out_dir) {
    std::vector<fs::path> paths(inputs.begin(), inputs.end());
    auto out = mpseg::run_segment_command(paths, config, out_dir);
    std::cout << "segment: " << out.trajectories.size() << " trajectories, "
              << out.result.library.size() << " components, "
              << out.result.state.iterations << " EM iterations"
              << (out.result.state.converged ? "" : " (not converged)") << "\n";
    for (const auto& ev : out.result.state.events) std::cerr << "note: " << ev << "\n";
    return 0;
}

int run_baseline(const std::vector<std::string>& inputs, const mpseg::RunConfig& config,
                 const std::string& out_dir) {
    std::vector<fs::path> paths(inputs.begin(), inputs.end());
    auto out = mpseg::run_baseline_command(paths, config, out_dir);
    std::size_t boundaries = 0;
    for (const auto& r : out.results) {
        boundaries += r.segments.empty() ? 0 : r.segments.size() - 1;
    }
    std::cout << "baseline: " << out.trajectories.size() << " trajectories, "
              << out.model.size() << " clusters, " << boundaries << " boundaries\n";
    for (const auto& ev : out.model.events) std::cerr << "note: " << ev << "\n";
    return 0;
}

int run_rollout(const std::string& library_file, long component, double g_theta,
                double g_v, double duration, bool goal_from_mean,
                const std::string& out_file) {
    const auto lib = mpseg::load_library(library_file);
    if (component < 0 || static_cast<std::size_t>(component) >= lib.size()) {
        throw mpseg::ComputeError("unknown component id " + std::to_string(component) +
                                  "; library has ids 0.." + std::to_string(lib.size() - 1));
    }
    const auto& comp = lib.components[static_cast<std::size_t>(component)];
    const auto params = mpseg::extract_primitive(comp, lib);
    if (goal_from_mean) {
        const auto goal = mpseg::extract_goal(comp, lib);
        g_theta = goal.first;
        g_v = goal.second;
    }
    const auto track = mpseg::retarget(params, g_theta, g_v, duration, lib.cfg);
    mpseg::save_track_csv(track, out_file);
    std::cout << "rollout: component " << component << " -> " << out_file << " ("
              << track.size() << " samples)\n";
    return 0;
}

int run_compare(const std::string& a, const std::string& b, const std::string& cuts,
                const std::string& truth, std::size_t tol) {
    const auto rows = mpseg::run_compare_command(a, b, cuts, truth, tol);
    std::cout << "traj,n1,n2_a,n2_b";
    const bool has_truth = !rows.empty() && rows.front().has_truth;
    if (has_truth) std::cout << ",f1_a,f1_b";
    std::cout << "\n";
    for (const auto& r : rows) {
        std::cout << r.traj << ',';
        if (r.n1 >= 0) std::cout << r.n1;
        std::cout << ',' << r.n2_a << ',' << r.n2_b;
        if (has_truth) {
            char buf[64];
            std::snprintf(buf, sizeof buf, ",%.4f,%.4f", r.score_a.f1, r.score_b.f1);
            std::cout << buf;
        }
        std::cout << "\n";
    }
    return 0;
}

int run_synth(const mpseg::RunConfig& config, std::size_t n_traj, std::size_t n_prims,
              double noise, double noise_speed, double wiggle_rate, double wiggle_amp,
              const std::string& out_dir) {
    mpseg::ScenarioSpec spec;
    spec.prototypes = mpseg::default_prototypes(config.dmp_config());
    spec.n_trajectories = n_traj;
    spec.primitives_per_traj = n_prims;
    spec.dt = config.dt;
    spec.noise_deg = noise;
    spec.noise_speed = noise_speed;
    spec.wiggle_rate = wiggle_rate;
    spec.wiggle_amplitude = wiggle_amp;
    spec.seed = config.seed;
    auto trajs = mpseg::run_synth_command(spec, config, out_dir);
    std::cout << "synth: " << trajs.size() << " trajectories -> " << out_dir << "\n";
    return 0;
}

int run_plotdata(const std::string& traj_file, const std::string& segments_file,
                 const std::string& library_file, const mpseg::RunConfig& config,
                 const std::string& out_dir) {
    const auto traj = mpseg::resample_and_difference(mpseg::ingest_csv(traj_file), config.dt);
    const auto segs = mpseg::load_segments_csv(segments_file);

    mpseg::SegmentationResult result;
    for (const auto& row : segs.rows) {
        if (row.traj != 0) continue;  // plotdata handles one trajectory per call
        mpseg::FinalSegment seg;
        seg.start = row.start;
        seg.end = row.end;
        seg.component = row.component < 0 ? 0 : static_cast<std::size_t>(row.component);
        seg.alpha = row.alpha;
        result.segments.push_back(seg);
    }

    mpseg::PrimitiveLibrary lib;
    mpseg::PlotBundle bundle;
    bundle.traj = &traj;
    bundle.segmentation = result.segments.empty() ? nullptr : &result;
    if (!library_file.empty()) {
        lib = mpseg::load_library(library_file);
        bundle.library = &lib;
    }
    bundle.smooth_window = config.smooth_window;
    mpseg::emit_plot_data(bundle, out_dir);
    std::cout << "plotdata: " << result.segments.size() << " segments -> " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Motion-primitive segmentation and library learning for driving trajectories"};
    app.require_subcommand(1);

    mpseg::RunConfig config;
    std::string config_file;
    std::vector<std::string> inputs;
    std::string out_dir = "out";

    auto* seg = app.add_subcommand("segment", "joint probabilistic segmentation + library");
    seg->add_option("inputs", inputs, "trajectory CSV files")->required();
    seg->add_option("--out", out_dir, "output directory");
    add_run_config_flags(seg, config, config_file);

    auto* base = app.add_subcommand("baseline", "pointwise EM-GMM baseline segmentation");
    base->add_option("inputs", inputs, "trajectory CSV files")->required();
    base->add_option("--out", out_dir, "output directory");
    add_run_config_flags(base, config, config_file);

    auto* roll = app.add_subcommand("rollout", "retarget a library primitive");
    std::string library_file, out_file = "track.csv";
    long component = 0;
    double g_theta = 0.0, g_v = 0.0, duration = 0.0;
    roll->add_option("--library", library_file, "library JSON file")->required();
    roll->add_option("--component", component, "component id")->required();
    auto* gt_opt = roll->add_option("--goal-dtheta", g_theta, "goal course deviation, degrees");
    auto* gv_opt = roll->add_option("--goal-dv", g_v, "goal speed deviation, m/s");
    roll->add_option("--duration", duration, "duration, seconds")->required();
    roll->add_option("--out", out_file, "output track CSV");

    auto* cmp = app.add_subcommand("compare", "n1/n2 table for two result files");
    std::string file_a, file_b, cuts_file, truth_file;
    std::size_t tol = 3;
    cmp->add_option("--a", file_a, "segments.csv of method A")->required();
    cmp->add_option("--b", file_b, "segments.csv of method B")->required();
    cmp->add_option("--cuts", cuts_file, "initial_cuts.csv for the n1 column");
    cmp->add_option("--truth", truth_file, "truth.csv for F1 columns");
    cmp->add_option("--tol", tol, "cut matching tolerance, samples");

    auto* synth = app.add_subcommand("synth", "generate a synthetic scenario");
    std::size_t n_traj = 6, n_prims = 5;
    double noise = 0.02, noise_speed = 0.02, wiggle_rate = 0.9, wiggle_amp = 0.4;
    synth->add_option("--trajectories", n_traj, "trajectories to generate");
    synth->add_option("--primitives", n_prims, "primitives per trajectory");
    synth->add_option("--noise", noise, "dtheta noise std dev, degrees");
    synth->add_option("--noise-speed", noise_speed, "speed noise std dev, m/s");
    synth->add_option("--wiggle-rate", wiggle_rate, "expected spurious wiggles per primitive");
    synth->add_option("--wiggle-amplitude", wiggle_amp, "wiggle amplitude, degrees");
    synth->add_option("--out", out_dir, "output directory");
    add_run_config_flags(synth, config, config_file);

    auto* plot = app.add_subcommand("plotdata", "emit plot-ready columnar files");
    std::string traj_file, segments_file, plot_library;
    plot->add_option("--traj", traj_file, "trajectory CSV")->required();
    plot->add_option("--segments", segments_file, "segments.csv")->required();
    plot->add_option("--library", plot_library, "library JSON (optional)");
    plot->add_option("--out", out_dir, "output directory");
    add_run_config_flags(plot, config, config_file);

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_file.empty()) {
            // Config file first, then re-apply explicit flags by re-parsing.
            mpseg::RunConfig file_config;
            file_config.apply_file(config_file);
            mpseg::RunConfig flag_defaults;
            auto pick = [&](auto field) {
                if (config.*field != flag_defaults.*field) file_config.*field = config.*field;
            };
            pick(&mpseg::RunConfig::dt);
            pick(&mpseg::RunConfig::smooth_window);
            pick(&mpseg::RunConfig::deadband);
            pick(&mpseg::RunConfig::min_gap);
            pick(&mpseg::RunConfig::n_basis);
            pick(&mpseg::RunConfig::alpha_z);
            pick(&mpseg::RunConfig::alpha_y);
            pick(&mpseg::RunConfig::p_c);
            pick(&mpseg::RunConfig::k_max);
            pick(&mpseg::RunConfig::n_components);
            pick(&mpseg::RunConfig::select_m_bic);
            pick(&mpseg::RunConfig::max_iter);
            pick(&mpseg::RunConfig::tol);
            pick(&mpseg::RunConfig::baseline_k);
            pick(&mpseg::RunConfig::seed);
            pick(&mpseg::RunConfig::jobs);
            config = file_config;
        }
        config.validate();

        if (seg->parsed()) return run_segment(inputs, config, out_dir);
        if (base->parsed()) return run_baseline(inputs, config, out_dir);
        if (roll->parsed()) {
            const bool goal_from_mean = gt_opt->count() == 0 && gv_opt->count() == 0;
            return run_rollout(library_file, component, g_theta, g_v, duration,
                               goal_from_mean, out_file);
        }
        if (cmp->parsed()) return run_compare(file_a, file_b, cuts_file, truth_file, tol);
        if (synth->parsed()) {
            return run_synth(config, n_traj, n_prims, noise, noise_speed, wiggle_rate,
                             wiggle_amp, out_dir);
        }
        if (plot->parsed()) {
            return run_plotdata(traj_file, segments_file, plot_library, config, out_dir);
        }
    } catch (const mpseg::ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const mpseg::ComputeError& e) {
        std::cerr << "computation error: " << e.what() << "\n";
        return kExitCompute;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCompute;
    }
    return kExitUsage;
}

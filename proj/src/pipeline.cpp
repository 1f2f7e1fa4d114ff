#include "mpseg/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mpseg/errors.hpp"
#include "mpseg/mathutil.hpp"
#include "mpseg/serialization.hpp"

namespace mpseg {

void RunConfig::validate() const {
    if (!(dt > 0.0)) throw ParseError("dt must be positive");
    if (smooth_window < 1 || smooth_window % 2 == 0) {
        throw ParseError("smooth_window must be odd and >= 1");
    }
    if (deadband < 0.0) throw ParseError("deadband must be >= 0");
    if (min_gap < 1) throw ParseError("min_gap must be >= 1");
    if (n_basis < 1) throw ParseError("n_basis must be >= 1");
    if (!(alpha_z > 0.0) || !(alpha_y > 0.0)) throw ParseError("DMP constants must be positive");
    if (!(p_c > 0.0 && p_c < 1.0)) throw ParseError("p_c must lie in (0, 1)");
    if (k_max < 1) throw ParseError("k_max must be >= 1");
    if (n_components < 1) throw ParseError("components must be >= 1");
    if (max_iter < 1) throw ParseError("max_iter must be >= 1");
    if (!(tol > 0.0)) throw ParseError("tol must be positive");
    if (jobs < 1) throw ParseError("jobs must be >= 1");
}

DmpConfig RunConfig::dmp_config() const {
    // dt stays 0: segment fits integrate on the trajectory grid.
    return DmpConfig::with_constants(alpha_z, alpha_y, n_basis, 0.0);
}

EmOptions RunConfig::em_options() const {
    EmOptions opt;
    opt.p_c = p_c;
    opt.k_max = k_max;
    opt.n_components = n_components;
    opt.select_m_bic = select_m_bic;
    opt.max_iter = max_iter;
    opt.tol = tol;
    opt.seed = seed;
    opt.smooth_window = smooth_window;
    opt.jobs = jobs;
    return opt;
}

std::string RunConfig::canonical_text() const {
    std::ostringstream os;
    os.precision(17);
    os << "dt=" << dt << '\n'
       << "smooth_window=" << smooth_window << '\n'
       << "deadband=" << deadband << '\n'
       << "min_gap=" << min_gap << '\n'
       << "n_basis=" << n_basis << '\n'
       << "alpha_z=" << alpha_z << '\n'
       << "alpha_y=" << alpha_y << '\n'
       << "p_c=" << p_c << '\n'
       << "k_max=" << k_max << '\n'
       << "components=" << n_components << '\n'
       << "select_m_bic=" << (select_m_bic ? 1 : 0) << '\n'
       << "max_iter=" << max_iter << '\n'
       << "tol=" << tol << '\n'
       << "baseline_k=" << baseline_k << '\n'
       << "seed=" << seed << '\n';
    return os.str();
}

std::string RunConfig::hash_hex() const {
    std::ostringstream os;
    os << std::hex << fnv1a64(canonical_text());
    return os.str();
}

void RunConfig::apply_entry(const std::string& key, const std::string& value) {
    auto as_double = [&](double& out) {
        auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
        if (ec != std::errc{} || p != value.data() + value.size()) {
            throw ParseError("config: malformed value for " + key);
        }
    };
    auto as_size = [&](std::size_t& out) {
        double d = 0.0;
        as_double(d);
        if (d < 0.0 || d != std::floor(d)) throw ParseError("config: " + key + " must be a non-negative integer");
        out = static_cast<std::size_t>(d);
    };

    if (key == "dt") as_double(dt);
    else if (key == "smooth_window") { std::size_t v; as_size(v); smooth_window = static_cast<int>(v); }
    else if (key == "deadband") as_double(deadband);
    else if (key == "min_gap") as_size(min_gap);
    else if (key == "n_basis") { std::size_t v; as_size(v); n_basis = static_cast<int>(v); }
    else if (key == "alpha_z") as_double(alpha_z);
    else if (key == "alpha_y") as_double(alpha_y);
    else if (key == "p_c") as_double(p_c);
    else if (key == "k_max") as_size(k_max);
    else if (key == "components") as_size(n_components);
    else if (key == "select_m_bic") { std::size_t v; as_size(v); select_m_bic = v != 0; }
    else if (key == "max_iter") as_size(max_iter);
    else if (key == "tol") as_double(tol);
    else if (key == "baseline_k") as_size(baseline_k);
    else if (key == "seed") { std::size_t v; as_size(v); seed = v; }
    else if (key == "jobs") as_size(jobs);
    else throw ParseError("config: unknown key '" + key + "'");
}

void RunConfig::apply_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path.string());
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        // Strip comments and blanks.
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.erase(hash_pos);
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ParseError(path.string() + ": expected key=value in line " +
                             std::to_string(row));
        }
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        apply_entry(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

std::vector<Trajectory> load_trajectories(const std::vector<std::filesystem::path>& inputs,
                                          double dt) {
    if (inputs.empty()) throw ParseError("no input files given");
    std::vector<Trajectory> trajs;
    trajs.reserve(inputs.size());
    for (const auto& path : inputs) {
        trajs.push_back(resample_and_difference(ingest_csv(path), dt));
    }
    return trajs;
}

SegmentOutputs run_segment_command(const std::vector<std::filesystem::path>& inputs,
                                   const RunConfig& config,
                                   const std::filesystem::path& out_dir) {
    config.validate();
    SegmentOutputs out;
    out.trajectories = load_trajectories(inputs, config.dt);
    out.cuts.reserve(out.trajectories.size());
    for (const auto& traj : out.trajectories) {
        out.cuts.push_back(zero_cross_cuts(traj, config.min_gap, config.deadband));
    }
    out.result = run_em(out.trajectories, out.cuts, config.dmp_config(),
                        config.em_options());

    const std::string hash = config.hash_hex();
    std::filesystem::create_directories(out_dir);
    save_segments_csv(out.result.per_trajectory, out_dir / "segments.csv", hash);
    save_cuts_csv(out.cuts, out_dir / "initial_cuts.csv", hash);
    save_library(out.result.library, out_dir / "library.json", hash);
    save_em_log(out.result.state.evidence, out_dir / "em_log.csv", hash);
    return out;
}

BaselineOutputs run_baseline_command(const std::vector<std::filesystem::path>& inputs,
                                     const RunConfig& config,
                                     const std::filesystem::path& out_dir) {
    config.validate();
    BaselineOutputs out;
    out.trajectories = load_trajectories(inputs, config.dt);
    const std::size_t k = config.baseline_k > 0 ? config.baseline_k : config.n_components;
    out.model = fit_pointwise_gmm(out.trajectories, k, config.max_iter, config.tol,
                                  config.seed);
    for (const auto& traj : out.trajectories) {
        const auto seg = label_and_segment(traj, out.model);
        SegmentationResult res;
        res.segments = seg.segments;
        res.active_cuts.push_back(0);
        for (const auto& s : seg.segments) res.active_cuts.push_back(s.end);
        out.results.push_back(std::move(res));
    }

    const std::string hash = config.hash_hex();
    std::filesystem::create_directories(out_dir);
    save_segments_csv(out.results, out_dir / "segments.csv", hash);
    save_em_log(out.model.loglik_history, out_dir / "em_log.csv", hash);
    return out;
}

std::vector<SyntheticTrajectory> run_synth_command(const ScenarioSpec& spec,
                                                   const RunConfig& config,
                                                   const std::filesystem::path& out_dir) {
    config.validate();
    auto trajs = generate(spec, config.dmp_config());
    std::filesystem::create_directories(out_dir);
    for (std::size_t t = 0; t < trajs.size(); ++t) {
        save_trajectory_csv(trajs[t].traj, out_dir / ("traj_" + std::to_string(t) + ".csv"));
    }
    save_truth_csv(trajs, out_dir / "truth.csv");
    return trajs;
}

std::vector<CompareRow> run_compare_command(const std::filesystem::path& segments_a,
                                            const std::filesystem::path& segments_b,
                                            const std::filesystem::path& cuts_file,
                                            const std::filesystem::path& truth_file,
                                            std::size_t tol) {
    const auto a = load_segments_csv(segments_a);
    const auto b = load_segments_csv(segments_b);
    const std::size_t n = std::max(a.n_trajectories(), b.n_trajectories());
    if (a.n_trajectories() != b.n_trajectories()) {
        throw ParseError("result files cover different trajectory counts");
    }

    std::vector<std::vector<std::size_t>> initial_cuts;
    if (!cuts_file.empty()) initial_cuts = load_cuts_csv(cuts_file);
    TruthFile truth;
    const bool has_truth = !truth_file.empty();
    if (has_truth) truth = load_truth_csv(truth_file);

    std::vector<CompareRow> rows;
    for (std::size_t t = 0; t < n; ++t) {
        CompareRow row;
        row.traj = t;
        const auto bound_a = a.interior_boundaries(t);
        const auto bound_b = b.interior_boundaries(t);
        row.n2_a = bound_a.size();
        row.n2_b = bound_b.size();
        if (t < initial_cuts.size() && initial_cuts[t].size() >= 2) {
            row.n1 = static_cast<long>(initial_cuts[t].size() - 2);
        }
        if (has_truth && t < truth.cuts_per_traj.size()) {
            const auto& cuts = truth.cuts_per_traj[t];
            std::vector<std::size_t> interior(cuts.begin() + 1, cuts.end() - 1);
            row.has_truth = true;
            row.score_a = cut_f1(bound_a, interior, tol);
            row.score_b = cut_f1(bound_b, interior, tol);
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace mpseg

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mpseg/baseline.hpp"
#include "mpseg/evaluation.hpp"
#include "mpseg/segmentation.hpp"
#include "mpseg/synthetic.hpp"

namespace mpseg {

/// All knobs of a reproducible run. Downstream constraints are checked by
/// validate() before any output is touched.
struct RunConfig {
    // trajectory-io
    double dt = 0.1;
    int smooth_window = 1;
    // heuristic-cuts
    double deadband = 0.05;
    std::size_t min_gap = 5;
    // dmp
    int n_basis = 15;
    double alpha_z = 4.605170185988091;
    double alpha_y = 25.0;
    // probabilistic segmentation
    double p_c = 0.4;
    std::size_t k_max = 6;
    std::size_t n_components = 8;
    bool select_m_bic = false;
    std::size_t max_iter = 100;
    double tol = 1e-6;
    // baseline
    std::size_t baseline_k = 0;  ///< 0: match n_components
    // misc
    std::uint64_t seed = 1;
    std::size_t jobs = 1;

    void validate() const;
    [[nodiscard]] DmpConfig dmp_config() const;
    [[nodiscard]] EmOptions em_options() const;

    /// Canonical key=value rendering; the basis of the config hash.
    [[nodiscard]] std::string canonical_text() const;
    [[nodiscard]] std::string hash_hex() const;

    /// Apply `key = value` lines from a config file; unknown keys fail.
    void apply_file(const std::filesystem::path& path);
    void apply_entry(const std::string& key, const std::string& value);
};

/// segment: ingest CSVs, cut, run joint EM, write segments/cuts/library/log.
struct SegmentOutputs {
    EmRunResult result;
    std::vector<Trajectory> trajectories;
    std::vector<CutPointSet> cuts;
};
SegmentOutputs run_segment_command(const std::vector<std::filesystem::path>& inputs,
                                   const RunConfig& config,
                                   const std::filesystem::path& out_dir);

/// baseline: ingest CSVs, fit the pointwise mixture, write segments/log.
struct BaselineOutputs {
    PointwiseGmm model;
    std::vector<SegmentationResult> results;  ///< same export schema as segment
    std::vector<Trajectory> trajectories;
};
BaselineOutputs run_baseline_command(const std::vector<std::filesystem::path>& inputs,
                                     const RunConfig& config,
                                     const std::filesystem::path& out_dir);

/// synth: generate a scenario, write trajectory CSVs plus ground truth.
std::vector<SyntheticTrajectory> run_synth_command(const ScenarioSpec& spec,
                                                   const RunConfig& config,
                                                   const std::filesystem::path& out_dir);

/// compare: n1/n2 table for two result files; optional truth adds F1 columns.
struct CompareRow {
    std::size_t traj = 0;
    long n1 = -1;  ///< interior initial cuts; -1 when no cuts file given
    std::size_t n2_a = 0;
    std::size_t n2_b = 0;
    bool has_truth = false;
    MatchScore score_a;
    MatchScore score_b;
};
std::vector<CompareRow> run_compare_command(const std::filesystem::path& segments_a,
                                            const std::filesystem::path& segments_b,
                                            const std::filesystem::path& cuts_file,
                                            const std::filesystem::path& truth_file,
                                            std::size_t tol);

std::vector<Trajectory> load_trajectories(const std::vector<std::filesystem::path>& inputs,
                                          double dt);

}  // namespace mpseg

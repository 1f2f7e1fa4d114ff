#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "mpseg/dmp.hpp"
#include "mpseg/library.hpp"
#include "mpseg/segmentation.hpp"
#include "mpseg/trajectory.hpp"

namespace mpseg {

/// Elementwise |demonstrated - learned| for one channel's position and
/// velocity series, plus summary statistics.
struct ChannelDeviation {
    std::vector<double> d_pos;
    std::vector<double> d_vel;
    double rmse_pos = 0.0;
    double max_pos = 0.0;
    double rmse_vel = 0.0;
    double max_vel = 0.0;
};

struct DeviationReport {
    ChannelDeviation lateral;
    ChannelDeviation longitudinal;
};

/// Linear resampling of a track onto n_points uniform samples.
PrimitiveTrack resample_track(const PrimitiveTrack& track, std::size_t n_points);

/// Absolute deviations between a demonstrated and a learned track; the
/// learned track is resampled onto the demonstrated grid when lengths differ.
DeviationReport deviation_report(const PrimitiveTrack& demonstrated,
                                 const PrimitiveTrack& learned);

/// Greedy one-to-one cut matching within +-tol samples.
struct MatchScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t matched = 0;
};
MatchScore cut_f1(std::span<const std::size_t> predicted, std::span<const std::size_t> truth,
                  std::size_t tol);

/// n1/n2 style comparison row for one trajectory.
struct SegmentationComparison {
    std::size_t initial_cuts = 0;           ///< n1, interior
    std::size_t active_cuts_probs = 0;      ///< n2 of the probabilistic method, interior
    std::size_t boundaries_baseline = 0;    ///< label-change boundaries of the baseline
    bool has_truth = false;
    MatchScore probs_score;
    MatchScore baseline_score;
};

/// Everything emit_plot_data needs for one trajectory.
struct PlotBundle {
    const Trajectory* traj = nullptr;
    const SegmentationResult* segmentation = nullptr;  ///< may be null: header-only output
    const PrimitiveLibrary* library = nullptr;         ///< may be null: skip library rollouts
    int smooth_window = 1;
};

/// Write plot-ready columnar files: a per-sample overlay with component ids,
/// per-segment demonstrated vs learned rollout tracks, and deviation series.
void emit_plot_data(const PlotBundle& bundle, const std::filesystem::path& out_dir);

}  // namespace mpseg

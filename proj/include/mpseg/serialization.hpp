#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mpseg/cuts.hpp"
#include "mpseg/dmp.hpp"
#include "mpseg/library.hpp"
#include "mpseg/segmentation.hpp"
#include "mpseg/synthetic.hpp"

namespace mpseg {

/// Library file: versioned JSON with config, standardization and components.
/// Round-trips losslessly.
void save_library(const PrimitiveLibrary& lib, const std::filesystem::path& path,
                  const std::string& config_hash = "");
PrimitiveLibrary load_library(const std::filesystem::path& path);

/// Primitive records: versioned JSON array, one record per primitive with
/// the config hash, v_init, both weight vectors, goal and duration.
void save_primitives(std::span<const std::pair<DmpParams, DmpAdjustment>> primitives,
                     const DmpConfig& cfg, const std::filesystem::path& path);
std::vector<std::pair<DmpParams, DmpAdjustment>> load_primitives(
    const std::filesystem::path& path, const DmpConfig& cfg);

/// Segmentation results: columnar CSV `traj,start,end,component,alpha` with
/// a `# config_hash=...` comment line.
void save_segments_csv(std::span<const SegmentationResult> results,
                       const std::filesystem::path& path,
                       const std::string& config_hash = "");
struct SegmentsFile {
    struct Row {
        std::size_t traj = 0;
        std::size_t start = 0;
        std::size_t end = 0;
        long component = -1;
        double alpha = 1.0;
    };
    std::vector<Row> rows;
    std::string config_hash;

    [[nodiscard]] std::size_t n_trajectories() const;
    /// Interior boundary samples (segment ends except the trajectory end).
    [[nodiscard]] std::vector<std::size_t> interior_boundaries(std::size_t traj) const;
};
SegmentsFile load_segments_csv(const std::filesystem::path& path);

/// Initial cut sets: CSV `traj,index`.
void save_cuts_csv(std::span<const CutPointSet> cuts, const std::filesystem::path& path,
                   const std::string& config_hash = "");
std::vector<std::vector<std::size_t>> load_cuts_csv(const std::filesystem::path& path);

/// EM iteration log: CSV `iteration,evidence`.
void save_em_log(std::span<const double> evidence, const std::filesystem::path& path,
                 const std::string& config_hash = "");

/// Synthetic ground truth: CSV `traj,start,end,prototype` (sample indices).
void save_truth_csv(std::span<const SyntheticTrajectory> trajs,
                    const std::filesystem::path& path);
struct TruthFile {
    std::vector<std::vector<std::size_t>> cuts_per_traj;  ///< incl. endpoints
};
TruthFile load_truth_csv(const std::filesystem::path& path);

/// Write a generated trajectory back out in the ingestible CSV schema.
void save_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);

/// Rolled-out track: CSV `t,dtheta_m,dtheta_m_dot,dv_m,dv_m_dot`.
void save_track_csv(const PrimitiveTrack& track, const std::filesystem::path& path,
                    const std::string& config_hash = "");

}  // namespace mpseg

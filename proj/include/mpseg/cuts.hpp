#pragma once

#include <cstddef>
#include <vector>

#include "mpseg/trajectory.hpp"

namespace mpseg {

/// Candidate segment boundaries as sample indices into a Trajectory.
/// Always contains 0 and size-1; strictly increasing.
struct CutPointSet {
    std::vector<std::size_t> indices;

    [[nodiscard]] std::size_t size() const { return indices.size(); }
    [[nodiscard]] std::size_t n_interior() const {
        return indices.size() < 2 ? 0 : indices.size() - 2;
    }

    void validate(std::size_t traj_len) const;
};

/// Over-segment a trajectory by zero-crossing detection on the course
/// deviation channel. Values with |dtheta| < deadband are treated as zero;
/// a run of zeros yields one cut at the run start, a strict sign flip yields
/// a cut at the first index of the new sign. Interior cuts closer than
/// min_gap to the previously accepted cut (or to either endpoint) are
/// discarded; the endpoints are always included.
CutPointSet zero_cross_cuts(const Trajectory& traj, std::size_t min_gap = 5,
                            double deadband = 0.05);

}  // namespace mpseg

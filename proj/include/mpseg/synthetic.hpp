#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mpseg/dmp.hpp"
#include "mpseg/trajectory.hpp"

namespace mpseg {

/// One reusable primitive shape plus the sampling ranges of its
/// adjustment set.
struct PrototypeSpec {
    std::string name;
    DmpParams params;      ///< shape weights (lateral sign is mirrored per use)
    double g_theta_lo = 0.0, g_theta_hi = 0.0;  ///< magnitude range, degrees
    double g_v_lo = 0.0, g_v_hi = 0.0;          ///< m/s
    double duration_lo = 1.0, duration_hi = 1.0; ///< seconds
    double v_init_lo = 5.0, v_init_hi = 15.0;    ///< m/s (first primitive only)
};

/// Scenario description; a fixed seed fixes the full output.
struct ScenarioSpec {
    std::vector<PrototypeSpec> prototypes;
    std::size_t n_trajectories = 1;
    std::size_t primitives_per_traj = 5;
    double dt = 0.1;              ///< seconds
    double noise_deg = 0.0;       ///< dtheta noise std dev
    double noise_speed = 0.0;     ///< speed noise std dev
    double wiggle_rate = 0.0;     ///< expected spurious sign wiggles per primitive
    double wiggle_amplitude = 0.4; ///< degrees
    std::uint64_t seed = 1;
};

/// Generated trajectory with ground truth.
struct SyntheticTrajectory {
    Trajectory traj;
    std::vector<std::size_t> true_cuts;  ///< sample indices, incl. endpoints
    std::vector<int> prototype_ids;      ///< per true segment
};

/// Four stock shapes: a sharp turn, a lane-change swing, a direction
/// correction and a near-straight drift, each fitted from an analytic
/// profile with a brisk ending so segment boundaries stay detectable.
std::vector<PrototypeSpec> default_prototypes(const DmpConfig& cfg);

/// Concatenate rolled-out primitives (alternating steering sign) into
/// observed trajectories, optionally with noise and injected spurious
/// zero crossings.
std::vector<SyntheticTrajectory> generate(const ScenarioSpec& spec, const DmpConfig& cfg);

}  // namespace mpseg

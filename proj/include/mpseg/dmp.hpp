#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "mpseg/trajectory.hpp"

namespace mpseg {

/// Channels whose goal amplitude is below this are treated as stationary and
/// learn zero weights (units: degrees or m/s).
inline constexpr double kEtaFloor = 1e-3;

/// Shared constants of the primitive dynamical system. The spring-damper pair
/// (alpha_y, beta_y) is kept critically damped; the basis grid is placed
/// equally spaced in time and mapped through the phase decay.
struct DmpConfig {
    double alpha_z = 4.605170185988091;  // phase reaches exp(-alpha_z) = 0.01 at T
    double alpha_y = 25.0;
    double beta_y = 6.25;  // alpha_y / 4
    int n_basis = 15;
    std::vector<double> centers;     ///< basis centers in phase, strictly decreasing
    std::vector<double> bandwidths;  ///< basis widths, > 0
    double dt = 0.0;                 ///< integration step; <= 0 selects T/200

    /// Standard configuration with equally-time-spaced basis functions.
    static DmpConfig standard(int n_basis = 15, double dt = 0.0);

    /// Like standard(), but with explicit decay and spring constants
    /// (beta_y is derived to keep the system critically damped).
    static DmpConfig with_constants(double alpha_z, double alpha_y, int n_basis,
                                    double dt = 0.0);

    [[nodiscard]] double step_for(double duration) const {
        return dt > 0.0 ? dt : duration / 200.0;
    }

    void validate() const;

    /// Stable identifier of the numeric content; stamped into serialized
    /// primitives so libraries and rollouts can be matched up.
    [[nodiscard]] std::uint64_t content_hash() const;
};

/// Learned forcing weights for one channel.
struct DmpChannelWeights {
    std::vector<double> w;
    Channel channel = Channel::lateral;
};

/// Shape-defining parameter set of one primitive: initial speed plus the
/// forcing weights of both channels.
struct DmpParams {
    double v_init = 0.0;
    DmpChannelWeights omega_theta;  ///< lateral (course deviation)
    DmpChannelWeights omega_v;      ///< longitudinal (speed deviation)

    [[nodiscard]] int n_basis() const { return static_cast<int>(omega_theta.w.size()); }
};

/// Adjustment set of one primitive: goal deviations and duration. Changing
/// these retargets the motion without touching the learned shape.
struct DmpAdjustment {
    double g_theta = 0.0;  ///< degrees
    double g_v = 0.0;      ///< m/s
    double duration = 1.0; ///< seconds, >= 2 integration steps
};

/// Rolled-out primitive: both deviation channels plus their first
/// derivatives, starting at zero deviation by construction.
struct PrimitiveTrack {
    double v_init = 0.0;
    double dt = 0.0;
    std::vector<double> dtheta_m;      ///< degrees
    std::vector<double> dtheta_m_dot;  ///< degrees / s
    std::vector<double> dv_m;          ///< m/s
    std::vector<double> dv_m_dot;      ///< m/s^2

    [[nodiscard]] std::size_t size() const { return dtheta_m.size(); }
    [[nodiscard]] double duration() const {
        return dtheta_m.empty() ? 0.0 : dt * static_cast<double>(dtheta_m.size() - 1);
    }
};

/// Inclusive sample range [first, last] of a trajectory.
struct IndexRange {
    std::size_t first = 0;
    std::size_t last = 0;

    [[nodiscard]] std::size_t length() const { return last - first + 1; }
};

/// Integrate the phase decay zdot = -tau * alpha_z * z from z(0) = 1 over
/// [0, T] by fixed-step RK4. Returns round(T/step)+1 samples.
std::vector<double> integrate_canonical(const DmpConfig& cfg, double duration);

/// Normalized weighted basis sum multiplied by the phase; exactly zero at
/// z = 0 and under denominator underflow.
double forcing(double z, const DmpChannelWeights& w, const DmpConfig& cfg);

/// Fit one channel's forcing weights by per-basis locally weighted
/// regression of the demonstration's required forcing term. The target is
/// scaled by the goal amplitude so that learning inverts the rollout
/// dynamics; channels with |g - y0| < kEtaFloor learn zero weights.
DmpChannelWeights learn_weights(const DerivativeTrack& track, double goal,
                                double duration, const DmpConfig& cfg);

/// Fit both channels of a trajectory segment. Deviations are accumulated
/// from the segment start (both channels start at zero), the goal is read
/// off the final deviations, and v_init is the speed at the first sample.
std::pair<DmpParams, DmpAdjustment> fit_segment(const Trajectory& traj, IndexRange seg,
                                                const DmpConfig& cfg,
                                                int smooth_window = 1);

/// Integrate both channels from rest by fixed-step RK4.
PrimitiveTrack rollout(const DmpParams& params, const DmpAdjustment& adj,
                       const DmpConfig& cfg);

/// Roll out with a modified goal/duration; the learned shape is untouched.
PrimitiveTrack retarget(const DmpParams& params, double new_g_theta, double new_g_v,
                        double new_duration, const DmpConfig& cfg);

}  // namespace mpseg

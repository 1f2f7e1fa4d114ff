#include "mpseg/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mpseg/errors.hpp"
#include "mpseg/mathutil.hpp"

namespace mpseg {

namespace {

/// Analytic deviation profiles on s in [0, 1], normalized to y(1) = 1.
/// All start at rest (zero slope) and end brisk (nonzero slope) so that a
/// stitched boundary always shows up as a sign flip or a short zero run
/// starting exactly at the stitch sample.
double profile_value(int shape, double s) {
    switch (shape) {
        case 0:  // sharp turn: early acceleration, ydot(1) = 1
            return s * s * (2.0 - s);
        case 1: {  // lane-change swing: minimum-jerk blended, ydot(1) = 0.45
            const double mj = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
            return 0.55 * mj + 0.45 * s * s * (2.0 - s);
        }
        case 2:  // direction correction: late move, ydot(1) = 2
            return s * s * s * (2.0 - s);
        default:  // drift: mid-weighted ramp, ydot(1) = 0.5
            return 2.5 * s * s - 1.5 * s * s * s;
    }
}

/// Longitudinal deviation profiles, normalized to y(1) = 1: a ramp to the
/// goal plus an optional transient dip that overshoots it mid-segment.
double lon_profile_value(int shape, double s) {
    const double ramp = s * s * (3.0 - 2.0 * s);
    switch (shape) {
        case 0: return ramp + 0.8 * std::sin(std::numbers::pi * s);
        case 1: return ramp + 0.3 * std::sin(std::numbers::pi * s);
        case 2: return ramp;
        default: return 2.5 * s * s - 1.5 * s * s * s;
    }
}

DmpChannelWeights fit_profile(int shape, bool lateral, const DmpConfig& cfg) {
    const std::size_t n = 400;
    std::vector<double> y(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        const double s = static_cast<double>(k) / static_cast<double>(n);
        y[k] = lateral ? profile_value(shape, s) : lon_profile_value(shape, s);
    }
    const double dt = 1.0 / static_cast<double>(n);
    auto track = estimate_derivatives(y, dt, 1,
                                      lateral ? Channel::lateral : Channel::longitudinal);
    return learn_weights(track, y.back(), 1.0, cfg);
}

}  // namespace

std::vector<PrototypeSpec> default_prototypes(const DmpConfig& cfg) {
    // A denser basis than the caller's keeps the rolled-out boundaries
    // crisp; segment fitting still happens under the caller's config.
    DmpConfig proto_cfg = DmpConfig::with_constants(cfg.alpha_z, cfg.alpha_y, 40, cfg.dt);
    std::vector<PrototypeSpec> protos(4);

    protos[0].name = "sharp_turn";
    protos[0].g_theta_lo = 45.0;
    protos[0].g_theta_hi = 70.0;
    protos[0].g_v_lo = -3.5;
    protos[0].g_v_hi = -1.5;
    protos[0].duration_lo = 3.5;
    protos[0].duration_hi = 5.5;
    protos[0].v_init_lo = 4.0;
    protos[0].v_init_hi = 8.0;

    protos[1].name = "lane_change";
    protos[1].g_theta_lo = 15.0;
    protos[1].g_theta_hi = 25.0;
    protos[1].g_v_lo = -1.5;
    protos[1].g_v_hi = -0.5;
    protos[1].duration_lo = 3.0;
    protos[1].duration_hi = 4.5;
    protos[1].v_init_lo = 10.0;
    protos[1].v_init_hi = 18.0;

    protos[2].name = "direction_correction";
    protos[2].g_theta_lo = 3.5;
    protos[2].g_theta_hi = 6.0;
    protos[2].g_v_lo = -0.3;
    protos[2].g_v_hi = 0.3;
    protos[2].duration_lo = 1.5;
    protos[2].duration_hi = 2.5;
    protos[2].v_init_lo = 9.0;
    protos[2].v_init_hi = 16.0;

    protos[3].name = "speed_hold_drift";
    protos[3].g_theta_lo = 3.0;
    protos[3].g_theta_hi = 5.0;
    protos[3].g_v_lo = -0.8;
    protos[3].g_v_hi = 0.8;
    protos[3].duration_lo = 2.0;
    protos[3].duration_hi = 3.0;
    protos[3].v_init_lo = 7.0;
    protos[3].v_init_hi = 15.0;

    for (int shape = 0; shape < 4; ++shape) {
        auto& p = protos[static_cast<std::size_t>(shape)];
        p.params.v_init = 0.5 * (p.v_init_lo + p.v_init_hi);
        p.params.omega_theta = fit_profile(shape, true, proto_cfg);
        p.params.omega_v = fit_profile(shape, false, proto_cfg);
    }
    return protos;
}

std::vector<SyntheticTrajectory> generate(const ScenarioSpec& spec, const DmpConfig& cfg) {
    if (spec.prototypes.empty()) {
        throw ComputeError("scenario needs at least one prototype");
    }
    if (!(spec.dt > 0.0)) throw ComputeError("scenario dt must be positive");

    std::uint64_t seed_state = spec.seed;
    std::mt19937_64 rng(splitmix64(seed_state));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // Prototypes may carry a denser basis than the caller's config; roll
    // them out under a matching basis grid.
    std::vector<DmpConfig> roll_cfgs;
    roll_cfgs.reserve(spec.prototypes.size());
    for (const auto& proto : spec.prototypes) {
        roll_cfgs.push_back(DmpConfig::with_constants(cfg.alpha_z, cfg.alpha_y,
                                                      proto.params.n_basis(), spec.dt));
    }

    std::vector<SyntheticTrajectory> out;
    out.reserve(spec.n_trajectories);
    for (std::size_t traj_idx = 0; traj_idx < spec.n_trajectories; ++traj_idx) {
        SyntheticTrajectory gen;
        gen.traj.dt = spec.dt;

        int sign = unit(rng) < 0.5 ? 1 : -1;
        double speed = 0.0;
        std::vector<std::pair<std::size_t, std::size_t>> prim_point_ranges;
        gen.true_cuts.push_back(0);

        for (std::size_t k = 0; k < spec.primitives_per_traj; ++k) {
            const auto pid = std::min(
                static_cast<std::size_t>(
                    std::floor(unit(rng) * static_cast<double>(spec.prototypes.size()))),
                spec.prototypes.size() - 1);
            const auto& proto = spec.prototypes[pid];

            const double g_mag = proto.g_theta_lo +
                                 unit(rng) * (proto.g_theta_hi - proto.g_theta_lo);
            double g_v = proto.g_v_lo + unit(rng) * (proto.g_v_hi - proto.g_v_lo);
            const double T = proto.duration_lo +
                             unit(rng) * (proto.duration_hi - proto.duration_lo);
            if (k == 0) {
                speed = proto.v_init_lo + unit(rng) * (proto.v_init_hi - proto.v_init_lo);
            }
            if (speed + g_v < 0.5) g_v = 0.5 - speed;  // keep the vehicle moving

            // Mirror the lateral channel so steering direction alternates.
            // The amplitude eta = g carries the sign into the forcing term,
            // so negating the goal alone reflects the track exactly.
            DmpParams params = proto.params;
            DmpAdjustment adj;
            adj.g_theta = sign * g_mag;
            adj.g_v = g_v;
            adj.duration = spec.dt * std::round(T / spec.dt);
            const auto track = rollout(params, adj, roll_cfgs[pid]);

            const std::size_t first_point = gen.traj.points.size();
            for (std::size_t s = 1; s < track.size(); ++s) {
                ObservedPoint p;
                p.dtheta = track.dtheta_m[s] - track.dtheta_m[s - 1];
                p.v = std::max(0.0, speed + track.dv_m[s]);
                gen.traj.points.push_back(p);
            }
            prim_point_ranges.emplace_back(first_point, gen.traj.points.size() - 1);
            gen.prototype_ids.push_back(static_cast<int>(pid));
            gen.true_cuts.push_back(gen.traj.points.size());
            speed = std::max(0.5, speed + adj.g_v);
            sign = -sign;
        }
        gen.true_cuts.back() = gen.traj.points.size() - 1;

        // Spurious sign wiggles: short opposite-sign runs inside a primitive,
        // placed away from the boundaries. The steering mass removed by the
        // flip is folded back into the flanking samples so the primitive's
        // net heading change is untouched.
        if (spec.wiggle_rate > 0.0) {
            for (std::size_t k = 0; k < prim_point_ranges.size(); ++k) {
                if (unit(rng) >= spec.wiggle_rate) continue;
                const auto [lo, hi] = prim_point_ranges[k];
                if (hi - lo < 32) continue;
                const std::size_t margin = 14;
                std::uniform_int_distribution<std::size_t> pos(lo + margin, hi - margin - 2);
                const std::size_t q = pos(rng);
                const double dir = gen.traj.points[q].dtheta >= 0.0 ? -1.0 : 1.0;
                double removed = 0.0;
                for (std::size_t w = 0; w < 3; ++w) {
                    removed += gen.traj.points[q + w].dtheta -
                               dir * spec.wiggle_amplitude;
                    gen.traj.points[q + w].dtheta = dir * spec.wiggle_amplitude;
                }
                const std::size_t spread = 6;
                const double share = removed / static_cast<double>(2 * spread);
                for (std::size_t w = 1; w <= spread; ++w) {
                    gen.traj.points[q - w].dtheta += share;
                    gen.traj.points[q + 2 + w].dtheta += share;
                }
            }
        }

        if (spec.noise_deg > 0.0 || spec.noise_speed > 0.0) {
            for (auto& p : gen.traj.points) {
                p.dtheta = wrap_degrees(p.dtheta + spec.noise_deg * gauss(rng));
                p.v = std::max(0.0, p.v + spec.noise_speed * gauss(rng));
            }
        }

        gen.traj.validate();
        out.push_back(std::move(gen));
    }
    return out;
}

}  // namespace mpseg

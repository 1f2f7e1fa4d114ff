#include "mpseg/dmp.hpp"

#include <cmath>
#include <cstring>
#include <sstream>
#include <string>

#include "mpseg/errors.hpp"
#include "mpseg/mathutil.hpp"

namespace mpseg {

DmpConfig DmpConfig::standard(int n_basis, double dt) {
    DmpConfig defaults;
    return with_constants(defaults.alpha_z, defaults.alpha_y, n_basis, dt);
}

DmpConfig DmpConfig::with_constants(double alpha_z, double alpha_y, int n_basis,
                                    double dt) {
    DmpConfig cfg;
    cfg.alpha_z = alpha_z;
    cfg.alpha_y = alpha_y;
    cfg.beta_y = alpha_y / 4.0;
    cfg.n_basis = n_basis;
    cfg.dt = dt;
    cfg.centers.resize(static_cast<std::size_t>(n_basis));
    cfg.bandwidths.resize(static_cast<std::size_t>(n_basis));
    if (n_basis == 1) {
        cfg.centers[0] = 1.0;
        cfg.bandwidths[0] = 1.0;
    } else {
        // Centers equally spaced in time, mapped through the phase solution.
        // Bandwidths from neighbour spacing shrunk by 0.45 (last one copied):
        // broader bases bias the per-basis regression by several percent,
        // which blows the reproduction budget.
        for (int n = 0; n < n_basis; ++n) {
            cfg.centers[static_cast<std::size_t>(n)] =
                std::exp(-alpha_z * static_cast<double>(n) /
                         static_cast<double>(n_basis - 1));
        }
        for (int n = 0; n + 1 < n_basis; ++n) {
            const double gap = 0.45 * (cfg.centers[static_cast<std::size_t>(n + 1)] -
                                       cfg.centers[static_cast<std::size_t>(n)]);
            cfg.bandwidths[static_cast<std::size_t>(n)] = 1.0 / (2.0 * gap * gap);
        }
        cfg.bandwidths[static_cast<std::size_t>(n_basis - 1)] =
            cfg.bandwidths[static_cast<std::size_t>(n_basis - 2)];
    }
    return cfg;
}

void DmpConfig::validate() const {
    if (!(alpha_z > 0.0) || !(alpha_y > 0.0) || !(beta_y > 0.0)) {
        throw ComputeError("DMP constants must be positive");
    }
    if (std::abs(beta_y - alpha_y / 4.0) > 1e-9 * alpha_y) {
        throw ComputeError("beta_y must equal alpha_y / 4 (critical damping)");
    }
    if (n_basis < 1 || centers.size() != static_cast<std::size_t>(n_basis) ||
        bandwidths.size() != static_cast<std::size_t>(n_basis)) {
        throw ComputeError("basis arrays must match n_basis >= 1");
    }
    for (std::size_t n = 0; n < centers.size(); ++n) {
        if (!(centers[n] > 0.0) || centers[n] > 1.0 || !(bandwidths[n] > 0.0)) {
            throw ComputeError("basis centers must lie in (0, 1] with positive bandwidths");
        }
        if (n > 0 && centers[n] >= centers[n - 1]) {
            throw ComputeError("basis centers must be strictly decreasing");
        }
    }
    if (dt < 0.0) {
        throw ComputeError("integration dt must be >= 0 (0 selects duration/200)");
    }
}

std::uint64_t DmpConfig::content_hash() const {
    std::ostringstream os;
    os.precision(17);
    os << alpha_z << '|' << alpha_y << '|' << beta_y << '|' << n_basis << '|' << dt;
    for (double c : centers) os << '|' << c;
    for (double p : bandwidths) os << '|' << p;
    return fnv1a64(os.str());
}

namespace {

std::size_t step_count(double duration, double step) {
    auto n = static_cast<std::size_t>(std::llround(duration / step));
    return n < 2 ? 2 : n;
}

/// One RK4 step of zdot = -a z; exact for any step size in the sense of the
/// classical fourth-order update.
double rk4_decay_factor(double a, double h) {
    const double x = a * h;
    return 1.0 - x + x * x / 2.0 - x * x * x / 6.0 + x * x * x * x / 24.0;
}

std::vector<double> canonical_sequence(double alpha_z, double duration, std::size_t n_steps) {
    const double tau = 1.0 / duration;
    const double h = duration / static_cast<double>(n_steps);
    const double factor = rk4_decay_factor(tau * alpha_z, h);
    std::vector<double> z(n_steps + 1);
    z[0] = 1.0;
    for (std::size_t k = 1; k <= n_steps; ++k) z[k] = z[k - 1] * factor;
    return z;
}

}  // namespace

std::vector<double> integrate_canonical(const DmpConfig& cfg, double duration) {
    cfg.validate();
    const double h = cfg.step_for(duration);
    if (!(duration >= 2.0 * h)) {
        throw ComputeError("duration must cover at least two integration steps");
    }
    return canonical_sequence(cfg.alpha_z, duration, step_count(duration, h));
}

double forcing(double z, const DmpChannelWeights& w, const DmpConfig& cfg) {
    if (w.w.size() != cfg.centers.size()) {
        throw ComputeError("weight count does not match the basis grid");
    }
    if (z == 0.0) return 0.0;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t n = 0; n < w.w.size(); ++n) {
        const double d = z - cfg.centers[n];
        const double psi = std::exp(-cfg.bandwidths[n] * d * d);
        num += w.w[n] * psi;
        den += psi;
    }
    if (den < 1e-300) return 0.0;  // all bases out of reach: no modulation
    return num / den * z;
}

DmpChannelWeights learn_weights(const DerivativeTrack& track, double goal,
                                double duration, const DmpConfig& cfg) {
    cfg.validate();
    const std::size_t len = track.size();
    if (len < 5) {
        throw ComputeError("weight learning needs a track of at least 5 samples");
    }
    if (!(duration > 0.0)) {
        throw ComputeError("weight learning needs a positive duration");
    }

    DmpChannelWeights result;
    result.channel = track.channel;
    result.w.assign(static_cast<std::size_t>(cfg.n_basis), 0.0);

    const double eta = goal - track.y.front();
    if (std::abs(eta) < kEtaFloor) {
        return result;  // stationary channel; spring alone reproduces it
    }

    const double tau = 1.0 / duration;
    const auto z = canonical_sequence(cfg.alpha_z, duration, len - 1);

    // Required forcing that makes the transformation system reproduce the
    // demonstration, normalized by the amplitude so rollout inverts it.
    std::vector<double> f_target(len);
    for (std::size_t t = 0; t < len; ++t) {
        f_target[t] = (track.ydd[t] / (tau * tau) -
                       cfg.alpha_y * (cfg.beta_y * (goal - track.y[t]) -
                                      track.yd[t] / tau)) /
                      eta;
    }

    // The end samples carry one-sided derivative estimates whose error is an
    // order worse than the interior; keep them out of the regression.
    for (int n = 0; n < cfg.n_basis; ++n) {
        const double mu = cfg.centers[static_cast<std::size_t>(n)];
        const double p = cfg.bandwidths[static_cast<std::size_t>(n)];
        double num = 0.0;
        double den = 0.0;
        for (std::size_t t = 1; t + 1 < len; ++t) {
            const double d = z[t] - mu;
            const double psi = std::exp(-p * d * d);
            num += psi * z[t] * f_target[t];
            den += psi * z[t] * z[t];
        }
        result.w[static_cast<std::size_t>(n)] = den < 1e-12 ? 0.0 : num / den;
    }
    return result;
}

std::pair<DmpParams, DmpAdjustment> fit_segment(const Trajectory& traj, IndexRange seg,
                                                const DmpConfig& cfg, int smooth_window) {
    if (seg.last >= traj.size() || seg.first >= seg.last) {
        throw ComputeError("segment range out of trajectory bounds");
    }
    const std::size_t len = seg.length();
    if (len < 5) {
        throw ComputeError("segment too short to fit: " + std::to_string(len) + " samples");
    }

    // Cumulative deviations from the segment start; both channels begin at 0.
    std::vector<double> dtheta_m(len, 0.0);
    std::vector<double> dv_m(len, 0.0);
    const double v0 = traj.points[seg.first].v;
    for (std::size_t k = 1; k < len; ++k) {
        dtheta_m[k] = dtheta_m[k - 1] + traj.points[seg.first + k].dtheta;
        dv_m[k] = traj.points[seg.first + k].v - v0;
    }

    const double duration = static_cast<double>(len - 1) * traj.dt;
    const auto lat = estimate_derivatives(dtheta_m, traj.dt, smooth_window, Channel::lateral);
    const auto lon = estimate_derivatives(dv_m, traj.dt, smooth_window, Channel::longitudinal);

    DmpAdjustment adj;
    adj.g_theta = dtheta_m.back();
    adj.g_v = dv_m.back();
    adj.duration = duration;

    DmpParams params;
    params.v_init = v0;
    params.omega_theta = learn_weights(lat, adj.g_theta, duration, cfg);
    params.omega_v = learn_weights(lon, adj.g_v, duration, cfg);
    return {params, adj};
}

PrimitiveTrack rollout(const DmpParams& params, const DmpAdjustment& adj,
                       const DmpConfig& cfg) {
    cfg.validate();
    const double T = adj.duration;
    const double h = cfg.step_for(T);
    if (!(T >= 2.0 * h)) {
        throw ComputeError("rollout duration must cover at least two integration steps");
    }
    const std::size_t n = step_count(T, h);
    const double step = T / static_cast<double>(n);
    const double tau = 1.0 / T;

    // State: phase, then (y, v) per channel; v is the scaled derivative
    // state of the transformation system (ydot = tau * v).
    struct State {
        double z, y_th, v_th, y_v, v_v;
    };
    const double eta_th = adj.g_theta;  // y0 = 0 by construction
    const double eta_v = adj.g_v;

    auto deriv = [&](const State& s) -> State {
        State d;
        d.z = -tau * cfg.alpha_z * s.z;
        const double f_th = forcing(s.z, params.omega_theta, cfg);
        const double f_v = forcing(s.z, params.omega_v, cfg);
        d.v_th = tau * (cfg.alpha_y * (cfg.beta_y * (adj.g_theta - s.y_th) - s.v_th) +
                        eta_th * f_th);
        d.y_th = tau * s.v_th;
        d.v_v = tau * (cfg.alpha_y * (cfg.beta_y * (adj.g_v - s.y_v) - s.v_v) +
                       eta_v * f_v);
        d.y_v = tau * s.v_v;
        return d;
    };

    PrimitiveTrack track;
    track.v_init = params.v_init;
    track.dt = step;
    track.dtheta_m.reserve(n + 1);
    track.dtheta_m_dot.reserve(n + 1);
    track.dv_m.reserve(n + 1);
    track.dv_m_dot.reserve(n + 1);

    State s{1.0, 0.0, 0.0, 0.0, 0.0};
    auto record = [&](const State& st) {
        track.dtheta_m.push_back(st.y_th);
        track.dtheta_m_dot.push_back(tau * st.v_th);
        track.dv_m.push_back(st.y_v);
        track.dv_m_dot.push_back(tau * st.v_v);
    };
    record(s);
    for (std::size_t k = 0; k < n; ++k) {
        const State k1 = deriv(s);
        State mid{s.z + 0.5 * step * k1.z, s.y_th + 0.5 * step * k1.y_th,
                  s.v_th + 0.5 * step * k1.v_th, s.y_v + 0.5 * step * k1.y_v,
                  s.v_v + 0.5 * step * k1.v_v};
        const State k2 = deriv(mid);
        mid = State{s.z + 0.5 * step * k2.z, s.y_th + 0.5 * step * k2.y_th,
                    s.v_th + 0.5 * step * k2.v_th, s.y_v + 0.5 * step * k2.y_v,
                    s.v_v + 0.5 * step * k2.v_v};
        const State k3 = deriv(mid);
        const State end{s.z + step * k3.z, s.y_th + step * k3.y_th,
                        s.v_th + step * k3.v_th, s.y_v + step * k3.y_v,
                        s.v_v + step * k3.v_v};
        const State k4 = deriv(end);
        s.z += step / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z);
        s.y_th += step / 6.0 * (k1.y_th + 2.0 * k2.y_th + 2.0 * k3.y_th + k4.y_th);
        s.v_th += step / 6.0 * (k1.v_th + 2.0 * k2.v_th + 2.0 * k3.v_th + k4.v_th);
        s.y_v += step / 6.0 * (k1.y_v + 2.0 * k2.y_v + 2.0 * k3.y_v + k4.y_v);
        s.v_v += step / 6.0 * (k1.v_v + 2.0 * k2.v_v + 2.0 * k3.v_v + k4.v_v);
        record(s);
    }
    return track;
}

PrimitiveTrack retarget(const DmpParams& params, double new_g_theta, double new_g_v,
                        double new_duration, const DmpConfig& cfg) {
    DmpAdjustment adj;
    adj.g_theta = new_g_theta;
    adj.g_v = new_g_v;
    adj.duration = new_duration;
    return rollout(params, adj, cfg);
}

}  // namespace mpseg

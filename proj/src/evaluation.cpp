#include "mpseg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "mpseg/errors.hpp"
#include "mpseg/mathutil.hpp"

namespace mpseg {

namespace {

std::vector<double> resample_series(const std::vector<double>& y, std::size_t n_points) {
    std::vector<double> out(n_points);
    const double last = static_cast<double>(y.size() - 1);
    for (std::size_t k = 0; k < n_points; ++k) {
        const double pos = last * static_cast<double>(k) / static_cast<double>(n_points - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        if (lo + 1 >= y.size()) {
            out[k] = y.back();
        } else {
            const double f = pos - static_cast<double>(lo);
            out[k] = y[lo] + f * (y[lo + 1] - y[lo]);
        }
    }
    return out;
}

ChannelDeviation channel_deviation(const std::vector<double>& pos_d,
                                   const std::vector<double>& pos_l,
                                   const std::vector<double>& vel_d,
                                   const std::vector<double>& vel_l) {
    ChannelDeviation dev;
    dev.d_pos.resize(pos_d.size());
    dev.d_vel.resize(vel_d.size());
    for (std::size_t i = 0; i < pos_d.size(); ++i) dev.d_pos[i] = std::abs(pos_d[i] - pos_l[i]);
    for (std::size_t i = 0; i < vel_d.size(); ++i) dev.d_vel[i] = std::abs(vel_d[i] - vel_l[i]);
    dev.rmse_pos = rmse_of(dev.d_pos);
    dev.max_pos = max_abs_of(dev.d_pos);
    dev.rmse_vel = rmse_of(dev.d_vel);
    dev.max_vel = max_abs_of(dev.d_vel);
    return dev;
}

}  // namespace

PrimitiveTrack resample_track(const PrimitiveTrack& track, std::size_t n_points) {
    if (track.size() < 2 || n_points < 2) {
        throw ComputeError("resampling needs at least two samples");
    }
    PrimitiveTrack out;
    out.v_init = track.v_init;
    out.dt = track.duration() / static_cast<double>(n_points - 1);
    out.dtheta_m = resample_series(track.dtheta_m, n_points);
    out.dtheta_m_dot = resample_series(track.dtheta_m_dot, n_points);
    out.dv_m = resample_series(track.dv_m, n_points);
    out.dv_m_dot = resample_series(track.dv_m_dot, n_points);
    return out;
}

DeviationReport deviation_report(const PrimitiveTrack& demonstrated,
                                 const PrimitiveTrack& learned) {
    const PrimitiveTrack* l = &learned;
    PrimitiveTrack resampled;
    if (learned.size() != demonstrated.size()) {
        resampled = resample_track(learned, demonstrated.size());
        l = &resampled;
    }
    if (l->size() != demonstrated.size()) {
        throw ComputeError("track lengths differ after resampling");
    }
    DeviationReport rep;
    rep.lateral = channel_deviation(demonstrated.dtheta_m, l->dtheta_m,
                                    demonstrated.dtheta_m_dot, l->dtheta_m_dot);
    rep.longitudinal = channel_deviation(demonstrated.dv_m, l->dv_m,
                                         demonstrated.dv_m_dot, l->dv_m_dot);
    return rep;
}

MatchScore cut_f1(std::span<const std::size_t> predicted, std::span<const std::size_t> truth,
                  std::size_t tol) {
    MatchScore score;
    std::size_t tp = 0;
    std::size_t p_idx = 0;
    // Greedy in-order matching: each true cut takes the earliest unmatched
    // prediction within tolerance.
    for (std::size_t t_idx = 0; t_idx < truth.size(); ++t_idx) {
        while (p_idx < predicted.size() &&
               predicted[p_idx] + tol < truth[t_idx]) {
            ++p_idx;
        }
        if (p_idx < predicted.size() && predicted[p_idx] <= truth[t_idx] + tol) {
            ++tp;
            ++p_idx;
        }
    }
    score.matched = tp;
    score.precision = predicted.empty() ? 0.0
                                        : static_cast<double>(tp) /
                                              static_cast<double>(predicted.size());
    score.recall = truth.empty() ? 0.0
                                 : static_cast<double>(tp) / static_cast<double>(truth.size());
    score.f1 = (score.precision + score.recall) > 0.0
                   ? 2.0 * score.precision * score.recall /
                         (score.precision + score.recall)
                   : 0.0;
    return score;
}

namespace {

void write_line(std::ofstream& out, std::span<const double> values) {
    char buf[64];
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", values[i]);
        out << (i ? "," : "") << buf;
    }
    out << '\n';
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) throw ParseError("cannot write output file: " + p.string());
    return out;
}

}  // namespace

void emit_plot_data(const PlotBundle& bundle, const std::filesystem::path& out_dir) {
    if (bundle.traj == nullptr) throw ComputeError("plot bundle needs a trajectory");
    std::filesystem::create_directories(out_dir);

    const Trajectory& traj = *bundle.traj;
    auto overlay = open_out(out_dir / "overlay.csv");
    overlay << "t,dtheta,v,component\n";
    if (bundle.segmentation != nullptr) {
        // Sample ownership: a cut sample starts the segment to its right;
        // the last segment keeps its end sample.
        std::vector<long> owner(traj.size(), -1);
        const auto& segs = bundle.segmentation->segments;
        for (std::size_t s = 0; s < segs.size(); ++s) {
            const std::size_t stop = (s + 1 == segs.size()) ? segs[s].end + 1 : segs[s].end;
            for (std::size_t k = segs[s].start; k < stop; ++k) {
                owner[k] = static_cast<long>(segs[s].component);
            }
        }
        for (std::size_t k = 0; k < traj.size(); ++k) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%ld",
                          traj.dt * static_cast<double>(k + 1), traj.points[k].dtheta,
                          traj.points[k].v, owner[k]);
            overlay << buf << '\n';
        }
    }

    if (bundle.segmentation == nullptr) return;

    const DmpConfig cfg = bundle.library != nullptr ? bundle.library->cfg
                                                    : DmpConfig::standard();
    for (std::size_t s = 0; s < bundle.segmentation->segments.size(); ++s) {
        const auto& seg = bundle.segmentation->segments[s];
        auto [params, adj] = fit_segment(traj, {seg.start, seg.end}, cfg,
                                         bundle.smooth_window);

        // Demonstrated deviations on the segment grid.
        const std::size_t len = seg.end - seg.start + 1;
        std::vector<double> demo_th(len, 0.0), demo_v(len, 0.0);
        for (std::size_t k = 1; k < len; ++k) {
            demo_th[k] = demo_th[k - 1] + traj.points[seg.start + k].dtheta;
            demo_v[k] = traj.points[seg.start + k].v - traj.points[seg.start].v;
        }

        DmpConfig roll_cfg = cfg;
        roll_cfg.dt = traj.dt;
        const auto learned = rollout(params, adj, roll_cfg);

        PrimitiveTrack demo;
        demo.v_init = params.v_init;
        demo.dt = traj.dt;
        demo.dtheta_m = demo_th;
        demo.dv_m = demo_v;
        demo.dtheta_m_dot = estimate_derivatives(demo_th, traj.dt).yd;
        demo.dv_m_dot = estimate_derivatives(demo_v, traj.dt).yd;
        const auto dev = deviation_report(demo, learned);

        auto track_file = open_out(out_dir / ("segment_" + std::to_string(s) + "_track.csv"));
        track_file << "t,demo_dtheta_m,demo_dv_m,learned_dtheta_m,learned_dv_m\n";
        for (std::size_t k = 0; k < len; ++k) {
            write_line(track_file,
                       std::vector<double>{traj.dt * static_cast<double>(k), demo_th[k],
                                           demo_v[k], learned.dtheta_m[k], learned.dv_m[k]});
        }

        auto dev_file = open_out(out_dir / ("segment_" + std::to_string(s) + "_deviation.csv"));
        dev_file << "t,d_pos_lateral,d_pos_longitudinal\n";
        for (std::size_t k = 0; k < len; ++k) {
            write_line(dev_file,
                       std::vector<double>{traj.dt * static_cast<double>(k),
                                           dev.lateral.d_pos[k], dev.longitudinal.d_pos[k]});
        }
    }
}

}  // namespace mpseg

#include "mpseg/trajectory.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mpseg/errors.hpp"
#include "mpseg/mathutil.hpp"

namespace mpseg {

void Trajectory::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ParseError("trajectory dt must be positive and finite");
    }
    if (points.size() < 3) {
        throw ParseError("trajectory must contain at least 3 points, got " +
                         std::to_string(points.size()));
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        if (!std::isfinite(p.dtheta) || !std::isfinite(p.v)) {
            throw ParseError("non-finite value at point " + std::to_string(i));
        }
        if (p.v < 0.0) {
            throw ParseError("negative speed at point " + std::to_string(i));
        }
        if (p.dtheta <= -180.0 || p.dtheta > 180.0) {
            throw ParseError("dtheta out of (-180, 180] at point " + std::to_string(i));
        }
    }
}

namespace {

double parse_field(std::string_view field, std::size_t row, const std::string& origin) {
    // Trim surrounding blanks; from_chars rejects them.
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
        field.remove_prefix(1);
    }
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' ||
                              field.back() == '\r')) {
        field.remove_suffix(1);
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError(origin + ": malformed number '" + std::string(field) +
                         "' in row " + std::to_string(row));
    }
    return value;
}

}  // namespace

std::vector<RawSample> ingest_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open input file: " + path.string());
    }
    return ingest_csv(in, path.string());
}

std::vector<RawSample> ingest_csv(std::istream& in, const std::string& origin) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(origin + ": empty file");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,course_deg,speed_mps") {
        throw ParseError(origin + ": expected header 't,course_deg,speed_mps', got '" +
                         line + "'");
    }

    std::vector<RawSample> samples;
    std::size_t row = 1;  // header was row 1
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        std::string_view sv(line);
        std::size_t c1 = sv.find(',');
        std::size_t c2 = (c1 == std::string_view::npos) ? std::string_view::npos
                                                        : sv.find(',', c1 + 1);
        if (c1 == std::string_view::npos || c2 == std::string_view::npos ||
            sv.find(',', c2 + 1) != std::string_view::npos) {
            throw ParseError(origin + ": expected 3 comma-separated fields in row " +
                             std::to_string(row));
        }
        RawSample s;
        s.t = parse_field(sv.substr(0, c1), row, origin);
        s.course_deg = parse_field(sv.substr(c1 + 1, c2 - c1 - 1), row, origin);
        s.speed_mps = parse_field(sv.substr(c2 + 1), row, origin);
        if (!std::isfinite(s.t) || !std::isfinite(s.course_deg) || !std::isfinite(s.speed_mps)) {
            throw ParseError(origin + ": non-finite value in row " + std::to_string(row));
        }
        if (s.speed_mps < 0.0) {
            throw ParseError(origin + ": negative speed in row " + std::to_string(row));
        }
        samples.push_back(s);
    }
    if (samples.empty()) {
        throw ParseError(origin + ": no data rows");
    }

    std::stable_sort(samples.begin(), samples.end(),
                     [](const RawSample& a, const RawSample& b) { return a.t < b.t; });
    // Collapse duplicate timestamps to the first occurrence.
    auto last = std::unique(samples.begin(), samples.end(),
                            [](const RawSample& a, const RawSample& b) { return a.t == b.t; });
    samples.erase(last, samples.end());
    return samples;
}

namespace {

/// Piecewise-linear interpolation with exact passthrough at the knots.
double interp_at(const std::vector<double>& ts, const std::vector<double>& ys, double t) {
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    std::size_t hi = static_cast<std::size_t>(it - ts.begin());
    if (hi == 0) return ys.front();
    if (hi >= ts.size()) return ys.back();
    std::size_t lo = hi - 1;
    if (t == ts[lo]) return ys[lo];
    double f = (t - ts[lo]) / (ts[hi] - ts[lo]);
    return ys[lo] + f * (ys[hi] - ys[lo]);
}

}  // namespace

Trajectory resample_and_difference(const std::vector<RawSample>& samples, double dt) {
    if (samples.size() < 2) {
        throw ParseError("resampling needs at least 2 samples");
    }
    if (!(dt > 0.0)) {
        throw ParseError("resampling dt must be positive");
    }
    const double t0 = samples.front().t;
    const double duration = samples.back().t - t0;
    if (duration < 2.0 * dt) {
        throw ParseError("dt too large for the recording: duration " +
                         std::to_string(duration) + " s < 2*dt");
    }

    // Unwrap the course angle so interpolation never crosses the 0/360 seam
    // the wrong way round.
    std::vector<double> ts(samples.size()), course(samples.size()), speed(samples.size());
    ts[0] = samples[0].t;
    course[0] = samples[0].course_deg;
    speed[0] = samples[0].speed_mps;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        ts[i] = samples[i].t;
        course[i] = course[i - 1] + wrap_degrees(samples[i].course_deg -
                                                 samples[i - 1].course_deg);
        speed[i] = samples[i].speed_mps;
    }

    const auto n_out = static_cast<std::size_t>(std::floor(duration / dt + 1e-9));
    if (n_out < 3) {
        throw ParseError("resampled trajectory would have fewer than 3 points");
    }

    Trajectory traj;
    traj.dt = dt;
    traj.points.reserve(n_out);
    double prev_course = interp_at(ts, course, t0);
    for (std::size_t k = 1; k <= n_out; ++k) {
        const double tk = t0 + static_cast<double>(k) * dt;
        const double ck = interp_at(ts, course, tk);
        ObservedPoint p;
        p.dtheta = wrap_degrees(ck - prev_course);
        p.v = std::max(0.0, interp_at(ts, speed, tk));
        traj.points.push_back(p);
        prev_course = ck;
    }
    traj.validate();
    return traj;
}

DerivativeTrack estimate_derivatives(const std::vector<double>& y, double dt,
                                     int smooth_window, Channel channel) {
    const std::size_t n = y.size();
    if (n < 5) {
        throw ComputeError("derivative estimation needs at least 5 samples");
    }
    if (smooth_window < 1 || smooth_window % 2 == 0) {
        throw ComputeError("smoothing window must be odd and >= 1");
    }
    if (static_cast<std::size_t>(smooth_window) >= n) {
        throw ComputeError("smoothing window must be smaller than the track");
    }

    DerivativeTrack track;
    track.channel = channel;
    track.y.resize(n);
    if (smooth_window == 1) {
        track.y = y;
    } else {
        // Symmetric window that shrinks near the boundaries; affine inputs
        // pass through unchanged.
        const int half = smooth_window / 2;
        for (std::size_t i = 0; i < n; ++i) {
            const int h = std::min<int>({half, static_cast<int>(i),
                                         static_cast<int>(n - 1 - i)});
            double acc = 0.0;
            for (int j = -h; j <= h; ++j) {
                acc += y[static_cast<std::size_t>(static_cast<int>(i) + j)];
            }
            track.y[i] = acc / static_cast<double>(2 * h + 1);
        }
    }

    track.yd.resize(n);
    track.ydd.resize(n);
    const auto& s = track.y;
    const double inv2dt = 1.0 / (2.0 * dt);
    const double invdt2 = 1.0 / (dt * dt);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        track.yd[i] = (s[i + 1] - s[i - 1]) * inv2dt;
        track.ydd[i] = (s[i + 1] - 2.0 * s[i] + s[i - 1]) * invdt2;
    }
    track.yd[0] = (-3.0 * s[0] + 4.0 * s[1] - s[2]) * inv2dt;
    track.yd[n - 1] = (3.0 * s[n - 1] - 4.0 * s[n - 2] + s[n - 3]) * inv2dt;
    track.ydd[0] = (2.0 * s[0] - 5.0 * s[1] + 4.0 * s[2] - s[3]) * invdt2;
    track.ydd[n - 1] = (2.0 * s[n - 1] - 5.0 * s[n - 2] + 4.0 * s[n - 3] - s[n - 4]) * invdt2;
    return track;
}

}  // namespace mpseg

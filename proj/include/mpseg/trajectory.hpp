#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <vector>

namespace mpseg {

/// One raw sensor record: timestamp, absolute course angle, speed.
struct RawSample {
    double t = 0.0;           ///< seconds, monotone after dedup
    double course_deg = 0.0;  ///< absolute course angle, degrees
    double speed_mps = 0.0;   ///< >= 0
};

/// One uniformly sampled observed point: per-step course deviation and speed.
struct ObservedPoint {
    double dtheta = 0.0;  ///< degrees, wrapped to (-180, 180]
    double v = 0.0;       ///< m/s, >= 0
};

/// Uniformly sampled observed trajectory.
struct Trajectory {
    double dt = 0.0;  ///< seconds between consecutive points, > 0
    std::vector<ObservedPoint> points;

    [[nodiscard]] std::size_t size() const { return points.size(); }
    [[nodiscard]] double duration() const {
        return points.empty() ? 0.0 : dt * static_cast<double>(points.size() - 1);
    }

    /// Throws ParseError if the basic invariants (length >= 3, dt > 0,
    /// finite fields, v >= 0, dtheta in (-180, 180]) do not hold.
    void validate() const;
};

enum class Channel { lateral, longitudinal };

/// A sampled position channel with first and second time derivatives.
struct DerivativeTrack {
    std::vector<double> y;
    std::vector<double> yd;   ///< per second
    std::vector<double> ydd;  ///< per second^2
    Channel channel = Channel::lateral;

    [[nodiscard]] std::size_t size() const { return y.size(); }
};

/// Parse CSV records with header `t,course_deg,speed_mps`. Samples are
/// returned in timestamp order; duplicate timestamps keep the first
/// occurrence. Malformed rows raise ParseError naming the row number.
std::vector<RawSample> ingest_csv(const std::filesystem::path& path);
std::vector<RawSample> ingest_csv(std::istream& in, const std::string& origin = "<stream>");

/// Interpolate course angle and speed onto a uniform dt grid, then difference
/// the (unwrapped) course angle into per-step deviations in (-180, 180].
/// Output length = floor(duration / dt); the grid anchor sample at the first
/// timestamp carries no deviation and is not emitted.
Trajectory resample_and_difference(const std::vector<RawSample>& samples, double dt);

/// Centered moving-average smoothing (window 1 = none) followed by
/// second-order central differences; boundaries use second-order one-sided
/// stencils. Requires length >= 5 and an odd window < length.
DerivativeTrack estimate_derivatives(const std::vector<double>& y, double dt,
                                     int smooth_window = 1,
                                     Channel channel = Channel::lateral);

}  // namespace mpseg

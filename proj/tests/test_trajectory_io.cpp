#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mpseg/errors.hpp"
#include "mpseg/mathutil.hpp"
#include "mpseg/trajectory.hpp"

using namespace mpseg;

namespace {

std::vector<RawSample> parse(const std::string& body) {
    std::istringstream in("t,course_deg,speed_mps\n" + body);
    return ingest_csv(in, "test");
}

/// Brute-force minimal signed angular difference via candidate offsets.
double brute_wrap(double x) {
    double best = x;
    for (int k = -5; k <= 5; ++k) {
        const double cand = x + 360.0 * k;
        if (std::abs(cand) < std::abs(best)) best = cand;
    }
    // Ties at exactly 180 resolve to +180.
    if (std::abs(std::abs(best) - 180.0) < 1e-12) best = 180.0;
    return best;
}

}  // namespace

TEST_CASE("ingest keeps well-formed rows in order") {
    const auto samples = parse("0,90,5\n0.1,91,5.5\n0.2,92,6\n");
    REQUIRE(samples.size() == 3);
    CHECK(samples[0].t == 0.0);
    CHECK(samples[1].course_deg == 91.0);
    CHECK(samples[2].speed_mps == 6.0);
}

TEST_CASE("ingest drops duplicated timestamps, keeping the first") {
    const auto samples = parse("0,90,5\n0.1,91,5.5\n0.1,180,9\n0.2,92,6\n");
    REQUIRE(samples.size() == 3);
    CHECK(samples[1].course_deg == 91.0);
}

TEST_CASE("ingest rejects negative speed naming the row") {
    CHECK_THROWS_WITH_AS(parse("0,90,5\n0.1,91,-1\n"),
                         doctest::Contains("row 3"), ParseError);
}

TEST_CASE("ingest rejects empty and malformed input") {
    std::istringstream empty("");
    CHECK_THROWS_AS(ingest_csv(empty, "test"), ParseError);
    std::istringstream header_only("t,course_deg,speed_mps\n");
    CHECK_THROWS_AS(ingest_csv(header_only, "test"), ParseError);
    CHECK_THROWS_AS(parse("0,90\n"), ParseError);
    CHECK_THROWS_AS(parse("0,abc,5\n"), ParseError);
    std::istringstream bad_header("time,course,speed\n0,90,5\n");
    CHECK_THROWS_AS(ingest_csv(bad_header, "test"), ParseError);
}

TEST_CASE("ingest sorts out-of-order samples by timestamp") {
    const auto samples = parse("0.2,92,6\n0,90,5\n0.1,91,5.5\n");
    REQUIRE(samples.size() == 3);
    CHECK(samples[0].t == 0.0);
    CHECK(samples[2].t == 0.2);
}

TEST_CASE("constant course angle gives zero deviations") {
    std::vector<RawSample> samples;
    for (int i = 0; i <= 10; ++i) samples.push_back({0.5 * i, 90.0, 3.0});
    const auto traj = resample_and_difference(samples, 0.5);
    REQUIRE(traj.size() == 10);
    for (const auto& p : traj.points) {
        CHECK(p.dtheta == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(p.v == doctest::Approx(3.0));
    }
}

TEST_CASE("wrap-around course crossing 359 to 1 gives +2") {
    std::vector<RawSample> samples{{0, 357, 5}, {1, 359, 5}, {2, 1, 5}, {3, 3, 5}};
    const auto traj = resample_and_difference(samples, 1.0);
    REQUIRE(traj.size() == 3);
    for (const auto& p : traj.points) CHECK(p.dtheta == doctest::Approx(2.0));
}

TEST_CASE("linear ramp resamples to constant steps") {
    // 0 to 10 degrees over 10 s, dt = 1 s: every step is exactly 1 degree.
    std::vector<RawSample> samples;
    for (int i = 0; i <= 20; ++i) samples.push_back({0.5 * i, 0.5 * i, 4.0});
    const auto traj = resample_and_difference(samples, 1.0);
    REQUIRE(traj.size() == 10);
    for (const auto& p : traj.points) CHECK(p.dtheta == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("resampling on the native grid is exact") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> angle(0.0, 360.0), speed(0.0, 20.0);
    std::vector<RawSample> samples;
    const double dt = 0.25;
    for (int i = 0; i <= 40; ++i) samples.push_back({dt * i, angle(rng), speed(rng)});
    const auto traj = resample_and_difference(samples, dt);
    REQUIRE(traj.size() == 40);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double expect =
            wrap_degrees(samples[k + 1].course_deg - samples[k].course_deg);
        CHECK(traj.points[k].dtheta == doctest::Approx(expect).epsilon(1e-12));
        CHECK(traj.points[k].v == doctest::Approx(samples[k + 1].speed_mps).epsilon(1e-12));
    }
}

TEST_CASE("resampling rejects dt larger than the recording") {
    std::vector<RawSample> samples{{0, 0, 1}, {1, 1, 1}};
    CHECK_THROWS_AS(resample_and_difference(samples, 2.0), ParseError);
}

TEST_CASE("wrapping lands in (-180, 180] and matches the minimal difference") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> raw(-1000.0, 1000.0);
    for (int i = 0; i < 2000; ++i) {
        const double x = raw(rng);
        const double w = wrap_degrees(x);
        CHECK(w > -180.0);
        CHECK(w <= 180.0);
        CHECK(w == doctest::Approx(brute_wrap(x)).epsilon(1e-9));
    }
    CHECK(wrap_degrees(180.0) == 180.0);
    CHECK(wrap_degrees(-180.0) == 180.0);
    CHECK(wrap_degrees(540.0) == 180.0);
}

TEST_CASE("derivatives of a constant are zero") {
    const std::vector<double> y(12, 3.5);
    const auto track = estimate_derivatives(y, 0.1);
    for (double v : track.yd) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
    for (double a : track.ydd) CHECK(a == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("derivatives of a line are exact, including boundaries") {
    std::vector<double> y;
    const double a = -2.3, b = 0.7, dt = 0.05;
    for (int i = 0; i < 30; ++i) y.push_back(b + a * dt * i);
    const auto track = estimate_derivatives(y, dt);
    for (double v : track.yd) CHECK(v == doctest::Approx(a).epsilon(1e-9));
    for (double acc : track.ydd) CHECK(acc == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("smoothing keeps affine tracks exact") {
    std::vector<double> y;
    const double a = 1.7, dt = 0.1;
    for (int i = 0; i < 40; ++i) y.push_back(a * dt * i);
    const auto track = estimate_derivatives(y, dt, 5);
    for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(track.y[i] == doctest::Approx(y[i]).epsilon(1e-12));
    }
    for (double v : track.yd) CHECK(v == doctest::Approx(a).epsilon(1e-9));
}

TEST_CASE("sine derivative error stays below 1e-3 on the interior") {
    // Oracle: the analytic derivative of sin at dt = 0.01.
    const double dt = 0.01;
    std::vector<double> y;
    for (int i = 0; i <= 1000; ++i) y.push_back(std::sin(dt * i));
    const auto track = estimate_derivatives(y, dt);
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < y.size(); ++i) {
        worst = std::max(worst, std::abs(track.yd[i] - std::cos(dt * static_cast<double>(i))));
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("derivative estimation rejects bad windows and short tracks") {
    const std::vector<double> y(10, 1.0);
    CHECK_THROWS_AS(estimate_derivatives(y, 0.1, 4), ComputeError);
    CHECK_THROWS_AS(estimate_derivatives(y, 0.1, 11), ComputeError);
    CHECK_THROWS_AS(estimate_derivatives(std::vector<double>(4, 0.0), 0.1), ComputeError);
}

TEST_CASE("trajectory validation catches invariant violations") {
    Trajectory traj;
    traj.dt = 0.1;
    traj.points = {{0.0, 1.0}, {0.0, 1.0}};
    CHECK_THROWS_AS(traj.validate(), ParseError);  // too short
    traj.points.push_back({0.0, -1.0});
    CHECK_THROWS_AS(traj.validate(), ParseError);  // negative speed
    traj.points.back().v = 1.0;
    traj.validate();
    traj.dt = 0.0;
    CHECK_THROWS_AS(traj.validate(), ParseError);
}

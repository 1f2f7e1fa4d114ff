#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mpseg/errors.hpp"
#include "mpseg/evaluation.hpp"

using namespace mpseg;

namespace {

PrimitiveTrack random_track(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> d(-5.0, 5.0);
    PrimitiveTrack t;
    t.dt = 0.1;
    for (std::size_t i = 0; i < n; ++i) {
        t.dtheta_m.push_back(d(rng));
        t.dtheta_m_dot.push_back(d(rng));
        t.dv_m.push_back(d(rng));
        t.dv_m_dot.push_back(d(rng));
    }
    return t;
}

std::size_t count_lines(const std::filesystem::path& p) {
    std::ifstream in(p);
    REQUIRE(in);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
}

}  // namespace

TEST_CASE("identical tracks deviate by zero") {
    std::mt19937_64 rng(1);
    const auto t = random_track(rng, 30);
    const auto rep = deviation_report(t, t);
    for (double d : rep.lateral.d_pos) CHECK(d == 0.0);
    for (double d : rep.longitudinal.d_pos) CHECK(d == 0.0);
    CHECK(rep.lateral.rmse_pos == 0.0);
    CHECK(rep.longitudinal.max_vel == 0.0);
}

TEST_CASE("a constant offset shows up verbatim in d_pos") {
    std::mt19937_64 rng(2);
    const auto demo = random_track(rng, 25);
    auto learned = demo;
    for (double& y : learned.dtheta_m) y += 0.5;
    const auto rep = deviation_report(demo, learned);
    for (double d : rep.lateral.d_pos) CHECK(d == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rep.lateral.rmse_pos == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rep.lateral.max_pos == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("deviation statistics match an independent recomputation") {
    std::mt19937_64 rng(3);
    const auto a = random_track(rng, 40);
    const auto b = random_track(rng, 40);
    const auto rep = deviation_report(a, b);
    double sq = 0.0, mx = 0.0;
    for (std::size_t i = 0; i < 40; ++i) {
        const double d = std::abs(a.dtheta_m[i] - b.dtheta_m[i]);
        sq += d * d;
        mx = std::max(mx, d);
        CHECK(rep.lateral.d_pos[i] == doctest::Approx(d).epsilon(1e-15));
    }
    CHECK(rep.lateral.rmse_pos == doctest::Approx(std::sqrt(sq / 40.0)).epsilon(1e-15));
    CHECK(rep.lateral.max_pos == doctest::Approx(mx).epsilon(1e-15));
}

TEST_CASE("deviation is symmetric in its arguments") {
    std::mt19937_64 rng(4);
    const auto a = random_track(rng, 20);
    const auto b = random_track(rng, 20);
    const auto ab = deviation_report(a, b);
    const auto ba = deviation_report(b, a);
    for (std::size_t i = 0; i < 20; ++i) {
        CHECK(ab.lateral.d_pos[i] == ba.lateral.d_pos[i]);
        CHECK(ab.longitudinal.d_vel[i] == ba.longitudinal.d_vel[i]);
    }
}

TEST_CASE("length mismatches are resampled onto the demonstrated grid") {
    std::mt19937_64 rng(5);
    PrimitiveTrack demo;
    demo.dt = 0.1;
    for (int i = 0; i <= 20; ++i) {
        demo.dtheta_m.push_back(i * 0.5);
        demo.dtheta_m_dot.push_back(5.0);
        demo.dv_m.push_back(0.0);
        demo.dv_m_dot.push_back(0.0);
    }
    PrimitiveTrack learned;
    learned.dt = 0.05;
    for (int i = 0; i <= 40; ++i) {
        learned.dtheta_m.push_back(i * 0.25);
        learned.dtheta_m_dot.push_back(5.0);
        learned.dv_m.push_back(0.0);
        learned.dv_m_dot.push_back(0.0);
    }
    const auto rep = deviation_report(demo, learned);
    REQUIRE(rep.lateral.d_pos.size() == 21);
    for (double d : rep.lateral.d_pos) CHECK(d == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("identical cut sets score a perfect F1") {
    const std::vector<std::size_t> cuts{5, 12, 30, 44};
    const auto s = cut_f1(cuts, cuts, 3);
    CHECK(s.precision == 1.0);
    CHECK(s.recall == 1.0);
    CHECK(s.f1 == 1.0);
    CHECK(s.matched == 4);
}

TEST_CASE("empty predictions score zero by convention") {
    const std::vector<std::size_t> truth{5, 12};
    const auto s = cut_f1({}, truth, 3);
    CHECK(s.precision == 0.0);
    CHECK(s.recall == 0.0);
    CHECK(s.f1 == 0.0);
}

TEST_CASE("cuts shifted by exactly the tolerance still match") {
    const std::vector<std::size_t> truth{10, 20, 30};
    const std::vector<std::size_t> pred{13, 17, 33};
    const auto s = cut_f1(pred, truth, 3);
    CHECK(s.matched == 3);
    CHECK(s.f1 == 1.0);
    const auto s2 = cut_f1(pred, truth, 2);
    CHECK(s2.matched == 0);
}

TEST_CASE("matching is one-to-one") {
    // Two predictions near one true cut: only one may match.
    const std::vector<std::size_t> truth{10};
    const std::vector<std::size_t> pred{9, 11};
    const auto s = cut_f1(pred, truth, 3);
    CHECK(s.matched == 1);
    CHECK(s.precision == doctest::Approx(0.5));
    CHECK(s.recall == doctest::Approx(1.0));
}

TEST_CASE("plot emission writes headers, per-sample rows and round-trips") {
    const auto dir = std::filesystem::temp_directory_path() / "mpseg_plot_test";
    std::filesystem::remove_all(dir);

    Trajectory traj;
    traj.dt = 0.1;
    for (int i = 0; i < 30; ++i) traj.points.push_back({0.2 + 0.01 * i, 8.0});

    SUBCASE("empty result gives a header-only overlay") {
        PlotBundle bundle;
        bundle.traj = &traj;
        emit_plot_data(bundle, dir);
        CHECK(count_lines(dir / "overlay.csv") == 1);
    }

    SUBCASE("segments produce overlay rows and per-segment files") {
        SegmentationResult res;
        res.segments.push_back({0, 15, 2, 0.9});
        res.segments.push_back({15, 29, 0, 0.8});
        PlotBundle bundle;
        bundle.traj = &traj;
        bundle.segmentation = &res;
        emit_plot_data(bundle, dir);

        CHECK(count_lines(dir / "overlay.csv") == traj.size() + 1);
        CHECK(count_lines(dir / "segment_0_track.csv") == 16 + 1);
        CHECK(count_lines(dir / "segment_1_deviation.csv") == 15 + 1);

        // Round-trip: the overlay's dtheta column equals the source values.
        std::ifstream in(dir / "overlay.csv");
        std::string line;
        std::getline(in, line);
        CHECK(line == "t,dtheta,v,component");
        std::size_t k = 0;
        while (std::getline(in, line)) {
            std::istringstream row(line);
            std::string field;
            std::getline(row, field, ',');
            std::getline(row, field, ',');
            CHECK(std::stod(field) == traj.points[k].dtheta);
            std::getline(row, field, ',');
            CHECK(std::stod(field) == traj.points[k].v);
            std::getline(row, field, ',');
            // Boundary sample 15 belongs to the right segment.
            CHECK(std::stol(field) == (k < 15 ? 2 : 0));
            ++k;
        }
        CHECK(k == traj.size());
    }

    std::filesystem::remove_all(dir);
}

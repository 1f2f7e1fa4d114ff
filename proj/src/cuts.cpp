#include "mpseg/cuts.hpp"

#include <cmath>
#include <string>

#include "mpseg/errors.hpp"

namespace mpseg {

void CutPointSet::validate(std::size_t traj_len) const {
    if (indices.size() < 2) {
        throw ComputeError("cut point set needs at least the two endpoints");
    }
    if (indices.front() != 0 || indices.back() != traj_len - 1) {
        throw ComputeError("cut point set must start at 0 and end at " +
                           std::to_string(traj_len - 1));
    }
    for (std::size_t i = 1; i < indices.size(); ++i) {
        if (indices[i] <= indices[i - 1]) {
            throw ComputeError("cut indices must be strictly increasing");
        }
    }
}

CutPointSet zero_cross_cuts(const Trajectory& traj, std::size_t min_gap, double deadband) {
    const std::size_t n = traj.size();
    if (n < 3) {
        throw ComputeError("zero-crossing cuts need a trajectory of length >= 3");
    }
    if (min_gap < 1) {
        throw ComputeError("min_gap must be >= 1");
    }
    if (deadband < 0.0) {
        throw ComputeError("deadband must be >= 0");
    }

    auto clamped = [&](std::size_t i) -> double {
        double x = traj.points[i].dtheta;
        return std::abs(x) < deadband ? 0.0 : x;
    };
    auto sign_of = [](double x) -> int { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); };

    // Crossing events: start of a zero run, or a strict flip against the last
    // non-zero sign that is not preceded by a zero run (the run start already
    // marked that transition).
    std::vector<std::size_t> events;
    int last_nonzero_sign = 0;
    int prev_sign = sign_of(clamped(0));
    last_nonzero_sign = prev_sign;
    for (std::size_t i = 1; i < n; ++i) {
        const int s = sign_of(clamped(i));
        if (s == 0) {
            if (prev_sign != 0) events.push_back(i);
        } else {
            if (prev_sign != 0 && last_nonzero_sign != 0 && s != last_nonzero_sign) {
                events.push_back(i);
            }
            last_nonzero_sign = s;
        }
        prev_sign = s;
    }

    CutPointSet cuts;
    cuts.indices.push_back(0);
    for (std::size_t e : events) {
        if (e == 0 || e >= n - 1) continue;
        if (e - cuts.indices.back() < min_gap) continue;  // too close to last accepted
        if (n - 1 - e < min_gap) continue;                // too close to the end
        cuts.indices.push_back(e);
    }
    cuts.indices.push_back(n - 1);
    cuts.validate(n);
    return cuts;
}

}  // namespace mpseg

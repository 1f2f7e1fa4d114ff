#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace mpseg::detail {

/// k-means++ seeding: returns k row indices, first uniform, the rest drawn
/// proportionally to squared distance from the nearest chosen center.
inline std::vector<std::size_t> kmeanspp_indices(std::span<const std::vector<double>> rows,
                                                 std::size_t k, std::mt19937_64& rng) {
    std::vector<std::size_t> chosen;
    if (rows.empty() || k == 0) return chosen;
    const std::size_t n = rows.size();
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    chosen.push_back(first(rng));

    auto dist2 = [&](std::size_t a, std::size_t b) {
        double s = 0.0;
        for (std::size_t d = 0; d < rows[a].size(); ++d) {
            const double diff = rows[a][d] - rows[b][d];
            s += diff * diff;
        }
        return s;
    };

    std::vector<double> best(n);
    while (chosen.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double m = dist2(i, chosen[0]);
            for (std::size_t j = 1; j < chosen.size(); ++j) {
                m = std::min(m, dist2(i, chosen[j]));
            }
            best[i] = m;
            total += m;
        }
        if (total <= 0.0) {
            // All remaining points coincide with a center; pick round-robin.
            chosen.push_back(chosen.size() % n);
            continue;
        }
        std::uniform_real_distribution<double> u(0.0, total);
        double r = u(rng);
        std::size_t pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            r -= best[i];
            if (r <= 0.0) {
                pick = i;
                break;
            }
        }
        chosen.push_back(pick);
    }
    return chosen;
}

}  // namespace mpseg::detail

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mpseg/segmentation.hpp"
#include "mpseg/trajectory.hpp"

namespace mpseg {

/// Eigenvalue floor applied to the 2x2 covariances of the pointwise model.
inline constexpr double kCovEigFloor = 1e-6;

/// Full-covariance Gaussian over [dtheta, v] points.
struct Gaussian2 {
    std::array<double, 2> mean{0.0, 0.0};
    std::array<double, 4> cov{1.0, 0.0, 0.0, 1.0};  ///< row-major, symmetric PD
};

/// Pointwise mixture over observed points, fitted directly on [dtheta, v].
struct PointwiseGmm {
    std::vector<Gaussian2> components;
    std::vector<double> weights;  ///< sum to 1
    bool standardized = false;
    std::array<double, 2> feat_mean{0.0, 0.0};
    std::array<double, 2> feat_scale{1.0, 1.0};
    std::vector<double> loglik_history;
    std::vector<std::string> events;

    [[nodiscard]] std::size_t size() const { return components.size(); }
};

/// Standard full-covariance EM with k-means++ seeding. Components that lose
/// all their mass are reseeded from the lowest-likelihood point.
PointwiseGmm fit_pointwise_gmm(std::span<const Trajectory> trajs, std::size_t n_components,
                               std::size_t max_iter = 200, double tol = 1e-8,
                               std::uint64_t seed = 1, bool standardize = false);

/// Per-point responsibilities under the model; rows sum to 1.
std::vector<double> pointwise_responsibilities(const PointwiseGmm& model, double dtheta,
                                               double v);

/// Argmax labels plus segments delimited wherever consecutive labels differ.
struct BaselineSegmentation {
    std::vector<std::size_t> labels;     ///< per point
    std::vector<FinalSegment> segments;  ///< component = cluster label, alpha = 1

    [[nodiscard]] std::size_t boundary_count() const {
        return segments.empty() ? 0 : segments.size() - 1;
    }
};
BaselineSegmentation label_and_segment(const Trajectory& traj, const PointwiseGmm& model);

}  // namespace mpseg

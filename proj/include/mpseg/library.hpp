#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mpseg/dmp.hpp"

namespace mpseg {

/// Default variance floor for library components, in standardized feature
/// units. Acts as the resolution of feature space: component variances never
/// shrink below it, which caps the density reward for cutting finer.
inline constexpr double kVarFloor = 1e-4;

/// Per-dimension affine map used to put segment features on a common scale.
struct Standardization {
    std::vector<double> mean;
    std::vector<double> scale;  ///< > 0

    [[nodiscard]] std::size_t dim() const { return mean.size(); }
    [[nodiscard]] std::vector<double> apply(std::span<const double> raw) const;
    [[nodiscard]] std::vector<double> invert(std::span<const double> std_values) const;

    static Standardization identity(std::size_t dim);
    /// Per-dimension mean and stddev over the rows; near-constant dimensions
    /// get unit scale.
    static Standardization fit(std::span<const std::vector<double>> rows);
};

/// Duration-invariant description of one segment in standardized space:
/// [v_init, omega_theta(1..N), omega_v(1..N), g_theta, g_v].
struct SegmentFeature {
    std::vector<double> u;

    [[nodiscard]] std::size_t dim() const { return u.size(); }
};

/// One mixture component: weight plus a diagonal Gaussian over features.
struct LibraryComponent {
    double lambda = 1.0;
    std::vector<double> mean;
    std::vector<double> var;  ///< per-dimension, >= kVarFloor
};

/// Mixture library of learned primitives.
struct PrimitiveLibrary {
    DmpConfig cfg;
    Standardization standardization;
    std::vector<LibraryComponent> components;
    double var_floor = kVarFloor;

    [[nodiscard]] std::size_t size() const { return components.size(); }
    [[nodiscard]] std::size_t dim() const { return standardization.dim(); }
    void validate() const;
};

/// Unstandardized concatenation [v_init, omega_theta, omega_v, g_theta, g_v].
std::vector<double> raw_feature(const DmpParams& params, const DmpAdjustment& adj);

/// Standardize a segment's raw feature with the library's statistics.
SegmentFeature featurize(const DmpParams& params, const DmpAdjustment& adj,
                         const PrimitiveLibrary& lib);

/// Log density of a diagonal Gaussian component at u.
double component_loglik(const SegmentFeature& u, const LibraryComponent& comp);

/// log p(s|library) via log-sum-exp over weighted components.
double mixture_loglik(const SegmentFeature& u, const PrimitiveLibrary& lib);

/// Segment score on the cut lattice. A segment spanning `span` cut
/// intervals emits its feature once per interval, so every segmentation of
/// a trajectory explains the same number of observations and segmentations
/// of different granularity stay comparable:
///   log sum_m lambda_m N_m(u)^span.
double segment_loglik(const SegmentFeature& u, std::size_t span,
                      const PrimitiveLibrary& lib);

/// Posterior component probabilities for one feature; sums to 1.
std::vector<double> responsibilities(const SegmentFeature& u, const PrimitiveLibrary& lib);

/// Component posteriors under the span-powered emission of segment_loglik.
std::vector<double> segment_responsibilities(const SegmentFeature& u, std::size_t span,
                                             const PrimitiveLibrary& lib);

/// De-standardize a component mean and slice out the primitive parameters.
DmpParams extract_primitive(const LibraryComponent& comp, const PrimitiveLibrary& lib);

/// De-standardized goal block (g_theta, g_v) of a component mean.
std::pair<double, double> extract_goal(const LibraryComponent& comp,
                                       const PrimitiveLibrary& lib);

/// Plain (unweighted) GMM fit over feature rows; used for library seeding
/// and component-count selection. Returns the library (identity config; the
/// caller stamps cfg/standardization) and its final total log-likelihood.
struct PlainGmmFit {
    std::vector<LibraryComponent> components;
    double loglik = 0.0;
    std::vector<double> loglik_history;
};
PlainGmmFit fit_plain_gmm(std::span<const std::vector<double>> rows, std::size_t n_components,
                          std::size_t max_iter, double tol, std::uint64_t seed,
                          double var_floor = kVarFloor);

/// Bayesian information criterion sweep; returns the component count with
/// the lowest BIC.
std::size_t select_components_bic(std::span<const std::vector<double>> rows,
                                  std::size_t m_min, std::size_t m_max,
                                  std::uint64_t seed);

}  // namespace mpseg

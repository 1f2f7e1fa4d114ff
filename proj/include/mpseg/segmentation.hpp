#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mpseg/cuts.hpp"
#include "mpseg/dmp.hpp"
#include "mpseg/library.hpp"
#include "mpseg/trajectory.hpp"

namespace mpseg {

/// One admissible segment between two candidate cuts, with its fitted
/// primitive and cached features.
struct CandidateSegment {
    std::size_t i = 0;      ///< start cut index into the lattice
    std::size_t j = 0;      ///< end cut index, i < j
    std::size_t start = 0;  ///< start sample index
    std::size_t end = 0;    ///< end sample index (inclusive)
    DmpParams params;
    DmpAdjustment adj;
    std::vector<double> raw_u;  ///< unstandardized feature
    SegmentFeature u;           ///< standardized; filled once statistics are frozen

    /// Number of interior candidate cuts this segment skips.
    [[nodiscard]] std::size_t skipped() const { return j - i - 1; }
};

/// Posterior weight per candidate segment, parallel to the candidate list.
struct SegmentPosterior {
    std::vector<double> alpha;
};

/// Bookkeeping of one EM run.
struct EmState {
    std::size_t iterations = 0;
    std::vector<double> evidence;  ///< total log-evidence per iteration
    bool converged = false;
    std::vector<std::string> events;
};

struct EmOptions {
    double p_c = 0.4;            ///< cut-confidence prior, in (0, 1)
    std::size_t k_max = 6;       ///< max cut span of a candidate segment
    std::size_t n_components = 8;
    bool select_m_bic = false;   ///< pick the component count by BIC sweep
    std::size_t m_min = 2;
    std::size_t m_max = 12;
    std::size_t max_iter = 100;
    double tol = 1e-6;           ///< relative evidence improvement threshold
    double var_floor = kVarFloor;
    std::uint64_t seed = 1;
    int smooth_window = 1;
    std::size_t jobs = 1;
};

/// Fit every admissible candidate segment (cut span 1..k_max). Candidates
/// whose fit fails are dropped with a note in `events` (if given).
std::vector<CandidateSegment> enumerate_segments(const Trajectory& traj,
                                                 const CutPointSet& cuts,
                                                 std::size_t k_max, const DmpConfig& cfg,
                                                 int smooth_window = 1,
                                                 std::vector<std::string>* events = nullptr);

/// Geometric prior for a segment skipping `skipped` interior cuts:
/// (1 - p_c)^skipped * p_c.
double segment_prior(std::size_t skipped, double p_c);

/// A lattice edge between cut nodes with a log weight.
struct LatticeEdge {
    std::size_t i = 0;
    std::size_t j = 0;
    double logw = 0.0;
};

/// Exact forward/backward marginals over all segmentations representable on
/// the lattice. `log_evidence` excludes any global prior factor.
struct LatticePosterior {
    std::vector<double> alpha;  ///< per edge, in [0, 1]
    double log_evidence = 0.0;
};
LatticePosterior lattice_forward_backward(std::size_t n_nodes,
                                          std::span<const LatticeEdge> edges);

/// Max-product path through the lattice; ties break toward fewer segments.
struct LatticePath {
    std::vector<std::size_t> edge_ids;  ///< in path order
    double logw = 0.0;
};
LatticePath lattice_viterbi(std::size_t n_nodes, std::span<const LatticeEdge> edges);

/// E-step over one trajectory's candidates: posterior segment weights and
/// the trajectory log-evidence (including the global p_c factor).
struct EStepResult {
    SegmentPosterior posterior;
    double log_evidence = 0.0;
};
EStepResult e_step(std::span<const CandidateSegment> candidates,
                   const PrimitiveLibrary& lib, double p_c);

/// Weighted mixture update: each candidate contributes alpha * responsibility
/// to the component moments. Components collapsing below total weight 1e-8
/// are removed (noted in `events`) and the weights renormalized.
PrimitiveLibrary m_step(std::span<const CandidateSegment> candidates,
                        std::span<const double> alpha, const PrimitiveLibrary& lib,
                        std::vector<std::string>* events = nullptr);

/// One surviving segment of the final hard segmentation.
struct FinalSegment {
    std::size_t start = 0;      ///< sample index
    std::size_t end = 0;        ///< sample index, inclusive
    std::size_t component = 0;  ///< argmax-responsibility library component
    double alpha = 1.0;         ///< posterior weight of the candidate
};

/// Hard segmentation of one trajectory.
struct SegmentationResult {
    CutPointSet initial_cuts;
    std::vector<std::size_t> active_cuts;  ///< surviving sample indices, incl. endpoints
    std::vector<FinalSegment> segments;
};

/// Max-product segmentation under the current library, with component
/// assignments and posterior weights taken from `posterior`.
SegmentationResult viterbi_segmentation(std::span<const CandidateSegment> candidates,
                                        const PrimitiveLibrary& lib, double p_c,
                                        const SegmentPosterior& posterior,
                                        const CutPointSet& cuts);

/// Joint EM over segmentation and library across all trajectories.
struct EmRunResult {
    PrimitiveLibrary library;
    std::vector<SegmentationResult> per_trajectory;
    EmState state;
};
EmRunResult run_em(std::span<const Trajectory> trajs, std::span<const CutPointSet> cuts,
                   const DmpConfig& cfg, const EmOptions& options);

}  // namespace mpseg

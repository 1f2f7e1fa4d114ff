#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mpseg/baseline.hpp"
#include "mpseg/cuts.hpp"
#include "mpseg/dmp.hpp"
#include "mpseg/errors.hpp"
#include "mpseg/evaluation.hpp"
#include "mpseg/library.hpp"
#include "mpseg/pipeline.hpp"
#include "mpseg/segmentation.hpp"
#include "mpseg/serialization.hpp"
#include "mpseg/synthetic.hpp"
#include "mpseg/trajectory.hpp"

namespace py = pybind11;
using namespace mpseg;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Motion-primitive segmentation and library learning for driving trajectories";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ComputeError>(m, "ComputeError", PyExc_RuntimeError);

    // trajectory-io
    py::class_<RawSample>(m, "RawSample")
        .def(py::init<>())
        .def_readwrite("t", &RawSample::t)
        .def_readwrite("course_deg", &RawSample::course_deg)
        .def_readwrite("speed_mps", &RawSample::speed_mps);

    py::class_<ObservedPoint>(m, "ObservedPoint")
        .def(py::init<>())
        .def_readwrite("dtheta", &ObservedPoint::dtheta)
        .def_readwrite("v", &ObservedPoint::v);

    py::class_<Trajectory>(m, "Trajectory")
        .def(py::init<>())
        .def_readwrite("dt", &Trajectory::dt)
        .def_readwrite("points", &Trajectory::points)
        .def("__len__", &Trajectory::size)
        .def("duration", &Trajectory::duration)
        .def("dtheta", [](const Trajectory& t) {
            std::vector<double> out;
            out.reserve(t.size());
            for (const auto& p : t.points) out.push_back(p.dtheta);
            return out;
        })
        .def("speed", [](const Trajectory& t) {
            std::vector<double> out;
            out.reserve(t.size());
            for (const auto& p : t.points) out.push_back(p.v);
            return out;
        });

    m.def("ingest_csv",
          static_cast<std::vector<RawSample> (*)(const std::filesystem::path&)>(&ingest_csv),
          py::arg("path"));
    m.def("resample_and_difference", &resample_and_difference, py::arg("samples"),
          py::arg("dt"));

    // heuristic-cuts
    py::class_<CutPointSet>(m, "CutPointSet")
        .def(py::init<>())
        .def_readwrite("indices", &CutPointSet::indices)
        .def("__len__", &CutPointSet::size);
    m.def("zero_cross_cuts", &zero_cross_cuts, py::arg("traj"), py::arg("min_gap") = 5,
          py::arg("deadband") = 0.05);

    // dmp-core
    py::class_<DmpConfig>(m, "DmpConfig")
        .def_static("standard", &DmpConfig::standard, py::arg("n_basis") = 15,
                    py::arg("dt") = 0.0)
        .def_static("with_constants", &DmpConfig::with_constants, py::arg("alpha_z"),
                    py::arg("alpha_y"), py::arg("n_basis"), py::arg("dt") = 0.0)
        .def_readwrite("alpha_z", &DmpConfig::alpha_z)
        .def_readwrite("alpha_y", &DmpConfig::alpha_y)
        .def_readwrite("beta_y", &DmpConfig::beta_y)
        .def_readwrite("n_basis", &DmpConfig::n_basis)
        .def_readwrite("dt", &DmpConfig::dt)
        .def_readonly("centers", &DmpConfig::centers)
        .def_readonly("bandwidths", &DmpConfig::bandwidths);

    py::class_<DmpChannelWeights>(m, "DmpChannelWeights")
        .def(py::init<>())
        .def_readwrite("w", &DmpChannelWeights::w);

    py::class_<DmpParams>(m, "DmpParams")
        .def(py::init<>())
        .def_readwrite("v_init", &DmpParams::v_init)
        .def_readwrite("omega_theta", &DmpParams::omega_theta)
        .def_readwrite("omega_v", &DmpParams::omega_v)
        .def("n_basis", &DmpParams::n_basis);

    py::class_<DmpAdjustment>(m, "DmpAdjustment")
        .def(py::init<>())
        .def_readwrite("g_theta", &DmpAdjustment::g_theta)
        .def_readwrite("g_v", &DmpAdjustment::g_v)
        .def_readwrite("duration", &DmpAdjustment::duration);

    py::class_<PrimitiveTrack>(m, "PrimitiveTrack")
        .def_readonly("v_init", &PrimitiveTrack::v_init)
        .def_readonly("dt", &PrimitiveTrack::dt)
        .def_readonly("dtheta_m", &PrimitiveTrack::dtheta_m)
        .def_readonly("dtheta_m_dot", &PrimitiveTrack::dtheta_m_dot)
        .def_readonly("dv_m", &PrimitiveTrack::dv_m)
        .def_readonly("dv_m_dot", &PrimitiveTrack::dv_m_dot)
        .def("__len__", &PrimitiveTrack::size)
        .def("duration", &PrimitiveTrack::duration);

    m.def("integrate_canonical", &integrate_canonical, py::arg("cfg"), py::arg("duration"));
    m.def(
        "fit_segment",
        [](const Trajectory& traj, std::size_t first, std::size_t last, const DmpConfig& cfg,
           int smooth_window) {
            return fit_segment(traj, IndexRange{first, last}, cfg, smooth_window);
        },
        py::arg("traj"), py::arg("first"), py::arg("last"), py::arg("cfg"),
        py::arg("smooth_window") = 1);
    m.def("rollout", &rollout, py::arg("params"), py::arg("adj"), py::arg("cfg"));
    m.def("retarget", &retarget, py::arg("params"), py::arg("g_theta"), py::arg("g_v"),
          py::arg("duration"), py::arg("cfg"));

    // primitive-library
    py::class_<LibraryComponent>(m, "LibraryComponent")
        .def_readwrite("lam", &LibraryComponent::lambda)
        .def_readwrite("mean", &LibraryComponent::mean)
        .def_readwrite("var", &LibraryComponent::var);

    py::class_<PrimitiveLibrary>(m, "PrimitiveLibrary")
        .def_readwrite("components", &PrimitiveLibrary::components)
        .def("__len__", &PrimitiveLibrary::size);

    m.def("extract_primitive", &extract_primitive, py::arg("component"), py::arg("library"));
    m.def("extract_goal", &extract_goal, py::arg("component"), py::arg("library"));
    m.def("save_library", &save_library, py::arg("library"), py::arg("path"),
          py::arg("config_hash") = "");
    m.def("load_library", &load_library, py::arg("path"));

    // prob-segmentation
    py::class_<FinalSegment>(m, "FinalSegment")
        .def_readonly("start", &FinalSegment::start)
        .def_readonly("end", &FinalSegment::end)
        .def_readonly("component", &FinalSegment::component)
        .def_readonly("alpha", &FinalSegment::alpha);

    py::class_<SegmentationResult>(m, "SegmentationResult")
        .def_readonly("active_cuts", &SegmentationResult::active_cuts)
        .def_readonly("segments", &SegmentationResult::segments);

    py::class_<EmState>(m, "EmState")
        .def_readonly("iterations", &EmState::iterations)
        .def_readonly("evidence", &EmState::evidence)
        .def_readonly("converged", &EmState::converged)
        .def_readonly("events", &EmState::events);

    py::class_<EmOptions>(m, "EmOptions")
        .def(py::init<>())
        .def_readwrite("p_c", &EmOptions::p_c)
        .def_readwrite("k_max", &EmOptions::k_max)
        .def_readwrite("n_components", &EmOptions::n_components)
        .def_readwrite("select_m_bic", &EmOptions::select_m_bic)
        .def_readwrite("max_iter", &EmOptions::max_iter)
        .def_readwrite("tol", &EmOptions::tol)
        .def_readwrite("seed", &EmOptions::seed)
        .def_readwrite("smooth_window", &EmOptions::smooth_window)
        .def_readwrite("jobs", &EmOptions::jobs);

    py::class_<EmRunResult>(m, "EmRunResult")
        .def_readonly("library", &EmRunResult::library)
        .def_readonly("per_trajectory", &EmRunResult::per_trajectory)
        .def_readonly("state", &EmRunResult::state);

    m.def("segment_prior", &segment_prior, py::arg("skipped"), py::arg("p_c"));
    m.def(
        "run_em",
        [](const std::vector<Trajectory>& trajs, const std::vector<CutPointSet>& cuts,
           const DmpConfig& cfg, const EmOptions& options) {
            return run_em(trajs, cuts, cfg, options);
        },
        py::arg("trajectories"), py::arg("cuts"), py::arg("cfg"), py::arg("options"));

    // baseline-emgmm
    py::class_<PointwiseGmm>(m, "PointwiseGmm")
        .def_readonly("weights", &PointwiseGmm::weights)
        .def_readonly("loglik_history", &PointwiseGmm::loglik_history)
        .def("__len__", &PointwiseGmm::size);

    py::class_<BaselineSegmentation>(m, "BaselineSegmentation")
        .def_readonly("labels", &BaselineSegmentation::labels)
        .def_readonly("segments", &BaselineSegmentation::segments)
        .def("boundary_count", &BaselineSegmentation::boundary_count);

    m.def(
        "fit_pointwise_gmm",
        [](const std::vector<Trajectory>& trajs, std::size_t k, std::size_t max_iter,
           double tol, std::uint64_t seed, bool standardize) {
            return fit_pointwise_gmm(trajs, k, max_iter, tol, seed, standardize);
        },
        py::arg("trajectories"), py::arg("n_components"), py::arg("max_iter") = 200,
        py::arg("tol") = 1e-8, py::arg("seed") = 1, py::arg("standardize") = false);
    m.def("label_and_segment", &label_and_segment, py::arg("traj"), py::arg("model"));

    // evaluation
    py::class_<MatchScore>(m, "MatchScore")
        .def_readonly("precision", &MatchScore::precision)
        .def_readonly("recall", &MatchScore::recall)
        .def_readonly("f1", &MatchScore::f1)
        .def_readonly("matched", &MatchScore::matched);

    py::class_<ChannelDeviation>(m, "ChannelDeviation")
        .def_readonly("d_pos", &ChannelDeviation::d_pos)
        .def_readonly("d_vel", &ChannelDeviation::d_vel)
        .def_readonly("rmse_pos", &ChannelDeviation::rmse_pos)
        .def_readonly("max_pos", &ChannelDeviation::max_pos)
        .def_readonly("rmse_vel", &ChannelDeviation::rmse_vel)
        .def_readonly("max_vel", &ChannelDeviation::max_vel);

    py::class_<DeviationReport>(m, "DeviationReport")
        .def_readonly("lateral", &DeviationReport::lateral)
        .def_readonly("longitudinal", &DeviationReport::longitudinal);

    m.def("deviation_report", &deviation_report, py::arg("demonstrated"), py::arg("learned"));
    m.def(
        "cut_f1",
        [](const std::vector<std::size_t>& predicted, const std::vector<std::size_t>& truth,
           std::size_t tol) { return cut_f1(predicted, truth, tol); },
        py::arg("predicted"), py::arg("truth"), py::arg("tol") = 3);

    // synthetic-gen
    py::class_<PrototypeSpec>(m, "PrototypeSpec")
        .def(py::init<>())
        .def_readwrite("name", &PrototypeSpec::name)
        .def_readwrite("params", &PrototypeSpec::params)
        .def_readwrite("g_theta_lo", &PrototypeSpec::g_theta_lo)
        .def_readwrite("g_theta_hi", &PrototypeSpec::g_theta_hi)
        .def_readwrite("g_v_lo", &PrototypeSpec::g_v_lo)
        .def_readwrite("g_v_hi", &PrototypeSpec::g_v_hi)
        .def_readwrite("duration_lo", &PrototypeSpec::duration_lo)
        .def_readwrite("duration_hi", &PrototypeSpec::duration_hi)
        .def_readwrite("v_init_lo", &PrototypeSpec::v_init_lo)
        .def_readwrite("v_init_hi", &PrototypeSpec::v_init_hi);

    py::class_<ScenarioSpec>(m, "ScenarioSpec")
        .def(py::init<>())
        .def_readwrite("prototypes", &ScenarioSpec::prototypes)
        .def_readwrite("n_trajectories", &ScenarioSpec::n_trajectories)
        .def_readwrite("primitives_per_traj", &ScenarioSpec::primitives_per_traj)
        .def_readwrite("dt", &ScenarioSpec::dt)
        .def_readwrite("noise_deg", &ScenarioSpec::noise_deg)
        .def_readwrite("noise_speed", &ScenarioSpec::noise_speed)
        .def_readwrite("wiggle_rate", &ScenarioSpec::wiggle_rate)
        .def_readwrite("wiggle_amplitude", &ScenarioSpec::wiggle_amplitude)
        .def_readwrite("seed", &ScenarioSpec::seed);

    py::class_<SyntheticTrajectory>(m, "SyntheticTrajectory")
        .def_readonly("traj", &SyntheticTrajectory::traj)
        .def_readonly("true_cuts", &SyntheticTrajectory::true_cuts)
        .def_readonly("prototype_ids", &SyntheticTrajectory::prototype_ids);

    m.def("default_prototypes", &default_prototypes, py::arg("cfg"));
    m.def("generate", &generate, py::arg("spec"), py::arg("cfg"));
}

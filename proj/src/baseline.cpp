#include "mpseg/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "kmeanspp.hpp"
#include "mpseg/errors.hpp"
#include "mpseg/mathutil.hpp"

namespace mpseg {

namespace {

constexpr double kLog2Pi = 1.8378770664093454;

/// Clamp the eigenvalues of a symmetric 2x2 matrix from below.
std::array<double, 4> clamp_eigenvalues(const std::array<double, 4>& cov, double floor) {
    const double a = cov[0], b = 0.5 * (cov[1] + cov[2]), d = cov[3];
    const double m = 0.5 * (a + d);
    const double disc = std::sqrt(std::max(0.0, 0.25 * (a - d) * (a - d) + b * b));
    double l1 = m + disc, l2 = m - disc;
    if (l1 >= floor && l2 >= floor) return {a, b, b, d};
    l1 = std::max(l1, floor);
    l2 = std::max(l2, floor);
    // Eigenvector for l1; degenerate case falls back to the axes.
    double vx = b, vy = l1 - a;
    const double norm = std::hypot(vx, vy);
    if (norm < 1e-300) {
        vx = 1.0;
        vy = 0.0;
    } else {
        vx /= norm;
        vy /= norm;
    }
    const double ux = -vy, uy = vx;
    return {l1 * vx * vx + l2 * ux * ux, l1 * vx * vy + l2 * ux * uy,
            l1 * vx * vy + l2 * ux * uy, l1 * vy * vy + l2 * uy * uy};
}

double log_density2(const Gaussian2& g, double x0, double x1) {
    const double a = g.cov[0], b = g.cov[1], d = g.cov[3];
    const double det = a * d - b * b;
    const double dx0 = x0 - g.mean[0], dx1 = x1 - g.mean[1];
    const double quad = (d * dx0 * dx0 - 2.0 * b * dx0 * dx1 + a * dx1 * dx1) / det;
    return -0.5 * (2.0 * kLog2Pi + std::log(det) + quad);
}

struct Point2 {
    double x0, x1;
};

std::vector<Point2> collect_points(std::span<const Trajectory> trajs, bool standardize,
                                   std::array<double, 2>& mean, std::array<double, 2>& scale) {
    std::vector<Point2> pts;
    for (const auto& t : trajs) {
        for (const auto& p : t.points) pts.push_back({p.dtheta, p.v});
    }
    mean = {0.0, 0.0};
    scale = {1.0, 1.0};
    if (standardize && !pts.empty()) {
        for (const auto& p : pts) {
            mean[0] += p.x0;
            mean[1] += p.x1;
        }
        mean[0] /= static_cast<double>(pts.size());
        mean[1] /= static_cast<double>(pts.size());
        double v0 = 0.0, v1 = 0.0;
        for (const auto& p : pts) {
            v0 += (p.x0 - mean[0]) * (p.x0 - mean[0]);
            v1 += (p.x1 - mean[1]) * (p.x1 - mean[1]);
        }
        scale[0] = std::max(1e-9, std::sqrt(v0 / static_cast<double>(pts.size())));
        scale[1] = std::max(1e-9, std::sqrt(v1 / static_cast<double>(pts.size())));
        for (auto& p : pts) {
            p.x0 = (p.x0 - mean[0]) / scale[0];
            p.x1 = (p.x1 - mean[1]) / scale[1];
        }
    }
    return pts;
}

}  // namespace

PointwiseGmm fit_pointwise_gmm(std::span<const Trajectory> trajs, std::size_t n_components,
                               std::size_t max_iter, double tol, std::uint64_t seed,
                               bool standardize) {
    if (n_components < 1) throw ComputeError("need at least one component");

    PointwiseGmm model;
    model.standardized = standardize;
    auto pts = collect_points(trajs, standardize, model.feat_mean, model.feat_scale);
    const std::size_t n = pts.size();
    if (n < 10 * n_components) {
        throw ComputeError("too few points for the requested component count");
    }

    std::vector<std::vector<double>> rows(n, std::vector<double>(2));
    for (std::size_t i = 0; i < n; ++i) rows[i] = {pts[i].x0, pts[i].x1};
    std::uint64_t seed_state = seed;
    std::mt19937_64 rng(splitmix64(seed_state));
    const auto seeds = detail::kmeanspp_indices(rows, n_components, rng);

    // Shared initial covariance from the pooled moments.
    std::array<double, 4> pooled{0.0, 0.0, 0.0, 0.0};
    std::array<double, 2> pooled_mean{0.0, 0.0};
    for (const auto& p : pts) {
        pooled_mean[0] += p.x0;
        pooled_mean[1] += p.x1;
    }
    pooled_mean[0] /= static_cast<double>(n);
    pooled_mean[1] /= static_cast<double>(n);
    for (const auto& p : pts) {
        const double d0 = p.x0 - pooled_mean[0], d1 = p.x1 - pooled_mean[1];
        pooled[0] += d0 * d0;
        pooled[1] += d0 * d1;
        pooled[3] += d1 * d1;
    }
    for (auto& c : pooled) c /= static_cast<double>(n);
    pooled[2] = pooled[1];
    pooled = clamp_eigenvalues(pooled, kCovEigFloor);

    model.components.resize(n_components);
    model.weights.assign(n_components, 1.0 / static_cast<double>(n_components));
    for (std::size_t m = 0; m < n_components; ++m) {
        model.components[m].mean = {pts[seeds[m]].x0, pts[seeds[m]].x1};
        model.components[m].cov = pooled;
    }

    std::vector<double> resp(n * n_components);
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        // E-step.
        double ll = 0.0;
        std::vector<double> point_ll(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> logs(n_components);
            for (std::size_t m = 0; m < n_components; ++m) {
                logs[m] = std::log(model.weights[m]) +
                          log_density2(model.components[m], pts[i].x0, pts[i].x1);
            }
            const double tot = log_sum_exp(logs);
            point_ll[i] = tot;
            ll += tot;
            for (std::size_t m = 0; m < n_components; ++m) {
                resp[i * n_components + m] = std::exp(logs[m] - tot);
            }
        }
        model.loglik_history.push_back(ll);

        // M-step.
        for (std::size_t m = 0; m < n_components; ++m) {
            double wm = 0.0;
            std::array<double, 2> mu{0.0, 0.0};
            for (std::size_t i = 0; i < n; ++i) {
                const double w = resp[i * n_components + m];
                wm += w;
                mu[0] += w * pts[i].x0;
                mu[1] += w * pts[i].x1;
            }
            if (wm < 1e-8) {
                // Reseed a starved component from the worst-explained point.
                const std::size_t worst = static_cast<std::size_t>(
                    std::min_element(point_ll.begin(), point_ll.end()) - point_ll.begin());
                model.components[m].mean = {pts[worst].x0, pts[worst].x1};
                model.components[m].cov = pooled;
                model.weights[m] = 1.0 / static_cast<double>(n);
                model.events.push_back("component " + std::to_string(m) +
                                       " reseeded from point " + std::to_string(worst));
                continue;
            }
            mu[0] /= wm;
            mu[1] /= wm;
            std::array<double, 4> cov{0.0, 0.0, 0.0, 0.0};
            for (std::size_t i = 0; i < n; ++i) {
                const double w = resp[i * n_components + m];
                const double d0 = pts[i].x0 - mu[0], d1 = pts[i].x1 - mu[1];
                cov[0] += w * d0 * d0;
                cov[1] += w * d0 * d1;
                cov[3] += w * d1 * d1;
            }
            for (auto& c : cov) c /= wm;
            cov[2] = cov[1];
            model.components[m].mean = mu;
            model.components[m].cov = clamp_eigenvalues(cov, kCovEigFloor);
            model.weights[m] = wm / static_cast<double>(n);
        }
        double sum_w = 0.0;
        for (double w : model.weights) sum_w += w;
        for (double& w : model.weights) w /= sum_w;

        if (iter > 0 && ll - prev < tol * std::max(1.0, std::abs(prev))) break;
        prev = ll;
    }
    return model;
}

std::vector<double> pointwise_responsibilities(const PointwiseGmm& model, double dtheta,
                                               double v) {
    double x0 = dtheta, x1 = v;
    if (model.standardized) {
        x0 = (x0 - model.feat_mean[0]) / model.feat_scale[0];
        x1 = (x1 - model.feat_mean[1]) / model.feat_scale[1];
    }
    std::vector<double> logs(model.size());
    for (std::size_t m = 0; m < model.size(); ++m) {
        logs[m] = std::log(model.weights[m]) + log_density2(model.components[m], x0, x1);
    }
    const double tot = log_sum_exp(logs);
    std::vector<double> r(model.size());
    for (std::size_t m = 0; m < model.size(); ++m) r[m] = std::exp(logs[m] - tot);
    return r;
}

BaselineSegmentation label_and_segment(const Trajectory& traj, const PointwiseGmm& model) {
    if (model.components.empty()) throw ComputeError("model not fitted");

    BaselineSegmentation out;
    out.labels.reserve(traj.size());
    for (const auto& p : traj.points) {
        const auto r = pointwise_responsibilities(model, p.dtheta, p.v);
        out.labels.push_back(static_cast<std::size_t>(
            std::max_element(r.begin(), r.end()) - r.begin()));
    }

    std::size_t start = 0;
    for (std::size_t i = 1; i <= out.labels.size(); ++i) {
        if (i == out.labels.size() || out.labels[i] != out.labels[start]) {
            FinalSegment seg;
            seg.start = start;
            seg.end = i - 1;
            seg.component = out.labels[start];
            seg.alpha = 1.0;
            out.segments.push_back(seg);
            start = i;
        }
    }
    return out;
}

}  // namespace mpseg

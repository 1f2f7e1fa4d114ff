#include "mpseg/library.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "kmeanspp.hpp"
#include "mpseg/errors.hpp"
#include "mpseg/mathutil.hpp"

namespace mpseg {

std::vector<double> Standardization::apply(std::span<const double> raw) const {
    if (raw.size() != mean.size()) {
        throw ComputeError("feature dimension mismatch in standardization");
    }
    std::vector<double> out(raw.size());
    for (std::size_t d = 0; d < raw.size(); ++d) {
        out[d] = (raw[d] - mean[d]) / scale[d];
    }
    return out;
}

std::vector<double> Standardization::invert(std::span<const double> std_values) const {
    if (std_values.size() != mean.size()) {
        throw ComputeError("feature dimension mismatch in standardization");
    }
    std::vector<double> out(std_values.size());
    for (std::size_t d = 0; d < std_values.size(); ++d) {
        out[d] = std_values[d] * scale[d] + mean[d];
    }
    return out;
}

Standardization Standardization::identity(std::size_t dim) {
    Standardization s;
    s.mean.assign(dim, 0.0);
    s.scale.assign(dim, 1.0);
    return s;
}

Standardization Standardization::fit(std::span<const std::vector<double>> rows) {
    if (rows.empty()) {
        throw ComputeError("cannot fit standardization on an empty feature set");
    }
    const std::size_t dim = rows.front().size();
    for (const auto& r : rows) {
        if (r.size() != dim) throw ComputeError("inconsistent feature dimensions");
    }
    // Median / MAD statistics. Weight features of near-cancelling segments
    // blow up by orders of magnitude; moment statistics would let a single
    // such outlier flatten the scale of a whole dimension.
    Standardization s;
    s.mean.assign(dim, 0.0);
    s.scale.assign(dim, 0.0);
    std::vector<double> column(rows.size());
    auto median_of = [](std::vector<double>& xs) {
        const std::size_t mid = xs.size() / 2;
        std::nth_element(xs.begin(), xs.begin() + static_cast<long>(mid), xs.end());
        double hi = xs[mid];
        if (xs.size() % 2 == 0) {
            std::nth_element(xs.begin(), xs.begin() + static_cast<long>(mid) - 1,
                             xs.begin() + static_cast<long>(mid));
            return 0.5 * (hi + xs[mid - 1]);
        }
        return hi;
    };
    for (std::size_t d = 0; d < dim; ++d) {
        for (std::size_t i = 0; i < rows.size(); ++i) column[i] = rows[i][d];
        s.mean[d] = median_of(column);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            column[i] = std::abs(rows[i][d] - s.mean[d]);
        }
        s.scale[d] = 1.4826 * median_of(column);  // consistent with sigma under normality
        if (s.scale[d] < 1e-9) s.scale[d] = 1.0;  // near-constant dimension
    }
    return s;
}

void PrimitiveLibrary::validate() const {
    if (components.empty()) {
        throw ComputeError("library must contain at least one component");
    }
    double total = 0.0;
    for (const auto& c : components) {
        if (c.mean.size() != dim() || c.var.size() != dim()) {
            throw ComputeError("component dimension mismatch");
        }
        if (c.lambda < 0.0 || c.lambda > 1.0) {
            throw ComputeError("mixture weight out of [0, 1]");
        }
        for (double v : c.var) {
            if (!(v >= var_floor - 1e-15)) {
                throw ComputeError("component variance below floor");
            }
        }
        total += c.lambda;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ComputeError("mixture weights must sum to 1");
    }
}

std::vector<double> raw_feature(const DmpParams& params, const DmpAdjustment& adj) {
    std::vector<double> u;
    u.reserve(2 * params.omega_theta.w.size() + 3);
    u.push_back(params.v_init);
    u.insert(u.end(), params.omega_theta.w.begin(), params.omega_theta.w.end());
    u.insert(u.end(), params.omega_v.w.begin(), params.omega_v.w.end());
    u.push_back(adj.g_theta);
    u.push_back(adj.g_v);
    return u;
}

SegmentFeature featurize(const DmpParams& params, const DmpAdjustment& adj,
                         const PrimitiveLibrary& lib) {
    if (params.n_basis() != lib.cfg.n_basis) {
        throw ComputeError("primitive basis count does not match the library");
    }
    return SegmentFeature{lib.standardization.apply(raw_feature(params, adj))};
}

double component_loglik(const SegmentFeature& u, const LibraryComponent& comp) {
    if (u.dim() != comp.mean.size()) {
        throw ComputeError("feature dimension mismatch in component_loglik");
    }
    constexpr double log2pi = 1.8378770664093454;  // log(2*pi)
    double ll = 0.0;
    for (std::size_t d = 0; d < u.dim(); ++d) {
        const double diff = u.u[d] - comp.mean[d];
        ll += -0.5 * (log2pi + std::log(comp.var[d]) + diff * diff / comp.var[d]);
    }
    return ll;
}

namespace {

std::vector<double> weighted_component_logs(const SegmentFeature& u, double power,
                                            const PrimitiveLibrary& lib) {
    std::vector<double> logs(lib.size());
    for (std::size_t m = 0; m < lib.size(); ++m) {
        const double lw = lib.components[m].lambda > 0.0
                              ? std::log(lib.components[m].lambda)
                              : -std::numeric_limits<double>::infinity();
        logs[m] = lw + power * component_loglik(u, lib.components[m]);
    }
    return logs;
}

}  // namespace

double mixture_loglik(const SegmentFeature& u, const PrimitiveLibrary& lib) {
    if (lib.components.empty()) {
        throw ComputeError("mixture_loglik on an empty library");
    }
    const auto logs = weighted_component_logs(u, 1.0, lib);
    return log_sum_exp(logs);
}

double segment_loglik(const SegmentFeature& u, std::size_t span,
                      const PrimitiveLibrary& lib) {
    if (lib.components.empty()) {
        throw ComputeError("segment_loglik on an empty library");
    }
    const auto logs = weighted_component_logs(u, static_cast<double>(span), lib);
    return log_sum_exp(logs);
}

std::vector<double> responsibilities(const SegmentFeature& u, const PrimitiveLibrary& lib) {
    return segment_responsibilities(u, 1, lib);
}

std::vector<double> segment_responsibilities(const SegmentFeature& u, std::size_t span,
                                             const PrimitiveLibrary& lib) {
    const auto logs = weighted_component_logs(u, static_cast<double>(span), lib);
    const double total = log_sum_exp(logs);
    std::vector<double> r(lib.size());
    for (std::size_t m = 0; m < lib.size(); ++m) r[m] = std::exp(logs[m] - total);
    return r;
}

DmpParams extract_primitive(const LibraryComponent& comp, const PrimitiveLibrary& lib) {
    const auto raw = lib.standardization.invert(comp.mean);
    const auto n = static_cast<std::size_t>(lib.cfg.n_basis);
    if (raw.size() != 2 * n + 3) {
        throw ComputeError("component mean does not match the feature layout");
    }
    DmpParams params;
    params.v_init = raw[0];
    params.omega_theta.channel = Channel::lateral;
    params.omega_theta.w.assign(raw.begin() + 1, raw.begin() + 1 + static_cast<long>(n));
    params.omega_v.channel = Channel::longitudinal;
    params.omega_v.w.assign(raw.begin() + 1 + static_cast<long>(n),
                            raw.begin() + 1 + 2 * static_cast<long>(n));
    return params;
}

std::pair<double, double> extract_goal(const LibraryComponent& comp,
                                       const PrimitiveLibrary& lib) {
    const auto raw = lib.standardization.invert(comp.mean);
    return {raw[raw.size() - 2], raw[raw.size() - 1]};
}

PlainGmmFit fit_plain_gmm(std::span<const std::vector<double>> rows, std::size_t n_components,
                          std::size_t max_iter, double tol, std::uint64_t seed,
                          double var_floor) {
    if (rows.empty()) throw ComputeError("cannot fit a GMM on no features");
    const std::size_t n = rows.size();
    const std::size_t dim = rows.front().size();
    const std::size_t m_eff = std::min(n_components, n);

    std::uint64_t seed_state = seed;
    std::mt19937_64 rng(splitmix64(seed_state));
    const auto seeds = detail::kmeanspp_indices(rows, m_eff, rng);

    PlainGmmFit fit;
    fit.components.resize(m_eff);
    for (std::size_t m = 0; m < m_eff; ++m) {
        fit.components[m].lambda = 1.0 / static_cast<double>(m_eff);
        fit.components[m].mean = rows[seeds[m]];
        fit.components[m].var.assign(dim, std::max(1.0, var_floor));
    }

    // Standard diagonal-covariance EM on equally weighted rows.
    PrimitiveLibrary scratch;
    scratch.standardization = Standardization::identity(dim);
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        scratch.components = fit.components;
        double ll = 0.0;
        std::vector<std::vector<double>> resp(n);
        for (std::size_t i = 0; i < n; ++i) {
            SegmentFeature u{rows[i]};
            resp[i] = responsibilities(u, scratch);
            ll += mixture_loglik(u, scratch);
        }
        fit.loglik = ll;
        fit.loglik_history.push_back(ll);

        for (std::size_t m = 0; m < m_eff; ++m) {
            double wm = 0.0;
            std::vector<double> mean(dim, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                wm += resp[i][m];
                for (std::size_t d = 0; d < dim; ++d) mean[d] += resp[i][m] * rows[i][d];
            }
            if (wm < 1e-12) continue;  // leave a starved component untouched
            for (std::size_t d = 0; d < dim; ++d) mean[d] /= wm;
            std::vector<double> var(dim, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t d = 0; d < dim; ++d) {
                    const double diff = rows[i][d] - mean[d];
                    var[d] += resp[i][m] * diff * diff;
                }
            }
            for (std::size_t d = 0; d < dim; ++d) {
                var[d] = std::max(var[d] / wm, var_floor);
            }
            fit.components[m].lambda = wm / static_cast<double>(n);
            fit.components[m].mean = std::move(mean);
            fit.components[m].var = std::move(var);
        }
        double lam = 0.0;
        for (auto& c : fit.components) lam += c.lambda;
        for (auto& c : fit.components) c.lambda /= lam;

        if (iter > 0 && ll - prev < tol * std::max(1.0, std::abs(prev))) break;
        prev = ll;
    }
    return fit;
}

std::size_t select_components_bic(std::span<const std::vector<double>> rows,
                                  std::size_t m_min, std::size_t m_max,
                                  std::uint64_t seed) {
    if (rows.empty()) throw ComputeError("BIC selection needs features");
    const double n = static_cast<double>(rows.size());
    const double dim = static_cast<double>(rows.front().size());
    double best_bic = std::numeric_limits<double>::infinity();
    std::size_t best_m = std::max<std::size_t>(1, m_min);
    for (std::size_t m = std::max<std::size_t>(1, m_min); m <= m_max; ++m) {
        const auto fit = fit_plain_gmm(rows, m, 200, 1e-8, seed + m);
        const double m_eff = static_cast<double>(fit.components.size());
        const double k = m_eff * (2.0 * dim + 1.0) - 1.0;
        const double bic = -2.0 * fit.loglik + k * std::log(n);
        if (bic < best_bic) {
            best_bic = bic;
            best_m = fit.components.size();
        }
    }
    return best_m;
}

}  // namespace mpseg

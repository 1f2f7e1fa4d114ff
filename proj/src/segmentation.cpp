#include "mpseg/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>

#include "kmeanspp.hpp"
#include "mpseg/errors.hpp"
#include "mpseg/mathutil.hpp"

namespace mpseg {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::vector<CandidateSegment> enumerate_segments(const Trajectory& traj,
                                                 const CutPointSet& cuts,
                                                 std::size_t k_max, const DmpConfig& cfg,
                                                 int smooth_window,
                                                 std::vector<std::string>* events) {
    cuts.validate(traj.size());
    if (k_max < 1) throw ComputeError("k_max must be >= 1");

    std::vector<CandidateSegment> out;
    const std::size_t n_cuts = cuts.size();
    for (std::size_t i = 0; i + 1 < n_cuts; ++i) {
        for (std::size_t j = i + 1; j < n_cuts && j - i <= k_max; ++j) {
            CandidateSegment cand;
            cand.i = i;
            cand.j = j;
            cand.start = cuts.indices[i];
            cand.end = cuts.indices[j];
            try {
                auto [params, adj] = fit_segment(traj, {cand.start, cand.end}, cfg,
                                                 smooth_window);
                cand.params = std::move(params);
                cand.adj = adj;
                cand.raw_u = raw_feature(cand.params, cand.adj);
            } catch (const std::exception& e) {
                if (events) {
                    events->push_back("candidate (" + std::to_string(cand.start) + "," +
                                      std::to_string(cand.end) + ") dropped: " + e.what());
                }
                continue;
            }
            out.push_back(std::move(cand));
        }
    }
    return out;
}

double segment_prior(std::size_t skipped, double p_c) {
    if (!(p_c > 0.0 && p_c < 1.0)) {
        throw ComputeError("p_c must lie in (0, 1)");
    }
    return std::pow(1.0 - p_c, static_cast<double>(skipped)) * p_c;
}

LatticePosterior lattice_forward_backward(std::size_t n_nodes,
                                          std::span<const LatticeEdge> edges) {
    if (n_nodes < 2) throw ComputeError("lattice needs at least two nodes");

    std::vector<std::vector<std::size_t>> incoming(n_nodes), outgoing(n_nodes);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (edges[e].j >= n_nodes || edges[e].i >= edges[e].j) {
            throw ComputeError("invalid lattice edge");
        }
        incoming[edges[e].j].push_back(e);
        outgoing[edges[e].i].push_back(e);
    }

    std::vector<double> log_f(n_nodes, kNegInf), log_b(n_nodes, kNegInf);
    log_f[0] = 0.0;
    for (std::size_t j = 1; j < n_nodes; ++j) {
        double acc = kNegInf;
        for (std::size_t e : incoming[j]) {
            acc = log_add_exp(acc, log_f[edges[e].i] + edges[e].logw);
        }
        log_f[j] = acc;
    }
    log_b[n_nodes - 1] = 0.0;
    for (std::size_t i = n_nodes - 1; i-- > 0;) {
        double acc = kNegInf;
        for (std::size_t e : outgoing[i]) {
            acc = log_add_exp(acc, edges[e].logw + log_b[edges[e].j]);
        }
        log_b[i] = acc;
    }

    if (log_f[n_nodes - 1] == kNegInf) {
        throw ComputeError("no segmentation path through the cut lattice");
    }

    LatticePosterior post;
    post.log_evidence = log_f[n_nodes - 1];
    post.alpha.resize(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const double la = log_f[edges[e].i] + edges[e].logw + log_b[edges[e].j] -
                          post.log_evidence;
        post.alpha[e] = std::clamp(std::exp(la), 0.0, 1.0);
    }
    return post;
}

LatticePath lattice_viterbi(std::size_t n_nodes, std::span<const LatticeEdge> edges) {
    if (n_nodes < 2) throw ComputeError("lattice needs at least two nodes");

    std::vector<std::vector<std::size_t>> incoming(n_nodes);
    for (std::size_t e = 0; e < edges.size(); ++e) incoming[edges[e].j].push_back(e);

    std::vector<double> best(n_nodes, kNegInf);
    std::vector<std::size_t> nseg(n_nodes, 0), back(n_nodes, edges.size());
    best[0] = 0.0;
    for (std::size_t j = 1; j < n_nodes; ++j) {
        for (std::size_t e : incoming[j]) {
            const std::size_t i = edges[e].i;
            if (best[i] == kNegInf) continue;
            const double score = best[i] + edges[e].logw;
            const std::size_t segs = nseg[i] + 1;
            if (score > best[j] || (score == best[j] && segs < nseg[j])) {
                best[j] = score;
                nseg[j] = segs;
                back[j] = e;
            }
        }
    }
    if (best[n_nodes - 1] == kNegInf) {
        throw ComputeError("no segmentation path through the cut lattice");
    }

    LatticePath path;
    path.logw = best[n_nodes - 1];
    std::size_t node = n_nodes - 1;
    while (node != 0) {
        const std::size_t e = back[node];
        path.edge_ids.push_back(e);
        node = edges[e].i;
    }
    std::reverse(path.edge_ids.begin(), path.edge_ids.end());
    return path;
}

namespace {

std::vector<LatticeEdge> build_edges(std::span<const CandidateSegment> candidates,
                                     const PrimitiveLibrary& lib, double p_c) {
    std::vector<LatticeEdge> edges(candidates.size());
    for (std::size_t e = 0; e < candidates.size(); ++e) {
        const auto& c = candidates[e];
        edges[e] = LatticeEdge{
            c.i, c.j,
            std::log(segment_prior(c.skipped(), p_c)) +
                segment_loglik(c.u, c.j - c.i, lib)};
    }
    return edges;
}

std::size_t lattice_node_count(std::span<const CandidateSegment> candidates) {
    std::size_t n = 0;
    for (const auto& c : candidates) n = std::max(n, c.j);
    return n + 1;
}

}  // namespace

EStepResult e_step(std::span<const CandidateSegment> candidates,
                   const PrimitiveLibrary& lib, double p_c) {
    if (candidates.empty()) throw ComputeError("e_step needs candidates");
    const auto edges = build_edges(candidates, lib, p_c);
    auto post = lattice_forward_backward(lattice_node_count(candidates), edges);
    EStepResult res;
    res.posterior.alpha = std::move(post.alpha);
    res.log_evidence = post.log_evidence + std::log(p_c);  // global prior factor
    return res;
}

PrimitiveLibrary m_step(std::span<const CandidateSegment> candidates,
                        std::span<const double> alpha, const PrimitiveLibrary& lib,
                        std::vector<std::string>* events) {
    if (candidates.size() != alpha.size()) {
        throw ComputeError("posterior size does not match candidate count");
    }
    double total_alpha = 0.0;
    for (double a : alpha) total_alpha += a;
    if (!(total_alpha > 0.0)) {
        throw ComputeError("m_step needs at least one positive posterior weight");
    }

    const std::size_t dim = lib.dim();
    const std::size_t n_comp = lib.size();
    std::vector<double> weight(n_comp, 0.0);
    std::vector<std::vector<double>> mean(n_comp, std::vector<double>(dim, 0.0));

    // Component posteriors under the span-powered emission; feature moments
    // count one pseudo-observation per covered cut interval.
    std::vector<std::vector<double>> resp(candidates.size());
    std::vector<double> lambda_w(n_comp, 0.0);
    double lambda_total = 0.0;
    for (std::size_t s = 0; s < candidates.size(); ++s) {
        const auto span = candidates[s].j - candidates[s].i;
        resp[s] = segment_responsibilities(candidates[s].u, span, lib);
        for (std::size_t m = 0; m < n_comp; ++m) {
            lambda_w[m] += alpha[s] * resp[s][m];
            const double w = alpha[s] * static_cast<double>(span) * resp[s][m];
            weight[m] += w;
            for (std::size_t d = 0; d < dim; ++d) {
                mean[m][d] += w * candidates[s].u.u[d];
            }
        }
        lambda_total += alpha[s];
    }

    PrimitiveLibrary next;
    next.cfg = lib.cfg;
    next.standardization = lib.standardization;
    next.var_floor = lib.var_floor;
    for (std::size_t m = 0; m < n_comp; ++m) {
        if (weight[m] < 1e-8) {
            if (events) {
                events->push_back("component " + std::to_string(m) +
                                  " collapsed (weight " + std::to_string(weight[m]) +
                                  "); removed");
            }
            continue;
        }
        LibraryComponent comp;
        comp.lambda = lambda_w[m] / lambda_total;
        comp.mean.resize(dim);
        for (std::size_t d = 0; d < dim; ++d) comp.mean[d] = mean[m][d] / weight[m];
        comp.var.assign(dim, 0.0);
        for (std::size_t s = 0; s < candidates.size(); ++s) {
            const double w = alpha[s] *
                             static_cast<double>(candidates[s].j - candidates[s].i) *
                             resp[s][m];
            if (w == 0.0) continue;
            for (std::size_t d = 0; d < dim; ++d) {
                const double diff = candidates[s].u.u[d] - comp.mean[d];
                comp.var[d] += w * diff * diff;
            }
        }
        for (std::size_t d = 0; d < dim; ++d) {
            comp.var[d] = std::max(comp.var[d] / weight[m], lib.var_floor);
        }
        next.components.push_back(std::move(comp));
    }
    if (next.components.empty()) {
        throw ComputeError("all mixture components collapsed");
    }
    double lam = 0.0;
    for (const auto& c : next.components) lam += c.lambda;
    for (auto& c : next.components) c.lambda /= lam;
    return next;
}

SegmentationResult viterbi_segmentation(std::span<const CandidateSegment> candidates,
                                        const PrimitiveLibrary& lib, double p_c,
                                        const SegmentPosterior& posterior,
                                        const CutPointSet& cuts) {
    const auto edges = build_edges(candidates, lib, p_c);
    const auto path = lattice_viterbi(cuts.size(), edges);

    SegmentationResult result;
    result.initial_cuts = cuts;
    result.active_cuts.push_back(cuts.indices.front());
    for (std::size_t e : path.edge_ids) {
        const auto& cand = candidates[e];
        FinalSegment seg;
        seg.start = cand.start;
        seg.end = cand.end;
        const auto r = segment_responsibilities(cand.u, cand.j - cand.i, lib);
        seg.component = static_cast<std::size_t>(
            std::max_element(r.begin(), r.end()) - r.begin());
        seg.alpha = posterior.alpha.empty() ? 1.0 : posterior.alpha[e];
        result.segments.push_back(seg);
        result.active_cuts.push_back(cand.end);
    }
    return result;
}

namespace {

/// Density-peak seeding: rank points by (local density) x (distance to the
/// nearest denser point). Recurring segment shapes form tight clusters whose
/// densest member scores high on both, while split halves and composite
/// spans scatter; random seeding tends to lock the EM into whatever the
/// first components happened to grab.
std::vector<std::size_t> density_peak_indices(std::span<const std::vector<double>> rows,
                                              std::size_t m) {
    const std::size_t n = rows.size();
    std::vector<double> dist(n * n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            double s = 0.0;
            for (std::size_t d = 0; d < rows[a].size(); ++d) {
                const double diff = rows[a][d] - rows[b][d];
                s += diff * diff;
            }
            dist[a * n + b] = dist[b * n + a] = std::sqrt(s);
        }
    }
    const std::size_t k = std::min<std::size_t>(4, n - 1);
    std::vector<double> rho(n), delta(n, 0.0);
    std::vector<double> row(n);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) row[b] = dist[a * n + b];
        std::nth_element(row.begin(), row.begin() + static_cast<long>(k), row.end());
        rho[a] = 1.0 / (row[k] + 1e-12);
    }
    for (std::size_t a = 0; a < n; ++a) {
        double best = std::numeric_limits<double>::infinity();
        bool found = false;
        for (std::size_t b = 0; b < n; ++b) {
            if (rho[b] > rho[a] || (rho[b] == rho[a] && b < a)) {
                best = std::min(best, dist[a * n + b]);
                found = true;
            }
        }
        if (!found) {  // global density peak: reaches everything
            best = 0.0;
            for (std::size_t b = 0; b < n; ++b) best = std::max(best, dist[a * n + b]);
        }
        delta[a] = best;
    }
    std::vector<std::size_t> order(n);
    for (std::size_t a = 0; a < n; ++a) order[a] = a;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double sa = rho[a] * delta[a], sb = rho[b] * delta[b];
        return sa != sb ? sa > sb : a < b;
    });
    order.resize(std::min(m, n));
    return order;
}

/// Library seeding: standardization from all candidates, density-peak
/// centers over all candidate features, one plain EM pass.
PrimitiveLibrary init_library(std::span<const std::vector<CandidateSegment>> per_traj,
                              const DmpConfig& cfg, const EmOptions& options,
                              EmState& state) {
    std::vector<std::vector<double>> all_raw;
    for (const auto& cands : per_traj) {
        for (const auto& c : cands) all_raw.push_back(c.raw_u);
    }
    if (all_raw.empty()) {
        throw ComputeError("no candidate segments to initialize the library from");
    }

    PrimitiveLibrary lib;
    lib.cfg = cfg;
    lib.var_floor = options.var_floor;
    lib.standardization = Standardization::fit(all_raw);

    // Seed from every candidate span, not just the finest segments: the
    // finest features over-represent split halves, and a library seeded
    // only from them locks the EM into the initial segmentation.
    std::vector<std::vector<double>> all_std(all_raw.size());
    for (std::size_t i = 0; i < all_raw.size(); ++i) {
        all_std[i] = lib.standardization.apply(all_raw[i]);
    }

    std::size_t m = options.n_components;
    if (options.select_m_bic) {
        m = select_components_bic(all_std, options.m_min, options.m_max, options.seed);
        state.events.push_back("BIC selected " + std::to_string(m) + " components");
    }
    if (m > all_std.size()) {
        state.events.push_back("component count clamped to " +
                               std::to_string(all_std.size()) + " candidates");
        m = all_std.size();
    }

    const auto seeds = density_peak_indices(all_std, m);
    const std::size_t dim = all_std.front().size();
    lib.components.clear();
    for (std::size_t s : seeds) {
        LibraryComponent comp;
        comp.lambda = 1.0 / static_cast<double>(seeds.size());
        comp.mean = all_std[s];
        comp.var.assign(dim, std::max(1.0, options.var_floor));
        lib.components.push_back(std::move(comp));
    }
    return lib;
}

}  // namespace

EmRunResult run_em(std::span<const Trajectory> trajs, std::span<const CutPointSet> cuts,
                   const DmpConfig& cfg, const EmOptions& options) {
    if (trajs.empty() || trajs.size() != cuts.size()) {
        throw ComputeError("run_em needs one cut set per trajectory");
    }
    if (!(options.p_c > 0.0 && options.p_c < 1.0)) {
        throw ComputeError("p_c must lie in (0, 1)");
    }

    EmRunResult run;
    EmState& state = run.state;

    // Fit all candidates once; features are frozen for the whole run.
    std::vector<std::vector<CandidateSegment>> per_traj(trajs.size());
    auto fit_one = [&](std::size_t t) {
        std::vector<std::string> local_events;
        per_traj[t] = enumerate_segments(trajs[t], cuts[t], options.k_max, cfg,
                                         options.smooth_window, &local_events);
        return local_events;
    };
    if (options.jobs > 1) {
        std::vector<std::future<std::vector<std::string>>> futs;
        futs.reserve(trajs.size());
        for (std::size_t t = 0; t < trajs.size(); ++t) {
            futs.push_back(std::async(std::launch::async, fit_one, t));
        }
        for (auto& f : futs) {
            for (auto& ev : f.get()) state.events.push_back(std::move(ev));
        }
    } else {
        for (std::size_t t = 0; t < trajs.size(); ++t) {
            for (auto& ev : fit_one(t)) state.events.push_back(std::move(ev));
        }
    }

    PrimitiveLibrary lib = init_library(per_traj, cfg, options, state);
    for (auto& cands : per_traj) {
        for (auto& c : cands) c.u = SegmentFeature{lib.standardization.apply(c.raw_u)};
    }

    // Pooled candidate view for the M-step.
    std::vector<CandidateSegment> pooled;
    std::vector<std::size_t> offsets(trajs.size() + 1, 0);
    for (std::size_t t = 0; t < trajs.size(); ++t) {
        offsets[t + 1] = offsets[t] + per_traj[t].size();
        pooled.insert(pooled.end(), per_traj[t].begin(), per_traj[t].end());
    }

    std::vector<double> pooled_alpha(pooled.size(), 0.0);
    std::vector<SegmentPosterior> posteriors(trajs.size());
    double prev_evidence = kNegInf;
    for (std::size_t iter = 0;; ++iter) {
        double evidence = 0.0;
        auto estep_one = [&](std::size_t t) {
            return e_step(per_traj[t], lib, options.p_c);
        };
        std::vector<EStepResult> results(trajs.size());
        if (options.jobs > 1) {
            std::vector<std::future<EStepResult>> futs;
            futs.reserve(trajs.size());
            for (std::size_t t = 0; t < trajs.size(); ++t) {
                futs.push_back(std::async(std::launch::async, estep_one, t));
            }
            for (std::size_t t = 0; t < trajs.size(); ++t) results[t] = futs[t].get();
        } else {
            for (std::size_t t = 0; t < trajs.size(); ++t) results[t] = estep_one(t);
        }
        for (std::size_t t = 0; t < trajs.size(); ++t) {
            evidence += results[t].log_evidence;
            posteriors[t] = std::move(results[t].posterior);
            std::copy(posteriors[t].alpha.begin(), posteriors[t].alpha.end(),
                      pooled_alpha.begin() + static_cast<long>(offsets[t]));
        }

        state.evidence.push_back(evidence);
        state.iterations = iter + 1;
        if (iter > 0 &&
            evidence - prev_evidence < options.tol * std::max(1.0, std::abs(prev_evidence))) {
            state.converged = true;
            break;
        }
        if (iter + 1 >= options.max_iter) {
            state.events.push_back("EM stopped at max_iter without convergence");
            break;
        }
        prev_evidence = evidence;
        lib = m_step(pooled, pooled_alpha, lib, &state.events);
    }

    run.library = lib;
    run.per_trajectory.reserve(trajs.size());
    for (std::size_t t = 0; t < trajs.size(); ++t) {
        run.per_trajectory.push_back(
            viterbi_segmentation(per_traj[t], lib, options.p_c, posteriors[t], cuts[t]));
    }
    return run;
}

}  // namespace mpseg

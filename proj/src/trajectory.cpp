#include "bifurc/trajectory.hpp"

#include "bifurc/assignment.hpp"
#include "bifurc/charpoly.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace bifurc {

namespace {

std::vector<Complex> sorted_eigenvalues(const Mat& gamma) {
    const Spectrum spec = eigen_decompose(gamma);
    return spec.eigenvalues;
}

// permutation[i] = index into `next` matched to previous value i
std::vector<int> match_values(const std::vector<Complex>& prev, const std::vector<Complex>& next) {
    const int n = static_cast<int>(prev.size());
    std::vector<std::vector<double>> cost(static_cast<size_t>(n),
                                          std::vector<double>(static_cast<size_t>(n)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            cost[static_cast<size_t>(i)][static_cast<size_t>(j)] =
                std::abs(prev[static_cast<size_t>(i)] - next[static_cast<size_t>(j)]);
    return min_cost_assignment(cost);
}

double min_pairwise_gap(const std::vector<Complex>& vals) {
    double g = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < vals.size(); ++i)
        for (size_t j = i + 1; j < vals.size(); ++j) g = std::min(g, std::abs(vals[i] - vals[j]));
    return g;
}

struct FlowCache {
    const HamiltonianCurve* curve = nullptr;
    PropagateOptions opts;
    std::map<double, Mat> known;

    const Mat& at(double t) {
        auto it = known.find(t);
        if (it != known.end()) return it->second;
        // nearest known node
        auto ub = known.upper_bound(t);
        auto pick = known.begin();
        double best = std::numeric_limits<double>::infinity();
        if (ub != known.end() && std::abs(ub->first - t) < best) {
            best = std::abs(ub->first - t);
            pick = ub;
        }
        if (ub != known.begin()) {
            auto lb = std::prev(ub);
            if (std::abs(lb->first - t) < best) pick = lb;
        }
        Mat g = propagate_to(*curve, pick->second, pick->first, t, opts);
        return known.emplace(t, std::move(g)).first->second;
    }
};

}  // namespace

std::vector<Complex> EigenPathSet::values_at(int k) const {
    std::vector<Complex> out;
    out.reserve(paths.size());
    for (const auto& p : paths) out.push_back(p.samples.at(static_cast<size_t>(k)).value);
    return out;
}

namespace {

// Recursive matching across [t_a, t_b]; returns the permutation taking
// position i at t_a to its eigenvalue at t_b.
std::vector<int> match_step(FlowCache& cache, double t_a, double t_b,
                            const std::vector<Complex>& vals_a, const TrackOptions& opts,
                            int depth, bool* unresolved) {
    const std::vector<Complex> vals_b = sorted_eigenvalues(cache.at(t_b));
    std::vector<int> direct = match_values(vals_a, vals_b);
    double motion = 0.0;
    for (size_t i = 0; i < vals_a.size(); ++i)
        motion = std::max(motion,
                          std::abs(vals_a[i] - vals_b[static_cast<size_t>(direct[i])]));
    const double gap = min_pairwise_gap(vals_b);
    if (gap >= opts.gap_factor * motion || motion == 0.0) return direct;
    if (depth >= opts.max_bisect_depth) {
        *unresolved = true;
        return direct;
    }
    const double t_mid = 0.5 * (t_a + t_b);
    if (t_mid == t_a || t_mid == t_b) {
        *unresolved = true;
        return direct;
    }
    const std::vector<int> first = match_step(cache, t_a, t_mid, vals_a, opts, depth + 1, unresolved);
    std::vector<Complex> vals_mid_perm(vals_a.size());
    const std::vector<Complex> vals_mid = sorted_eigenvalues(cache.at(t_mid));
    for (size_t i = 0; i < vals_a.size(); ++i)
        vals_mid_perm[i] = vals_mid[static_cast<size_t>(first[i])];
    const std::vector<int> second =
        match_step(cache, t_mid, t_b, vals_mid_perm, opts, depth + 1, unresolved);
    std::vector<int> composed(vals_a.size());
    for (size_t i = 0; i < vals_a.size(); ++i) composed[i] = second[i];
    return composed;
}

}  // namespace

EigenPathSet track_spectrum(const HamiltonianCurve& curve, const SymplecticMatrix& gamma0,
                            const std::vector<double>& grid, const TrackOptions& opts) {
    if (grid.size() < 1) throw ContractError("track_spectrum: empty grid");
    FlowCache cache;
    cache.curve = &curve;
    cache.opts = opts.flow;
    cache.known.emplace(grid[0], gamma0.value);

    EigenPathSet out;
    out.times = grid;
    out.on_circle_tol = default_on_circle_tol(gamma0.value);
    out.match_tol = opts.cluster_tol;

    const int n = gamma0.dim();
    std::vector<Complex> current = sorted_eigenvalues(gamma0.value);
    out.paths.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) out.paths[static_cast<size_t>(i)].id = i;

    // annotate one node across all paths
    auto annotate = [&](size_t node_idx, double t, const std::vector<Complex>& vals) {
        const Mat& g = cache.at(t);
        const double ctol = (opts.cluster_tol > 0) ? opts.cluster_tol
                                                   : 1e-6 * std::max(1.0, g.norm());
        const Spectrum spec = eigen_decompose(g, ctol);
        std::vector<KreinSignature> sig(spec.clusters.size());
        std::vector<bool> have(spec.clusters.size(), false);
        for (int i = 0; i < n; ++i) {
            PathSample s;
            s.t = t;
            s.value = vals[static_cast<size_t>(i)];
            s.on_circle = on_unit_circle(s.value, out.on_circle_tol);
            const EigenCluster& cl = spec.nearest(s.value);
            s.cluster_size = cl.multiplicity;
            if (s.on_circle) {
                if (!have[static_cast<size_t>(cl.id)]) {
                    sig[static_cast<size_t>(cl.id)] = cluster_signature(g, spec, cl.id);
                    have[static_cast<size_t>(cl.id)] = true;
                }
                s.cluster_signature = sig[static_cast<size_t>(cl.id)];
            }
            out.paths[static_cast<size_t>(i)].samples.resize(out.times.size());
            out.paths[static_cast<size_t>(i)].samples[node_idx] = s;
        }
    };

    annotate(0, grid[0], current);
    for (size_t k = 1; k < grid.size(); ++k) {
        bool unresolved = false;
        const std::vector<int> perm =
            match_step(cache, grid[k - 1], grid[k], current, opts, 0, &unresolved);
        const std::vector<Complex> vals = sorted_eigenvalues(cache.at(grid[k]));
        std::vector<Complex> next(current.size());
        for (size_t i = 0; i < current.size(); ++i) next[i] = vals[static_cast<size_t>(perm[i])];
        if (unresolved)
            for (auto& p : out.paths) p.unresolved_collision = true;
        current = next;
        annotate(k, grid[k], current);
    }
    return out;
}

namespace {

double principal_angle(double a) {
    while (a > M_PI) a -= 2.0 * M_PI;
    while (a <= -M_PI) a += 2.0 * M_PI;
    return a;
}

}  // namespace

BranchClassification classify_branches(const EigenPathSet& paths, Complex lambda0, double theta0,
                                       double t0, double window, double tol) {
    if (window == 0.0) throw ContractError("classify_branches: zero window");
    const double side = (window > 0) ? 1.0 : -1.0;
    const double w = std::abs(window);

    // samples strictly inside the punctured window
    std::vector<int> nodes;
    for (int k = 0; k < paths.sample_count(); ++k) {
        const double tau = side * (paths.times[static_cast<size_t>(k)] - t0);
        if (tau > 0.0 && tau <= w) nodes.push_back(k);
    }
    if (nodes.size() < 3)
        throw ContractError("classify_branches: need at least three samples in the window");
    std::sort(nodes.begin(), nodes.end(), [&](int a, int b) {
        return std::abs(paths.times[static_cast<size_t>(a)] - t0) <
               std::abs(paths.times[static_cast<size_t>(b)] - t0);
    });

    BranchClassification out;
    out.holder_n.assign(paths.paths.size(), 0);

    // involved paths: inside the paper's r < 0.1 disk at the innermost sample
    const int inner = nodes.front();
    std::vector<int> involved;
    for (const auto& p : paths.paths) {
        const Complex v = p.samples[static_cast<size_t>(inner)].value;
        if (std::abs(v - lambda0) < 0.1) involved.push_back(p.id);
    }

    const Complex iu = kI * std::polar(1.0, theta0);
    for (int id : involved) {
        const auto& p = paths.paths[static_cast<size_t>(id)];
        // Hoelder exponent from the window data
        double mx = 0, my = 0, num = 0, den = 0;
        std::vector<double> lx, ly;
        for (int k : nodes) {
            const double tau = std::abs(paths.times[static_cast<size_t>(k)] - t0);
            const double dist = std::abs(p.samples[static_cast<size_t>(k)].value - lambda0);
            if (dist <= 0.0 || tau <= 0.0) continue;
            lx.push_back(std::log(tau));
            ly.push_back(std::log(dist));
        }
        if (lx.size() < 2) {
            out.unclassified.push_back(id);
            continue;
        }
        for (size_t i = 0; i < lx.size(); ++i) {
            mx += lx[i];
            my += ly[i];
        }
        mx /= lx.size();
        my /= ly.size();
        for (size_t i = 0; i < lx.size(); ++i) {
            num += (lx[i] - mx) * (ly[i] - my);
            den += (lx[i] - mx) * (lx[i] - mx);
        }
        const double holder = num / den;
        int n_est = static_cast<int>(std::lround(1.0 / std::max(holder, 1e-6)));
        n_est = std::max(1, std::min(n_est, 2 * static_cast<int>(paths.paths.size())));
        out.holder_n[static_cast<size_t>(id)] = n_est;

        // measured limit over the three innermost samples
        Complex L = 0.0;
        int cnt = 0;
        for (size_t j = 0; j < std::min<size_t>(3, nodes.size()); ++j) {
            const int k = nodes[j];
            const double tau = std::abs(paths.times[static_cast<size_t>(k)] - t0);
            L += (p.samples[static_cast<size_t>(k)].value - lambda0) /
                 (iu * std::pow(tau, 1.0 / n_est));
            ++cnt;
        }
        L /= static_cast<double>(cnt);
        if (std::abs(L) < tol) {
            out.unclassified.push_back(id);
            continue;
        }
        if (std::abs(L.imag()) <= std::max(tol, 0.25 * std::abs(L))) {
            if (L.real() > 0)
                out.I_plus.push_back(id);
            else
                out.I_minus.push_back(id);
        }
    }

    // per-time sets over the window
    for (int k : nodes) {
        out.times.push_back(paths.times[static_cast<size_t>(k)]);
        std::vector<int> jp, jm, kp, km;
        for (int id : involved) {
            const auto& s = paths.paths[static_cast<size_t>(id)].samples[static_cast<size_t>(k)];
            if (!s.on_circle) continue;
            if (s.cluster_signature.positive_definite()) jp.push_back(id);
            if (s.cluster_signature.negative_definite()) jm.push_back(id);
            if (std::abs(s.value - lambda0) <= tol) continue;  // exclude lambda0 itself
            const double dtheta = principal_angle(std::arg(s.value) - theta0);
            if (dtheta > 0)
                kp.push_back(id);
            else if (dtheta < 0)
                km.push_back(id);
        }
        out.J_plus.push_back(jp);
        out.J_minus.push_back(jm);
        out.K_plus.push_back(kp);
        out.K_minus.push_back(km);
    }
    return out;
}

int nu_plus(const BranchClassification& cls, double t) {
    if (cls.times.empty()) throw ContractError("nu_plus: empty classification");
    // nearest valid sample at or below t; first sample when t precedes all
    int pick = 0;
    for (size_t i = 0; i < cls.times.size(); ++i)
        if (cls.times[i] <= t) pick = static_cast<int>(i);
    int with_plus = 0, with_minus = 0;
    for (int id : cls.K_plus[static_cast<size_t>(pick)]) {
        const auto& jp = cls.J_plus[static_cast<size_t>(pick)];
        const auto& jm = cls.J_minus[static_cast<size_t>(pick)];
        if (std::find(jp.begin(), jp.end(), id) != jp.end()) ++with_plus;
        if (std::find(jm.begin(), jm.end(), id) != jm.end()) ++with_minus;
    }
    return with_plus - with_minus;
}

IndexResult eigenvalue_index(const HamiltonianCurve& curve, const SymplecticMatrix& gamma0,
                             double t0, Complex lambda, double probe_dt,
                             const PropagateOptions& opts) {
    if (!(probe_dt > 0)) throw ContractError("eigenvalue_index: probe_dt must be positive");
    const double on_tol = default_on_circle_tol(gamma0.value);
    const Spectrum spec0 = eigen_decompose(gamma0.value);
    const EigenCluster& cl = spec0.nearest(lambda);
    if (std::abs(cl.value - lambda) > std::max(1e-6, 10.0 * spec0.cluster_tol))
        throw ContractError("eigenvalue_index: lambda is not an eigenvalue of gamma(t0)");
    if (!on_unit_circle(cl.value, on_tol))
        throw ContractError("eigenvalue_index: lambda must lie on the unit circle");

    auto probe = [&](double sign) -> std::pair<int, int> {
        const Mat g = propagate_to(curve, gamma0.value, t0, t0 + sign * probe_dt, opts);
        const Spectrum spec = eigen_decompose(g);
        // branches of lambda: eigenvalues matched to the cluster members
        const std::vector<int> match = match_values(spec0.eigenvalues, spec.eigenvalues);
        int p = 0, q = 0;
        for (size_t i = 0; i < spec0.eigenvalues.size(); ++i) {
            if (std::abs(spec0.eigenvalues[i] - cl.value) > spec0.cluster_tol) continue;
            const Complex v = spec.eigenvalues[static_cast<size_t>(match[i])];
            if (!on_unit_circle(v, on_tol)) continue;
            const KreinSignature sig = cluster_signature(g, spec, spec.nearest(v).id);
            if (sig.positive_definite() && spec.nearest(v).multiplicity == 1) ++p;
            if (sig.negative_definite() && spec.nearest(v).multiplicity == 1) ++q;
            if (spec.nearest(v).multiplicity > 1) {
                // probe landed on another collision; signatures per branch
                // are not well-defined there
                throw NumericalError(
                    "eigenvalue_index: probe landed on a degenerate cluster; decrease probe_dt");
            }
        }
        return {p, q};
    };

    const auto [p_after, q_after] = probe(+1.0);
    const auto [p_before, q_before] = probe(-1.0);
    IndexResult out;
    out.p_after = p_after;
    out.q_after = q_after;
    out.p_before = p_before;
    out.q_before = q_before;
    if (p_after - q_after != p_before - q_before)
        throw NumericalError("eigenvalue_index: probes disagree (" + std::to_string(p_before - q_before) +
                             " vs " + std::to_string(p_after - q_after) +
                             "); decrease probe_dt (probe may have crossed another bifurcation)");
    out.index = p_after - q_after;
    return out;
}

namespace {

struct DIndicator {
    FlowCache* cache = nullptr;
    double on_tol_bias = 0.0;

    // true when some on-circle cluster at collision tolerance ctol is
    // Krein indefinite (or degenerate within a multiple cluster)
    bool marked(double t, double ctol, Complex* where = nullptr) {
        const Mat& g = cache->at(t);
        const double on_tol = default_on_circle_tol(g) + on_tol_bias;
        const Spectrum spec = eigen_decompose(g, ctol);
        for (const auto& cl : spec.clusters) {
            if (cl.multiplicity < 2) continue;
            if (!on_unit_circle(cl.value, on_tol + ctol)) continue;
            bool all_on = true;
            for (const auto m : cl.members)
                if (!on_unit_circle(m, on_tol + ctol)) all_on = false;
            if (!all_on) continue;
            const KreinSignature sig = cluster_signature(g, spec, cl.id);
            if (sig.indefinite()) {
                if (where) *where = cl.value;
                return true;
            }
        }
        return false;
    }
};

}  // namespace

DReport detect_D(const HamiltonianCurve& curve, const SymplecticMatrix& gamma0, double lo,
                 double hi, double grid_step, double tol, const PropagateOptions& opts) {
    if (!(hi > lo) || !(grid_step > 0) || !(tol > 0))
        throw ContractError("detect_D: bad interval, step, or tolerance");

    DReport report;
    report.lo = lo;
    report.hi = hi;
    report.tol = tol;
    report.grid_step = grid_step;
    report.on_circle_tol = default_on_circle_tol(gamma0.value);

    std::vector<double> grid;
    for (double t = lo; t < hi + 0.5 * grid_step; t += grid_step) grid.push_back(std::min(t, hi));
    if (grid.back() < hi) grid.push_back(hi);

    FlowCache cache;
    cache.curve = &curve;
    cache.opts = opts;
    // reach lo from t = 0 where gamma0 lives
    cache.known.emplace(0.0, gamma0.value);

    // assumption (1.7) at the grid points
    for (double t : grid) {
        const ConvexityReport conv = check_convexity_assumption(curve.evaluate(t), cache.at(t));
        if (!conv.satisfied) report.assumption_violations.push_back(t);
    }

    // eigenvalue speed estimate from matched displacements on the grid
    double speed = 0.0;
    {
        std::vector<Complex> prev = sorted_eigenvalues(cache.at(grid[0]));
        for (size_t k = 1; k < grid.size(); ++k) {
            const std::vector<Complex> next = sorted_eigenvalues(cache.at(grid[k]));
            const std::vector<int> m = match_values(prev, next);
            for (size_t i = 0; i < prev.size(); ++i)
                speed = std::max(speed, std::abs(prev[i] - next[static_cast<size_t>(m[i])]) /
                                            (grid[k] - grid[k - 1]));
            prev = next;
        }
        if (speed <= 0.0) speed = 1.0;
    }

    DIndicator ind;
    ind.cache = &cache;

    const double ctol_start = std::max(tol, 2.0 * speed * grid_step);
    std::vector<std::pair<double, double>> regions;  // candidate [a, b]
    {
        bool in_run = false;
        double a = lo;
        for (size_t k = 0; k < grid.size(); ++k) {
            const bool m = ind.marked(grid[k], ctol_start);
            if (m && !in_run) {
                in_run = true;
                a = (k == 0) ? lo : grid[k - 1];
            }
            if (!m && in_run) {
                in_run = false;
                regions.emplace_back(a, grid[k]);
            }
        }
        if (in_run) regions.emplace_back(a, hi);
    }

    // refine: halve the collision tolerance down to tol, re-locating the
    // marked set inside each region at each level
    auto edge_bisect = [&](double out_t, double in_t, double ctol) {
        // out_t unmarked, in_t marked
        for (int it = 0; it < 60 && std::abs(in_t - out_t) > std::min(tol, ctol) * 1e-3; ++it) {
            const double mid = 0.5 * (out_t + in_t);
            if (ind.marked(mid, ctol))
                in_t = mid;
            else
                out_t = mid;
        }
        return 0.5 * (out_t + in_t);
    };

    for (auto& region : regions) {
        double ctol = ctol_start;
        double a = region.first, b = region.second;
        for (;;) {
            // sample the current region finely enough for this tolerance
            const double min_width = ctol / (2.0 * speed);
            const int samples = std::max(16, static_cast<int>(std::ceil((b - a) / min_width)) + 2);
            int first = -1, last = -1;
            for (int i = 0; i <= samples; ++i) {
                const double t = a + (b - a) * i / samples;
                if (ind.marked(t, ctol)) {
                    if (first < 0) first = i;
                    last = i;
                }
            }
            if (first < 0) {
                a = b = 0.5 * (a + b);  // vanished at this tolerance
                break;
            }
            double t_first = a + (b - a) * first / samples;
            double t_last = a + (b - a) * last / samples;
            const double step_loc = (b - a) / samples;
            double left = (first == 0) ? std::max(lo, a - step_loc) : t_first - step_loc;
            double right = (last == samples) ? std::min(hi, b + step_loc) : t_last + step_loc;
            if (first > 0 || a > lo) left = edge_bisect(left, t_first, ctol);
            if (last < samples || b < hi) right = edge_bisect(right, t_last, ctol);
            a = std::max(lo, left);
            b = std::min(hi, right);

            if (report.history.empty() || report.history.back().ctol != ctol)
                report.history.push_back({ctol, {}});
            report.history.back().widths.push_back(b - a);

            if (ctol <= tol) break;
            ctol = std::max(tol, 0.5 * ctol);
        }
        region = {a, b};
    }

    for (const auto& [a, b] : regions) {
        if (b <= a) continue;
        DInterval iv;
        iv.lo = a;
        iv.hi = b;
        ind.marked(0.5 * (a + b), std::max(tol, ctol_start * 1e-3), &iv.where);
        if (iv.where == Complex(0.0)) ind.marked(0.5 * (a + b), ctol_start, &iv.where);
        report.intervals.push_back(iv);
    }
    std::sort(report.intervals.begin(), report.intervals.end(),
              [](const DInterval& x, const DInterval& y) { return x.lo < y.lo; });
    // merge overlaps so the report is disjoint
    std::vector<DInterval> merged;
    for (const auto& iv : report.intervals) {
        if (!merged.empty() && iv.lo <= merged.back().hi)
            merged.back().hi = std::max(merged.back().hi, iv.hi);
        else
            merged.push_back(iv);
    }
    report.intervals = std::move(merged);
    return report;
}

VerifyReport verify_prediction(const EigenPathSet& paths, const BranchPrediction& pred, double t0,
                               double window, double tol) {
    if (window == 0.0) throw ContractError("verify_prediction: zero window");
    const double side = (window > 0) ? 1.0 : -1.0;
    const double w = std::abs(window);

    std::vector<int> nodes;
    for (int k = 0; k < paths.sample_count(); ++k) {
        const double tau = side * (paths.times[static_cast<size_t>(k)] - t0);
        if (tau > 0.0 && tau <= w) nodes.push_back(k);
    }
    if (nodes.size() < 2) throw ContractError("verify_prediction: too few samples in window");
    std::sort(nodes.begin(), nodes.end(), [&](int a, int b) {
        return std::abs(paths.times[static_cast<size_t>(a)] - t0) <
               std::abs(paths.times[static_cast<size_t>(b)] - t0);
    });

    const int inner = nodes.front();
    std::vector<int> involved;
    for (const auto& p : paths.paths)
        if (std::abs(p.samples[static_cast<size_t>(inner)].value - pred.lambda0) < 0.1)
            involved.push_back(p.id);
    const int nb = pred.count();
    if (static_cast<int>(involved.size()) != nb)
        throw ContractError("verify_prediction: " + std::to_string(involved.size()) +
                            " measured branches vs " + std::to_string(nb) + " predicted");

    auto predicted_value = [&](const Branch& b, double tau_abs) -> Complex {
        const Complex lead = (side > 0) ? b.lead_pos : b.lead_neg;
        return pred.lambda0 + lead * std::pow(tau_abs, 1.0 / b.n);
    };

    // assignment on mean relative residual
    std::vector<std::vector<double>> cost(static_cast<size_t>(nb),
                                          std::vector<double>(static_cast<size_t>(nb), 0.0));
    for (int i = 0; i < nb; ++i) {
        const auto& path = paths.paths[static_cast<size_t>(involved[static_cast<size_t>(i)])];
        for (int j = 0; j < nb; ++j) {
            const Branch& b = pred.branches[static_cast<size_t>(j)];
            double acc = 0.0;
            for (int k : nodes) {
                const double tau = std::abs(paths.times[static_cast<size_t>(k)] - t0);
                const Complex predv = predicted_value(b, tau);
                const double denom = std::abs(predv - pred.lambda0);
                acc += std::abs(path.samples[static_cast<size_t>(k)].value - predv) /
                       std::max(denom, 1e-300);
            }
            cost[static_cast<size_t>(i)][static_cast<size_t>(j)] = acc / nodes.size();
        }
    }
    const std::vector<int> assign = min_cost_assignment(cost);

    VerifyReport out;
    // tie detection: another column within tol of the chosen one
    for (int i = 0; i < nb; ++i) {
        const double chosen = cost[static_cast<size_t>(i)][static_cast<size_t>(assign[static_cast<size_t>(i)])];
        for (int j = 0; j < nb; ++j)
            if (j != assign[static_cast<size_t>(i)] &&
                std::abs(cost[static_cast<size_t>(i)][static_cast<size_t>(j)] - chosen) <= tol)
                out.assignment_tie = true;
    }

    double validated = 0.0;
    bool all_ok = true;
    for (int i = 0; i < nb; ++i) {
        const auto& path = paths.paths[static_cast<size_t>(involved[static_cast<size_t>(i)])];
        const Branch& b = pred.branches[static_cast<size_t>(assign[static_cast<size_t>(i)])];
        BranchResidual r;
        r.path_id = path.id;
        r.branch_index = assign[static_cast<size_t>(i)];

        double res_first = -1.0, res_last = -1.0;
        double worst_all = 0.0, worst_inner = 0.0;
        double largest_ok_tau = 0.0;
        bool fates = true;
        for (size_t jn = 0; jn < nodes.size(); ++jn) {
            const int k = nodes[jn];
            const double tau = std::abs(paths.times[static_cast<size_t>(k)] - t0);
            const Complex predv = predicted_value(b, tau);
            const double rel = std::abs(path.samples[static_cast<size_t>(k)].value - predv) /
                               std::max(std::abs(predv - pred.lambda0), 1e-300);
            if (res_first < 0) res_first = rel;
            res_last = rel;
            worst_all = std::max(worst_all, rel);
            if (tau <= 0.5 * w) {
                worst_inner = std::max(worst_inner, rel);
                // fate agreement on the inner half of the window
                const auto& s = path.samples[static_cast<size_t>(k)];
                const BranchFate f = (side > 0) ? b.fate_pos : b.fate_neg;
                bool agree = false;
                switch (f) {
                    case BranchFate::CirclePositive:
                        agree = s.on_circle && s.cluster_signature.positive_definite();
                        break;
                    case BranchFate::CircleNegative:
                        agree = s.on_circle && s.cluster_signature.negative_definite();
                        break;
                    case BranchFate::OffCircle:
                        agree = !s.on_circle;
                        break;
                }
                if (!agree) fates = false;
            }
            if (rel <= 0.2) largest_ok_tau = std::max(largest_ok_tau, tau);
        }
        r.sup_rel_residual = worst_all;
        r.inner_rel_residual = worst_inner;
        r.fate_agrees = fates;
        r.decreasing = res_first <= res_last + 1e-12;  // nodes are inner -> outer
        validated = (i == 0) ? largest_ok_tau : std::min(validated, largest_ok_tau);
        if (!fates || !r.decreasing) all_ok = false;
        out.branches.push_back(r);
    }
    out.pass = all_ok;
    out.validated_delta = validated;
    return out;
}

}  // namespace bifurc

#include "bifurc/charpoly.hpp"

#include "bifurc/assignment.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace bifurc {

std::vector<Complex> charpoly_coeffs(const Mat& gamma, Complex lambda0) {
    require_even_dim(gamma, "charpoly_coeffs");
    Eigen::EigenSolver<Mat> solver(gamma, false);
    if (solver.info() != Eigen::Success) throw NumericalError("charpoly_coeffs: eigensolver failed");
    const CVec mu = solver.eigenvalues();
    // det(lambda Id - gamma) = prod((lambda - lambda0) + (lambda0 - mu_i));
    // accumulate in powers of x = lambda - lambda0.
    std::vector<Complex> coeffs{1.0};
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
        const Complex delta = lambda0 - mu(i);
        std::vector<Complex> next(coeffs.size() + 1, Complex(0.0));
        for (size_t k = 0; k < coeffs.size(); ++k) {
            next[k + 1] += coeffs[k];          // x * coeffs
            next[k] += delta * coeffs[k];      // delta * coeffs
        }
        coeffs = std::move(next);
    }
    return coeffs;
}

Complex cN_from_coeffs(const std::vector<Complex>& coeffs, int N) {
    if (N < 0 || N >= static_cast<int>(coeffs.size()))
        throw ContractError("cN_from_coeffs: N out of range");
    return coeffs[static_cast<size_t>(N)];
}

Complex cN_from_product(const Mat& gamma0, Complex lambda0, int N, double cluster_radius) {
    Eigen::EigenSolver<Mat> solver(gamma0, false);
    const CVec mu = solver.eigenvalues();
    Complex acc = 1.0;
    int inside = 0;
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
        if (std::abs(mu(i) - lambda0) <= cluster_radius) {
            ++inside;
            continue;
        }
        acc *= (lambda0 - mu(i));
    }
    if (inside != N)
        throw NumericalError("cN_from_product: cluster radius captured " + std::to_string(inside) +
                             " eigenvalues, expected " + std::to_string(N));
    return acc;
}

std::vector<std::vector<int>> admissible_selections(int k, const std::vector<int>& sizes) {
    const int m = static_cast<int>(sizes.size());
    const int f = phi(k, sizes);
    if (f == 0) return {{}};
    const int j_pivot = sizes[static_cast<size_t>(f - 1)];  // j_{phi(k)}
    std::vector<int> mandatory, ties;
    for (int i = 0; i < m; ++i) {
        if (sizes[static_cast<size_t>(i)] > j_pivot)
            mandatory.push_back(i);
        else if (sizes[static_cast<size_t>(i)] == j_pivot)
            ties.push_back(i);
    }
    const int need = f - static_cast<int>(mandatory.size());
    std::vector<std::vector<int>> out;
    if (need < 0 || need > static_cast<int>(ties.size())) return out;
    // choose `need` of the tied blocks
    std::vector<int> pick(static_cast<size_t>(need));
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == need) {
            std::vector<int> sel = mandatory;
            sel.insert(sel.end(), pick.begin(), pick.begin() + need);
            std::sort(sel.begin(), sel.end());
            out.push_back(sel);
            return;
        }
        for (int i = start; i < static_cast<int>(ties.size()); ++i) {
            pick[static_cast<size_t>(depth)] = ties[static_cast<size_t>(i)];
            rec(i + 1, depth + 1);
        }
    };
    rec(0, 0);
    return out;
}

Complex coeff_limit_prediction(int k, const std::vector<int>& sizes, const CMat& d, Complex cN0) {
    int N = 0;
    for (int v : sizes) N += v;
    Complex sum = 0.0;
    for (const auto& sel : admissible_selections(k, sizes)) {
        if (sel.empty()) {
            sum += 1.0;
            continue;
        }
        CMat minor(sel.size(), sel.size());
        for (size_t r = 0; r < sel.size(); ++r)
            for (size_t c = 0; c < sel.size(); ++c) minor(r, c) = d(sel[r], sel[c]);
        sum += minor.determinant();
    }
    const double sign = ((N - k) % 2 == 0) ? 1.0 : -1.0;
    return sign * cN0 * sum;
}

namespace {

double operator_norm(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

// Exact-order points k = sum_{i > phi(k)} j_i.
bool is_exact_order(int k, const std::vector<int>& sizes) {
    const int f = phi(k, sizes);
    int tail = 0;
    for (size_t i = static_cast<size_t>(f); i < sizes.size(); ++i) tail += sizes[i];
    return k == tail;
}

}  // namespace

CoefficientOrderReport verify_coeff_orders(const HamiltonianCurve& curve,
                                           const SymplecticMatrix& gamma0, Complex lambda0,
                                           std::vector<double> t_samples,
                                           const std::vector<int>& sizes,
                                           const PropagateOptions& opts) {
    if (t_samples.empty()) throw ContractError("verify_coeff_orders: empty ladder");
    for (double t : t_samples)
        if (!(t > 0)) throw ContractError("verify_coeff_orders: ladder times must be positive");
    std::sort(t_samples.begin(), t_samples.end());

    CoefficientOrderReport report;
    report.t_samples = t_samples;

    const int two_n = gamma0.dim();
    int N = 0;
    for (int v : sizes) N += v;
    report.N = N;

    // chains at the bifurcation point give d and c_N(0)
    const JordanChainSet chains = jordan_chains(gamma0.value, lambda0, {opts.tol * 10, 0});
    if (chains.sizes != sizes)
        throw StructureError("verify_coeff_orders: supplied sizes disagree with the computed "
                             "Jordan structure");
    const EtaChainSet etas = eta_chains(chains);
    const BifurcationMatrices bm = bifurcation_matrices(etas, curve.evaluate(0.0));
    const std::vector<Complex> c0 = charpoly_coeffs(gamma0.value, lambda0);
    report.cN0 = cN_from_coeffs(c0, N);

    // flow over the ladder
    std::vector<double> grid{0.0};
    grid.insert(grid.end(), t_samples.begin(), t_samples.end());
    const FlowResult flow = propagate(curve, gamma0, grid, opts);

    std::vector<std::vector<Complex>> coeffs;  // per sample
    double gnorm = 1.0;
    for (size_t s = 1; s < flow.gammas.size(); ++s) {
        coeffs.push_back(charpoly_coeffs(flow.gammas[s], lambda0));
        gnorm = std::max(gnorm, operator_norm(flow.gammas[s]));
    }
    const double noise_floor =
        1e3 * std::numeric_limits<double>::epsilon() * std::pow(gnorm, two_n);

    for (int k = 0; k < N; ++k) {
        CoefficientOrderRow row;
        row.k = k;
        row.phi_k = phi(k, sizes);
        row.exact_order = is_exact_order(k, sizes);

        std::vector<double> lx, ly;
        for (size_t s = 0; s < t_samples.size(); ++s) {
            const double ck = std::abs(coeffs[s][static_cast<size_t>(k)]);
            if (ck < noise_floor) continue;
            lx.push_back(std::log(t_samples[s]));
            ly.push_back(std::log(ck));
        }
        if (lx.size() < 3) {
            row.skipped_noise = true;
            report.rows.push_back(row);
            continue;
        }
        // least-squares slope
        double mx = 0, my = 0;
        for (size_t i = 0; i < lx.size(); ++i) {
            mx += lx[i];
            my += ly[i];
        }
        mx /= lx.size();
        my /= ly.size();
        double num = 0, den = 0;
        for (size_t i = 0; i < lx.size(); ++i) {
            num += (lx[i] - mx) * (ly[i] - my);
            den += (lx[i] - mx) * (lx[i] - mx);
        }
        row.slope = num / den;
        row.slope_ok = row.slope >= row.phi_k - report.slope_slack;

        if (row.exact_order) {
            const double t_min = t_samples.front();
            row.limit_measured =
                coeffs[0][static_cast<size_t>(k)] / std::pow(t_min, row.phi_k);
            row.limit_predicted = coeff_limit_prediction(k, sizes, bm.d, report.cN0);
            row.limit_rel_error = std::abs(row.limit_measured - row.limit_predicted) /
                                  std::max(1e-300, std::abs(row.limit_predicted));
            row.limit_ok = row.limit_rel_error <= report.limit_rel_tol;
        }
        if (!row.slope_ok || (row.exact_order && !row.limit_ok)) report.all_pass = false;
        report.rows.push_back(row);
    }
    return report;
}

int tau_exponent(const BlockGrouping& grouping, int block_l) {
    if (block_l < 0 || block_l >= grouping.s) throw ContractError("tau_exponent: bad block index");
    int tau = 0;
    for (int lp = 0; lp < grouping.s; ++lp)
        tau += grouping.m[static_cast<size_t>(lp)] *
               std::min(grouping.n[static_cast<size_t>(lp)], grouping.n[static_cast<size_t>(block_l)]);
    return tau;
}

namespace {

// det of a matrix-valued polynomial by evaluation at roots of unity and
// inverse DFT; degree is the exact degree of the determinant polynomial.
std::vector<Complex> det_poly(const std::function<CMat(Complex)>& mat, int degree) {
    const int K = degree + 1;
    std::vector<Complex> vals(static_cast<size_t>(K));
    for (int j = 0; j < K; ++j) {
        const Complex w = std::polar(1.0, 2.0 * M_PI * j / K);
        vals[static_cast<size_t>(j)] = mat(w).determinant();
    }
    std::vector<Complex> coeffs(static_cast<size_t>(K));
    for (int k = 0; k < K; ++k) {
        Complex acc = 0.0;
        for (int j = 0; j < K; ++j)
            acc += vals[static_cast<size_t>(j)] * std::polar(1.0, -2.0 * M_PI * j * k / K);
        coeffs[static_cast<size_t>(k)] = acc / static_cast<double>(K);
    }
    return coeffs;
}

}  // namespace

std::vector<Complex> limit_poly_tilde(const CMat& S, const CMat& X, const BlockGrouping& grouping,
                                      int block_l, double theta0) {
    const int head = grouping.block_offset(block_l) + grouping.m[static_cast<size_t>(block_l)];
    const int ml = grouping.m[static_cast<size_t>(block_l)];
    const int off = grouping.block_offset(block_l);
    const int nl = grouping.n[static_cast<size_t>(block_l)];
    const Complex iu = kI * std::polar(1.0, theta0);
    Complex iu_pow = 1.0;
    for (int i = 0; i < nl; ++i) iu_pow *= iu;

    auto mat = [&](Complex w) -> CMat {
        CMat M = S.topLeftCorner(head, head);
        Complex wn = 1.0;
        for (int i = 0; i < nl; ++i) wn *= w;
        M.block(off, off, ml, ml) -= (wn / iu_pow) * X.block(off, off, ml, ml);
        return M;
    };
    return det_poly(mat, ml * nl);
}

BlowupFamily blowup_polynomial(const HamiltonianCurve& curve, const SymplecticMatrix& gamma0,
                               Complex lambda0, const std::vector<double>& t_ladder,
                               const CMat& d, const std::vector<int>& sizes,
                               const BlockGrouping& grouping, int block_l, Complex cN0,
                               const PropagateOptions& opts) {
    if (t_ladder.empty()) throw ContractError("blowup_polynomial: empty ladder");
    BlowupFamily out;
    out.block_l = block_l;
    out.tau = tau_exponent(grouping, block_l);
    const int nl = grouping.n[static_cast<size_t>(block_l)];
    const int ml = grouping.m[static_cast<size_t>(block_l)];
    const int head = grouping.block_offset(block_l) + ml;
    const int off = grouping.block_offset(block_l);

    // empirical limit at the smallest ladder time
    std::vector<double> ladder = t_ladder;
    std::sort(ladder.begin(), ladder.end());
    const double t_min = ladder.front();
    const Mat g = propagate_to(curve, gamma0.value, 0.0, t_min, opts);
    const std::vector<Complex> ck = charpoly_coeffs(g, lambda0);
    out.q_limit_empirical.resize(ck.size());
    for (size_t k = 0; k < ck.size(); ++k)
        out.q_limit_empirical[k] =
            ck[k] * std::pow(t_min, (static_cast<double>(k) - out.tau) / nl);

    // closed form
    auto mat = [&](Complex w) -> CMat {
        CMat M = d.topLeftCorner(head, head);
        Complex mw = 1.0;
        for (int i = 0; i < nl; ++i) mw *= (-w);
        M.block(off, off, ml, ml) += mw * CMat::Identity(ml, ml);
        return M;
    };
    out.Q = det_poly(mat, ml * nl);
    out.Q_roots = polynomial_roots(out.Q);

    int shift = 0, lead = 0;
    for (int lp = block_l + 1; lp < grouping.s; ++lp)
        shift += grouping.m[static_cast<size_t>(lp)] * grouping.n[static_cast<size_t>(lp)];
    for (int lp = 0; lp <= block_l; ++lp)
        lead += grouping.m[static_cast<size_t>(lp)] * grouping.n[static_cast<size_t>(lp)];
    const double sign = (lead % 2 == 0) ? 1.0 : -1.0;

    out.q_limit_closed.assign(out.q_limit_empirical.size(), Complex(0.0));
    for (size_t k = 0; k < out.Q.size(); ++k) {
        const size_t idx = k + static_cast<size_t>(shift);
        if (idx < out.q_limit_closed.size()) out.q_limit_closed[idx] = sign * cN0 * out.Q[k];
    }
    double err = 0.0;
    for (size_t k = 0; k < out.q_limit_closed.size(); ++k)
        err = std::max(err, std::abs(out.q_limit_closed[k] - out.q_limit_empirical[k]));
    out.coeff_error = err;
    (void)sizes;
    return out;
}

std::vector<Complex> polynomial_roots(const std::vector<Complex>& coeffs) {
    // trim the leading near-zero coefficients
    double maxc = 0.0;
    for (const auto& c : coeffs) maxc = std::max(maxc, std::abs(c));
    if (maxc == 0.0) throw ContractError("polynomial_roots: zero polynomial");
    int deg = static_cast<int>(coeffs.size()) - 1;
    while (deg > 0 && std::abs(coeffs[static_cast<size_t>(deg)]) <= 1e-12 * maxc) --deg;
    if (deg == 0) return {};
    CMat companion = CMat::Zero(deg, deg);
    const Complex lead = coeffs[static_cast<size_t>(deg)];
    for (int i = 0; i < deg; ++i) {
        companion(i, deg - 1) = -coeffs[static_cast<size_t>(i)] / lead;
        if (i > 0) companion(i, i - 1) = 1.0;
    }
    Eigen::ComplexEigenSolver<CMat> solver(companion);
    if (solver.info() != Eigen::Success) throw NumericalError("polynomial_roots: solver failed");
    std::vector<Complex> roots(solver.eigenvalues().data(),
                               solver.eigenvalues().data() + deg);
    return roots;
}

std::vector<Complex> prediction_w_roots(const BranchPrediction& pred, int block_l) {
    std::vector<Complex> out;
    for (const auto& b : pred.branches)
        if (b.l == block_l) out.push_back(b.lead_pos);
    return out;
}

double multiset_distance(std::vector<Complex> a, std::vector<Complex> b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    if (a.empty()) return 0.0;
    const int n = static_cast<int>(a.size());
    std::vector<std::vector<double>> cost(static_cast<size_t>(n),
                                          std::vector<double>(static_cast<size_t>(n)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            cost[static_cast<size_t>(i)][static_cast<size_t>(j)] =
                std::abs(a[static_cast<size_t>(i)] - b[static_cast<size_t>(j)]);
    const std::vector<int> match = min_cost_assignment(cost);
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        worst = std::max(worst, cost[static_cast<size_t>(i)][static_cast<size_t>(match[static_cast<size_t>(i)])]);
    return worst;
}

}  // namespace bifurc

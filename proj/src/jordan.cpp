#include "bifurc/jordan.hpp"

#include "bifurc/contour.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>

namespace bifurc {

int BlockGrouping::total_blocks() const {
    int acc = 0;
    for (int v : m) acc += v;
    return acc;
}

int BlockGrouping::total_size() const {
    int acc = 0;
    for (size_t l = 0; l < m.size(); ++l) acc += m[l] * n[l];
    return acc;
}

int BlockGrouping::block_offset(int l) const {
    int acc = 0;
    for (int i = 0; i < l; ++i) acc += m[static_cast<size_t>(i)];
    return acc;
}

BlockGrouping block_grouping(const std::vector<int>& sizes) {
    if (sizes.empty()) throw ContractError("block_grouping: empty size list");
    for (size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] < 1) throw ContractError("block_grouping: sizes must be positive");
        if (i > 0 && sizes[i] > sizes[i - 1])
            throw ContractError("block_grouping: sizes must be non-increasing");
    }
    BlockGrouping g;
    for (int v : sizes) {
        if (g.n.empty() || g.n.back() != v) {
            g.n.push_back(v);
            g.m.push_back(1);
        } else {
            g.m.back() += 1;
        }
    }
    g.s = static_cast<int>(g.n.size());
    return g;
}

int phi(int k, const std::vector<int>& sizes) {
    int N = 0;
    for (int v : sizes) N += v;
    if (k >= N) return 0;
    if (k < 0) throw ContractError("phi: k must be non-negative");
    int acc = 0;
    for (size_t i = 0; i < sizes.size(); ++i) {
        acc += sizes[i];
        if (acc >= N - k) return static_cast<int>(i) + 1;
    }
    return static_cast<int>(sizes.size());
}

namespace {

struct RankDecision {
    int nullity = 0;
    double sigma_max = 0.0;
};

// Rank decision at an absolute threshold `thr`. The threshold is anchored
// to the scale of the base matrix, never to sigma_max of the power itself:
// high powers of a numerically nilpotent matrix are all noise, and a
// relative threshold would keep reading them as full rank.
RankDecision nullity_with_guard(const CMat& m, double thr, int power) {
    Eigen::JacobiSVD<CMat> svd(m);
    const auto& sv = svd.singularValues();
    RankDecision out;
    out.sigma_max = sv.size() ? sv(0) : 0.0;
    double min_above = -1.0, max_below = -1.0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > thr) {
            min_above = sv(i);
        } else {
            if (max_below < 0.0) max_below = sv(i);
            ++out.nullity;
        }
    }
    if (min_above > 0.0 && max_below > 0.0 && min_above / max_below < 10.0)
        throw StructureError("jordan: rank decision ambiguous at power " + std::to_string(power) +
                             " (singular values " + std::to_string(min_above) + " / " +
                             std::to_string(max_below) + " straddle the threshold within factor 10)");
    return out;
}

CMat kernel_basis(const CMat& m, double thr) {
    Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    int nullity = static_cast<int>(m.cols()) - static_cast<int>(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) <= thr) ++nullity;
    return svd.matrixV().rightCols(nullity);
}

CMat orth_complement(const CMat& V, int n) {
    if (V.cols() == 0) return CMat::Identity(n, n);
    Eigen::JacobiSVD<CMat> svd(V, Eigen::ComputeFullU);
    return svd.matrixU().rightCols(n - static_cast<int>(V.cols()));
}

struct Staircase {
    std::vector<int> nullities;   // nu_j = dim ker K^j
    std::vector<CMat> kernels;    // kernels[j-1] spans ker K^j
};

// Deflated staircase: ker K^j = ker K^{j-1} + {w orthogonal to it with
// K w inside it}, so every level needs one rank decision on U* K U at the
// same scale, instead of thresholding increasingly noisy powers of K.
Staircase run_staircase(const CMat& K, double thr, int max_depth, bool throw_on_stall) {
    const int N = static_cast<int>(K.rows());
    Staircase out;
    CMat V(N, 0);
    for (int j = 1; j <= max_depth && static_cast<int>(V.cols()) < N; ++j) {
        const CMat U = orth_complement(V, N);
        const CMat B = U.adjoint() * K * U;
        const RankDecision rd = nullity_with_guard(B, thr, j);
        if (rd.nullity == 0) {
            if (throw_on_stall)
                throw StructureError("jordan: staircase stalled before filling the subspace");
            break;
        }
        const CMat ker = kernel_basis(B, thr);
        CMat grown(N, V.cols() + ker.cols());
        grown.leftCols(V.cols()) = V;
        grown.rightCols(ker.cols()) = U * ker;
        V = grown;
        out.nullities.push_back(static_cast<int>(V.cols()));
        out.kernels.push_back(V);
    }
    return out;
}

// Leading `count` directions of cols orthogonal to the span of `against`.
CMat complement_directions(const CMat& cols, const CMat& against, int count) {
    CMat M = cols;
    if (against.cols() > 0) {
        Eigen::HouseholderQR<CMat> qr(against);
        const CMat Q = CMat(qr.householderQ()).leftCols(against.cols());
        M -= Q * (Q.adjoint() * cols);
    }
    Eigen::JacobiSVD<CMat> svd(M, Eigen::ComputeThinU);
    return svd.matrixU().leftCols(count);
}

CMat random_unitary(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    CMat z(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) z(i, j) = Complex(g(rng), g(rng));
    Eigen::HouseholderQR<CMat> qr(z);
    return CMat(qr.householderQ()).leftCols(n);
}

std::vector<int> sizes_from_weyr(const std::vector<int>& weyr) {
    std::vector<int> sizes;
    if (weyr.empty()) return sizes;
    for (int i = 1; i <= weyr[0]; ++i) {
        int count = 0;
        for (int w : weyr)
            if (w >= i) ++count;
        sizes.push_back(count);
    }
    return sizes;  // non-increasing by construction
}

}  // namespace

std::vector<int> weyr_sizes(const Mat& gamma, Complex lambda0, double tol,
                            std::vector<int>* staircase) {
    CMat K = (-gamma).cast<Complex>();
    K.diagonal().array() += lambda0;
    const int n = static_cast<int>(gamma.rows());
    const double thr = tol * std::max(1.0, K.operatorNorm());

    const Staircase st = run_staircase(K, thr, n, /*throw_on_stall=*/false);
    if (staircase) *staircase = st.nullities;

    std::vector<int> weyr;
    int before = 0;
    for (int nu : st.nullities) {
        const int w = nu - before;
        if (w < 0 || (!weyr.empty() && w > weyr.back()))
            throw StructureError("jordan: Weyr characteristic not monotone");
        if (w > 0) weyr.push_back(w);
        before = nu;
    }
    return sizes_from_weyr(weyr);
}

JordanChainSet jordan_chains(const Mat& gamma, Complex lambda0, const JordanOptions& opts) {
    require_even_dim(gamma, "jordan_chains");
    const double tol = opts.tol;
    const double scale = std::max(1.0, gamma.norm());
    if (std::abs(std::abs(lambda0) - 1.0) > std::max(1e-4, 100.0 * tol))
        throw ContractError("jordan_chains: lambda0 must lie on the unit circle");

    // Adaptive cluster around lambda0: defective eigenvalues scatter their
    // computed copies over a disk of radius ~ eps^{1/j}, far wider than any
    // fixed clustering tolerance, so the cluster is cut at the first large
    // relative gap in the sorted distances instead.
    Eigen::EigenSolver<Mat> solver(gamma, false);
    if (solver.info() != Eigen::Success) throw NumericalError("jordan_chains: eigensolver failed");
    std::vector<Complex> eig(solver.eigenvalues().data(),
                             solver.eigenvalues().data() + solver.eigenvalues().size());
    std::sort(eig.begin(), eig.end(), [&](Complex a, Complex b) {
        return std::abs(a - lambda0) < std::abs(b - lambda0);
    });
    if (std::abs(eig.front() - lambda0) > 1e-2 * scale)
        throw ContractError("jordan_chains: lambda0 is not an eigenvalue of gamma");

    const double floor_dist = std::max(tol * scale, 1e-12);
    struct ClusterInfo {
        std::vector<Complex> members;
        double spread = 0.0;
        double gap = 0.0;
    } cl;
    cl.members.push_back(eig.front());
    cl.spread = std::abs(eig.front() - lambda0);
    size_t next = 1;
    while (next < eig.size()) {
        const double d = std::abs(eig[next] - lambda0);
        if (d <= std::max(20.0 * std::max(cl.spread, floor_dist), floor_dist) && d <= 0.05) {
            cl.members.push_back(eig[next]);
            cl.spread = std::max(cl.spread, d);
            ++next;
        } else {
            break;
        }
    }
    cl.gap = (next < eig.size()) ? std::abs(eig[next] - lambda0) : 1.0 + cl.spread;

    // Riesz projector through the isolating annulus
    Contour contour;
    contour.center = lambda0;
    contour.radius = std::sqrt(std::max(cl.spread, floor_dist) * cl.gap);
    if (contour.radius >= cl.gap || contour.radius <= cl.spread)
        contour.radius = 0.5 * (cl.spread + cl.gap);
    CMat P = riesz_projector_complex(gamma, contour, 64);
    int nodes = 64;
    while ((P * P - P).norm() > 1e-12 && nodes < 1024) {
        nodes *= 2;
        P = riesz_projector_complex(gamma, contour, nodes);
    }
    CMat V = projector_range(P, static_cast<int>(cl.members.size()));
    if (opts.pivot_seed != 0) V = V * random_unitary(static_cast<int>(V.cols()), opts.pivot_seed);

    const CMat gc = gamma.cast<Complex>();
    const CMat gV = V.adjoint() * gc * V;
    const int N = static_cast<int>(gV.rows());
    CMat K = -gV;
    K.diagonal().array() += lambda0;

    // Deflated staircase inside the subspace; cluster spread counts as
    // noise at this tolerance level.
    double spread = 0.0;
    for (const auto m_val : cl.members) spread = std::max(spread, std::abs(m_val - lambda0));
    const double thr = std::max(tol * std::max(1.0, K.operatorNorm()), 3.0 * spread);
    const Staircase st = run_staircase(K, thr, N, /*throw_on_stall=*/true);
    const std::vector<int>& nullities = st.nullities;
    const std::vector<CMat>& kernels = st.kernels;
    if (nullities.empty() || nullities.back() != N)
        throw StructureError("jordan: generalized eigenspace not reached within dimension");

    std::vector<int> weyr;
    {
        int before = 0;
        for (int nu : nullities) {
            weyr.push_back(nu - before);
            before = nu;
        }
        for (size_t j = 1; j < weyr.size(); ++j)
            if (weyr[j] > weyr[j - 1])
                throw StructureError("jordan: Weyr characteristic not monotone");
    }
    const int depth = static_cast<int>(weyr.size());

    // Top-down chain extraction: new tops at level j span ker(K^j) modulo
    // ker(K^{j-1}) and the lowered images of longer chains.
    struct ChainBuild {
        int size = 0;
        std::vector<CVec> vec;  // vec[j-1] = xi_{.,j} in the subspace coordinates
    };
    std::vector<ChainBuild> chains;
    for (int j = depth; j >= 1; --j) {
        const int w_j = weyr[static_cast<size_t>(j - 1)];
        const int w_next = (j < depth) ? weyr[static_cast<size_t>(j)] : 0;
        const int new_tops = w_j - w_next;
        if (new_tops == 0) continue;

        std::vector<CVec> obstacles;
        if (j >= 2) {
            const CMat& lower = kernels[static_cast<size_t>(j - 2)];
            for (Eigen::Index c = 0; c < lower.cols(); ++c) obstacles.push_back(lower.col(c));
        }
        for (const auto& ch : chains)
            if (ch.size > j) obstacles.push_back(ch.vec[static_cast<size_t>(j - 1)]);

        CMat against(N, static_cast<Eigen::Index>(obstacles.size()));
        for (size_t c = 0; c < obstacles.size(); ++c) against.col(static_cast<Eigen::Index>(c)) = obstacles[c];

        const CMat tops = complement_directions(kernels[static_cast<size_t>(j - 1)], against, new_tops);
        for (int c = 0; c < new_tops; ++c) {
            ChainBuild ch;
            ch.size = j;
            ch.vec.resize(static_cast<size_t>(j));
            ch.vec[static_cast<size_t>(j - 1)] = tops.col(c);
            for (int lev = j - 1; lev >= 1; --lev)
                ch.vec[static_cast<size_t>(lev - 1)] = K * ch.vec[static_cast<size_t>(lev)];
            // normalize so the eigenvector end has unit norm
            const double nrm = ch.vec[0].norm();
            if (nrm <= 0.0) throw StructureError("jordan: degenerate chain produced");
            for (auto& v : ch.vec) v /= nrm;
            chains.push_back(std::move(ch));
        }
    }
    std::stable_sort(chains.begin(), chains.end(),
                     [](const ChainBuild& a, const ChainBuild& b) { return a.size > b.size; });

    JordanChainSet out;
    out.lambda0 = lambda0;
    out.theta0 = std::arg(lambda0);
    out.rank_staircase = nullities;
    out.N = N;
    for (const auto& ch : chains) out.sizes.push_back(ch.size);
    out.grouping = block_grouping(out.sizes);

    // Map back to the ambient space and measure residuals there.
    out.chains.resize(chains.size());
    CMat stacked(gamma.rows(), N);
    int col = 0;
    double worst = 0.0;
    for (size_t i = 0; i < chains.size(); ++i) {
        out.chains[i].resize(static_cast<size_t>(chains[i].size));
        CVec prev = CVec::Zero(gamma.rows());
        for (int j = 1; j <= chains[i].size; ++j) {
            CVec xi = V * chains[i].vec[static_cast<size_t>(j - 1)];
            out.chains[i][static_cast<size_t>(j - 1)] = xi;
            stacked.col(col++) = xi;
            const double res = (gc * xi - lambda0 * xi + prev).norm() / std::max(1.0, xi.norm());
            worst = std::max(worst, res);
            prev = xi;
        }
    }
    out.chain_residual = worst;
    Eigen::JacobiSVD<CMat> svd(stacked);
    out.basis_sigma_min = svd.singularValues()(svd.singularValues().size() - 1);
    if (out.basis_sigma_min <= tol)
        throw StructureError("jordan: chain vectors nearly dependent (sigma_min " +
                             std::to_string(out.basis_sigma_min) + ")");
    return out;
}

EtaChainSet eta_chains(const JordanChainSet& in) {
    EtaChainSet out;
    out.lambda0 = in.lambda0;
    out.theta0 = in.theta0;
    out.sizes = in.sizes;
    out.grouping = in.grouping;
    const Complex unit = in.lambda0 / std::abs(in.lambda0);
    const Complex factor = -kI * unit;  // -i e^{i theta0}
    out.chains.resize(in.chains.size());
    for (size_t i = 0; i < in.chains.size(); ++i) {
        out.chains[i].resize(in.chains[i].size());
        Complex pw = 1.0;
        for (size_t j = 0; j < in.chains[i].size(); ++j) {
            pw *= factor;  // factor^j for xi_{i,j}, j = 1-based
            out.chains[i][j] = pw * in.chains[i][j];
        }
    }
    return out;
}

}  // namespace bifurc

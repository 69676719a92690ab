#include "bifurc/bifurcation.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace bifurc {

namespace {

Complex ipow(Complex base, int k) {
    Complex acc = 1.0;
    for (int i = 0; i < k; ++i) acc *= base;
    return acc;
}

// Column scaling of Eq. (3.5): (-1)^{j-1} (i e^{i theta0})^j.
Complex d_column_factor(int j, double theta0) {
    const Complex iu = kI * std::polar(1.0, theta0);
    return static_cast<double>((j % 2 == 1) ? 1 : -1) * ipow(iu, j);
}

}  // namespace

CMat build_S(const EtaChainSet& etas, const Mat& A0) {
    const int m = static_cast<int>(etas.chains.size());
    if (m == 0) throw ContractError("build_S: empty chain set");
    const CMat Ac = A0.cast<Complex>();
    CMat S(m, m);
    for (int i = 0; i < m; ++i)
        for (int ip = 0; ip < m; ++ip) {
            const CVec& ei = etas.chains[static_cast<size_t>(i)][0];
            const CVec& eip = etas.chains[static_cast<size_t>(ip)][0];
            // <A0 eta_i, eta_ip> with <x, y> = sum x conj(y)
            S(i, ip) = (eip.adjoint() * (Ac * ei))(0);
        }
    return S;
}

CMat build_X(const EtaChainSet& etas) {
    const int m = static_cast<int>(etas.chains.size());
    if (m == 0) throw ContractError("build_X: empty chain set");
    CMat X(m, m);
    for (int i = 0; i < m; ++i)
        for (int ip = 0; ip < m; ++ip) {
            const CVec& top = etas.chains[static_cast<size_t>(i)].back();  // eta_{i, j_i}
            const CVec& first = etas.chains[static_cast<size_t>(ip)][0];   // eta_{ip, 1}
            X(i, ip) = krein_pair(top, first);
        }
    return X;
}

CMat build_d(const CMat& S, const CMat& X, const std::vector<int>& sizes, double theta0) {
    const Eigen::Index m = S.rows();
    if (X.rows() != m || static_cast<Eigen::Index>(sizes.size()) != m)
        throw ContractError("build_d: dimension mismatch");
    Eigen::JacobiSVD<CMat> svd(X);
    const double cond = svd.singularValues()(0) / svd.singularValues()(m - 1);
    if (!std::isfinite(cond) || svd.singularValues()(m - 1) <= 0.0)
        throw StructureError("build_d: X numerically singular");
    CMat d = S * X.inverse();
    for (Eigen::Index c = 0; c < m; ++c)
        d.col(c) *= d_column_factor(sizes[static_cast<size_t>(c)], theta0);
    return d;
}

BifurcationMatrices bifurcation_matrices(const EtaChainSet& etas, const Mat& A0, double tol) {
    BifurcationMatrices out;
    out.grouping = etas.grouping;
    out.sizes = etas.sizes;
    out.lambda0 = etas.lambda0;
    out.theta0 = etas.theta0;

    out.S = build_S(etas, A0);
    out.X = build_X(etas);

    // xi-form cross-checks of Eqs. (1.12)-(1.13). Reconstruct the xi
    // chains from the unit-modulus eta scaling.
    const int m = static_cast<int>(etas.chains.size());
    const Complex f = -kI * std::polar(1.0, etas.theta0);
    const Complex finv = std::conj(f);
    std::vector<std::vector<CVec>> xi(etas.chains.size());
    for (size_t i = 0; i < etas.chains.size(); ++i) {
        xi[i].resize(etas.chains[i].size());
        Complex pw = 1.0;
        for (size_t j = 0; j < etas.chains[i].size(); ++j) {
            pw *= finv;
            xi[i][j] = pw * etas.chains[i][j];
        }
    }
    const Mat J = standard_J(static_cast<int>(etas.chains[0][0].size()));
    const CMat Jc = J.cast<Complex>();
    const CMat Ac = A0.cast<Complex>();
    double s_mis = 0.0, x_mis = 0.0;
    for (int i = 0; i < m; ++i)
        for (int ip = 0; ip < m; ++ip) {
            const Complex s_xi = (xi[static_cast<size_t>(ip)][0].adjoint() *
                                  (Ac * xi[static_cast<size_t>(i)][0]))(0);
            s_mis = std::max(s_mis, std::abs(s_xi - out.S(i, ip)));
            const int ji = etas.sizes[static_cast<size_t>(i)];
            const Complex phase = static_cast<double>((ji % 2 == 1) ? 1 : -1) * ipow(kI, ji) *
                                  std::polar(1.0, (ji - 1) * etas.theta0);
            const Complex braket = (xi[static_cast<size_t>(i)].back().transpose() * Jc *
                                    xi[static_cast<size_t>(ip)][0].conjugate())(0);
            // <xi_top, J xi_first> = sum_k xi_top_k conj((J xi_first)_k)
            const Complex x_xi = phase * braket;
            x_mis = std::max(x_mis, std::abs(x_xi - out.X(i, ip)));
        }
    out.S_mismatch = s_mis;
    out.X_mismatch = x_mis;
    const double scale = std::max({1.0, out.S.norm(), out.X.norm()});
    if (s_mis > 100.0 * tol * scale || x_mis > 100.0 * tol * scale)
        throw StructureError("bifurcation_matrices: eta/xi forms disagree (S " +
                             std::to_string(s_mis) + ", X " + std::to_string(x_mis) + ")");

    // Corollary 2.3 block structure of X
    const auto& g = out.grouping;
    double lower = 0.0;
    for (int l2 = 0; l2 < g.s; ++l2)
        for (int l1 = 0; l1 < l2; ++l1) {
            const int r0 = g.block_offset(l2), c0 = g.block_offset(l1);
            lower = std::max(lower, out.X.block(r0, c0, g.m[static_cast<size_t>(l2)],
                                                g.m[static_cast<size_t>(l1)])
                                        .norm());
        }
    out.lower_block_residual = lower;
    if (lower > 100.0 * tol * scale)
        throw StructureError("bifurcation_matrices: strictly-lower X blocks do not vanish");

    out.S = Complex(0.5) * (out.S + CMat(out.S.adjoint()));
    Eigen::JacobiSVD<CMat> svd(out.X);
    out.X_condition = svd.singularValues()(0) / svd.singularValues()(m - 1);
    out.d = build_d(out.S, out.X, out.sizes, out.theta0);
    return out;
}

std::vector<double> branch_roots(const CMat& S, const CMat& X, const BlockGrouping& grouping,
                                 int block_l, double tol) {
    if (block_l < 0 || block_l >= grouping.s) throw ContractError("branch_roots: bad block index");
    const int head = grouping.block_offset(block_l) + grouping.m[static_cast<size_t>(block_l)];
    const int ml = grouping.m[static_cast<size_t>(block_l)];
    const int off = grouping.block_offset(block_l);

    const CMat S_head = Complex(0.5) * (S.topLeftCorner(head, head) +
                                        CMat(S.topLeftCorner(head, head).adjoint()));
    CMat X_hat = CMat::Zero(head, head);
    X_hat.block(off, off, ml, ml) = Complex(0.5) * (X.block(off, off, ml, ml) +
                                                    CMat(X.block(off, off, ml, ml).adjoint()));

    // Finite generalized eigenvalues of (S_head, X_hat): with S_head
    // Hermitian positive definite, mu = 1/z are the eigenvalues of
    // L^{-1} X_hat L^{-*}; the m_l largest in modulus are the finite roots.
    Eigen::LLT<CMat> llt(S_head);
    if (llt.info() != Eigen::Success)
        throw NumericalError(
            "branch_roots: S head block not positive definite (assumption (1.7) violated?)");
    const CMat L = llt.matrixL();
    const CMat Mred = L.triangularView<Eigen::Lower>().solve(
        CMat(L.triangularView<Eigen::Lower>().solve(X_hat).adjoint()));
    Eigen::SelfAdjointEigenSolver<CMat> es(Complex(0.5) * (Mred + CMat(Mred.adjoint())));
    if (es.info() != Eigen::Success) throw NumericalError("branch_roots: eigensolver failed");

    std::vector<double> mu(es.eigenvalues().data(), es.eigenvalues().data() + head);
    std::sort(mu.begin(), mu.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
    const double scale = std::max(1.0, std::abs(mu.front()));
    std::vector<double> roots;
    for (int i = 0; i < ml; ++i) {
        const double m_i = mu[static_cast<size_t>(i)];
        if (std::abs(m_i) <= tol * scale)
            throw NumericalError("branch_roots: fewer finite roots than the block multiplicity");
        roots.push_back(1.0 / m_i);
    }
    if (head > ml && std::abs(mu[static_cast<size_t>(ml)]) > 1e-3 * std::abs(mu[static_cast<size_t>(ml - 1)]))
        throw NumericalError("branch_roots: finite/infinite eigenvalue separation is poor");
    for (double r : roots)
        if (std::abs(r) <= tol)
            throw NumericalError("branch_roots: near-zero root under assumption (1.7)");
    std::sort(roots.begin(), roots.end());
    return roots;
}

bool weak_nondegeneracy_gate(const CMat& S, const BlockGrouping& grouping, double tol) {
    for (int l = 0; l < grouping.s; ++l) {
        const int head = grouping.block_offset(l) + grouping.m[static_cast<size_t>(l)];
        const Complex det = S.topLeftCorner(head, head).determinant();
        if (std::abs(det) <= tol) return false;
    }
    return true;
}

std::string to_string(BranchFate f) {
    switch (f) {
        case BranchFate::CirclePositive: return "circle-positive";
        case BranchFate::CircleNegative: return "circle-negative";
        case BranchFate::OffCircle: return "off-circle";
    }
    return "?";
}

namespace {

// Leading coefficient of lambda(t) - lambda0 for one branch and one sign
// of t: i e^{i theta0} times the Eq. (1.14) phase at |t| = 1.
Complex lead_coefficient(double a, int n, int q, double theta0, int sign_t) {
    const double sa = (sign_t * (a > 0 ? 1 : -1) > 0) ? 1.0 : -1.0;  // sgn(t a)
    const double mag = std::pow(std::abs(a), 1.0 / n);
    Complex phase = std::polar(1.0, 2.0 * M_PI * q / n);
    if (n % 2 == 1) {
        phase *= sa;
    } else {
        phase *= std::polar(1.0, M_PI / (2.0 * n) * (1.0 - sa));
    }
    return kI * std::polar(1.0, theta0) * mag * phase;
}

BranchFate fate(double a, int n, int q, int sign_t) {
    const bool ta_pos = sign_t * (a > 0 ? 1 : -1) > 0;
    if (n % 2 == 1) {
        if (q != 0) return BranchFate::OffCircle;
        return ta_pos ? BranchFate::CirclePositive : BranchFate::CircleNegative;
    }
    if (!ta_pos) return BranchFate::OffCircle;
    if (q == 0) return BranchFate::CirclePositive;
    if (q == n / 2) return BranchFate::CircleNegative;
    return BranchFate::OffCircle;
}

}  // namespace

BranchPrediction predict_branches(const std::vector<std::vector<double>>& roots_per_group,
                                  double theta0, const BlockGrouping& grouping) {
    if (static_cast<int>(roots_per_group.size()) != grouping.s)
        throw ContractError("predict_branches: one root multiset per group expected");
    BranchPrediction out;
    out.theta0 = theta0;
    out.lambda0 = std::polar(1.0, theta0);
    out.grouping = grouping;
    out.roots_per_group = roots_per_group;
    for (int l = 0; l < grouping.s; ++l) {
        const int n = grouping.n[static_cast<size_t>(l)];
        const auto& roots = roots_per_group[static_cast<size_t>(l)];
        if (static_cast<int>(roots.size()) != grouping.m[static_cast<size_t>(l)])
            throw ContractError("predict_branches: root count must equal the block multiplicity");
        for (int p = 0; p < static_cast<int>(roots.size()); ++p) {
            const double a = roots[static_cast<size_t>(p)];
            for (int q = 0; q < n; ++q) {
                Branch b;
                b.l = l;
                b.p = p;
                b.q = q;
                b.a = a;
                b.n = n;
                b.holder = 1.0 / n;
                b.lead_pos = lead_coefficient(a, n, q, theta0, +1);
                b.lead_neg = lead_coefficient(a, n, q, theta0, -1);
                b.fate_pos = fate(a, n, q, +1);
                b.fate_neg = fate(a, n, q, -1);
                out.branches.push_back(b);
            }
        }
    }
    // reconstruct sizes for serialization convenience
    for (int l = 0; l < grouping.s; ++l)
        for (int c = 0; c < grouping.m[static_cast<size_t>(l)]; ++c)
            out.sizes.push_back(grouping.n[static_cast<size_t>(l)]);
    return out;
}

BranchPrediction predict_at(const Mat& gamma, const Mat& A0, Complex lambda0,
                            const JordanOptions& opts) {
    const JordanChainSet chains = jordan_chains(gamma, lambda0, opts);
    const EtaChainSet etas = eta_chains(chains);
    const BifurcationMatrices bm = bifurcation_matrices(etas, A0, opts.tol);
    std::vector<std::vector<double>> roots;
    for (int l = 0; l < bm.grouping.s; ++l)
        roots.push_back(branch_roots(bm.S, bm.X, bm.grouping, l));
    BranchPrediction pred = predict_branches(roots, bm.theta0, bm.grouping);
    pred.lambda0 = lambda0;
    return pred;
}

}  // namespace bifurc

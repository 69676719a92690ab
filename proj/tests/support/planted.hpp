#pragma once

// Test-support generators: random symplectic matrices and symplectic
// matrices with a planted Jordan structure at a chosen unit-circle
// eigenvalue. Independent of the library's chain-extraction path: the
// construction works from the invariant-pairing equation directly, so it
// serves as an oracle for jordan_chains and the structural lemmas.

#include "bifurc/core.hpp"
#include "bifurc/reduction.hpp"

#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <random>
#include <vector>

namespace bifurc::testsupport {

inline Mat rotation2(double theta) {
    Mat r(2, 2);
    r << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
    return r;
}

// exp(J S) with a random symmetric S of the given scale.
inline Mat random_symplectic(int two_n, unsigned seed, double scale = 0.3) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Mat s(two_n, two_n);
    for (int i = 0; i < two_n; ++i)
        for (int j = 0; j < two_n; ++j) s(i, j) = g(rng);
    s = Mat(0.5 * (s + s.transpose())) * (scale / std::sqrt(static_cast<double>(two_n)));
    const Mat js = standard_J(two_n) * s;
    return js.exp();
}

inline Mat random_spd(int n, unsigned seed, double shift = 0.5) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Mat w(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) w(i, j) = g(rng);
    return Mat(w.transpose() * w) / n + shift * Mat::Identity(n, n);
}

// Jordan action on the chain basis: gamma xi_{i,j} = lambda0 xi_{i,j} - xi_{i,j-1}.
inline CMat chain_action(const std::vector<int>& sizes, Complex lambda0) {
    int N = 0;
    for (int v : sizes) N += v;
    CMat T = CMat::Zero(N, N);
    int off = 0;
    for (int sz : sizes) {
        for (int j = 0; j < sz; ++j) {
            T(off + j, off + j) = lambda0;
            if (j > 0) T(off + j - 1, off + j) = -1.0;
        }
        off += sz;
    }
    return T;
}

struct PlantedInstance {
    Mat gamma;
    Complex lambda0;
    std::vector<int> sizes;
    double build_residual = 0.0;  // symplecticity + realness of the raw build
};

// Hermitian solutions P of T* P T = P, as a real-parametrized nullspace.
inline std::vector<CMat> invariant_pairings(const CMat& T) {
    const int N = static_cast<int>(T.rows());
    const int params = N * N;  // N real diag + N(N-1)/2 complex offdiag
    auto unpack = [&](const Vec& x) -> CMat {
        CMat P = CMat::Zero(N, N);
        int idx = 0;
        for (int i = 0; i < N; ++i) P(i, i) = x(idx++);
        for (int i = 0; i < N; ++i)
            for (int j = i + 1; j < N; ++j) {
                P(i, j) = Complex(x(idx), x(idx + 1));
                P(j, i) = std::conj(P(i, j));
                idx += 2;
            }
        return P;
    };
    Mat L(2 * N * N, params);
    for (int c = 0; c < params; ++c) {
        Vec e = Vec::Zero(params);
        e(c) = 1.0;
        const CMat P = unpack(e);
        const CMat R = T.adjoint() * P * T - P;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                L(2 * (i * N + j), c) = R(i, j).real();
                L(2 * (i * N + j) + 1, c) = R(i, j).imag();
            }
    }
    Eigen::JacobiSVD<Mat> svd(L, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double thr = 1e-10 * (sv.size() ? sv(0) : 1.0);
    std::vector<CMat> basis;
    for (Eigen::Index c = 0; c < svd.matrixV().cols(); ++c) {
        const double s = (c < sv.size()) ? sv(c) : 0.0;
        if (s <= thr) basis.push_back(unpack(svd.matrixV().col(c)));
    }
    return basis;
}

// Real symplectic 2N x 2N matrix whose spectrum is {lambda0, conj(lambda0)}
// with the prescribed Jordan sizes at each. Requires lambda0 off the real
// axis (theta0 away from 0 and pi).
inline PlantedInstance plant_structure(const std::vector<int>& sizes, double theta0,
                                       unsigned seed) {
    int N = 0;
    for (int v : sizes) N += v;
    const Complex lambda0 = std::polar(1.0, theta0);
    const CMat T = chain_action(sizes, lambda0);
    const std::vector<CMat> pair_basis = invariant_pairings(T);
    if (pair_basis.empty()) throw std::runtime_error("plant_structure: no invariant pairing");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    CMat P;
    double cond = 1e300;
    for (int attempt = 0; attempt < 64; ++attempt) {
        CMat cand = CMat::Zero(N, N);
        for (const auto& b : pair_basis) cand += g(rng) * b;
        Eigen::JacobiSVD<CMat> svd(cand);
        const auto& sv = svd.singularValues();
        const double c = sv(0) / sv(N - 1);
        if (c < 100.0) {
            P = Complex(1.0 / sv(0)) * cand;  // normalize the scale
            cond = c;
            break;
        }
    }
    if (cond > 1e299) throw std::runtime_error("plant_structure: could not draw an invertible pairing");

    // Split P = U D U*; positive part rides the H-positive frame f_a,
    // negative part the conjugate frame.
    Eigen::SelfAdjointEigenSolver<CMat> es(P);
    const CMat U = es.eigenvectors();
    Vec dpos = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Vec dneg = (-es.eigenvalues()).cwiseMax(0.0).cwiseSqrt();
    const CMat Fp = dpos.cast<Complex>().asDiagonal() * U.adjoint();
    const CMat Fm = dneg.cast<Complex>().asDiagonal() * U.adjoint();

    // H-orthonormal frames: f_a = (e_a, i e_a)/sqrt(2), conj on the other side
    CMat Fplus = CMat::Zero(2 * N, N), Fminus = CMat::Zero(2 * N, N);
    for (int a = 0; a < N; ++a) {
        Fplus(a, a) = Complex(1.0 / std::sqrt(2.0), 0.0);
        Fplus(N + a, a) = Complex(0.0, 1.0 / std::sqrt(2.0));
        Fminus(a, a) = Complex(1.0 / std::sqrt(2.0), 0.0);
        Fminus(N + a, a) = Complex(0.0, -1.0 / std::sqrt(2.0));
    }
    const CMat Z1 = Fplus * Fp + Fminus * Fm;
    CMat Z(2 * N, 2 * N);
    Z.leftCols(N) = Z1;
    Z.rightCols(N) = Z1.conjugate();

    CMat big = CMat::Zero(2 * N, 2 * N);
    big.topLeftCorner(N, N) = T;
    big.bottomRightCorner(N, N) = T.conjugate();
    const CMat gamma_c = Z * big * Z.partialPivLu().inverse();

    PlantedInstance out;
    out.lambda0 = lambda0;
    out.sizes = sizes;
    out.gamma = gamma_c.real();
    out.build_residual = gamma_c.imag().norm() + symplectic_residual(out.gamma);
    return out;
}

// Planted structure, optionally padded with extra rotation blocks through
// the symplectic sum and hidden by a random symplectic conjugation.
inline PlantedInstance planted_symplectic(const std::vector<int>& sizes, double theta0,
                                          unsigned seed, const std::vector<double>& extra_angles = {},
                                          double conj_scale = 0.25) {
    PlantedInstance inst = plant_structure(sizes, theta0, seed);
    for (double ang : extra_angles) inst.gamma = symplectic_sum(inst.gamma, rotation2(ang));
    const Mat theta = random_symplectic(static_cast<int>(inst.gamma.rows()), seed ^ 0x9e3779b9u,
                                        conj_scale);
    inst.gamma = theta * inst.gamma * theta.inverse();
    inst.build_residual += symplectic_residual(inst.gamma);
    return inst;
}

}  // namespace bifurc::testsupport

#include "bifurc/flow.hpp"
#include "bifurc/krein.hpp"
#include "bifurc/spectral.hpp"

#include "support/planted.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace bifurc;
using namespace bifurc::testsupport;

TEST_CASE("krein_pair: hand values at 2n = 2") {
    CVec v(2);
    v << Complex(1, 0), Complex(0, 1);  // (1, i)
    CHECK(std::abs(krein_pair(v, v) - Complex(2, 0)) <= 1e-15);

    CVec w = v.conjugate();  // (1, -i)
    CHECK(std::abs(krein_pair(w, w) - Complex(-2, 0)) <= 1e-15);
}

TEST_CASE("krein_gram: shear chain basis gives [[0,1],[1,0]]") {
    CMat basis(2, 2);
    basis.col(0) << Complex(0, -1), Complex(0, 0);  // eta_{1,1}
    basis.col(1) << Complex(0, 0), Complex(1, 0);   // eta_{1,2}
    const CMat G = krein_gram(basis);
    CMat expected(2, 2);
    expected << 0, 1, 1, 0;
    CHECK((G - expected).norm() <= 1e-15);
    // exactly Hermitian
    CHECK((G - CMat(G.adjoint())).norm() == 0.0);
}

TEST_CASE("krein_gram: Hermitian symmetry (x,y) = conj((y,x)) on random bases") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0, 1);
    CMat basis(6, 3);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 3; ++j) basis(i, j) = Complex(g(rng), g(rng));
    const CMat G = krein_gram(basis);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) CHECK(std::abs(G(a, b) - std::conj(G(b, a))) == 0.0);
}

TEST_CASE("krein_signature: basic classifications") {
    CMat one(1, 1);
    one << Complex(2, 0);
    auto s = krein_signature(one, 1e-12);
    CHECK(s.p == 1);
    CHECK(s.q == 0);
    CHECK(s.z == 0);
    CHECK(s.positive_definite());

    CMat swap(2, 2);
    swap << 0, 1, 1, 0;
    s = krein_signature(swap, 1e-12);
    CHECK(s.p == 1);
    CHECK(s.q == 1);
    CHECK(s.indefinite());

    CMat zero = CMat::Zero(1, 1);
    s = krein_signature(zero, 1e-12);
    CHECK(s.z == 1);
    CHECK(s.degenerate());
}

TEST_CASE("eigen_decompose: identity, rotation, shear") {
    auto spec = eigen_decompose(Mat::Identity(4, 4));
    CHECK(spec.clusters.size() == 1);
    CHECK(spec.clusters[0].multiplicity == 4);
    CHECK(std::abs(spec.clusters[0].value - Complex(1, 0)) <= 1e-12);

    spec = eigen_decompose(rotation2(0.3));
    CHECK(spec.clusters.size() == 2);
    std::vector<Complex> vals{spec.clusters[0].value, spec.clusters[1].value};
    std::sort(vals.begin(), vals.end(), [](Complex a, Complex b) { return a.imag() < b.imag(); });
    CHECK(std::abs(vals[0] - std::polar(1.0, -0.3)) <= 1e-12);
    CHECK(std::abs(vals[1] - std::polar(1.0, 0.3)) <= 1e-12);

    Mat shear(2, 2);
    shear << 1, 1, 0, 1;
    spec = eigen_decompose(shear);
    CHECK(spec.clusters.size() == 1);
    CHECK(spec.clusters[0].multiplicity == 2);
}

TEST_CASE("quadruple_partners: self-reciprocal pair, quartet, identity") {
    auto spec = eigen_decompose(rotation2(0.4));
    auto groups = quadruple_partners(spec, 1e-8);
    CHECK(groups.size() == 1);
    CHECK(groups[0].size() == 2);

    // hyperbolic focus: exp of blockdiag(C, -C^T) has the full quartet
    Mat C(2, 2);
    C << 0.3, -0.9, 0.9, 0.3;
    Mat X = Mat::Zero(4, 4);
    X.block(0, 0, 2, 2) = C;
    X.block(2, 2, 2, 2) = -C.transpose();
    const Mat gamma = X.exp();
    CHECK(symplectic_residual(gamma) <= 1e-12);
    spec = eigen_decompose(gamma);
    CHECK(spec.clusters.size() == 4);
    groups = quadruple_partners(spec, 1e-8);
    CHECK(groups.size() == 1);
    CHECK(groups[0].size() == 4);

    spec = eigen_decompose(Mat::Identity(6, 6));
    groups = quadruple_partners(spec, 1e-8);
    CHECK(groups.size() == 1);

    const Mat gamma2 = symplectic_sum(rotation2(0.5), rotation2(1.1));
    auto spec2 = eigen_decompose(gamma2);
    auto g2 = quadruple_partners(spec2, 1e-8);
    CHECK(g2.size() == 2);
}

TEST_CASE("quadruple_partners: closure failure on a non-symplectic spectrum") {
    Mat bad = Mat::Zero(2, 2);
    bad(0, 0) = 2.0;
    bad(1, 1) = 3.0;  // no reciprocal partner
    const auto spec = eigen_decompose(bad);
    CHECK_THROWS_AS(quadruple_partners(spec, 1e-8), StructureError);
}

TEST_CASE("invariant_subspace: identity and block rotations") {
    auto spec = eigen_decompose(Mat::Identity(2, 2));
    auto sub = invariant_subspace(Mat::Identity(2, 2), spec, 0);
    CHECK(sub.basis.cols() == 2);
    CHECK(sub.residual <= 1e-12);

    const Mat gamma = symplectic_sum(rotation2(0.5), rotation2(1.3));
    spec = eigen_decompose(gamma);
    for (const auto& cl : spec.clusters) {
        auto s = invariant_subspace(gamma, spec, cl.id);
        CHECK(s.basis.cols() == 1);
        CHECK(s.residual <= 1e-10);
        const CMat gc = gamma.cast<Complex>();
        const CMat comp = s.basis.adjoint() * gc * s.basis;
        CHECK((gc * s.basis - s.basis * comp).norm() <= 1e-10);
    }
}

TEST_CASE("G-orthogonality of invariant subspaces with lambda conj(mu) != 1") {
    const Mat gamma = symplectic_sum(rotation2(0.5), rotation2(1.3));
    const auto spec = eigen_decompose(gamma);
    for (const auto& a : spec.clusters)
        for (const auto& b : spec.clusters) {
            if (std::abs(a.value * std::conj(b.value) - Complex(1, 0)) < 1e-6) continue;
            const auto va = invariant_subspace(gamma, spec, a.id);
            const auto vb = invariant_subspace(gamma, spec, b.id);
            CMat cross(va.basis.cols(), vb.basis.cols());
            for (Eigen::Index i = 0; i < va.basis.cols(); ++i)
                for (Eigen::Index j = 0; j < vb.basis.cols(); ++j)
                    cross(i, j) = krein_pair(va.basis.col(i), vb.basis.col(j));
            CHECK(cross.norm() <= 1e-10);
        }
}

TEST_CASE("adjointness: (gamma x, y)_G = (x, gamma^{-1} y)_G") {
    const Mat gamma = random_symplectic(6, 42, 0.7);
    const Mat gamma_inv = gamma.inverse();
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0, 1);
    for (int trial = 0; trial < 20; ++trial) {
        CVec x(6), y(6);
        for (int i = 0; i < 6; ++i) {
            x(i) = Complex(g(rng), g(rng));
            y(i) = Complex(g(rng), g(rng));
        }
        const Complex lhs = krein_pair(CVec(gamma.cast<Complex>() * x), y);
        const Complex rhs = krein_pair(x, CVec(gamma_inv.cast<Complex>() * y));
        CHECK(std::abs(lhs - rhs) <= 1e-11 * (1.0 + std::abs(lhs)));
    }
}

TEST_CASE("simple unit-circle eigenvalues are Krein definite") {
    const Mat gamma = symplectic_sum(rotation2(0.7), rotation2(2.1));
    const auto spec = eigen_decompose(gamma);
    for (const auto& cl : spec.clusters) {
        if (cl.multiplicity != 1) continue;
        const auto sig = cluster_signature(gamma, spec, cl.id);
        CHECK(sig.z == 0);
        CHECK(sig.p * sig.q == 0);
    }
}

TEST_CASE("check_convexity_assumption: examples") {
    auto report = check_convexity_assumption(Mat::Identity(2, 2), rotation2(0.4));
    CHECK(report.satisfied);
    CHECK(report.worst_margin == doctest::Approx(1.0).epsilon(1e-9));

    report = check_convexity_assumption(-Mat::Identity(2, 2), rotation2(0.4));
    CHECK_FALSE(report.satisfied);
    CHECK(report.worst_margin == doctest::Approx(-1.0).epsilon(1e-9));

    // A = diag(1,-1) with the shear: only the kernel direction (1,0) matters
    Mat shear(2, 2);
    shear << 1, 1, 0, 1;
    Mat A = Mat::Zero(2, 2);
    A(0, 0) = 1;
    A(1, 1) = -1;
    report = check_convexity_assumption(A, shear);
    CHECK(report.satisfied);
    CHECK(report.worst_margin == doctest::Approx(1.0).epsilon(1e-9));

    report = check_convexity_assumption(Mat::Zero(2, 2), rotation2(0.4));
    CHECK_FALSE(report.satisfied);
}

TEST_CASE("stability_verdict: rotation strongly stable, shear unstable, Id stable only") {
    auto v = stability_verdict(rotation2(0.3));
    CHECK(v.verdict == StabilityClass::StronglyStable);

    Mat shear(2, 2);
    shear << 1, 1, 0, 1;
    v = stability_verdict(shear);
    CHECK(v.verdict == StabilityClass::Unstable);
    // power growth confirms
    Mat p = shear;
    for (int n = 0; n < 5; ++n) p = p * shear;
    CHECK(p.norm() > shear.norm() + 4.0);

    v = stability_verdict(Mat::Identity(4, 4));
    CHECK(v.verdict == StabilityClass::Stable);  // full-space signature (n, n)

    Mat hyp = Mat::Zero(2, 2);
    hyp(0, 0) = 2.0;
    hyp(1, 1) = 0.5;
    v = stability_verdict(hyp);
    CHECK(v.verdict == StabilityClass::Unstable);
}

TEST_CASE("planted structures: G-orthogonality across conjugate clusters") {
    for (unsigned seed : {11u, 12u, 13u}) {
        const auto inst = planted_symplectic({2, 1}, 1.0, seed, {2.4});
        CHECK(inst.build_residual <= 1e-10);
        const auto spec = eigen_decompose(inst.gamma);
        for (const auto& a : spec.clusters)
            for (const auto& b : spec.clusters) {
                if (std::abs(a.value * std::conj(b.value) - Complex(1, 0)) < 1e-4) continue;
                const auto va = invariant_subspace(inst.gamma, spec, a.id);
                const auto vb = invariant_subspace(inst.gamma, spec, b.id);
                CMat cross(va.basis.cols(), vb.basis.cols());
                for (Eigen::Index i = 0; i < va.basis.cols(); ++i)
                    for (Eigen::Index j = 0; j < vb.basis.cols(); ++j)
                        cross(i, j) = krein_pair(va.basis.col(i), vb.basis.col(j));
                CHECK(cross.norm() <= 1e-8);
            }
    }
}

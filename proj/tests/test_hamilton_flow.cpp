#include "bifurc/flow.hpp"
#include "bifurc/hamiltonian_curve.hpp"

#include <doctest.h>

#include <cmath>

using namespace bifurc;

namespace {

// closed-form flow of A = Id_2: gamma(t) = exp(tJ) gamma0
Mat exp_tJ(double t) {
    Mat m(2, 2);
    m << std::cos(t), std::sin(t), -std::sin(t), std::cos(t);
    return m;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
    return v;
}

}  // namespace

TEST_CASE("evaluate: constant, polynomial, samples") {
    const auto c = HamiltonianCurve::constant(Mat::Identity(2, 2));
    CHECK((c.evaluate(0.7) - Mat::Identity(2, 2)).norm() == 0.0);

    Mat b(2, 2);
    b << 1, 2, 2, -1;
    const auto p = HamiltonianCurve::polynomial({Mat::Zero(2, 2), b});
    CHECK(p.evaluate(0.0).norm() == 0.0);
    CHECK((p.evaluate(2.0) - 2.0 * b).norm() == 0.0);

    std::vector<double> ts{0.0, 0.5, 1.0, 2.0};
    std::vector<Mat> vs;
    for (double t : ts) vs.push_back(t * b + Mat::Identity(2, 2));
    const auto s = HamiltonianCurve::samples(ts, vs);
    for (size_t i = 0; i < ts.size(); ++i) CHECK((s.evaluate(ts[i]) - vs[i]).norm() == 0.0);
    CHECK_THROWS_AS(s.evaluate(3.0), ContractError);

    // deterministic evaluation
    CHECK((s.evaluate(0.77) - s.evaluate(0.77)).norm() == 0.0);
    // symmetry is exact
    const Mat mid = s.evaluate(0.31);
    CHECK((mid - mid.transpose()).norm() == 0.0);
}

TEST_CASE("evaluate: periodic sample curve reproduces itself one period later") {
    Mat b(2, 2);
    b << 1, 0.5, 0.5, 2;
    std::vector<double> ts{0.0, 1.0, 2.0, 3.0, 4.0};
    std::vector<Mat> vs{Mat::Identity(2, 2), b, Mat::Identity(2, 2), 2 * b, Mat::Identity(2, 2)};
    auto s = HamiltonianCurve::samples(ts, vs, 4.0);
    CHECK((s.evaluate(0.5 + 4.0) - s.evaluate(0.5)).norm() == 0.0);
    CHECK((s.evaluate(2.25 + 4.0) - s.evaluate(2.25)).norm() == 0.0);
}

TEST_CASE("propagate: A = 0 keeps gamma fixed") {
    const auto zero = HamiltonianCurve::constant(Mat::Zero(2, 2));
    Mat g0(2, 2);
    g0 << 1, 1, 0, 1;
    const auto res = propagate(zero, SymplecticMatrix::checked(g0), linspace(0, 2, 11));
    for (const auto& g : res.gammas) CHECK((g - g0).norm() <= 1e-14);
}

TEST_CASE("propagate: rotation oracle exp(tJ)") {
    const auto id2 = HamiltonianCurve::constant(Mat::Identity(2, 2));
    PropagateOptions opts;
    opts.tol = 1e-10;
    const auto grid = linspace(0, 1, 21);
    const auto res = propagate(id2, SymplecticMatrix::checked(Mat::Identity(2, 2)), grid, opts);
    double worst = 0.0;
    for (size_t k = 0; k < grid.size(); ++k)
        worst = std::max(worst, (res.gammas[k] - exp_tJ(grid[k])).norm());
    CHECK(worst <= 1e-9);
    CHECK(res.drift.back() <= 1e-9);
    // gamma(t0) is the initial condition exactly
    CHECK((res.gammas[0] - Mat::Identity(2, 2)).norm() == 0.0);
    // drift is a running max
    for (size_t k = 1; k < res.drift.size(); ++k) CHECK(res.drift[k] >= res.drift[k - 1]);
}

TEST_CASE("propagate: shear initial condition, trace oracle 2cos t - sin t") {
    const auto id2 = HamiltonianCurve::constant(Mat::Identity(2, 2));
    Mat g0(2, 2);
    g0 << 1, 1, 0, 1;
    PropagateOptions opts;
    opts.tol = 1e-11;
    const auto grid = linspace(0, 0.5, 26);
    const auto res = propagate(id2, SymplecticMatrix::checked(g0), grid, opts);
    for (size_t k = 0; k < grid.size(); ++k) {
        const double t = grid[k];
        CHECK((res.gammas[k] - Mat(exp_tJ(t) * g0)).norm() <= 1e-9);
        CHECK(res.gammas[k].trace() ==
              doctest::Approx(2 * std::cos(t) - std::sin(t)).epsilon(1e-9));
    }
}

TEST_CASE("propagate: backward grids work") {
    const auto id2 = HamiltonianCurve::constant(Mat::Identity(2, 2));
    const auto res = propagate(id2, SymplecticMatrix::checked(Mat::Identity(2, 2)),
                               {0.0, -0.1, -0.2, -0.4});
    CHECK((res.gammas.back() - exp_tJ(-0.4)).norm() <= 1e-9);
}

TEST_CASE("propagate: symplecticity stays within 10 tol on all builtins") {
    for (const char* name : {"O1-shear", "O2-rotation", "O3-oscillators", "O4-coupled"}) {
        const auto curve = HamiltonianCurve::builtin(name);
        PropagateOptions opts;
        opts.tol = 1e-10;
        const auto res = propagate(curve, builtin_initial(name), linspace(0, 3, 31), opts);
        for (size_t k = 0; k < res.gammas.size(); ++k)
            CHECK(symplectic_residual(res.gammas[k]) <= 10 * opts.tol);
    }
}

TEST_CASE("propagate: cocycle property for the periodic builtin O4") {
    const auto curve = HamiltonianCurve::builtin("O4-coupled");
    const double T = 2 * M_PI;
    PropagateOptions opts;
    opts.tol = 1e-10;
    // grid containing t and t + T nodes
    std::vector<double> grid;
    for (int i = 0; i <= 40; ++i) grid.push_back(T * i / 20.0);  // covers [0, 2T]
    const auto res = propagate(curve, builtin_initial("O4-coupled"), grid, opts);
    const Mat gT = res.gammas[20];
    for (int i = 0; i <= 20; ++i) {
        const Mat lhs = res.gammas[static_cast<size_t>(i + 20)] * gT.inverse();
        const Mat rhs = res.gammas[static_cast<size_t>(i)];
        CHECK((lhs - rhs).norm() <= 20 * opts.tol * 1e3);  // scaled: product of inverses
    }
}

TEST_CASE("propagate: fourth-order convergence, halving the step gains >= 8x") {
    const auto id2 = HamiltonianCurve::constant(Mat::Identity(2, 2));
    auto run = [&](double max_step) {
        PropagateOptions opts;
        opts.tol = 1e30;  // force fixed steps through max_step
        opts.max_step = max_step;
        const auto res = propagate(id2, SymplecticMatrix::checked(Mat::Identity(2, 2)),
                                   {0.0, 1.0}, opts);
        return (res.gammas.back() - exp_tJ(1.0)).norm();
    };
    const double e1 = run(0.1), e2 = run(0.05);
    CHECK(e1 / e2 >= 8.0);
}

TEST_CASE("propagate: non-finite coefficients raise NumericalError") {
    std::vector<double> ts{0.0, 1.0};
    std::vector<Mat> vs{Mat::Identity(2, 2), Mat::Identity(2, 2)};
    vs[1](0, 0) = std::numeric_limits<double>::quiet_NaN();
    const auto curve = HamiltonianCurve::samples(ts, vs);
    CHECK_THROWS_AS(
        propagate(curve, SymplecticMatrix::checked(Mat::Identity(2, 2)), {0.0, 1.0}),
        NumericalError);
}

TEST_CASE("bernstein: constant curves are reproduced exactly") {
    Mat a(2, 2);
    a << 2, 1, 1, 3;
    const auto approx = bernstein_approximant(HamiltonianCurve::constant(a), 5);
    for (double t : {-1.0, -0.3, 0.0, 0.7, 1.0})
        CHECK((approx.evaluate(t) - a).norm() <= 1e-13);
}

TEST_CASE("bernstein: affine curves are reproduced exactly") {
    Mat b(2, 2);
    b << 1, -2, -2, 0.5;
    const auto curve = HamiltonianCurve::polynomial({Mat::Zero(2, 2), b});
    const auto approx = bernstein_approximant(curve, 6);
    for (double t : {-1.0, -0.4, 0.0, 0.2, 0.9, 1.0})
        CHECK((approx.evaluate(t) - t * b).norm() <= 1e-12);
}

TEST_CASE("bernstein: uniform error decreases with M on diag(1 + t^2)") {
    Mat z = Mat::Zero(2, 2);
    Mat id = Mat::Identity(2, 2);
    const auto curve = HamiltonianCurve::polynomial({id, z, id});  // 1 + t^2 on the diagonal
    double prev = 1e300;
    for (int M : {2, 4, 8, 16, 32}) {
        const auto approx = bernstein_approximant(curve, M);
        double sup = 0.0;
        for (int i = 0; i <= 200; ++i) {
            const double t = -1.0 + 2.0 * i / 200.0;
            sup = std::max(sup, (approx.evaluate(t) - curve.evaluate(t)).norm());
        }
        CHECK(sup < prev);
        prev = sup;
    }
}

TEST_CASE("perturbation: zero direction gives zero C and B") {
    const auto family =
        HamiltonianCurve::builtin("O2-rotation").with_direction(HamiltonianCurve::constant(Mat::Zero(2, 2)));
    const auto pm = perturbation_matrices(family, 1.0, 0.0, 16);
    CHECK(pm.C.norm() <= 1e-12);
    CHECK(pm.B.norm() <= 1e-12);
    CHECK(pm.discrepancy <= 1e-9);
    CHECK(pm.converged);
}

TEST_CASE("perturbation: A(t, eps) = eps Id at eps = 0, T = 0.5 gives C = 0.5 Id") {
    const auto family = HamiltonianCurve::constant(Mat::Zero(2, 2))
                            .with_direction(HamiltonianCurve::constant(Mat::Identity(2, 2)));
    const auto pm = perturbation_matrices(family, 0.5, 0.0, 16);
    CHECK((pm.C - 0.5 * Mat::Identity(2, 2)).norm() <= 1e-8);
    CHECK((pm.B - 0.5 * Mat::Identity(2, 2)).norm() <= 1e-8);
}

TEST_CASE("perturbation: both C formulas agree for A = Id + eps diag(1,0)") {
    Mat dir = Mat::Zero(2, 2);
    dir(0, 0) = 1.0;
    const auto family =
        HamiltonianCurve::constant(Mat::Identity(2, 2)).with_direction(HamiltonianCurve::constant(dir));
    const auto pm = perturbation_matrices(family, 1.0, 0.0, 32);
    CHECK(pm.discrepancy <= 1e-6);
    CHECK((pm.C - pm.C.transpose()).norm() == 0.0);
    CHECK((pm.B - pm.B.transpose()).norm() == 0.0);
    // B = (g^{-1})^T C g^{-1} within tolerance is implied by construction;
    // cross-check against an independent product
    const auto id2 = HamiltonianCurve::constant(Mat::Identity(2, 2));
    const Mat gT = propagate_to(id2, Mat::Identity(2, 2), 0.0, 1.0);
    const Mat expected_B = gT.inverse().transpose() * pm.C * gT.inverse();
    CHECK((pm.B - expected_B).norm() <= 1e-8);
    CHECK(pm.converged);
}

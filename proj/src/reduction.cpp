#include "bifurc/reduction.hpp"

#include "bifurc/charpoly.hpp"
#include "bifurc/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace bifurc {

namespace {

double omega(const Mat& J, const Vec& a, const Vec& b) { return a.dot(J * b); }

// Symplectic Gram-Schmidt. With free_pivot the pair with the largest
// |<u, J w>| is taken first (first node); otherwise columns are assumed
// pre-paired as (u_1..u_k, v_1..v_k) and processed in order, which keeps
// the frame continuous along the path.
Mat symplectic_gs(const Mat& cols, const Mat& J, bool free_pivot, double tol) {
    const int two_k = static_cast<int>(cols.cols());
    if (two_k % 2 != 0) throw ContractError("symplectic_gs: odd column count");
    const int k = two_k / 2;

    std::vector<Vec> work;
    for (int c = 0; c < two_k; ++c) work.push_back(cols.col(c));
    std::vector<Vec> us, vs;

    auto project_out = [&](const Vec& u, const Vec& v, std::vector<Vec>& rest) {
        for (auto& w : rest) w = w + omega(J, v, w) * u - omega(J, u, w) * v;
    };

    if (free_pivot) {
        while (!work.empty()) {
            size_t bi = 0, bj = 1;
            double best = -1.0;
            for (size_t i = 0; i < work.size(); ++i)
                for (size_t j = i + 1; j < work.size(); ++j) {
                    const double val = std::abs(omega(J, work[i], work[j]));
                    if (val > best) {
                        best = val;
                        bi = i;
                        bj = j;
                    }
                }
            if (best < tol) throw NumericalError("symplectic_gs: isotropic pivot below tolerance");
            Vec u = work[bi];
            Vec v = work[bj];
            u /= u.norm();
            v /= omega(J, u, v);
            std::vector<Vec> rest;
            for (size_t c = 0; c < work.size(); ++c)
                if (c != bi && c != bj) rest.push_back(work[c]);
            project_out(u, v, rest);
            us.push_back(u);
            vs.push_back(v);
            work = std::move(rest);
        }
    } else {
        std::vector<Vec> rest = work;
        for (int r = 0; r < k; ++r) {
            Vec u = rest[0];
            Vec v = rest[static_cast<size_t>(k - r)];
            const double un = u.norm();
            if (un < tol) throw NumericalError("symplectic_gs: degenerate basis column");
            u /= un;
            const double s = omega(J, u, v);
            if (std::abs(s) < tol) throw NumericalError("symplectic_gs: isotropic pivot below tolerance");
            v /= s;
            std::vector<Vec> next;
            for (size_t c = 1; c < rest.size(); ++c)
                if (c != static_cast<size_t>(k - r)) next.push_back(rest[c]);
            project_out(u, v, next);
            us.push_back(u);
            vs.push_back(v);
            rest = std::move(next);
        }
    }

    Mat T(cols.rows(), two_k);
    for (int r = 0; r < k; ++r) {
        T.col(r) = us[static_cast<size_t>(r)];
        T.col(k + r) = vs[static_cast<size_t>(r)];
    }
    return T;
}

}  // namespace

std::vector<Mat> projector_path(const std::vector<Mat>& gammas, const Contour& contour,
                                int start_nodes, double tol) {
    std::vector<Mat> out;
    out.reserve(gammas.size());
    for (const auto& g : gammas) out.push_back(riesz_projector(g, contour, start_nodes, tol).P);
    return out;
}

SymplecticFrame symplectic_frame(const std::vector<double>& times, const std::vector<Mat>& P,
                                 const Mat& seed, double tol) {
    if (times.size() != P.size() || times.size() < 2)
        throw ContractError("symplectic_frame: times/projectors mismatch");
    for (size_t i = 1; i < P.size(); ++i)
        if ((P[i] - P[i - 1]).norm() >= 0.5)
            throw ContractError("symplectic_frame: projector path not continuous enough");

    const int two_n = static_cast<int>(P[0].rows());
    const int two_k = static_cast<int>(seed.cols());
    const Mat J = standard_J(two_n);
    const Mat Jk = standard_J(two_k);

    SymplecticFrame out;
    out.times = times;
    out.k = two_k / 2;

    // T(t): project the seed and re-orthonormalize; pairing order is fixed
    // by the first node.
    std::vector<Mat> T(times.size());
    T[0] = symplectic_gs(P[0] * seed, J, /*free_pivot=*/true, tol);
    for (size_t i = 1; i < times.size(); ++i)
        T[i] = symplectic_gs(P[i] * T[i - 1], J, /*free_pivot=*/false, tol);

    // dT/dt by central differences
    std::vector<Mat> dT(times.size());
    for (size_t i = 0; i < times.size(); ++i) {
        if (i == 0)
            dT[i] = (T[1] - T[0]) / (times[1] - times[0]);
        else if (i + 1 == times.size())
            dT[i] = (T[i] - T[i - 1]) / (times[i] - times[i - 1]);
        else
            dT[i] = (T[i + 1] - T[i - 1]) / (times[i + 1] - times[i - 1]);
    }

    // generator G(t) = J_{2k} sym(T^T J dT/dt); symmetrizing keeps V
    // exactly symplectic up to integration error
    auto generator = [&](size_t i) -> Mat {
        Mat S = T[i].transpose() * J * dT[i];
        S = 0.5 * (S + Mat(S.transpose()));
        return Jk * S;
    };

    Mat V = Mat::Identity(two_k, two_k);
    out.Q.resize(times.size());
    out.Q[0] = T[0] * V;
    double worst = (out.Q[0].transpose() * J * out.Q[0] - Jk).norm();
    for (size_t i = 1; i < times.size(); ++i) {
        const double h_full = times[i] - times[i - 1];
        const Mat G0 = generator(i - 1);
        const Mat G1 = generator(i);
        const int sub = 4;
        const double h = h_full / sub;
        for (int s = 0; s < sub; ++s) {
            auto G_at = [&](double frac) -> Mat {
                const double x = (s + frac) / sub;
                return (1.0 - x) * G0 + x * G1;
            };
            const Mat k1 = G_at(0.0) * V;
            const Mat k2 = G_at(0.5) * (V + 0.5 * h * k1);
            const Mat k3 = G_at(0.5) * (V + 0.5 * h * k2);
            const Mat k4 = G_at(1.0) * (V + h * k3);
            V += (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4);
        }
        out.Q[i] = T[i] * V;
        worst = std::max(worst, (out.Q[i].transpose() * J * out.Q[i] - Jk).norm());
    }
    out.worst_frame_residual = worst;
    if (worst > std::max(tol, 1e-6))
        throw NumericalError("symplectic_frame: frame residual " + std::to_string(worst));
    return out;
}

ReducedSystem reduced_monodromy(const std::vector<double>& times, const std::vector<Mat>& gammas,
                                const SymplecticFrame& frame, const HamiltonianCurve& curve,
                                const Contour& contour, double tol) {
    if (times.size() != gammas.size() || times.size() != frame.Q.size())
        throw ContractError("reduced_monodromy: grid mismatch");
    const int two_n = static_cast<int>(gammas[0].rows());
    const int two_k = 2 * frame.k;
    const Mat J = standard_J(two_n);
    const Mat Jk = standard_J(two_k);

    ReducedSystem out;
    out.times = times;
    out.M.resize(times.size());
    out.B.resize(times.size());
    for (size_t i = 0; i < times.size(); ++i) {
        const Mat& Q = frame.Q[i];
        out.M[i] = -Jk * Q.transpose() * J * gammas[i] * Q;
        Mat B = Q.transpose() * curve.evaluate(times[i]) * Q;
        out.B[i] = 0.5 * (B + Mat(B.transpose()));
    }

    // finite-difference ODE residual on interior nodes
    double worst_res = 0.0;
    for (size_t i = 1; i + 1 < times.size(); ++i) {
        const Mat dM = (out.M[i + 1] - out.M[i - 1]) / (times[i + 1] - times[i - 1]);
        worst_res = std::max(worst_res, (dM - Jk * out.B[i] * out.M[i]).norm());
    }
    out.worst_ode_residual = worst_res;

    // spectrum(M_Q(t)) must be the eigenvalues of gamma(t) inside the contour
    double worst_spec = 0.0;
    for (size_t i = 0; i < times.size(); ++i) {
        Eigen::EigenSolver<Mat> big(gammas[i], false), small(out.M[i], false);
        std::vector<Complex> inside, reduced;
        for (Eigen::Index j = 0; j < big.eigenvalues().size(); ++j)
            if (std::abs(big.eigenvalues()(j) - contour.center) < contour.radius)
                inside.push_back(big.eigenvalues()(j));
        for (Eigen::Index j = 0; j < small.eigenvalues().size(); ++j)
            reduced.push_back(small.eigenvalues()(j));
        worst_spec = std::max(worst_spec, multiset_distance(inside, reduced));
    }
    out.worst_spectrum_mismatch = worst_spec;
    if (!(worst_spec <= tol))
        throw StructureError("reduced_monodromy: reduced spectrum mismatch " +
                             std::to_string(worst_spec));
    return out;
}

Mat symplectic_sum(const Mat& M1, const Mat& M2) {
    require_even_dim(M1, "symplectic_sum");
    require_even_dim(M2, "symplectic_sum");
    const int k1 = static_cast<int>(M1.rows()) / 2;
    const int k2 = static_cast<int>(M2.rows()) / 2;
    Mat out = Mat::Zero(2 * (k1 + k2), 2 * (k1 + k2));
    out.block(0, 0, k1, k1) = M1.block(0, 0, k1, k1);
    out.block(0, k1 + k2, k1, k1) = M1.block(0, k1, k1, k1);
    out.block(k1 + k2, 0, k1, k1) = M1.block(k1, 0, k1, k1);
    out.block(k1 + k2, k1 + k2, k1, k1) = M1.block(k1, k1, k1, k1);
    out.block(k1, k1, k2, k2) = M2.block(0, 0, k2, k2);
    out.block(k1, k1 + k2 + k1, k2, k2) = M2.block(0, k2, k2, k2);
    out.block(k1 + k2 + k1, k1, k2, k2) = M2.block(k2, 0, k2, k2);
    out.block(k1 + k2 + k1, k1 + k2 + k1, k2, k2) = M2.block(k2, k2, k2, k2);
    return out;
}

ReducedScenario reduced_scenario(const std::vector<double>& times, const SymplecticFrame& frame,
                                 const ReducedSystem& sys) {
    if (times.size() != frame.Q.size()) throw ContractError("reduced_scenario: grid mismatch");
    ReducedScenario out{HamiltonianCurve::samples(times, sys.B),
                        SymplecticMatrix::unchecked(sys.M.front())};
    return out;
}

}  // namespace bifurc

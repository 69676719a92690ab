#include "bifurc/contour.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>

namespace bifurc {

namespace {

CMat trapezoid_projector(const Mat& gamma, const Contour& contour, int nodes) {
    const auto n = gamma.rows();
    const CMat gc = gamma.cast<Complex>();
    CMat acc = CMat::Zero(n, n);
    for (int j = 0; j < nodes; ++j) {
        const double phi = 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(nodes);
        const Complex e = std::polar(1.0, phi);
        const Complex z = contour.center + contour.radius * e;
        CMat shifted = -gc;
        shifted.diagonal().array() += z;
        // (1/2 pi i) * (i r e^{i phi}) dphi sums to (r/nodes) e^{i phi} R(z)
        acc += (contour.radius * e) * shifted.partialPivLu().inverse();
    }
    return acc / static_cast<double>(nodes);
}

}  // namespace

CMat riesz_projector_complex(const Mat& gamma, const Contour& contour, int nodes) {
    if (nodes < 4) throw ContractError("riesz_projector: need at least 4 nodes");
    return trapezoid_projector(gamma, contour, nodes);
}

ProjectorResult riesz_projector(const Mat& gamma, const Contour& contour, int nodes, double tol,
                                double guard_dist) {
    if (nodes < 4) throw ContractError("riesz_projector: need at least 4 nodes");
    if (guard_dist > 0.0) {
        Eigen::EigenSolver<Mat> solver(gamma, false);
        for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
            const Complex lam = solver.eigenvalues()(i);
            const double dist = std::abs(std::abs(lam - contour.center) - contour.radius);
            if (dist < guard_dist)
                throw NumericalError("riesz_projector: eigenvalue (" + std::to_string(lam.real()) +
                                     ", " + std::to_string(lam.imag()) + ") within " +
                                     std::to_string(guard_dist) + " of the contour");
        }
    }

    ProjectorResult out;
    CMat P;
    int k = nodes;
    for (;;) {
        P = trapezoid_projector(gamma, contour, k);
        out.idempotency = (P * P - P).norm();
        out.nodes = k;
        if (out.idempotency <= tol || k >= 1024) break;
        k *= 2;
    }
    out.imag_norm = P.imag().norm();
    out.P = P.real();
    return out;
}

CMat projector_range(const CMat& P, int rank) {
    Eigen::JacobiSVD<CMat> svd(P, Eigen::ComputeThinU);
    if (rank <= 0 || rank > P.rows()) throw ContractError("projector_range: bad rank");
    return svd.matrixU().leftCols(rank);
}

}  // namespace bifurc

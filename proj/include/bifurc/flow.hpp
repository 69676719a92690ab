#pragma once

// Integration of dg/dt = J A(t) g over a monotone grid with a classical
// 4th-order one-step scheme and step-doubling error control, plus the
// perturbation matrices C(T, eps) and B(T, eps) of the eps-family.

#include "bifurc/core.hpp"
#include "bifurc/hamiltonian_curve.hpp"

#include <vector>

namespace bifurc {

struct PropagateOptions {
    double tol = 1e-10;       // local error per unit time
    double max_step = 1e300;  // cap on |substep|, for order studies
    double reproject_factor = 10.0;  // reproject when drift > factor * tol
};

struct FlowResult {
    std::vector<double> times;
    std::vector<Mat> gammas;
    std::vector<double> step_error;  // accumulated local-error estimate at each node
    std::vector<double> drift;       // running max of the symplecticity residual
    bool reprojected = false;
    std::vector<int> reprojection_nodes;

    const Mat& at(int k) const { return gammas.at(static_cast<size_t>(k)); }
};

// grid must be strictly monotone (increasing or decreasing); gamma(grid[0])
// equals gamma0 exactly. Non-finite coefficient data raises NumericalError
// naming the offending time.
FlowResult propagate(const HamiltonianCurve& curve, const SymplecticMatrix& gamma0,
                     const std::vector<double>& grid, const PropagateOptions& opts = {});

// Single endpoint convenience: gamma(t) from gamma(t0) = gamma0.
Mat propagate_to(const HamiltonianCurve& curve, const Mat& gamma0, double t0, double t1,
                 const PropagateOptions& opts = {});

// Epsilon family at fixed eps, gamma(0, eps) = Id.
struct PerturbationMatrices {
    Mat C;             // integral form, int_0^T g^T dA/deps g dt
    Mat B;             // (g(T)^{-1})^T C g(T)^{-1}
    Mat C_difference;  // -g(T)^T J d_eps g(T), central difference in eps
    double discrepancy = 0.0;       // ||C - C_difference||_F
    double refinement_delta = 0.0;  // quadrature change under one Richardson step
    bool converged = true;
    double T = 0.0;
    double eps = 0.0;
};

// quad_steps: number of composite Simpson panels. The result reports the
// Richardson refinement delta; converged=false flags non-convergence rather
// than silently accepting the value.
PerturbationMatrices perturbation_matrices(const HamiltonianCurve& family, double T, double eps,
                                           int quad_steps, const PropagateOptions& opts = {});

}  // namespace bifurc

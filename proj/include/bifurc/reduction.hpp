#pragma once

// Dimension reduction along an invariant-subspace family: Riesz projector
// paths, continuously varying symplectic frames Q(t) = T(t) V(t), the
// reduced monodromy M_Q with its own Hamiltonian ODE, and the symplectic
// sum.

#include "bifurc/core.hpp"
#include "bifurc/contour.hpp"
#include "bifurc/flow.hpp"
#include "bifurc/hamiltonian_curve.hpp"

#include <vector>

namespace bifurc {

struct SymplecticFrame {
    std::vector<double> times;
    std::vector<Mat> Q;   // 2n x 2k, Q^T J_{2n} Q = J_{2k}
    int k = 0;
    double worst_frame_residual = 0.0;
};

// Builds T(t) by projecting the seed basis with P(t) and symplectic
// Gram-Schmidt (pairing order fixed at the first node, largest |<u, Jw>|
// first), then Q = T V with dV/dt = J_{2k} T^T J_{2n} (dT/dt) V, V = Id at
// the first node. dT/dt by central differences on the grid.
// Gram-Schmidt breakdown (isotropic pivot below tol) raises NumericalError.
SymplecticFrame symplectic_frame(const std::vector<double>& times, const std::vector<Mat>& P,
                                 const Mat& seed, double tol = 1e-8);

struct ReducedSystem {
    std::vector<double> times;
    std::vector<Mat> M;       // reduced monodromy, 2k x 2k symplectic
    std::vector<Mat> B;       // Q^T A Q
    double worst_ode_residual = 0.0;
    double worst_spectrum_mismatch = 0.0;
};

// M_Q(t) = -J_{2k} Q^T J_{2n} gamma Q; reports the finite-difference ODE
// residual per step and checks spectrum(M_Q) against the eigenvalues of
// gamma inside the contour. Mismatch beyond tol raises StructureError.
ReducedSystem reduced_monodromy(const std::vector<double>& times, const std::vector<Mat>& gammas,
                                const SymplecticFrame& frame, const HamiltonianCurve& curve,
                                const Contour& contour, double tol = 1e-6);

// Interleaved block embedding M1 <> M2; symplectic when both inputs are.
Mat symplectic_sum(const Mat& M1, const Mat& M2);

// Projector path over a flow, one contour for all times; node doubling per
// time until idempotency <= tol.
std::vector<Mat> projector_path(const std::vector<Mat>& gammas, const Contour& contour,
                                int start_nodes = 32, double tol = 1e-11);

// Reduced scenario export: the curve Q^T A Q sampled on the grid plus the
// initial reduced monodromy. Enables recursive analysis through the CLI.
struct ReducedScenario {
    HamiltonianCurve curve;      // samples kind
    SymplecticMatrix gamma0;     // M_Q at the first node
};

ReducedScenario reduced_scenario(const std::vector<double>& times, const SymplecticFrame& frame,
                                 const ReducedSystem& sys);

}  // namespace bifurc

#pragma once

// Krein form on invariant subspaces: signatures, stability and strong
// stability verdicts, and the definiteness assumption on unit-circle
// kernels that drives the whole bifurcation theory.

#include "bifurc/core.hpp"
#include "bifurc/spectral.hpp"

#include <string>
#include <vector>

namespace bifurc {

struct KreinSignature {
    int p = 0;  // positive
    int q = 0;  // negative
    int z = 0;  // numerically null

    bool positive_definite() const { return q == 0 && z == 0 && p > 0; }
    bool negative_definite() const { return p == 0 && z == 0 && q > 0; }
    bool indefinite() const { return p > 0 && q > 0; }
    bool degenerate() const { return z > 0; }
    std::string label() const;
};

// (p, q, z) from the eigenvalues of a Hermitian Gram; |mu| <= null_tol
// counts as null. Degeneracy is reported, never rounded away.
KreinSignature krein_signature(const CMat& gram, double null_tol);

struct InvariantSubspace {
    CMat basis;          // orthonormal columns spanning E_lambda
    int cluster_id = -1;
    double residual = 0.0;        // ||gamma V - V (V* gamma V)||
    bool ill_conditioned = false; // cluster separation below 10*tol
    double separation = 0.0;
};

// Basis of the invariant subspace of the given cluster, via the Riesz
// projector of the cluster's isolating circle.
InvariantSubspace invariant_subspace(const Mat& gamma, const Spectrum& spec, int cluster_id,
                                     double tol = 1e-10);

// Krein signature of a cluster's invariant subspace.
KreinSignature cluster_signature(const Mat& gamma, const Spectrum& spec, int cluster_id,
                                 double null_tol = 1e-8);

struct ConvexityWitness {
    Complex omega;
    double margin = 0.0;
    CVec vector;
};

struct ConvexityReport {
    bool satisfied = false;
    double worst_margin = 0.0;
    ConvexityWitness witness;
    std::vector<ConvexityWitness> per_eigenvalue;
    double on_circle_tol = 0.0;
};

// Checks that <A(t) x, x> > 0 on ker(omega Id - gamma) for every
// unit-circle eigenvalue omega of gamma.
ConvexityReport check_convexity_assumption(const Mat& A_t, const Mat& gamma, double tol = 1e-8);

enum class StabilityClass { Unstable, Stable, StronglyStable };

struct StabilityVerdict {
    StabilityClass verdict = StabilityClass::Unstable;
    std::vector<std::string> reasons;
    double on_circle_tol = 0.0;
};

// Stable: all eigenvalues on U and every on-circle cluster semi-simple.
// Strongly stable: stable with every cluster Krein definite (Krein-Moser).
StabilityVerdict stability_verdict(const Mat& gamma, double tol = 1e-8);

// Geometric multiplicity of lambda as an eigenvalue of gamma (numerical
// kernel of lambda Id - gamma at threshold tol * sigma_max).
int geometric_multiplicity(const Mat& gamma, Complex lambda, double tol);

// Orthonormal kernel basis of (lambda Id - gamma) at the same threshold.
CMat eigen_kernel(const Mat& gamma, Complex lambda, double tol);

}  // namespace bifurc

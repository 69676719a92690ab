#pragma once

// Dense eigen-analysis of symplectic matrices: spectra with multiplicity
// clusters and the 4-tuple symmetry {lambda, 1/lambda, conj, 1/conj}.

#include "bifurc/core.hpp"

#include <vector>

namespace bifurc {

struct EigenCluster {
    Complex value;       // multiplicity-weighted representative
    int multiplicity = 0;
    std::vector<Complex> members;  // individual eigenvalues in the cluster
    int id = 0;
};

struct Spectrum {
    std::vector<EigenCluster> clusters;
    std::vector<Complex> eigenvalues;  // all 2n, deterministically ordered
    double cluster_tol = 0.0;

    int total_multiplicity() const;
    // Cluster whose representative is nearest to z.
    const EigenCluster& nearest(Complex z) const;
};

// Eigenvalues of gamma, greedily clustered at pairwise distance <=
// cluster_tol, ordered by (principal argument, modulus). cluster_tol <= 0
// picks the scale-aware default 1e-6 * ||gamma||.
Spectrum eigen_decompose(const Mat& gamma, double cluster_tol = -1.0);

// Scale-aware default tolerance for |lambda| = 1 decisions; surfaced in
// every report that uses it.
double default_on_circle_tol(const Mat& gamma);

inline bool on_unit_circle(Complex z, double tol) { return std::abs(std::abs(z) - 1.0) <= tol; }

// Partition of the clusters into groups closed under conjugation and the
// circular reflection z -> 1/conj(z). Throws StructureError when closure
// fails beyond tol (diagnoses a non-symplectic input).
std::vector<std::vector<int>> quadruple_partners(const Spectrum& spec, double tol);

}  // namespace bifurc

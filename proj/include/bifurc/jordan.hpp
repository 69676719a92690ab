#pragma once

// Jordan chains of a symplectic matrix at a unit-circle eigenvalue
// lambda0 = e^{i theta0}, in the normalization
//   gamma xi_{i,j} = lambda0 xi_{i,j} - xi_{i,j-1},   xi_{i,0} = 0,
// together with the scaled chains eta_{i,j} = (-i e^{i theta0})^j xi_{i,j},
// the block grouping (s; m_l; n_l) and the Young-diagram order function
// phi(k).

#include "bifurc/core.hpp"

#include <vector>

namespace bifurc {

struct BlockGrouping {
    int s = 0;
    std::vector<int> m;  // multiplicities, per distinct size
    std::vector<int> n;  // distinct sizes, strictly decreasing

    int total_blocks() const;
    int total_size() const;
    // Row offset of block l (0-based) in the chain ordering: sum m_{l'<l}.
    int block_offset(int l) const;
};

// n_l = distinct sizes descending, m_l = multiplicities. Input must be
// non-increasing positive integers.
BlockGrouping block_grouping(const std::vector<int>& sizes);

// phi(k) = min { i : j_1 + ... + j_i >= N - k }, and 0 for k >= N.
int phi(int k, const std::vector<int>& sizes);

struct JordanChainSet {
    Complex lambda0;
    double theta0 = 0.0;
    std::vector<int> sizes;              // j_1 >= ... >= j_m
    std::vector<std::vector<CVec>> chains;  // chains[i][j-1] = xi_{i,j}
    BlockGrouping grouping;
    int N = 0;                           // algebraic multiplicity
    double chain_residual = 0.0;         // worst chain-relation residual
    double basis_sigma_min = 0.0;        // independence margin of the stacked basis
    std::vector<int> rank_staircase;     // nullity of (lambda0 I - gamma)^j, j = 1..
};

struct JordanOptions {
    double tol = 1e-8;
    // Every computed eigenvalue within this distance of lambda0 belongs to
    // the cluster; defective eigenvalues scatter their copies over a disk
    // of radius ~ eps^{1/j}, so this is an absolute radius, not a relative
    // tolerance. The rest of the spectrum must stay 2x further out.
    double cluster_radius = 1e-2;
    // Non-zero: twists the invariant-subspace basis by a seeded random
    // unitary before extraction. Chains change; intrinsic data must not.
    unsigned pivot_seed = 0;
};

// Staircase extraction: ranks of (lambda0 I - gamma)^k give the Weyr
// characteristic, whose conjugate partition is the block sizes; chains are
// produced by exact downward application of (lambda0 I - gamma) to
// deterministically chosen tops. Ambiguous rank decisions (singular values
// straddling the threshold within factor 10) raise StructureError.
JordanChainSet jordan_chains(const Mat& gamma, Complex lambda0, const JordanOptions& opts = {});

struct EtaChainSet {
    Complex lambda0;
    double theta0 = 0.0;
    std::vector<int> sizes;
    std::vector<std::vector<CVec>> chains;  // chains[i][j-1] = eta_{i,j}
    BlockGrouping grouping;
};

EtaChainSet eta_chains(const JordanChainSet& chains);

// Block sizes of a nilpotent-at-lambda matrix from its rank staircase
// alone (no chain vectors); exposed for auditability and for the
// Weyr/Segre duality tests.
std::vector<int> weyr_sizes(const Mat& gamma, Complex lambda0, double tol,
                            std::vector<int>* staircase = nullptr);

}  // namespace bifurc

#pragma once

// First-order bifurcation data at (gamma(0), lambda0): the matrices
//   S_{i,i'} = <A(0) eta_{i,1}, eta_{i',1}>,
//   X_{i,i'} = (eta_{i,j_i}, eta_{i',1})_G,
//   d_{i,i'} = (-1)^{j_{i'}-1} (i e^{i theta0})^{j_{i'}} (S X^{-1})_{i,i'},
// the per-group root polynomials in z, and the branch predictions with
// their on/off-circle fate and Krein type.

#include "bifurc/core.hpp"
#include "bifurc/jordan.hpp"

#include <string>
#include <vector>

namespace bifurc {

struct BifurcationMatrices {
    CMat S;
    CMat X;
    CMat d;
    BlockGrouping grouping;
    std::vector<int> sizes;
    Complex lambda0;
    double theta0 = 0.0;
    double S_mismatch = 0.0;        // eta-form vs xi-form of S
    double X_mismatch = 0.0;        // eta-form vs xi-form of X
    double X_condition = 0.0;
    double lower_block_residual = 0.0;  // strictly-lower X blocks
};

CMat build_S(const EtaChainSet& etas, const Mat& A0);
CMat build_X(const EtaChainSet& etas);
CMat build_d(const CMat& S, const CMat& X, const std::vector<int>& sizes, double theta0);

// All of S, X, d plus consistency diagnostics; StructureError when the
// xi/eta forms disagree or Corollary-2.3 block structure fails.
BifurcationMatrices bifurcation_matrices(const EtaChainSet& etas, const Mat& A0, double tol = 1e-8);

// Roots a_{l,p} (real, nonzero; multiplicity m_l) of
//   det [ S-head with S^{(l,l)} - z X^{(l,l)} in the trailing block ],
// computed as the finite generalized eigenvalues of (S_head, X_hat).
// block_l is 0-based.
std::vector<double> branch_roots(const CMat& S, const CMat& X, const BlockGrouping& grouping,
                                 int block_l, double tol = 1e-9);

// Remark-3.3 style weaker gate: all leading principal block determinants
// of S nonzero.
bool weak_nondegeneracy_gate(const CMat& S, const BlockGrouping& grouping, double tol = 1e-10);

enum class BranchFate { CirclePositive, CircleNegative, OffCircle };

std::string to_string(BranchFate f);

struct Branch {
    int l = 0;  // 0-based group index (size n_l)
    int p = 0;  // 0-based root index within the group
    int q = 0;  // 0-based star index
    double a = 0.0;
    int n = 1;             // n_l
    double holder = 1.0;   // 1/n_l
    // lambda(t) - lambda0 ~ lead * |t|^{1/n}; separate coefficients for
    // the two signs of t.
    Complex lead_pos;
    Complex lead_neg;
    BranchFate fate_pos = BranchFate::OffCircle;
    BranchFate fate_neg = BranchFate::OffCircle;
};

struct BranchPrediction {
    Complex lambda0;
    double theta0 = 0.0;
    std::vector<Branch> branches;
    std::vector<int> sizes;
    BlockGrouping grouping;
    std::vector<std::vector<double>> roots_per_group;

    int count() const { return static_cast<int>(branches.size()); }
};

BranchPrediction predict_branches(const std::vector<std::vector<double>>& roots_per_group,
                                  double theta0, const BlockGrouping& grouping);

// Full pipeline at one point: chains -> etas -> S/X/d -> roots -> branches.
BranchPrediction predict_at(const Mat& gamma, const Mat& A0, Complex lambda0,
                            const JordanOptions& opts = {});

}  // namespace bifurc

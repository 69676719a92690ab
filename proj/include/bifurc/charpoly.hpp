#pragma once

// Characteristic-polynomial coefficients c_k(t) expanded at lambda0,
// the order laws c_k(t) = O(t^{phi(k)}) with their exact limits at the
// black points, and the blow-up polynomials q(w, t), Q_l(w), Q~_l(w).

#include "bifurc/core.hpp"
#include "bifurc/bifurcation.hpp"
#include "bifurc/flow.hpp"
#include "bifurc/jordan.hpp"

#include <vector>

namespace bifurc {

// Coefficients of det(lambda Id - gamma) in powers of (lambda - lambda0),
// index k = 0 .. 2n, built from the eigenvalue multiset.
std::vector<Complex> charpoly_coeffs(const Mat& gamma, Complex lambda0);

// c_N(0) two ways: the N-th coefficient, and the product over eigenvalues
// outside the lambda0 cluster of (lambda0 - mu).
Complex cN_from_coeffs(const std::vector<Complex>& coeffs, int N);
Complex cN_from_product(const Mat& gamma0, Complex lambda0, int N, double cluster_radius);

// All subsets I of {1..m} with #I = phi(k), j_i >= j_{phi(k)} inside and
// j_i <= j_{phi(k)} outside (0-based output).
std::vector<std::vector<int>> admissible_selections(int k, const std::vector<int>& sizes);

// Exact-limit prediction for a black-point k:
//   (-1)^{N-k} c_N(0) sum_{I admissible} det d_{I x I}.
Complex coeff_limit_prediction(int k, const std::vector<int>& sizes, const CMat& d, Complex cN0);

struct CoefficientOrderRow {
    int k = 0;
    int phi_k = 0;
    double slope = 0.0;        // log|c_k| vs log t least squares
    bool slope_ok = false;
    bool exact_order = false;  // k = sum_{i > phi(k)} j_i
    Complex limit_measured;    // c_k(t) t^{-phi(k)} at the smallest sample
    Complex limit_predicted;
    double limit_rel_error = 0.0;
    bool limit_ok = false;
    bool skipped_noise = false;
};

struct CoefficientOrderReport {
    std::vector<CoefficientOrderRow> rows;
    std::vector<double> t_samples;
    Complex cN0;
    int N = 0;
    bool all_pass = true;
    double slope_slack = 0.15;
    double limit_rel_tol = 0.05;
};

// t_samples: geometric ladder (decreasing magnitudes allowed in any
// order; they are sorted internally). gamma(t) is integrated from gamma0
// at t = 0 along the curve.
CoefficientOrderReport verify_coeff_orders(const HamiltonianCurve& curve,
                                           const SymplecticMatrix& gamma0, Complex lambda0,
                                           std::vector<double> t_samples,
                                           const std::vector<int>& sizes,
                                           const PropagateOptions& opts = {});

// tau(l) = sum_{l'} m_{l'} min(n_{l'}, n_l)  (0-based l).
int tau_exponent(const BlockGrouping& grouping, int block_l);

struct BlowupFamily {
    int block_l = 0;
    int tau = 0;
    std::vector<Complex> q_limit_empirical;  // q(w, 0) coefficients, measured
    std::vector<Complex> q_limit_closed;     // sign * c_N(0) * w^shift * Q_l(w)
    std::vector<Complex> Q;                  // Q_l(w) coefficients
    std::vector<Complex> Q_roots;
    double coeff_error = 0.0;  // max |empirical - closed| over coefficients
};

// Assembles q(w, t) = sum_k c_k(t) t^{(k - tau)/n_l} w^k on the ladder,
// estimates the limit at the smallest t, and compares with
//   (-1)^{sum_{l'<=l} m n} c_N(0) w^{sum_{l'>l} m n} Q_l(w),
//   Q_l(w) = det[d-head with (-w)^{n_l} Id added to the trailing block].
BlowupFamily blowup_polynomial(const HamiltonianCurve& curve, const SymplecticMatrix& gamma0,
                               Complex lambda0, const std::vector<double>& t_ladder,
                               const CMat& d, const std::vector<int>& sizes,
                               const BlockGrouping& grouping, int block_l, Complex cN0,
                               const PropagateOptions& opts = {});

// Q~_l(w) = det[S-head with S^{(l,l)} - w^{n_l} (i e^{i theta0})^{-n_l} X^{(l,l)}];
// same root multiset as Q_l.
std::vector<Complex> limit_poly_tilde(const CMat& S, const CMat& X, const BlockGrouping& grouping,
                                      int block_l, double theta0);

// Roots of a complex polynomial (ascending coefficients) via the
// companion matrix; trailing near-zero leading coefficients are trimmed.
std::vector<Complex> polynomial_roots(const std::vector<Complex>& coeffs);

// w-root multiset predicted by the branch data: i e^{i theta0} times the
// n_l-th roots of each a_{l,p}.
std::vector<Complex> prediction_w_roots(const BranchPrediction& pred, int block_l);

// Greedy multiset match; largest pairing distance (infinity on size
// mismatch).
double multiset_distance(std::vector<Complex> a, std::vector<Complex> b);

}  // namespace bifurc

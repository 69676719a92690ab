#pragma once

// Eigenvalue paths along the flow: minimum-displacement matching with
// collision refinement, the branch sets I+/-, J+/-(t), K+/-(t), the index
// nu_+ and eigenvalue indices p_t - q_t, detection of the Krein-indefinite
// set D, and verification of branch predictions against measured paths.

#include "bifurc/core.hpp"
#include "bifurc/bifurcation.hpp"
#include "bifurc/flow.hpp"
#include "bifurc/krein.hpp"

#include <optional>
#include <vector>

namespace bifurc {

struct PathSample {
    double t = 0.0;
    Complex value;
    bool on_circle = false;
    KreinSignature cluster_signature;  // of the sample's on-circle cluster
    int cluster_size = 1;
};

struct EigenPath {
    int id = 0;
    std::vector<PathSample> samples;
    bool unresolved_collision = false;
};

struct EigenPathSet {
    std::vector<double> times;
    std::vector<EigenPath> paths;
    double on_circle_tol = 0.0;
    double match_tol = 0.0;

    int sample_count() const { return static_cast<int>(times.size()); }
    std::vector<Complex> values_at(int k) const;
};

struct TrackOptions {
    PropagateOptions flow;
    double cluster_tol = -1.0;  // default: scale-aware
    int max_bisect_depth = 20;
    // Bisect a step when min pairwise gap < gap_factor * max single-step motion.
    double gap_factor = 5.0;
};

EigenPathSet track_spectrum(const HamiltonianCurve& curve, const SymplecticMatrix& gamma0,
                            const std::vector<double>& grid, const TrackOptions& opts = {});

struct BranchClassification {
    std::vector<int> I_plus;   // path ids with positive first-order limit
    std::vector<int> I_minus;
    std::vector<int> unclassified;
    // Per sampled time in the window:
    std::vector<double> times;
    std::vector<std::vector<int>> J_plus, J_minus;  // Krein definite on U
    std::vector<std::vector<int>> K_plus, K_minus;  // side of lambda0 on U
    std::vector<int> holder_n;  // estimated n per path id (0 when not involved)
};

// Classifies the paths that branch from lambda0 at time t0, using samples
// with t strictly on the window's side of t0. The Hoelder exponent of each
// branch is estimated from the data.
BranchClassification classify_branches(const EigenPathSet& paths, Complex lambda0, double theta0,
                                       double t0, double window, double tol = 1e-6);

// nu_+(t) = #(K_+ cap J_+) - #(K_+ cap J_-) at the sampled time nearest to
// t from below within the classification window.
int nu_plus(const BranchClassification& cls, double t);

struct IndexResult {
    int index = 0;       // p_t - q_t
    int p_before = 0, q_before = 0;
    int p_after = 0, q_after = 0;
};

// p_t - q_t over the branches of the eigenvalue lambda of gamma(t0),
// probed at t0 +- probe_dt; the two probes must agree (otherwise
// NumericalError advises a smaller probe).
IndexResult eigenvalue_index(const HamiltonianCurve& curve, const SymplecticMatrix& gamma0,
                             double t0, Complex lambda, double probe_dt,
                             const PropagateOptions& opts = {});

struct DInterval {
    double lo = 0.0, hi = 0.0;
    Complex where;  // eigenvalue location of the indefinite cluster
    double width() const { return hi - lo; }
};

struct DRefinementLevel {
    double ctol = 0.0;
    std::vector<double> widths;
};

struct DReport {
    double lo = 0.0, hi = 0.0;
    double tol = 0.0;
    double grid_step = 0.0;
    std::vector<DInterval> intervals;  // disjoint, sorted
    std::vector<DRefinementLevel> history;
    std::vector<double> assumption_violations;  // grid times failing (1.7)
    double on_circle_tol = 0.0;
};

// Scans [lo, hi]; marks t where some on-circle cluster (clustered at the
// current collision tolerance) carries an indefinite Krein signature;
// marked runs are bisected and the collision tolerance tightened down to
// tol. Interval widths scale linearly with tol near a transversal
// collision.
DReport detect_D(const HamiltonianCurve& curve, const SymplecticMatrix& gamma0, double lo,
                 double hi, double grid_step, double tol, const PropagateOptions& opts = {});

struct BranchResidual {
    int path_id = -1;
    int branch_index = -1;  // into prediction.branches
    double sup_rel_residual = 0.0;
    double inner_rel_residual = 0.0;  // over the inner half of the window
    bool fate_agrees = false;
    bool decreasing = false;
};

struct VerifyReport {
    std::vector<BranchResidual> branches;
    bool pass = false;
    bool assignment_tie = false;
    double validated_delta = 0.0;  // largest sampled |t - t0| with residual <= 20%
};

// Compares measured paths on a one-sided punctured window at t0 against
// the prediction's leading terms; assignment by minimal total residual.
VerifyReport verify_prediction(const EigenPathSet& paths, const BranchPrediction& pred, double t0,
                               double window, double tol = 1e-9);

}  // namespace bifurc

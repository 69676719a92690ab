#include "bifurc/krein.hpp"

#include "bifurc/contour.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace bifurc {

std::string KreinSignature::label() const {
    if (degenerate()) return "degenerate";
    if (positive_definite()) return "positive-definite";
    if (negative_definite()) return "negative-definite";
    if (indefinite()) return "indefinite";
    return "empty";
}

KreinSignature krein_signature(const CMat& gram, double null_tol) {
    if (gram.rows() != gram.cols()) throw ContractError("krein_signature: non-square Gram");
    KreinSignature sig;
    if (gram.rows() == 0) return sig;
    Eigen::SelfAdjointEigenSolver<CMat> solver(gram);
    if (solver.info() != Eigen::Success) throw NumericalError("krein_signature: eigensolver failed");
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        const double mu = solver.eigenvalues()(i);
        if (std::abs(mu) <= null_tol)
            ++sig.z;
        else if (mu > 0)
            ++sig.p;
        else
            ++sig.q;
    }
    return sig;
}

namespace {

// Isolating circle for a cluster: centered at the cluster mean, radius the
// geometric mean of the cluster spread and the gap to the rest.
struct Isolation {
    Contour contour;
    double separation = 0.0;  // gap to the nearest outside eigenvalue
    double spread = 0.0;
};

Isolation isolate_cluster(const Spectrum& spec, int cluster_id) {
    const auto& cl = spec.clusters.at(static_cast<size_t>(cluster_id));
    Isolation iso;
    iso.contour.center = cl.value;
    for (const auto m : cl.members) iso.spread = std::max(iso.spread, std::abs(m - cl.value));
    double gap = 1e300;
    for (const auto& other : spec.clusters) {
        if (other.id == cluster_id) continue;
        for (const auto m : other.members) gap = std::min(gap, std::abs(m - cl.value));
    }
    if (gap > 1e299) gap = std::max(1.0, 10.0 * (iso.spread + 1.0));
    iso.separation = gap - iso.spread;
    const double inner = iso.spread, outer = gap;
    iso.contour.radius = (inner <= 0.0) ? 0.5 * outer : std::sqrt(std::max(inner * 1.0001, 1e-300) * outer);
    if (iso.contour.radius <= inner || iso.contour.radius >= outer)
        iso.contour.radius = 0.5 * (inner + outer);
    return iso;
}

}  // namespace

InvariantSubspace invariant_subspace(const Mat& gamma, const Spectrum& spec, int cluster_id,
                                     double tol) {
    const auto& cl = spec.clusters.at(static_cast<size_t>(cluster_id));
    const Isolation iso = isolate_cluster(spec, cluster_id);

    InvariantSubspace out;
    out.cluster_id = cluster_id;
    out.separation = iso.separation;
    out.ill_conditioned = iso.separation < 10.0 * tol;

    const CMat P = riesz_projector_complex(gamma, iso.contour, 64);
    // node-doubling until idempotent enough
    CMat Pk = P;
    int nodes = 64;
    while ((Pk * Pk - Pk).norm() > std::max(tol, 1e-13) && nodes < 1024) {
        nodes *= 2;
        Pk = riesz_projector_complex(gamma, iso.contour, nodes);
    }
    out.basis = projector_range(Pk, cl.multiplicity);
    const CMat gc = gamma.cast<Complex>();
    const CMat compressed = out.basis.adjoint() * gc * out.basis;
    out.residual = (gc * out.basis - out.basis * compressed).norm();
    return out;
}

KreinSignature cluster_signature(const Mat& gamma, const Spectrum& spec, int cluster_id,
                                 double null_tol) {
    const InvariantSubspace sub = invariant_subspace(gamma, spec, cluster_id);
    return krein_signature(krein_gram(sub.basis), null_tol);
}

CMat eigen_kernel(const Mat& gamma, Complex lambda, double tol) {
    CMat shifted = (-gamma).cast<Complex>();
    shifted.diagonal().array() += lambda;
    Eigen::JacobiSVD<CMat> svd(shifted, Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double thr = tol * sv(0);
    int null_count = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) <= thr) ++null_count;
    return svd.matrixV().rightCols(null_count);
}

int geometric_multiplicity(const Mat& gamma, Complex lambda, double tol) {
    return static_cast<int>(eigen_kernel(gamma, lambda, tol).cols());
}

ConvexityReport check_convexity_assumption(const Mat& A_t, const Mat& gamma, double tol) {
    ConvexityReport report;
    report.on_circle_tol = default_on_circle_tol(gamma);
    const Spectrum spec = eigen_decompose(gamma);

    report.satisfied = true;
    report.worst_margin = 1e300;
    for (const auto& cl : spec.clusters) {
        if (!on_unit_circle(cl.value, report.on_circle_tol)) continue;
        const CMat V = eigen_kernel(gamma, cl.value, tol);
        if (V.cols() == 0) continue;
        const CMat form = V.adjoint() * A_t.cast<Complex>() * V;
        Eigen::SelfAdjointEigenSolver<CMat> solver(Complex(0.5) * (form + CMat(form.adjoint())));
        const Eigen::Index argmin = 0;
        ConvexityWitness w;
        w.omega = cl.value;
        w.margin = solver.eigenvalues()(argmin);
        w.vector = V * solver.eigenvectors().col(argmin);
        report.per_eigenvalue.push_back(w);
        if (w.margin < report.worst_margin) {
            report.worst_margin = w.margin;
            report.witness = w;
        }
        if (!(w.margin > 0)) report.satisfied = false;
    }
    if (report.per_eigenvalue.empty()) {
        // no unit-circle spectrum: vacuously satisfied
        report.worst_margin = 0.0;
        report.satisfied = true;
    }
    return report;
}

StabilityVerdict stability_verdict(const Mat& gamma, double tol) {
    StabilityVerdict out;
    out.on_circle_tol = std::max(tol, default_on_circle_tol(gamma));
    const Spectrum spec = eigen_decompose(gamma);

    bool stable = true;
    for (const auto& cl : spec.clusters) {
        if (!on_unit_circle(cl.value, out.on_circle_tol)) {
            stable = false;
            out.reasons.push_back("eigenvalue off the unit circle at (" +
                                  std::to_string(cl.value.real()) + ", " +
                                  std::to_string(cl.value.imag()) + ")");
            continue;
        }
        const int geo = geometric_multiplicity(gamma, cl.value, tol);
        if (geo < cl.multiplicity) {
            stable = false;
            out.reasons.push_back("non-semi-simple eigenvalue on U at (" +
                                  std::to_string(cl.value.real()) + ", " +
                                  std::to_string(cl.value.imag()) + "), geometric " +
                                  std::to_string(geo) + " < algebraic " +
                                  std::to_string(cl.multiplicity));
        }
    }
    if (!stable) {
        out.verdict = StabilityClass::Unstable;
        return out;
    }

    bool strong = true;
    for (const auto& cl : spec.clusters) {
        const KreinSignature sig = cluster_signature(gamma, spec, cl.id);
        if (sig.indefinite() || sig.degenerate()) {
            strong = false;
            out.reasons.push_back("Krein " + sig.label() + " eigenvalue at (" +
                                  std::to_string(cl.value.real()) + ", " +
                                  std::to_string(cl.value.imag()) + ") with signature (" +
                                  std::to_string(sig.p) + ", " + std::to_string(sig.q) + ", " +
                                  std::to_string(sig.z) + ")");
        }
    }
    out.verdict = strong ? StabilityClass::StronglyStable : StabilityClass::Stable;
    if (out.reasons.empty()) out.reasons.push_back("all unit-circle eigenvalues Krein definite");
    return out;
}

}  // namespace bifurc

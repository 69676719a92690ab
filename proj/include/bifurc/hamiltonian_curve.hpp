#pragma once

// Coefficient curves t -> A(t) of the linear Hamiltonian system
// dg/dt = J A(t) g, plus affine-in-epsilon families A(t, eps).
//
// Supported kinds: constant matrix, polynomial (monomial or Bernstein
// basis), uniform samples with C^1 cubic interpolation, and the named
// builtin oracles O1-shear .. O4-coupled. Every evaluation symmetrizes,
// so A(t) is exactly symmetric and bitwise deterministic in t.

#include "bifurc/core.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace bifurc {

enum class CurveKind { Constant, Polynomial, Bernstein, Samples, Builtin };

class HamiltonianCurve {
  public:
    HamiltonianCurve() = default;

    static HamiltonianCurve constant(const Mat& a);
    // A(t) = sum_k coeffs[k] * t^k
    static HamiltonianCurve polynomial(std::vector<Mat> coeffs);
    // Bernstein form of degree (control.size()-1) on [-1, 1]; evaluated
    // by de Casteljau.
    static HamiltonianCurve bernstein(std::vector<Mat> control);
    // Sample nodes with strictly increasing times; cubic Hermite between
    // nodes (finite-difference slopes), exact at the nodes.
    static HamiltonianCurve samples(std::vector<double> times, std::vector<Mat> values,
                                    std::optional<double> period = std::nullopt);
    // "O1-shear", "O2-rotation", "O3-oscillators", "O4-coupled"
    static HamiltonianCurve builtin(const std::string& name);

    // Attach an affine epsilon direction: A(t, eps) = A(t) + eps * dir(t).
    HamiltonianCurve with_direction(HamiltonianCurve dir) const;

    Mat evaluate(double t) const;
    Mat evaluate(double t, double eps) const;
    // dA/deps at (t, eps); exact for the affine family.
    Mat eps_derivative(double t) const;

    int dim() const { return dim_; }
    CurveKind kind() const { return kind_; }
    const std::string& builtin_name() const { return builtin_name_; }
    bool has_parameter() const { return direction_ != nullptr; }
    const HamiltonianCurve* direction() const { return direction_.get(); }
    std::optional<double> period() const { return period_; }
    void set_period(double T);

    // Serialization payloads (see json_io).
    const std::vector<Mat>& coefficients() const { return payload_; }
    const std::vector<double>& sample_times() const { return times_; }

    // Domain check; throws ContractError outside the declared domain
    // (Bernstein curves live on [-1, 1], sample curves on their node span
    // unless periodic).
    void require_in_domain(double t) const;

  private:
    CurveKind kind_ = CurveKind::Constant;
    int dim_ = 0;
    std::vector<Mat> payload_;        // constant/poly/bernstein matrices, sample values
    std::vector<double> times_;       // sample nodes
    std::string builtin_name_;
    std::function<Mat(double)> fn_;   // builtin evaluator
    std::optional<double> period_;
    std::shared_ptr<HamiltonianCurve> direction_;

    Mat evaluate_raw(double t) const;
};

// gamma(0) that goes with a builtin curve: the shear for O1, identity
// otherwise.
SymplecticMatrix builtin_initial(const std::string& name);

// Bernstein approximant A^(M) on [-1, 1]:
//   A^(M)(t) = sum_{k=-M..M} A(k/M) binom(2M, M+k) ((1-t)/2)^{M-k} ((1+t)/2)^{M+k}
// Returned as a degree-2M Bernstein-basis polynomial curve.
HamiltonianCurve bernstein_approximant(const HamiltonianCurve& curve, int M);

}  // namespace bifurc

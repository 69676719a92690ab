#pragma once

// Shared linear-algebra aliases, the standard symplectic form, the Krein
// pairing, and the error taxonomy used across the library.

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace bifurc {

using Mat  = Eigen::MatrixXd;
using Vec  = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Complex = std::complex<double>;

inline constexpr Complex kI{0.0, 1.0};

// Scenario/contract violations (bad dimensions, unsorted grids, ...).
// The CLI maps these to exit code 2.
struct ContractError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Numerical failures: quadrature that does not converge, non-finite data,
// eigensolver breakdown. Exit code 3.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Unresolved structure: ambiguous rank decisions, violated block patterns,
// symmetry failures that indicate a corrupted input. Exit code 4.
struct StructureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Standard symplectic form J_{2n} = [[0, I], [-I, 0]].
Mat standard_J(int two_n);

inline void require_even_dim(const Mat& m, const char* who) {
    if (m.rows() != m.cols() || m.rows() % 2 != 0)
        throw ContractError(std::string(who) + ": expected a square matrix of even size");
}

// Residual of the symplectic relation, ||g^T J g - J||_F.
double symplectic_residual(const Mat& g);

// Krein pairing (x, y)_G = i <x, J y>, with <x, y> = sum_k x_k conj(y_k).
Complex krein_pair(const CVec& x, const CVec& y);

// Hermitian Gram of the Krein pairing on the given basis columns:
// G(a, b) = (v_a, v_b)_G, symmetrized so the output is exactly Hermitian.
CMat krein_gram(const CMat& basis);

// A real 2n x 2n matrix together with its symplecticity residual.
// `checked` throws ContractError when the residual exceeds tol.
struct SymplecticMatrix {
    Mat value;
    double residual = 0.0;

    int dim() const { return static_cast<int>(value.rows()); }

    static SymplecticMatrix checked(const Mat& g, double tol = 1e-8);
    static SymplecticMatrix unchecked(const Mat& g);
};

}  // namespace bifurc

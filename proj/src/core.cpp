#include "bifurc/core.hpp"

namespace bifurc {

Mat standard_J(int two_n) {
    if (two_n <= 0 || two_n % 2 != 0) throw ContractError("standard_J: size must be positive and even");
    const int n = two_n / 2;
    Mat J = Mat::Zero(two_n, two_n);
    J.block(0, n, n, n) = Mat::Identity(n, n);
    J.block(n, 0, n, n) = -Mat::Identity(n, n);
    return J;
}

double symplectic_residual(const Mat& g) {
    require_even_dim(g, "symplectic_residual");
    const Mat J = standard_J(static_cast<int>(g.rows()));
    return (g.transpose() * J * g - J).norm();
}

Complex krein_pair(const CVec& x, const CVec& y) {
    if (x.size() != y.size()) throw ContractError("krein_pair: dimension mismatch");
    const auto n2 = x.size();
    if (n2 % 2 != 0) throw ContractError("krein_pair: vectors must have even dimension");
    const auto n = n2 / 2;
    // i <x, J y> with <a, b> = sum a_k conj(b_k) and J = [[0, I], [-I, 0]]:
    // <x, Jy> = sum_k x_k conj(y_{n+k}) - x_{n+k} conj(y_k).
    Complex s = 0.0;
    for (Eigen::Index k = 0; k < n; ++k)
        s += x(k) * std::conj(y(n + k)) - x(n + k) * std::conj(y(k));
    return kI * s;
}

CMat krein_gram(const CMat& basis) {
    const auto k = basis.cols();
    CMat G(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b) G(a, b) = krein_pair(basis.col(a), basis.col(b));
    // enforce exact Hermitian symmetry
    CMat H = Complex(0.5) * (G + CMat(G.adjoint()));
    return H;
}

SymplecticMatrix SymplecticMatrix::checked(const Mat& g, double tol) {
    require_even_dim(g, "SymplecticMatrix");
    const double r = symplectic_residual(g);
    if (!(r <= tol))
        throw ContractError("SymplecticMatrix: residual " + std::to_string(r) +
                            " exceeds tolerance " + std::to_string(tol));
    return SymplecticMatrix{g, r};
}

SymplecticMatrix SymplecticMatrix::unchecked(const Mat& g) {
    require_even_dim(g, "SymplecticMatrix");
    return SymplecticMatrix{g, symplectic_residual(g)};
}

}  // namespace bifurc

#pragma once

// Contour-integral spectral projector, shared by the Krein analysis and
// the dimension-reduction machinery.

#include "bifurc/core.hpp"

namespace bifurc {

struct Contour {
    Complex center;
    double radius = 0.0;
};

struct ProjectorResult {
    Mat P;                    // realified projector
    double idempotency = 0.0; // ||P^2 - P||_F at the accepted node count
    double imag_norm = 0.0;   // discarded imaginary part
    int nodes = 0;
};

// Trapezoid rule for (1/2 pi i) oint (z Id - gamma)^{-1} dz on the circle,
// doubling the node count until ||P^2 - P|| <= tol (cap 1024). The cluster
// inside must be closed under conjugation for the realification to be
// valid; the discarded imaginary norm is reported. Throws NumericalError
// when an eigenvalue sits within guard_dist of the contour.
ProjectorResult riesz_projector(const Mat& gamma, const Contour& contour, int nodes,
                                double tol = 1e-12, double guard_dist = 0.0);

// Complex variant used for clusters that are not conjugation-closed
// (single eigenvalue off the real axis).
CMat riesz_projector_complex(const Mat& gamma, const Contour& contour, int nodes);

// Orthonormal basis of the range of a projector, given its rank.
CMat projector_range(const CMat& P, int rank);

}  // namespace bifurc
